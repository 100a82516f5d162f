"""Exit criteria, one test each, at their pinned tolerances.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from molcomm import (
    ChannelParams,
    DpConfig,
    HopPlan,
    MoleculeSpec,
    Scheme,
    equal_peak_quantity,
    impulse_response,
    molecule_ratios,
    omdm_decode,
    omdm_encode,
    peak_concentration,
    plan_network,
    residual_ratio,
    throughput,
)
from molcomm.cli import main
from molcomm.modem import bits_to_str
from molcomm.multihop import FIG3_PLAN
from molcomm.omdm import consumption_compare, make_subchannels
from molcomm.simkit import LinkScheme, generate_bits, paper_config, run_link_experiment, simulate_samples

pytestmark = pytest.mark.acceptance

SEEDS = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]


def test_zero_ber_reproduction():
    """1. zero BER at (k=4, m=20) and (k=2, m=40) over 10 seeds, under 5 s"""
    start = time.perf_counter()
    for k, m in [(4.0, 20), (2.0, 40)]:
        for seed in SEEDS:
            res = run_link_experiment(paper_config(k, m, seed=seed))
            assert res.bit_count == 1000
            assert res.ber == 0.0, (k, m, seed, res)
    assert time.perf_counter() - start < 5.0


def test_dp_necessity_contrast():
    """2. no compensation (m=0) at k=2 gives BER > 0, under 1 s"""
    start = time.perf_counter()
    res = run_link_experiment(paper_config(2.0, 0, seed=0, scheme=LinkScheme.BCSK_NO_DP))
    same = run_link_experiment(paper_config(2.0, 0, seed=0, scheme=LinkScheme.BCSK_DP))
    assert res.ber > 0
    assert same.ber > 0
    assert time.perf_counter() - start < 1.0


def test_peak_concentration_independent_of_diffusion():
    """3. C_max constant to 1e-12 relative while D sweeps 1e-8..1e-1 cm^2/s"""
    values = np.array([peak_concentration(ChannelParams(D, 1.5), 1000.0)
                       for D in np.logspace(-8, -1, 71)])
    assert np.max(np.abs(values / values[0] - 1)) <= 1e-12
    # and the impulse response at each D's own peak time agrees
    for D in np.logspace(-8, -1, 15):
        p = ChannelParams(D, 1.5)
        assert abs(impulse_response(p, 1000.0, p.peak_time) / values[0] - 1) <= 1e-12


def test_peak_time_oracle():
    """4. dense argmax agrees with d^2/(6D) within 0.1% for 100 draws, under 1 s"""
    rng = np.random.default_rng(20240917)
    start = time.perf_counter()
    grid = np.linspace(0.0, 10.0, 20_001)[1:]  # in units of t_p; step 5e-4 t_p
    for _ in range(100):
        p = ChannelParams(10 ** rng.uniform(-8, 0), 10 ** rng.uniform(-4, 1))
        tp = p.peak_time
        t = grid * tp
        t_best = t[np.argmax(impulse_response(p, 1.0, t))]
        assert abs(t_best - tp) <= 1e-3 * tp
    assert time.perf_counter() - start < 1.0


def test_residual_ratio_oracle_equivalence():
    """5. residual_ratio equals direct impulse response at lag*t_s + t_p over C_max to 1e-12"""
    rng = np.random.default_rng(7)
    for _ in range(100):
        k = rng.uniform(1.001, 20.0)
        lag = int(rng.integers(1, 500))
        p = ChannelParams(10 ** rng.uniform(-8, 0), 10 ** rng.uniform(-4, 1))
        tp = p.peak_time
        direct = impulse_response(p, 1000.0, lag * k * tp + tp) / peak_concentration(p, 1000.0)
        assert abs(residual_ratio(DpConfig(1000.0, k, 0), lag) / direct - 1) <= 1e-12


def test_multihop_laws():
    """6. throughput x N, equal C_max across hop splits, ratios (N^3, N^2), Th(1) = 0.66 bit/s"""
    base = throughput(FIG3_PLAN)
    assert abs(base - 0.66) <= 1e-9
    for n in range(1, 65):
        plan = HopPlan(FIG3_PLAN.distance, n, 1.0, FIG3_PLAN.spacing_factor,
                       FIG3_PLAN.diffusion_coefficient)
        th = throughput(plan)
        # bit-exact as a product; the quotient can round by one ulp
        assert th == n * base
        assert abs(th / base - n) <= n * 2.0**-52
        r = molecule_ratios(n)
        assert (r.per_emission_ratio, r.route_total_ratio) == (n**3, n**2)
        for d in (1.5, 1e-3):
            q_multi = equal_peak_quantity(d, n, 1e6)
            ref = peak_concentration(ChannelParams(2.2e-7, d), 1e6)
            assert abs(peak_concentration(ChannelParams(2.2e-7, d / n), q_multi) / ref - 1) <= 1e-12


def test_bomdm_roundtrip_and_accounting():
    """7. B-OMDM: '1001' walkthrough, 100 seeded roundtrips, half the epochs, equal t_s, under 5 s"""
    start = time.perf_counter()
    a, b = MoleculeSpec("hexose-a", 2.2e-7), MoleculeSpec("hexose-b", 2.0e-7)
    sub1, sub2 = make_subchannels(a, b, 4.0, 10e-4)
    assert abs(sub1.symbol_duration - sub2.symbol_duration) / sub1.symbol_duration <= 1e-12

    def roundtrip(bits):
        frame = omdm_encode(bits, sub1, sub2, 1000.0, 20)
        s = [simulate_samples(sub.params, sched, sub.peak_time)
             for sub, sched in zip((sub1, sub2), frame.schedules)]
        return frame, omdm_decode(s[0], s[1], sub1, sub2, 1000.0, bit_count=len(bits))

    frame, decoded = roundtrip("1001")
    assert frame.quantities.tolist() == [[1000.0, 0.0], [0.0, 1000.0]]
    assert bits_to_str(decoded) == "1001"

    for seed in range(100):
        bits = generate_bits(seed, 200)
        frame, decoded = roundtrip(bits)
        assert np.array_equal(decoded, bits), seed
        assert frame.slot_count == len(bits) // 2
        usage = consumption_compare(bits, 1000.0)
        assert usage.omdm_epochs * 2 == usage.bmosk_epochs
    assert time.perf_counter() - start < 5.0


def test_planner_arithmetic():
    """8. 32 isomers: 16 channels x 2 bits (0.5 Q/bit) vs 1 channel x 5 bits (0.2 Q/bit)"""
    mdma = plan_network(32, Scheme.MDMA_B_OMDM)
    tdma = plan_network(32, Scheme.TDMA_32_IMOSK)
    assert (mdma.channels, mdma.bits_per_symbol_per_channel) == (16, 2)
    assert (tdma.channels, tdma.bits_per_symbol_per_channel) == (1, 5)
    assert mdma.molecules_per_bit == 0.5
    assert tdma.molecules_per_bit == pytest.approx(0.2, rel=1e-15)


def test_cli_determinism(tmp_path, capsys):
    """9. every CLI command run twice with identical inputs writes byte-identical files"""
    registry = tmp_path / "reg.json"
    registry.write_text('[{"name": "a", "diffusion_coefficient_cm2_per_s": 2.2e-7},'
                        ' {"name": "b", "diffusion_coefficient_cm2_per_s": 2.0e-7}]')
    commands = [
        ["impulse", "--figure", "{dir}/impulse.png"],
        ["impulse", "--format", "json", "--figure", "{dir}/impulse.svg"],
        ["ber", "--preset", "paper-k4"],
        ["ber", "--preset", "paper-k2", "--format", "json"],
        ["ber", "--scheme", "B_OMDM", "--secondary-diffusion", "0.4", "--format", "json"],
        ["sweep", "--k", "2", "--history-values", "0", "10", "40", "--workers", "3",
         "--figure", "{dir}/sweep.pdf"],
        ["omdm", "--registry", str(registry), "--species", "a", "b", "--format", "json"],
        ["omdm", "--registry", str(registry), "--species", "a", "b", "--bits", "1001"],
        ["multihop", "--figure", "{dir}/fig3.png"],
        ["multihop", "--format", "json"],
        ["plan", "--scheme", "mdma-bomdm"],
        ["plan", "--scheme", "tdma-imosk", "--format", "json"],
        ["budget", "--dp"],
    ]
    for i, template in enumerate(commands):
        outputs = []
        for run in ("r1", "r2"):
            d = tmp_path / run / str(i)
            d.mkdir(parents=True)
            argv = [arg.replace("{dir}", str(d)) for arg in template] + ["--out", str(d / "out")]
            assert main(argv) == 0, template
            outputs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        assert outputs[0] == outputs[1], template
    capsys.readouterr()
