"""Seeded end-to-end link experiments.

Random bits come from SplitMix64 (Steele, Lea & Flood 2014; the generator
published by Vigna alongside xoshiro): the state advances by
``0x9E3779B97F4A7C15`` and each output is mixed as::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all modulo 2**64.  Output ``i`` (``i = 0, 1, ...``) is mixed from state
``seed + (i + 1) * 0x9E3779B97F4A7C15`` and bit ``i`` is its most
significant bit.  Any language with 64-bit unsigned arithmetic reproduces
the streams exactly.
"""

from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelParams, superpose
from .errors import ConfigurationError, MolcommError, ParameterError
from .modem import DpConfig, SymbolSchedule, bcsk_encode, decode, dp_encode, sampling_times
from .omdm import MoleculeSpec, make_subchannels, omdm_decode, omdm_encode, omdm_sampling_times

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1

BIT_DISTRIBUTION = "iid uniform; SplitMix64 most significant bit"


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` SplitMix64 outputs for ``seed`` as a ``uint64`` array."""
    if not 0 <= seed <= _MASK64:
        raise ParameterError(f"seed must fit in 64 unsigned bits, got {seed!r}")
    i = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + i * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def generate_bits(seed: int, count: int) -> np.ndarray:
    """``count`` iid uniform bits, deterministic in ``seed``."""
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count!r}")
    return (splitmix64(seed, count) >> np.uint64(63)).astype(np.int8)


class ConfigParseError(ConfigurationError):
    """An experiment config document is structurally malformed."""


class LinkScheme(str, enum.Enum):
    BCSK_DP = "BCSK_DP"
    BCSK_NO_DP = "BCSK_NO_DP"
    B_OMDM = "B_OMDM"


@dataclass(frozen=True)
class ExperimentConfig:
    """One link experiment.

    For ``B_OMDM`` the first species uses ``channel``; the second uses
    ``secondary_diffusion`` (defaults to the same coefficient) over the same
    distance, and ``dp.spacing_factor`` is the first species' ``k``.
    """

    seed: int
    bit_count: int
    channel: ChannelParams
    dp: DpConfig
    scheme: LinkScheme = LinkScheme.BCSK_DP
    secondary_diffusion: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", LinkScheme(self.scheme))
        if int(self.bit_count) != self.bit_count or self.bit_count < 1:
            raise ParameterError(f"bit_count must be an integer >= 1, got {self.bit_count!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ParameterError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scheme"] = self.scheme.value
        if self.secondary_diffusion is None:
            del out["secondary_diffusion"]
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            return cls(
                seed=int(doc["seed"]),
                bit_count=int(doc["bit_count"]),
                channel=ChannelParams(**doc["channel"]),
                dp=DpConfig(**doc["dp"]),
                scheme=LinkScheme(doc.get("scheme", LinkScheme.BCSK_DP.value)),
                secondary_diffusion=doc.get("secondary_diffusion"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MolcommError):
                raise
            raise ConfigParseError(f"malformed experiment config: {exc!r}") from None


@dataclass(frozen=True)
class ExperimentResult:
    scheme: str
    bit_count: int
    bit_errors: int
    ber: float
    ones_to_zeros: int
    zeros_to_ones: int
    molecules_emitted_total: float
    molecules_saved_vs_no_dp: float
    clamp_events: int
    subchannel_ber: tuple[float, float] | None = None
    padded_bits: int = 0
    # excluded from equality and from deterministic output
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = asdict(self)
        out["subchannel_ber"] = list(self.subchannel_ber) if self.subchannel_ber else None
        if not include_timing:
            del out["wall_time"]
        return out


def simulate_samples(params: ChannelParams, schedule: SymbolSchedule, t_p: float) -> np.ndarray:
    """Noiseless received concentration at each detector instant."""
    if len(schedule) == 0:
        return np.zeros(0)
    k = schedule.symbol_duration / t_p
    times = sampling_times(DpConfig(1.0, k, 0), t_p, len(schedule))
    return superpose(params, schedule.release_times, schedule.quantities, times)


def _error_counts(sent: np.ndarray, got: np.ndarray) -> tuple[int, int]:
    return (int(np.sum((sent == 1) & (got == 0))), int(np.sum((sent == 0) & (got == 1))))


def run_link_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Generate bits, encode, propagate, detect and count errors."""
    start = time.perf_counter()
    bits = generate_bits(cfg.seed, cfg.bit_count)
    ones = int(bits.sum())
    sub_ber = None
    padded = 0

    if cfg.scheme is LinkScheme.B_OMDM:
        spec1 = MoleculeSpec("species-1", cfg.channel.diffusion_coefficient)
        spec2 = MoleculeSpec("species-2", cfg.secondary_diffusion
                             if cfg.secondary_diffusion is not None
                             else cfg.channel.diffusion_coefficient)
        sub1, sub2 = make_subchannels(spec1, spec2, cfg.dp.spacing_factor, cfg.channel.distance)
        frame = omdm_encode(bits, sub1, sub2, cfg.dp.base_quantity, cfg.dp.history_depth)
        samples = [
            superpose(sub.params, sched.release_times, sched.quantities,
                      omdm_sampling_times(sub, frame.slot_count))
            for sub, sched in zip((sub1, sub2), frame.schedules)
        ]
        received = omdm_decode(samples[0], samples[1], sub1, sub2, cfg.dp.base_quantity,
                               bit_count=cfg.bit_count)
        sub_ber = tuple(
            float(np.mean(sched.bits != decode(sub.dp_config(cfg.dp.base_quantity, 0),
                                               sub.params, s)))
            for sub, sched, s in zip((sub1, sub2), frame.schedules, samples)
        )
        emitted = frame.total_molecules
        clamps = frame.clamp_events
        padded = int(frame.padded)
    else:
        t_p = cfg.channel.peak_time
        if cfg.scheme is LinkScheme.BCSK_DP:
            schedule = dp_encode(cfg.dp, bits, t_p)
        else:
            schedule = bcsk_encode(cfg.dp, bits, t_p)
        samples = simulate_samples(cfg.channel, schedule, t_p)
        received = decode(cfg.dp, cfg.channel, samples, expected_count=cfg.bit_count)
        emitted = schedule.total_molecules
        clamps = schedule.clamp_events

    misses, false_alarms = _error_counts(bits, received)
    errors = misses + false_alarms
    return ExperimentResult(
        scheme=cfg.scheme.value,
        bit_count=cfg.bit_count,
        bit_errors=errors,
        ber=errors / cfg.bit_count,
        ones_to_zeros=misses,
        zeros_to_ones=false_alarms,
        molecules_emitted_total=emitted,
        molecules_saved_vs_no_dp=ones * cfg.dp.base_quantity - emitted,
        clamp_events=clamps,
        subchannel_ber=sub_ber,
        padded_bits=padded,
        wall_time=time.perf_counter() - start,
    )


class SweepError(ConfigurationError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"grid[{index}]: {cause}")
        self.index = index
        self.cause = cause


def sweep(grid: Sequence[ExperimentConfig], workers: int = 1) -> list[ExperimentResult]:
    """Run every config; results follow grid order whatever ``workers`` is.

    The first failing config (lowest index) aborts with :class:`SweepError`.
    """
    grid = list(grid)
    if not grid:
        raise ParameterError("sweep grid must not be empty")

    def one(item):
        index, cfg = item
        try:
            return run_link_experiment(cfg)
        except MolcommError as exc:
            raise SweepError(index, exc) from exc

    if workers <= 1:
        return [one(item) for item in enumerate(grid)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map re-raises the first failure in grid order
        return list(pool.map(one, enumerate(grid)))


def paper_config(k: float, m: int, seed: int = 0, bit_count: int = 1000,
                 scheme: LinkScheme = LinkScheme.BCSK_DP) -> ExperimentConfig:
    """Zero-BER experiment setting: D = 0.43 cm^2/s, d = 1.5 cm, Q0 = 1000."""
    return ExperimentConfig(seed, bit_count, ChannelParams(0.43, 1.5),
                            DpConfig(1000.0, k, m), scheme)

