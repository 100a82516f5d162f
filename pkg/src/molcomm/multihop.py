"""Closed-form multi-hop laws: throughput gain and molecule budgets.

Splitting a route of length ``d`` into ``N`` equal hops shortens each hop's
peak time by ``N^2``; with store-and-forward relays the end-to-end rate is
``6 n D N / (k d^2)``.  Holding the received peak fixed, each hop needs
``N^3`` fewer molecules, i.e. ``N^2`` fewer over the whole route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .channel import UM, ChannelParams, peak_concentration
from .errors import ParameterError
from .modem import SymbolSchedule, as_bits

RESERVOIR_MOLECULES = 1.0e8  # initial tank of one nano-machine

# Throughput-vs-hops figure: 10 um route, average hexose D, k = 2.  The bandwidth
# efficiency is not fixed by the source figure; 1 bit/symbol (BCSK) is assumed.
FIG3_DISTANCE = 10 * UM
FIG3_DIFFUSION = 2.2e-7
FIG3_SPACING = 2.0
FIG3_EFFICIENCY = 1.0


@dataclass(frozen=True)
class HopPlan:
    distance: float
    hops: int = 1
    bandwidth_efficiency: float = 1.0
    spacing_factor: float = 2.0
    diffusion_coefficient: float = FIG3_DIFFUSION

    def __post_init__(self):
        if isinstance(self.hops, bool) or int(self.hops) != self.hops or self.hops < 1:
            raise ParameterError(f"hops must be an integer >= 1, got {self.hops!r}")
        object.__setattr__(self, "hops", int(self.hops))
        if not self.bandwidth_efficiency > 0:
            raise ParameterError("bandwidth_efficiency must be > 0")
        if not self.spacing_factor > 1:
            raise ParameterError("spacing_factor must be > 1")
        # distance and D are checked by ChannelParams
        self.route_params

    @property
    def route_params(self) -> ChannelParams:
        return ChannelParams(self.diffusion_coefficient, self.distance)

    @property
    def hop_length(self) -> float:
        return self.distance / self.hops

    @property
    def hop_params(self) -> ChannelParams:
        return ChannelParams(self.diffusion_coefficient, self.hop_length)


FIG3_PLAN = HopPlan(FIG3_DISTANCE, 1, FIG3_EFFICIENCY, FIG3_SPACING, FIG3_DIFFUSION)


def throughput(plan: HopPlan) -> float:
    """End-to-end rate in bit/s, ``6 n D N / (k d^2)``."""
    per_hop_unit = (6.0 * plan.bandwidth_efficiency * plan.diffusion_coefficient
                    / (plan.spacing_factor * plan.distance**2))
    return per_hop_unit * plan.hops


@dataclass(frozen=True)
class MoleculeRatios:
    per_emission_ratio: int
    route_total_ratio: int


def molecule_ratios(hops: int) -> MoleculeRatios:
    """Single-hop molecules over multi-hop molecules at equal received peak."""
    if int(hops) != hops or hops < 1:
        raise ParameterError(f"hops must be an integer >= 1, got {hops!r}")
    n = int(hops)
    return MoleculeRatios(n**3, n**2)


def equal_peak_quantity(distance: float, hops: int, q_one_hop: float) -> float:
    """Per-hop release giving the same peak over ``distance / hops`` as ``q_one_hop`` over ``distance``."""
    ChannelParams(1.0, distance)
    if int(hops) != hops or hops < 1:
        raise ParameterError(f"hops must be an integer >= 1, got {hops!r}")
    if not q_one_hop >= 0:
        raise ParameterError("q_one_hop must be >= 0")
    return q_one_hop / int(hops) ** 3


def fig3_series(template: HopPlan, n_max: int) -> list[tuple[int, float]]:
    """``(N, throughput)`` for ``N = 1 .. n_max`` with everything else from ``template``."""
    if int(n_max) != n_max or n_max < 1:
        raise ParameterError(f"n_max must be an integer >= 1, got {n_max!r}")
    return [(n, throughput(replace(template, hops=n))) for n in range(1, int(n_max) + 1)]


@dataclass(frozen=True)
class BudgetReport:
    q_multi: float
    q_one_hop_equivalent: float
    route_total: float
    reservoir: float
    message_total: float
    messages_deliverable: int | None
    hop_peak_concentration: float

    @property
    def no_consumption(self) -> bool:
        """True when a message costs nothing, so the reservoir never runs dry."""
        return self.messages_deliverable is None


def budget_report(q_per_symbol: float, bits=None, *, message_length: int | None = None,
                  schedule: SymbolSchedule | None = None,
                  reservoir: float = RESERVOIR_MOLECULES, hops: int = 1,
                  distance: float = FIG3_DISTANCE) -> BudgetReport:
    """How many messages one node's reservoir can send.

    The per-message cost is taken, in order of preference, from a simulated
    ``schedule`` (post-DP totals), from explicit ``bits`` (one ``q_per_symbol``
    per "1"), or from ``message_length`` under the balanced-bit assumption
    ``0.5 * length * q``.  A message costing nothing yields
    ``messages_deliverable = None``.
    """
    if not reservoir > 0:
        raise ParameterError("reservoir must be > 0")
    if not q_per_symbol >= 0:
        raise ParameterError("q_per_symbol must be >= 0")
    if schedule is not None:
        per_message = schedule.total_molecules
    elif bits is not None:
        per_message = float(as_bits(bits).sum()) * q_per_symbol
    elif message_length is not None:
        if message_length < 0:
            raise ParameterError("message_length must be >= 0")
        per_message = 0.5 * message_length * q_per_symbol
    else:
        raise ParameterError("give bits, message_length or schedule")
    ratios = molecule_ratios(hops)
    deliverable = None if per_message == 0 else math.floor(reservoir / per_message)
    hop_params = ChannelParams(1.0, distance / hops)
    return BudgetReport(
        q_multi=q_per_symbol,
        q_one_hop_equivalent=q_per_symbol * ratios.per_emission_ratio,
        route_total=q_per_symbol * hops,
        reservoir=reservoir,
        message_total=per_message,
        messages_deliverable=deliverable,
        hop_peak_concentration=peak_concentration(hop_params, q_per_symbol),
    )


def hops_series(template: HopPlan, n_max: int) -> list[tuple[int, float, int, int]]:
    """Rows ``(N, throughput, per_emission_ratio, route_total_ratio)``."""
    rows = []
    for n, th in fig3_series(template, n_max):
        r = molecule_ratios(n)
        rows.append((n, th, r.per_emission_ratio, r.route_total_ratio))
    return rows
