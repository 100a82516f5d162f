"""BCSK with Disciplined Peak precompensation, and the threshold sample detector.

The transmitter lowers each "1" emission by the tails that its last ``m``
predecessors will leave at the current sampling instant, so every "1" is
received at (about) the isolated-pulse peak ``C_max``.  The receiver samples
once per symbol, ``t_p`` after each release, and compares against ``C_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .channel import ChannelParams, ConcentrationSample, peak_concentration
from .errors import FramingError, ParameterError

# slack below C_max absorbing float rounding in the sampled sum
THRESHOLD_SLACK = 1.0e-9


@dataclass(frozen=True)
class DpConfig:
    """Transmitter settings.

    ``base_quantity`` is the molecule count sent for an uncompensated "1",
    ``spacing_factor`` is the symbol duration in units of the peak time and
    ``history_depth`` is how many prior symbols get compensated.
    """

    base_quantity: float = 1000.0
    spacing_factor: float = 4.0
    history_depth: int = 20

    def __post_init__(self):
        if not (math.isfinite(self.base_quantity) and self.base_quantity > 0):
            raise ParameterError(f"base_quantity must be > 0, got {self.base_quantity!r}")
        if not (math.isfinite(self.spacing_factor) and self.spacing_factor > 1):
            raise ParameterError(f"spacing_factor must be > 1, got {self.spacing_factor!r}")
        if isinstance(self.history_depth, bool) or int(self.history_depth) != self.history_depth:
            raise ParameterError(f"history_depth must be an integer, got {self.history_depth!r}")
        if self.history_depth < 0:
            raise ParameterError(f"history_depth must be >= 0, got {self.history_depth!r}")
        object.__setattr__(self, "history_depth", int(self.history_depth))


class SymbolRecord(NamedTuple):
    symbol_index: int
    bit: int
    emitted_quantity: float
    release_time: float


@dataclass(frozen=True, eq=False)
class SymbolSchedule:
    """Per-symbol emissions produced by :func:`dp_encode`."""

    bits: np.ndarray
    quantities: np.ndarray
    release_times: np.ndarray
    symbol_duration: float
    clamp_events: int = 0

    def __len__(self):
        return len(self.bits)

    def __iter__(self) -> Iterator[SymbolRecord]:
        for i in range(len(self.bits)):
            yield SymbolRecord(i, int(self.bits[i]), float(self.quantities[i]),
                               float(self.release_times[i]))

    @property
    def total_molecules(self) -> float:
        return float(self.quantities.sum())


def as_bits(bits) -> np.ndarray:
    """Normalise a bit string, list or array to a 1-D ``int8`` array of 0/1."""
    if isinstance(bits, str):
        if any(c not in "01" for c in bits):
            raise ParameterError(f"bit string may only contain 0 and 1: {bits!r}")
        return np.frombuffer(bits.encode("ascii"), dtype=np.uint8).astype(np.int8) - ord("0")
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ParameterError("bit stream must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ParameterError("bit stream may only contain 0 and 1")
    return arr.astype(np.int8)


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def residual_ratio(cfg: DpConfig, lag: int) -> float:
    """Tail left by a pulse ``lag`` symbols back, relative to its own peak.

    Evaluated at the current sampling instant ``lag * t_s + t_p``; with
    ``t_s = k t_p`` the result depends only on ``lag * k``.
    """
    if lag < 1:
        raise ParameterError(f"lag must be >= 1, got {lag!r}")
    x = 1.0 / (lag * cfg.spacing_factor + 1.0)
    return x**1.5 * math.exp(1.5 * (1.0 - x))


def residual_ratios(cfg: DpConfig, depth: int | None = None) -> np.ndarray:
    """``residual_ratio`` for lags ``1..depth`` (defaults to the history depth)."""
    depth = cfg.history_depth if depth is None else depth
    return np.array([residual_ratio(cfg, lag) for lag in range(1, depth + 1)])


def dp_encode(cfg: DpConfig, bits, t_p: float) -> SymbolSchedule:
    """Map bits to emissions, compensating the last ``history_depth`` symbols.

    Compensation uses the quantities actually emitted (zero for "0" symbols).
    A compensated value below zero is clamped and counted.
    """
    if not (math.isfinite(t_p) and t_p > 0):
        raise ParameterError(f"t_p must be > 0, got {t_p!r}")
    b = as_bits(bits)
    n = b.size
    ratios = residual_ratios(cfg)
    q = np.zeros(n)
    clamps = 0
    for i in range(n):
        if not b[i]:
            continue
        depth = min(cfg.history_depth, i)
        value = cfg.base_quantity
        if depth:
            # q[i-1], q[i-2], ..., q[i-depth]
            value -= float(ratios[:depth] @ q[i - 1::-1][:depth])
        if value < 0:
            clamps += 1
            value = 0.0
        q[i] = value
    t_s = cfg.spacing_factor * t_p
    return SymbolSchedule(b, q, np.arange(n) * t_s, t_s, clamps)


def bcsk_encode(cfg: DpConfig, bits, t_p: float) -> SymbolSchedule:
    """Plain on-off keying: ``base_quantity`` for every "1", no compensation."""
    b = as_bits(bits)
    t_s = cfg.spacing_factor * t_p
    return SymbolSchedule(b, b * float(cfg.base_quantity), np.arange(b.size) * t_s, t_s, 0)


def sampling_times(cfg: DpConfig, t_p: float, symbol_count: int) -> np.ndarray:
    """Detector instants ``(i k + 1) t_p`` for ``i = 0 .. symbol_count - 1``."""
    if symbol_count < 1:
        raise ParameterError(f"symbol_count must be >= 1, got {symbol_count!r}")
    return (np.arange(symbol_count) * cfg.spacing_factor + 1.0) * t_p


def detection_threshold(cfg: DpConfig, params: ChannelParams) -> float:
    return peak_concentration(params, cfg.base_quantity) * (1.0 - THRESHOLD_SLACK)


def decode(
    cfg: DpConfig,
    params: ChannelParams,
    samples: Sequence[ConcentrationSample] | Sequence[float] | np.ndarray,
    expected_count: int | None = None,
) -> np.ndarray:
    """Threshold detector: 1 where the sample reaches ``C_max``, else 0.

    ``samples`` are either :class:`ConcentrationSample` objects, whose times
    are checked against the sampling schedule, or bare values assumed to be
    on schedule.  A wrong count or misaligned time raises :class:`FramingError`.
    """
    if len(samples) and isinstance(samples[0], ConcentrationSample):
        times = np.array([s.time for s in samples])
        values = np.array([s.value for s in samples])
        expected = sampling_times(cfg, params.peak_time, len(samples))
        if not np.allclose(times, expected, rtol=1e-9, atol=0.0):
            raise FramingError("sample times do not match the detector schedule")
    else:
        values = np.asarray(samples, dtype=float).ravel()
    if expected_count is not None and values.size != expected_count:
        raise FramingError(f"expected {expected_count} samples, got {values.size}")
    return (values >= detection_threshold(cfg, params)).astype(np.int8)
