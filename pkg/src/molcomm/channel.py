"""Free 3-D diffusion channel: impulse response, peak timing and superposition.

Every quantity is in CGS units: distances in cm, time in s, diffusion
coefficients in cm^2/s, concentrations in molecules/cm^3.  Use
:func:`parse_length` or :data:`UM` to bring micrometre inputs in.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError

UM = 1.0e-4  # cm per micrometre

# (3 / (2 pi e))^(3/2): peak of the unit impulse response times d^3
PEAK_CONSTANT = (3.0 / (2.0 * math.pi * math.e)) ** 1.5

_LENGTH_UNITS = {"cm": 1.0, "mm": 0.1, "um": UM, "µm": UM, "nm": 1.0e-7, "m": 100.0}
_LENGTH_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zµ]*)\s*$")

# rows per block when evaluating large superpositions
_BLOCK = 512


def parse_length(text: str | float) -> float:
    """Convert ``"10um"``, ``"1.5cm"`` or a bare number (cm) to centimetres."""
    if isinstance(text, (int, float)):
        return float(text)
    match = _LENGTH_RE.match(text)
    if match is None:
        raise ParameterError(f"cannot parse length {text!r}")
    value, unit = match.groups()
    try:
        magnitude = float(value)
    except ValueError:
        raise ParameterError(f"cannot parse length {text!r}") from None
    unit = unit or "cm"
    if unit not in _LENGTH_UNITS:
        raise ParameterError(f"unknown length unit {unit!r} in {text!r}")
    return magnitude * _LENGTH_UNITS[unit]


def _check_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ChannelParams:
    """One transmitter-receiver sub-channel."""

    diffusion_coefficient: float
    distance: float

    def __post_init__(self):
        _check_positive("diffusion_coefficient", self.diffusion_coefficient)
        _check_positive("distance", self.distance)

    @property
    def peak_time(self) -> float:
        return peak_time(self)


@dataclass(frozen=True)
class Emission:
    """Instantaneous release of ``quantity`` molecules of ``species`` at ``release_time``."""

    release_time: float
    quantity: float
    species: str = "default"

    def __post_init__(self):
        if not self.quantity >= 0:
            raise ParameterError(f"quantity must be >= 0, got {self.quantity!r}")
        if not self.release_time >= 0:
            raise ParameterError(f"release_time must be >= 0, got {self.release_time!r}")


@dataclass(frozen=True)
class ConcentrationSample:
    time: float
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise ParameterError(f"concentration must be >= 0, got {self.value!r}")


def impulse_response(params: ChannelParams, quantity, elapsed):
    """Concentration at the receiver ``elapsed`` seconds after releasing ``quantity`` molecules.

    ``Q (4 pi D t)^(-3/2) exp(-d^2 / (4 D t))``, taken as 0 at ``t = 0``.
    Broadcasts over array-valued ``quantity`` and ``elapsed``; scalars in give
    a float out.
    """
    q = np.asarray(quantity, dtype=float)
    t = np.asarray(elapsed, dtype=float)
    if np.any(t < 0):
        raise ParameterError("elapsed time must be >= 0")
    if np.any(q < 0):
        raise ParameterError("quantity must be >= 0")
    D, d = params.diffusion_coefficient, params.distance
    q, t = np.broadcast_arrays(q, t)
    out = np.zeros(t.shape)
    live = t > 0
    tl = t[live]
    out[live] = q[live] * (4.0 * math.pi * D * tl) ** -1.5 * np.exp(-(d * d) / (4.0 * D * tl))
    if out.ndim == 0:
        return float(out)
    return out


def peak_time(params: ChannelParams) -> float:
    """Time of maximum concentration after an impulse, ``d^2 / (6 D)``."""
    return params.distance**2 / (6.0 * params.diffusion_coefficient)


def peak_concentration(params: ChannelParams, quantity: float) -> float:
    """Peak received concentration of a single impulse.

    Depends on distance and quantity only; the diffusion coefficient drops out.
    """
    if not quantity >= 0:
        raise ParameterError(f"quantity must be >= 0, got {quantity!r}")
    return PEAK_CONSTANT * quantity / params.distance**3


def superpose(params: ChannelParams, release_times, quantities, query_times) -> np.ndarray:
    """Vectorised superposition of impulses on one species.

    Returns, for every query time, the sum of responses of all releases that
    happened at or before it.
    """
    release = np.asarray(release_times, dtype=float).ravel()
    qty = np.asarray(quantities, dtype=float).ravel()
    times = np.asarray(query_times, dtype=float).ravel()
    if release.shape != qty.shape:
        raise ParameterError("release_times and quantities must have the same length")
    out = np.zeros(times.shape)
    nz = qty > 0
    release, qty = release[nz], qty[nz]
    if release.size == 0:
        return out
    for start in range(0, times.size, _BLOCK):
        block = times[start:start + _BLOCK]
        elapsed = block[:, None] - release[None, :]
        # future releases contribute nothing
        weights = np.where(elapsed > 0, qty[None, :], 0.0)
        resp = impulse_response(params, weights, np.maximum(elapsed, 0.0))
        out[start:start + _BLOCK] = resp.sum(axis=1)
    return out


def concentration_at(
    params_by_species: Mapping[str, ChannelParams],
    history: Sequence[Emission],
    species: str,
    query_time: float,
) -> float:
    """Concentration of ``species`` at ``query_time`` given an emission history.

    Receptors are perfectly selective, so emissions of other species are
    ignored.  Raises ``KeyError`` for an unknown species.
    """
    params = params_by_species[species]
    if query_time < 0:
        raise ParameterError("query_time must be >= 0")
    own = [e for e in history if e.species == species and e.release_time <= query_time]
    if not own:
        return 0.0
    times = [e.release_time for e in own]
    qty = [e.quantity for e in own]
    return float(superpose(params, times, qty, [query_time])[0])
