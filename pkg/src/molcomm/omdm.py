"""Binary orthogonal molecular division multiplexing (B-OMDM).

Two molecule species carry the even and odd bits of one stream as parallel
BCSK substreams.  Their symbol durations are matched by choosing the second
spacing factor as ``k2 = k1 * D2 / D1``, and each substream gets its own
peak-disciplined transmitter.  The module also holds the network planning
arithmetic for a finite alphabet of isomers.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import ChannelParams
from .errors import ConfigurationError, FramingError, ParameterError
from .modem import DpConfig, SymbolSchedule, as_bits, decode, dp_encode, sampling_times

IMOSK_ISOMERS = 32
IMOSK_BITS = 5


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    diffusion_coefficient: float

    def __post_init__(self):
        if not self.name:
            raise ParameterError("molecule name must be non-empty")
        D = self.diffusion_coefficient
        if not (isinstance(D, (int, float)) and math.isfinite(D) and D > 0):
            raise ParameterError(f"{self.name}: diffusion coefficient must be > 0, got {D!r}")


class MoleculeRegistry:
    """Named molecule species loaded from a JSON registry.

    Entries whose coefficient is ``null`` (flagged ``user_supplied``) are
    kept as placeholders; looking one up raises :class:`ConfigurationError`.
    """

    def __init__(self, specs=(), placeholders=()):
        self._specs: dict[str, MoleculeSpec] = {}
        self._placeholders: set[str] = set()
        for spec in specs:
            self._add_name(spec.name)
            self._specs[spec.name] = spec
        for name in placeholders:
            self._add_name(name)
            self._placeholders.add(name)

    def _add_name(self, name):
        if name in self._specs or name in self._placeholders:
            raise ConfigurationError(f"duplicate molecule name {name!r} in registry")

    @classmethod
    def from_json(cls, document) -> "MoleculeRegistry":
        entries = document["molecules"] if isinstance(document, dict) else document
        specs, placeholders = [], []
        for entry in entries:
            try:
                name = entry["name"]
                D = entry.get("diffusion_coefficient_cm2_per_s")
            except (KeyError, TypeError, AttributeError):
                raise ConfigurationError(f"malformed registry entry {entry!r}") from None
            if D is None:
                placeholders.append(name)
            else:
                specs.append(MoleculeSpec(name, float(D)))
        return cls(specs, placeholders)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "MoleculeRegistry":
        """Read a registry file; ``None`` loads the bundled default."""
        if path is None:
            text = resources.files("molcomm").joinpath("data/molecules.json").read_text()
        else:
            text = Path(path).read_text()
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"registry {path}: {exc}") from None
        return cls.from_json(document)

    def get(self, name: str) -> MoleculeSpec:
        if name in self._placeholders:
            raise ConfigurationError(
                f"molecule {name!r} has no diffusion coefficient; supply one in a registry file")
        try:
            return self._specs[name]
        except KeyError:
            raise ConfigurationError(f"unknown molecule {name!r}") from None

    def names(self) -> list[str]:
        return sorted(self._specs) + sorted(self._placeholders)

    def __contains__(self, name):
        return name in self._specs or name in self._placeholders


@dataclass(frozen=True)
class SubchannelConfig:
    """One species' sub-channel over a link of length ``distance`` (cm)."""

    species: MoleculeSpec
    spacing_factor: float
    distance: float

    def __post_init__(self):
        if not self.spacing_factor > 1:
            raise ConfigurationError(
                f"{self.species.name}: spacing factor must be > 1, got {self.spacing_factor!r}")

    @property
    def params(self) -> ChannelParams:
        return ChannelParams(self.species.diffusion_coefficient, self.distance)

    @property
    def peak_time(self) -> float:
        return self.params.peak_time

    @property
    def symbol_duration(self) -> float:
        return self.spacing_factor * self.peak_time

    def dp_config(self, base_quantity: float, history_depth: int) -> DpConfig:
        return DpConfig(base_quantity, self.spacing_factor, history_depth)


def derive_k2(k1: float, spec1: MoleculeSpec, spec2: MoleculeSpec) -> float:
    """Spacing factor of species 2 giving the same symbol duration as species 1."""
    if not k1 > 1:
        raise ParameterError(f"k1 must be > 1, got {k1!r}")
    k2 = k1 * spec2.diffusion_coefficient / spec1.diffusion_coefficient
    if not k2 > 1:
        raise ConfigurationError(
            f"derived k2 = {k2:g} <= 1 for {spec2.name!r}; increase k1 or pick a faster species")
    return k2


def make_subchannels(spec1: MoleculeSpec, spec2: MoleculeSpec, k1: float,
                     distance: float) -> tuple[SubchannelConfig, SubchannelConfig]:
    if spec1.name == spec2.name:
        raise ConfigurationError("B-OMDM needs two distinct molecule species")
    k2 = derive_k2(k1, spec1, spec2)
    return SubchannelConfig(spec1, k1, distance), SubchannelConfig(spec2, k2, distance)


def deinterleave(bits) -> tuple[np.ndarray, np.ndarray, bool]:
    """Split into (even bits, odd bits, padded); odd lengths get a trailing 0."""
    b = as_bits(bits)
    padded = b.size % 2 == 1
    if padded:
        b = np.append(b, np.int8(0))
    return b[0::2].copy(), b[1::2].copy(), padded


def interleave(first, second) -> np.ndarray:
    a, b = as_bits(first), as_bits(second)
    if a.size != b.size:
        raise FramingError(f"substream lengths differ: {a.size} vs {b.size}")
    out = np.empty(2 * a.size, dtype=np.int8)
    out[0::2] = a
    out[1::2] = b
    return out


@dataclass(frozen=True, eq=False)
class OmdmFrame:
    """Slot-aligned emissions on both species.

    ``quantities[i]`` is the (species 1, species 2) pair released at
    ``slot_times[i]``.
    """

    slot_times: np.ndarray
    schedules: tuple[SymbolSchedule, SymbolSchedule]
    padded: bool
    bit_count: int

    @property
    def quantities(self) -> np.ndarray:
        return np.column_stack([s.quantities for s in self.schedules])

    @property
    def slot_count(self) -> int:
        return self.slot_times.size

    @property
    def total_molecules(self) -> float:
        return sum(s.total_molecules for s in self.schedules)

    @property
    def clamp_events(self) -> int:
        return sum(s.clamp_events for s in self.schedules)


def omdm_encode(bits, sub1: SubchannelConfig, sub2: SubchannelConfig,
                base_quantity: float = 1000.0, history_depth: int = 20) -> OmdmFrame:
    """Encode a stream onto two species, each with its own DP transmitter."""
    b = as_bits(bits)
    even, odd, padded = deinterleave(b)
    s1 = dp_encode(sub1.dp_config(base_quantity, history_depth), even, sub1.peak_time)
    s2 = dp_encode(sub2.dp_config(base_quantity, history_depth), odd, sub2.peak_time)
    return OmdmFrame(s1.release_times, (s1, s2), padded, int(b.size))


def omdm_sampling_times(sub: SubchannelConfig, slots: int) -> np.ndarray:
    return sampling_times(sub.dp_config(1.0, 0), sub.peak_time, slots)


def omdm_decode(samples1, samples2, sub1: SubchannelConfig, sub2: SubchannelConfig,
                base_quantity: float = 1000.0, bit_count: int | None = None) -> np.ndarray:
    """Detect each species against its own threshold and re-interleave.

    ``bit_count`` trims the transmit-side pad from odd-length streams.
    """
    if len(samples1) != len(samples2):
        raise FramingError(
            f"per-species sample counts differ: {len(samples1)} vs {len(samples2)}")
    d1 = decode(sub1.dp_config(base_quantity, 0), sub1.params, samples1)
    d2 = decode(sub2.dp_config(base_quantity, 0), sub2.params, samples2)
    out = interleave(d1, d2)
    if bit_count is not None:
        if bit_count > out.size or bit_count < out.size - 1:
            raise FramingError(f"{out.size} decoded bits cannot carry {bit_count}")
        out = out[:bit_count]
    return out


@dataclass(frozen=True)
class ConsumptionReport:
    omdm_total: float
    bmosk_total: float
    omdm_epochs: int
    bmosk_epochs: int

    @property
    def ratio(self) -> float:
        """B-OMDM molecules over BMoSK molecules (nan for an empty stream)."""
        return self.omdm_total / self.bmosk_total if self.bmosk_total else math.nan

    @property
    def omdm_per_epoch(self) -> float:
        return self.omdm_total / self.omdm_epochs if self.omdm_epochs else 0.0

    @property
    def bmosk_per_epoch(self) -> float:
        return self.bmosk_total / self.bmosk_epochs if self.bmosk_epochs else 0.0

    def as_dict(self) -> dict:
        return {
            "omdm_total": self.omdm_total,
            "bmosk_total": self.bmosk_total,
            "ratio": self.ratio,
            "omdm_epochs": self.omdm_epochs,
            "bmosk_epochs": self.bmosk_epochs,
            "omdm_per_epoch": self.omdm_per_epoch,
            "bmosk_per_epoch": self.bmosk_per_epoch,
        }


def consumption_compare(bits, q_per_one: float) -> ConsumptionReport:
    """Pre-DP molecule and epoch accounting, B-OMDM against BMoSK.

    BMoSK releases one burst per bit whatever its value; B-OMDM releases a
    burst per "1" only and carries two bits per epoch.
    """
    b = as_bits(bits)
    n = int(b.size)
    return ConsumptionReport(
        omdm_total=float(int(b.sum()) * q_per_one),
        bmosk_total=float(n * q_per_one),
        omdm_epochs=(n + 1) // 2,
        bmosk_epochs=n,
    )


class Scheme(str, enum.Enum):
    MDMA_B_OMDM = "mdma-bomdm"
    TDMA_32_IMOSK = "tdma-imosk"


@dataclass(frozen=True)
class NetworkPlan:
    scheme: Scheme
    isomer_count: int
    channels: int
    bits_per_symbol_per_channel: int
    aggregate_bits_per_symbol: int
    molecules_per_bit: float  # in units of Q
    aggregate_bits_per_second: float | None = None

    @property
    def summary(self) -> str:
        noun = "channel" if self.channels == 1 else "channels"
        return f"{self.channels} {noun} x {self.bits_per_symbol_per_channel} bits"


def plan_network(isomer_count: int, scheme: Scheme | str,
                 reference: ChannelParams | None = None,
                 spacing_factor: float | None = None) -> NetworkPlan:
    """Channel count and per-epoch capacity of an isomer alphabet.

    Throughput is per symbol epoch.  Passing a ``reference`` channel and
    ``spacing_factor`` adds a bits-per-second figure for that one species.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.MDMA_B_OMDM:
        if isomer_count < 2:
            raise ConfigurationError("MDMA with B-OMDM needs at least 2 isomers")
        channels, per_channel, per_bit = isomer_count // 2, 2, 0.5
    else:
        if isomer_count != IMOSK_ISOMERS:
            raise ConfigurationError(
                f"32-IMoSK needs exactly {IMOSK_ISOMERS} isomers, got {isomer_count}")
        channels, per_channel, per_bit = 1, IMOSK_BITS, 1.0 / IMOSK_BITS
    aggregate = channels * per_channel
    bps = None
    if reference is not None:
        if spacing_factor is None or not spacing_factor > 1:
            raise ConfigurationError("a reference species needs a spacing factor > 1")
        bps = aggregate / (spacing_factor * reference.peak_time)
    return NetworkPlan(scheme, isomer_count, channels, per_channel, aggregate, per_bit, bps)
