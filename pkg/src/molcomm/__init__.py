"""Diffusion-based molecular communication link toolkit.

Closed-form diffusion channel, peak-disciplined BCSK transmitter with a
threshold detector, two-species B-OMDM, multi-hop laws and a seeded
experiment harness.
"""

from .channel import (
    UM,
    ChannelParams,
    ConcentrationSample,
    Emission,
    concentration_at,
    impulse_response,
    parse_length,
    peak_concentration,
    peak_time,
)
from .errors import ConfigurationError, FramingError, MolcommError, ParameterError
from .modem import (
    DpConfig,
    SymbolSchedule,
    bcsk_encode,
    decode,
    dp_encode,
    residual_ratio,
    sampling_times,
)
from .multihop import (
    HopPlan,
    budget_report,
    equal_peak_quantity,
    fig3_series,
    molecule_ratios,
    throughput,
)
from .omdm import (
    MoleculeRegistry,
    MoleculeSpec,
    Scheme,
    SubchannelConfig,
    consumption_compare,
    derive_k2,
    omdm_decode,
    omdm_encode,
    plan_network,
)
from .simkit import (
    ExperimentConfig,
    ExperimentResult,
    LinkScheme,
    generate_bits,
    run_link_experiment,
    sweep,
)

__version__ = "0.1.0"
