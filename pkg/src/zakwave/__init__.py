"""Delay-Doppler waveform design on the Zak grid.

Discrete Zak transform, quadratic-phase CAZAC waveforms, TD/DD ambiguity
functions, twisted-convolution spread pilots, a discrete doubly-spread
channel model and the receivers used for sensing, data detection and
preamble detection.
"""

from .ambiguity import (
    AmbiguitySurface,
    UnbiasednessReport,
    cross_af_flatness,
    dd_ambiguity,
    dd_ambiguity_at,
    gauss_sum_magnitude,
    line_support_mask,
    roots_of_unity_sum,
    self_af_closed_form,
    td_ambiguity,
    unbiasedness_stat,
    write_surface_csv,
)
from .cazac import (
    CazacFamily,
    CazacParams,
    cazac_dd,
    cazac_td,
    resolve_family,
    verify_ca,
    verify_zac,
    write_sequence_csv,
)
from .channel import (
    ChannelConfig,
    ChannelRealization,
    EffectiveChannel,
    FrameConfig,
    PulseShapeConfig,
    add_noise,
    apply_channel,
    assemble_frame,
    effective_channel,
    multiuser_superpose,
    sample_channel,
)
from .constellation import Constellation, DataFrame, qam, random_data_frame
from .grid import (
    GridParams,
    PeriodicSequence,
    QuasiPeriodicArray,
    inner_product_qp,
    make_grid,
    papr,
    qp_eval,
)
from .receiver import (
    DetectionReport,
    SensingRegion,
    TurboResult,
    detect_data,
    estimate_channel,
    ost_detect,
    turbo_loop,
)
from .spread import (
    Cazac2DParams,
    PilotSpec,
    cazac_filter_2d,
    lattice_support,
    point_pilot,
    spread_pilot,
    twisted_conv,
)
from .zak import basis_dd, basis_td, dzt, idzt

__version__ = "0.1.0"
