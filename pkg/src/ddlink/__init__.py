"""OFDM and OTFS link-level simulation with ISAC speed sensing and waveform switching."""

from .channel import (
    ChannelRealization,
    PathSpec,
    add_awgn,
    apply_channel,
    freq_response,
    make_eva_profile,
    make_profile,
)
from .controller import (
    LinkReport,
    LinkScenario,
    SwitchPolicy,
    WaveformChoice,
    run_adaptive_link,
    run_fixed_link,
    select_waveform,
)
from .core import DDGrid, LinkParams, TFGrid, TimeSignal, isfft, qam_demodulate_hard, qam_modulate, sfft
from .errors import ConfigError, InvalidArgumentError, PreconditionError, SingularMatrixError
from .ofdm import ofdm_demodulate, ofdm_equalize_zf, ofdm_modulate
from .otfs import build_effective_channel, otfs_demodulate, otfs_equalize_lmmse, otfs_modulate
from .sensing import (
    PilotFrame,
    SensingEstimate,
    estimate_speed,
    estimate_targets,
    fibonacci_refine,
    mf_integer_search,
    sense_response,
)

__version__ = "0.1.0"
