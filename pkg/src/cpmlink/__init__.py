"""Link-level simulation of coded CPM over frequency-selective channels.

Transmitter: convolutional coding, pseudo-random interleaving, CPM
modulation on a tilted-phase trellis, block framing with intrafixes and a
cyclic prefix.  Receiver: UAMP frequency-domain equalization, BCJR-style
belief-propagation CPM demodulation, and log-MAP decoding, iterated per a
configurable outer/inner schedule.  A Monte Carlo harness sweeps Eb/N0 and
writes BER records to CSV.
"""

from .cpm import (
    CpmConfig,
    CpmTrellis,
    WaveformTable,
    build_trellis,
    build_waveform_table,
    modulate,
    phase_pulse,
)
from .framing import FrameLayout, SymbolBlock, assemble_block, compute_intrafix, strip_cp
from .coding import (
    CodeConfig,
    Interleaver,
    SymbolAlphabet,
    bcjr_decode,
    bit_llrs_from_symbol_messages,
    conv_encode,
    map_bits_to_symbols,
    symbol_priors_from_bit_llrs,
)
from .channel import (
    ChannelProfile,
    ChannelRealization,
    channel_spectrum,
    draw_channel,
    make_realization,
    noise_sigma2,
    proakis_c_profile,
    transmit,
    tu6_profile,
)
from .equalizer import FlopCounter, UampState, compute_beliefs, uamp_forward, unitary_transform
from .demodulator import branch_metrics, run_trellis_pass, symbol_output, waveform_prior_and_equalizer_message
from .receiver import IterationTrace, ScheduleConfig, run_receiver
from .sim import BerRecord, SimConfig, preset, run_monte_carlo, write_records

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
