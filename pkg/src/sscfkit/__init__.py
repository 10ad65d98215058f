"""Spectral subband centroid dynamics for speech recognition front-ends."""

from .config import ExtractionConfig, load_config
from .dsp import FrameMatrix, Waveform, apply_hamming, frame, power_spectrum, preemphasize
from .dynamics import deltas, mvn, net_transition_angle, polar, ratio_plane, transition_angle
from .errors import AudioFormatError, ConfigurationError, ContractError, SscfKitError
from .pipeline import (
    PROFILE_SPECS,
    FeatureMatrix,
    FeatureProfile,
    analyze_transitions,
    batch_extract,
    extract,
    get_profile,
)
from .spectral import SubbandSpec, build_mel_filterbank, default_subbands, mfcc, sscf, sscf_track
from .synth import TransitionSpec, VowelSpec, preset, synth_transition, vowel_presets

__version__ = "0.1.0"
