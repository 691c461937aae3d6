"""Speech anonymisation toolkit: query-by-example voice conversion with a
harmonic-plus-noise synthesiser and clinical voice-quality metrics."""

from .audio_io import AudioBuffer, read_wav, require_rate, write_wav
from .formats import (
    FeatureSequence,
    PhonePool,
    SynthParamsSeq,
    WeightBundle,
    read_features,
    read_params,
    read_pool,
    read_weights,
    write_features,
    write_params,
    write_pool,
    write_weights,
)
from .fusion import FusionConfig, FusionNet, init_random, load_weights
from .mapper import MapperConfig, build_pool, cosine_distance, map_query, map_sequence
from .metrics import (
    F0Contour,
    PeriodSequence,
    extract_f0,
    extract_periods,
    jitter_ppq5,
    log_f0_znorm,
    loudness,
    pcc,
    shimmer_local,
)
from .losses import (
    LossWeights,
    SpectralConfig,
    f0_loss,
    jitter_loss,
    prosody_leak_loss,
    shimmer_loss,
    spectral_loss,
    total_loss,
)
from .synth import (
    HarmonicState,
    SynthConfig,
    filters_from_params,
    ltv_fir_filter,
    synth_harmonic_unfiltered,
    synth_noise,
    synthesize,
)

__version__ = "0.1.0"
