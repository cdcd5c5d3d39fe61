"""Linear and kernel affine projection adaptive filters for speech enhancement."""

__version__ = "0.1.0"

from .kernels import KernelSpec, gram, kernel_eval
from .signal_io import SignalBuffer, make_regressors, mix_at_snr, read_wav, synth_testbed, TestbedSpec, write_wav
from .linear_filters import (
    FilterRun,
    LinearFilterConfig,
    LinearFilterState,
    apa_step,
    lms_step,
    napa_step,
    newton_lms_step,
    predict,
    run_linear,
)
from .kernel_filters import (
    KernelFilterConfig,
    KernelFilterState,
    kapa_predict,
    kapa_step,
    nkapa_step,
    run_kernel,
)
from .metrics import EnhancementReport, learning_curve, mse, output_snr_db, snr_db, spectrogram_csv
