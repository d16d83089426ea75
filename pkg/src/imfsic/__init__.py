"""Multiple-feedback successive interference cancellation MIMO detectors.

Baselines (ML, ZF, MMSE, SIC, MF-SIC), the recursive IMF-SIC search and
its LLR-ordered variant OIMF-SIC, plus a seeded Monte-Carlo BER harness.
"""

__version__ = "0.1.0"

from .detectors import DetectorConfig, detect  # noqa: E402
from .estimators import MIMODetector, QAMModulator  # noqa: E402
from .montecarlo import SweepConfig, run_sweep, snr_gain_at_ber  # noqa: E402
from .signal_model import SystemDims, build_qam, snr_to_sigma2  # noqa: E402

__all__ = [
    "__version__",
    "DetectorConfig",
    "detect",
    "MIMODetector",
    "QAMModulator",
    "SweepConfig",
    "run_sweep",
    "snr_gain_at_ber",
    "SystemDims",
    "build_qam",
    "snr_to_sigma2",
]
