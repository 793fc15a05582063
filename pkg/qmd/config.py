"""
Configuration for the quickest moving object detector
All numeric defaults live here; the CLI overrides them from a key=value file and flags.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file (QMD_JOBS, QMD_LOG_LEVEL, QMD_LOG_FILE)
load_dotenv()

# ============================================================================
# PATHS CONFIGURATION
# ============================================================================

PACKAGE_DIR = Path(__file__).parent
PROJECT_ROOT = PACKAGE_DIR.parent
OUTPUT_DIR = PROJECT_ROOT / "output"
LOGS_DIR = PROJECT_ROOT / "logs"

# Frame directory naming
FRAME_FILENAME_FORMAT = "frame_{index:04d}.png"
MASK_FILENAME_FORMAT = "mask_{index:04d}.png"
MANIFEST_FILENAME = "manifest.txt"
SEQUENCE_DIR_FORMAT = "seq_{index:02d}"

# Output file names
TRACE_FILENAME = "trace.csv"
SWEEP_FILENAME = "sweep.csv"
COMPARISON_FILENAME = "comparison.csv"
STOP_MASK_FILENAME = "mask_stop.png"

# ============================================================================
# IMAGE CONFIGURATION
# ============================================================================

DYNAMIC_RANGE = 255.0  # Intensity range of frames (8-bit PNG input)

# Luminance weights for color frames (flow and residuals run on luminance)
LUMINANCE_WEIGHTS = (0.299, 0.587, 0.114)

# ============================================================================
# FLOW CONFIGURATION
# ============================================================================

PYRAMID_LEVELS = 4
SCALE_FACTOR = 0.5
ITERATIONS_PER_LEVEL = 10
SMOOTHING_WEIGHT = 2.0  # Gaussian sigma (px) of the local window and increment diffusion
BETA_FRACTION = 0.2  # beta = (BETA_FRACTION * DYNAMIC_RANGE) ** 2
MIN_PYRAMID_SIZE = 8  # Coarsest level keeps at least this many pixels per side
INPAINT_ITERATIONS = 50  # Diffusion steps extending a masked flow outside its mask

# Region flows (null, background and object hypotheses share this estimator)
REGION_SMOOTHING_FRACTION = 0.125  # Gaussian sigma of increments as a fraction of the level size
REGION_FINEST_LEVEL = 1  # Pyramid level the region flows stop at (0 = full resolution)

# ============================================================================
# NOISE MODEL CONFIGURATION
# ============================================================================

SIGMA_FRACTION = 0.1  # sigma_bg = sigma_fg = SIGMA_FRACTION * DYNAMIC_RANGE
ESTIMATE_NOISE = False  # Estimate sigma from pre-change residual statistics

# ============================================================================
# SEGMENTATION CONFIGURATION
# ============================================================================

PRIOR_WEIGHT = 0.02  # Boundary-length prior, nats per boundary edge per frame pair
TEXTURE_FRACTION = 0.02  # Textureless if mean gradient energy < (fraction * range) ** 2
TEXTURE_WINDOW = 5
AMBIGUITY_BLUR = 3
HIST_BINS_GRAY = 32
HIST_BINS_COLOR = 16  # Per channel (16 ** 3 bins)
KMEANS_RESTARTS = 10
SEED_DISC_AREA = 0.05  # Fallback seed: centered disc of this area fraction
DEGENERATE_SPREAD = 0.25  # px; displacement spread below this means one motion cluster

# ============================================================================
# DETECTOR CONFIGURATION
# ============================================================================

MAX_OUTER_ITERATIONS = 20
SWEEPS_PER_ITERATION = 10  # Region competition sweeps between flow re-estimations
MAX_WINDOW = 30  # Cap on n - k; None evaluates every candidate change time
MIN_DETECTION_FRAME = 3  # Lambda_n is defined as 0 for n < 3
SIGMA_FLOOR = 1e-6  # Floor for estimated standard deviations in F
EXPONENT_CLIP = 700.0  # Keeps exp() in F finite

# ============================================================================
# SYNTHETIC DATA CONFIGURATION
# ============================================================================

SYNTH_WIDTH = 128
SYNTH_HEIGHT = 128
SYNTH_NOISE_SIGMA = 2.0
SUITE_SIZE = 20
SUITE_NULL_SEQUENCES = 4
SUITE_MIN_FRAMES = 100
SUITE_MAX_FRAMES = 200

# ============================================================================
# EVALUATION CONFIGURATION
# ============================================================================

# Lambda thresholds (nats per pixel): 0.1 .. 1.6 in steps of 0.3, scaled by 1/10
DEFAULT_THRESHOLDS = [0.01, 0.04, 0.07, 0.10, 0.13, 0.16]
# Thresholds for the F-statistic baseline (F grows with window length)
DEFAULT_BASELINE_THRESHOLDS = [20.0, 40.0, 60.0, 80.0, 100.0, 120.0]
F_MEASURE_MIN = 0.75  # Detections below this f-measure count as false alarms
SEED = 0

# ============================================================================
# PARALLELISM CONFIGURATION
# ============================================================================


def default_jobs() -> int:
    """Worker count from QMD_JOBS, else the number of logical cores"""
    value = os.getenv("QMD_JOBS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOG_LEVEL = os.getenv("QMD_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("QMD_LOG_FILE")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# ============================================================================
# OVERRIDABLE KEYS
# ============================================================================

# Keys accepted in a --config key=value file, with their parsers
OVERRIDE_PARSERS = {
    "dynamic_range": float,
    "pyramid_levels": int,
    "scale_factor": float,
    "iterations_per_level": int,
    "smoothing_weight": float,
    "region_smoothing": float,
    "region_finest_level": int,
    "beta": float,
    "sigma_bg": float,
    "sigma_fg": float,
    "estimate_noise": lambda s: str(s).strip().lower() in ("1", "true", "yes", "on"),
    "prior_weight": float,
    "texture_fraction": float,
    "hist_bins_gray": int,
    "hist_bins_color": int,
    "max_outer_iterations": int,
    "sweeps_per_iteration": int,
    "max_window": lambda s: None if str(s).strip().lower() in ("", "none") else int(s),
    "kmeans_restarts": int,
    "seed": int,
    "jobs": int,
}
