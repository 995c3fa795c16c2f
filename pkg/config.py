# weaktrap configuration
#
# Every value can be overridden from the environment (or a .env file)
# with the WEAKTRAP_ prefix, e.g. WEAKTRAP_WORKERS=8.

import os

from dotenv import load_dotenv

load_dotenv()


def _env(name, default, cast=str):
    value = os.getenv(f"WEAKTRAP_{name}")
    if value is None or value == "":
        return default
    return cast(value)


def _env_list(name, default):
    value = os.getenv(f"WEAKTRAP_{name}")
    if not value:
        return default
    return [item.strip() for item in value.split(",") if item.strip()]


# Localization (motion map threshold and opening kernels)
THRESHOLD_T = _env("THRESHOLD_T", 0.12, float)
EROSION_KERNEL = _env("EROSION_KERNEL", 3, int)
DILATION_KERNEL = _env("DILATION_KERNEL", 151, int)
CONNECTIVITY = _env("CONNECTIVITY", 8, int)
MIN_COMPONENT_AREA = _env("MIN_COMPONENT_AREA", 1, int)
MAX_COMPONENTS = _env("MAX_COMPONENTS", 1, int)
TIGHTEN_BOXES = _env("TIGHTEN_BOXES", "false").lower() in ("1", "true", "yes")

# Ingestion
TIMESTAMP_SOURCE = _env("TIMESTAMP_SOURCE", "filename")  # filename | mtime
TIMESTAMP_REGEX = _env("TIMESTAMP_REGEX", r"(\d{8}_\d{6})")
TIMESTAMP_FORMAT = _env("TIMESTAMP_FORMAT", "%Y%m%d_%H%M%S")
GAP_SECONDS = _env("GAP_SECONDS", 5.0, float)
MAX_BURST = _env("MAX_BURST", 3, int)
IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png")

# Annotation and splitting
FN_POLICY = _env("FN_POLICY", "keep_as_unlocalized")
TEST_CAMERAS = _env_list("TEST_CAMERAS", [])
VAL_FRACTION = _env("VAL_FRACTION", 0.05, float)
SEED = _env("SEED", 0, int)
IOU_MIN = _env("IOU_MIN", 0.5, float)

# Runtime
WORKERS = _env("WORKERS", 1, int)
OUTPUT_DIR = _env("OUTPUT_DIR", "output")
LOG_DIR = _env("LOG_DIR", "logs")
TESTBED_DIR = _env("TESTBED_DIR", "testbed_output")
MNIST_DIR = _env("MNIST_DIR", "datasets/mnist")
