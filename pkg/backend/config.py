import os
import sys
import logging
import importlib.metadata

from pathlib import Path
from typing import Any, Optional

####################################
# Load .env file
####################################

BACKEND_DIR = Path(__file__).parent  # the path containing this file
BASE_DIR = BACKEND_DIR.parent  # the path containing the backend/

try:
    from dotenv import load_dotenv, find_dotenv

    load_dotenv(find_dotenv(str(BASE_DIR / ".env")))
except ImportError:
    pass


####################################
# LOGGING
####################################

log_levels = ["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"]

GLOBAL_LOG_LEVEL = os.environ.get("GLOBAL_LOG_LEVEL", "").upper()
if GLOBAL_LOG_LEVEL in log_levels:
    logging.basicConfig(stream=sys.stdout, level=GLOBAL_LOG_LEVEL, force=True)
else:
    GLOBAL_LOG_LEVEL = "INFO"

log = logging.getLogger(__name__)
log.info(f"GLOBAL_LOG_LEVEL: {GLOBAL_LOG_LEVEL}")

log_sources = [
    "CLI",
    "CONFIG",
    "DIAGNOSTICS",
    "EIGEN",
    "GRID",
    "MAIN",
    "MULTIPLICITY",
    "OPERATOR",
    "SINGULAR",
]

SRC_LOG_LEVELS = {}

for source in log_sources:
    log_env_var = source + "_LOG_LEVEL"
    SRC_LOG_LEVELS[source] = os.environ.get(log_env_var, "").upper()
    if SRC_LOG_LEVELS[source] not in log_levels:
        SRC_LOG_LEVELS[source] = GLOBAL_LOG_LEVEL
    log.debug(f"{log_env_var}: {SRC_LOG_LEVELS[source]}")

log.setLevel(SRC_LOG_LEVELS["CONFIG"])


####################################
# ENV (dev,test,prod)
####################################

ENV = os.environ.get("ENV", "dev")

try:
    VERSION = importlib.metadata.version("mixsing")
except importlib.metadata.PackageNotFoundError:
    from mixsing import __version__ as VERSION


####################################
# DATA DIR
####################################

DATA_DIR = Path(os.getenv("DATA_DIR", BACKEND_DIR / "data")).resolve()


####################################
# Numerical defaults
####################################


def _env_float(name: str, default: float) -> float:
    try:
        return float(os.environ.get(name, default))
    except ValueError:
        log.warning(f"'{name}' is not a number, using {default}")
        return default


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.environ.get(name, default))
    except ValueError:
        log.warning(f"'{name}' is not an integer, using {default}")
        return default


DEFAULT_TOL = _env_float("DEFAULT_TOL", 1e-10)
DEFAULT_MAX_ITER = _env_int("DEFAULT_MAX_ITER", 200)
DEFAULT_SEED = _env_int("DEFAULT_SEED", 0)

# epsilon continuation
EPS0 = _env_float("EPS0", 1.0)
EPS_RATIO = _env_float("EPS_RATIO", 0.5)
EPS_FLOOR = _env_float("EPS_FLOOR", 1e-8)

# kernel quadrature: |k| <= NEAR_FIELD_BAND uses exact cell integrals
NEAR_FIELD_BAND = _env_int("NEAR_FIELD_BAND", 8)

# eigen
EIGEN_TOL = _env_float("EIGEN_TOL", 1e-13)
EIGEN_MAX_ITER = _env_int("EIGEN_MAX_ITER", 500)
# |(A - lambda1 M) e1| relative to |lambda1 M e1|
EIGEN_RESIDUAL_TOL = _env_float("EIGEN_RESIDUAL_TOL", 1e-8)
DENSE_ORACLE_LIMIT = _env_int("DENSE_ORACLE_LIMIT", 2000)

# singular pipeline
SEARCH_MAX_STEPS = _env_int("SEARCH_MAX_STEPS", 200)
MONOTONE_MAX_ITER = _env_int("MONOTONE_MAX_ITER", 5000)
SHIFT_SAMPLES = _env_int("SHIFT_SAMPLES", 1000)

# multiplicity pipeline
GEOMETRY_K = _env_float("GEOMETRY_K", 0.5)
ASCENT_RESTARTS = _env_int("ASCENT_RESTARTS", 20)
RIM_SAMPLES = _env_int("RIM_SAMPLES", 50)
MP_N_PATH = _env_int("MP_N_PATH", 41)
MP_REDISTRIBUTE_EVERY = _env_int("MP_REDISTRIBUTE_EVERY", 10)
MP_MAX_SWEEPS = _env_int("MP_MAX_SWEEPS", 20000)
MP_TOL = _env_float("MP_TOL", 1e-4)

# diagnostics
N_TEST_FIELDS = _env_int("N_TEST_FIELDS", 20)


####################################
# Config file helpers
####################################


def parse_config_text(text: str) -> dict[str, str]:
    """
    Parses line-oriented `key = value` text. Blank lines and `#` comments
    are ignored; keys are normalized to snake_case.
    """
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        data[key.strip().replace("-", "_")] = value.strip()
    return data


def load_config_file(path: Optional[Path]) -> dict[str, str]:
    if path is None:
        return {}
    data = parse_config_text(Path(path).read_text())
    for key in data:
        log.info(f"'{key}' loaded from {path}")
    return data


class ConfigValue:
    """
    A single resolved setting: explicit flag, else config file, else default.
    Remembers where its value came from so reports can echo it.
    """

    def __init__(self, name: str, default: Any, file_value: Any = None):
        self.name = name
        self.default = default
        self.file_value = file_value
        self.flag_value = None
        self.value = file_value if file_value is not None else default

    @property
    def source(self) -> str:
        if self.flag_value is not None:
            return "flag"
        if self.file_value is not None:
            return "file"
        return "default"

    def override(self, flag_value: Any):
        if flag_value is not None:
            self.flag_value = flag_value
            self.value = flag_value

    def __str__(self):
        return str(self.value)


def resolve_settings(
    defaults: dict[str, Any], file_data: dict[str, str], flags: dict[str, Any]
) -> dict[str, ConfigValue]:
    settings = {}
    for name, default in defaults.items():
        value = ConfigValue(name, default, file_data.get(name))
        value.override(flags.get(name))
        settings[name] = value

    unknown = set(file_data) - set(defaults)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return settings
