import configparser
import os
import sys
from pathlib import Path

from common import UsageError

CONFIG_FILENAME = "oscint_config.ini"
THREADS_ENV_VAR = "OSCINT_THREADS"

DEFAULTS = {
    "Quadrature": {
        "abs_tol": "1e-10",
        "rel_tol": "1e-10",
        "max_segments": "1000000",
        "acceleration_depth": "12",
    },
    "Classify": {
        "tol": "1e-3",
        "windows": "8",
        "samples": "512",
        "t_max": "40",
    },
    "Report": {
        "output_path": "build/oscint_report.json",
    },
}

def create_default_config(config_path):
    print(f"Configuration file not found. Creating a default '{config_path}'...")
    config = configparser.ConfigParser()
    config.read_dict(DEFAULTS)

    with open(config_path, 'w', encoding='utf-8') as f:
        for section in config.sections():
            f.write(f"[{section}]\n")
            for key, value in config.items(section):
                f.write(f"{key} = {value}\n")
            f.write("\n")
    print("Default config created.")

def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return min(8, os.cpu_count() or 1)
    try:
        threads = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV_VAR} must be an integer >= 1, got '{raw}'.") from None
    if threads < 1:
        raise UsageError(f"{THREADS_ENV_VAR} must be an integer >= 1, got {threads}.")
    return threads

config = configparser.ConfigParser()
config.read_dict(DEFAULTS)

try:
    if Path(CONFIG_FILENAME).exists():
        config.read(CONFIG_FILENAME, encoding='utf-8-sig')

    ABS_TOL = config.getfloat("Quadrature", "abs_tol")
    REL_TOL = config.getfloat("Quadrature", "rel_tol")
    MAX_SEGMENTS = config.getint("Quadrature", "max_segments")
    ACCELERATION_DEPTH = config.getint("Quadrature", "acceleration_depth")

    CLASSIFY_TOL = config.getfloat("Classify", "tol")
    CLASSIFY_WINDOWS = config.getint("Classify", "windows")
    TRACE_SAMPLES = config.getint("Classify", "samples")
    TRACE_T_MAX = config.getfloat("Classify", "t_max")

    REPORT_PATH = Path(config.get("Report", "output_path"))

except (configparser.Error, ValueError) as e:
    print(f"Error reading '{CONFIG_FILENAME}': {e}")
    sys.exit(1)
