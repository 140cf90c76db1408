# config.py
import logging
import os

# ------------------------------
# Helper(s)
# ------------------------------
def _env(name: str, default: str = "") -> str:
    """Get environment variable with a safe default."""
    val = os.getenv(name, default)
    return val.strip() if isinstance(val, str) else val

def _env_int(name: str, default: int) -> int:
    """Get environment variable as int with fallback."""
    try:
        return int(os.getenv(name, default))
    except Exception:
        return default


# ------------------------------
# Parallelism
# ------------------------------
# Caps the campaign process pool. Unset means "all available cores".
SWARMX_WORKERS = _env_int("SWARMX_WORKERS", os.cpu_count() or 1)

# Runs handed to a worker per submitted task; larger chunks amortize pickling.
SWARMX_CHUNK_SIZE = _env_int("SWARMX_CHUNK_SIZE", 25)


# ------------------------------
# Run store (optional)
# ------------------------------
# Empty disables the SQLAlchemy store; runs.csv is always written.
DATABASE_URL = _env("SWARMX_DATABASE_URL", "")


# ------------------------------
# Logging
# ------------------------------
LOG_LEVEL = _env("SWARMX_LOG_LEVEL", "INFO").upper()
LOG_FILE = _env("SWARMX_LOG_FILE", "")
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


def setup_logging(level: str = None, log_file: str = None) -> logging.Logger:
    """
    Attach handlers to the `swarmx` logger namespace once.
    Child loggers (swarmx.campaign, swarmx.xplain, ...) propagate here.
    """
    logger = logging.getLogger("swarmx")
    if not logger.handlers:
        logger.setLevel(level or LOG_LEVEL)
        formatter = logging.Formatter(LOG_FORMAT)

        sh = logging.StreamHandler()
        sh.setFormatter(formatter)
        logger.addHandler(sh)

        path = log_file if log_file is not None else LOG_FILE
        if path:
            fh = logging.FileHandler(path)
            fh.setFormatter(formatter)
            logger.addHandler(fh)
    elif level:
        logger.setLevel(level)
    return logger


def resolve_workers(requested: int = None) -> int:
    """Worker count for a campaign: explicit request, else SWARMX_WORKERS, never below 1."""
    if requested is None:
        requested = _env_int("SWARMX_WORKERS", SWARMX_WORKERS)
    return max(1, int(requested))
