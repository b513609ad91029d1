"""Environment configuration.

Single source of truth for output/log locations and process-level switches.
Everything has a default, so a local run needs no environment at all:

    JSAR_OUTPUT_DIR    default output directory for commands (data/dev)
    LOG_DIR            explicit log directory (else logs/<run timestamp>/)
    RUN_ID             run identifier; `<name>-YYYYMMDD-HHMMSS` also fixes the log timestamp
    ENABLE_LOGGING     "true" turns on the CSV/TSV debug logs
    BENCH_PARALLELISM  forked bench workers (default 1 = sequential)
    JSAR_CN_TABLE      color-names table file used when the tracker config names none
"""

import os
from pathlib import Path


# =============================================================================
# Environment
# =============================================================================

def get_run_id() -> str:
    """Get current run ID."""
    return os.environ.get('RUN_ID', 'unknown')


def get_output_dir() -> str:
    """Default output directory for command results (override with JSAR_OUTPUT_DIR)."""
    return os.environ.get('JSAR_OUTPUT_DIR', 'data/dev')


def get_bench_parallelism() -> int:
    """Number of forked bench workers, at least 1."""
    return max(1, int(os.environ.get('BENCH_PARALLELISM', '1')))


def get_cn_table_path() -> str:
    """Color-names table from the environment, empty when unset."""
    return os.environ.get('JSAR_CN_TABLE', '')


def is_logging_enabled() -> bool:
    return os.environ.get('ENABLE_LOGGING', '').lower() == 'true'


# =============================================================================
# Environment Validation
# =============================================================================

def validate_environment():
    """Check the variables that must parse. Raises ValueError naming the variable."""
    raw = os.environ.get('BENCH_PARALLELISM')
    if raw is not None:
        try:
            if int(raw) < 1:
                raise ValueError
        except ValueError:
            raise ValueError(f"BENCH_PARALLELISM must be a positive integer, got {raw!r}") from None

    table = get_cn_table_path()
    if table and not Path(table).exists():
        raise ValueError(f"JSAR_CN_TABLE points to a missing file: {table}")


# =============================================================================
# fsspec backend
# =============================================================================

def get_fs(uri: str = ""):
    """fsspec filesystem for a URI, cached by fsspec.

    Local paths get the local filesystem with auto_mkdir so parent dirs are
    created transparently on open. Other protocols dispatch on the prefix.
    """
    import fsspec
    if "://" in uri and not uri.startswith("file://"):
        return fsspec.filesystem(uri.split("://", 1)[0])
    return fsspec.filesystem("file", auto_mkdir=True)
