from .config import validate_environment, get_output_dir, get_bench_parallelism, get_fs
from .io import read_bytes, write_bytes_atomic, read_text, write_text_atomic, read_image, write_image, data_hash
from .debug import RunLog, open_run_log, log_run_start, log_run_end
from . import debug

__all__ = [
    # Config
    'validate_environment', 'get_output_dir', 'get_bench_parallelism', 'get_fs',
    # I/O
    'read_bytes', 'write_bytes_atomic', 'read_text', 'write_text_atomic',
    'read_image', 'write_image', 'data_hash',
    # Logging
    'RunLog', 'open_run_log', 'log_run_start', 'log_run_end', 'debug',
]
