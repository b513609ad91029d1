from .errors import (
    TrackerError, DimensionMismatchError, DegenerateBoxError, ConfigError, ColorTableError,
    SequenceFormatError, ResultsFormatError, EvaluationError, ScenarioError,
)
from .settings import TrackerConfig, MODES, parse_config, load_config, format_config, config_hash
from .boxes import Bbox4DoF
from .tracker import Tracker, TrackerOutput, TrackerRecord, create, step, run_sequence
from .evaluation import (
    SequenceRecord, EvalResult, ResultsFile,
    load_sequence, iou, center_error, evaluate, write_results, read_results, filter_by_tag,
)
from .synthetic import Scenario, render, preset, export

__all__ = [
    # Errors
    'TrackerError', 'DimensionMismatchError', 'DegenerateBoxError', 'ConfigError', 'ColorTableError',
    'SequenceFormatError', 'ResultsFormatError', 'EvaluationError', 'ScenarioError',
    # Config
    'TrackerConfig', 'MODES', 'parse_config', 'load_config', 'format_config', 'config_hash',
    # Tracking
    'Bbox4DoF', 'Tracker', 'TrackerOutput', 'TrackerRecord', 'create', 'step', 'run_sequence',
    # Evaluation
    'SequenceRecord', 'EvalResult', 'ResultsFile',
    'load_sequence', 'iou', 'center_error', 'evaluate', 'write_results', 'read_results', 'filter_by_tag',
    # Synthetic
    'Scenario', 'render', 'preset', 'export',
]
