"""Score a results file against a sequence's groundtruth.

    python src/main.py eval out/bike1.results.txt data/seq/bike1

Prints precision@20, AUC and fps with three decimals and writes
`<out>/<sequence>.metrics.txt` with both curves.
"""

from pathlib import Path

from jsar.evaluation import evaluate, load_sequence, read_results, write_metrics
from tracker_utils.config import get_output_dir
from tracker_utils.debug import log_sequence_output

COMMAND = "eval"
HELP = "compute precision/success metrics for a results file"


def add_arguments(parser):
    parser.add_argument("results", help="results file written by track")
    parser.add_argument("sequence", help="sequence directory with groundtruth.txt")
    parser.add_argument("--out", help="output directory (default: $JSAR_OUTPUT_DIR)")


def run(args) -> int:
    results = read_results(args.results)
    record = load_sequence(args.sequence, require_truth=True)
    metrics = evaluate(results, record)

    print(f"precision@20: {metrics.precision_20:.3f}")
    print(f"AUC: {metrics.auc:.3f}")
    print(f"fps: {metrics.fps:.3f}")

    out = Path(args.out or get_output_dir())
    path = out / f"{record.name}.metrics.txt"
    write_metrics(metrics, str(path), sequence=record.name)
    log_sequence_output(record.name, len(record), metrics.fps, metrics.precision_20, metrics.auc)
    print(f"  metrics: {path}")
    return 0
