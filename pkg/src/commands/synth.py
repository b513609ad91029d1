"""Render a synthetic preset to a sequence directory.

    python src/main.py synth zoom_in --out data/synth --seed 7

Writes `<out>/<preset>/img/00001.png ...`, `groundtruth.txt` and `tags.txt`.
Same preset and seed always produce byte-identical files.
"""

from pathlib import Path

from jsar.synthetic import PRESETS, export, preset
from tracker_utils.config import get_output_dir

COMMAND = "synth"
HELP = "render a synthetic preset as a sequence directory"


def add_arguments(parser):
    parser.add_argument("preset", choices=sorted(PRESETS), help="preset name")
    parser.add_argument("--out", help="output directory (default: $JSAR_OUTPUT_DIR)")
    parser.add_argument("--seed", type=int, default=0, help="texture seed (unsigned 64-bit)")


def run(args) -> int:
    scenario = preset(args.preset, seed=args.seed)
    target = Path(args.out or get_output_dir()) / scenario.name
    print(f"Rendering {scenario.name} (seed={scenario.seed}, {scenario.frame_count} frames)...")
    export(scenario, str(target))
    print(f"  sequence: {target}")
    return 0
