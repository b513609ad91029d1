"""jsar-tracker command line - discovers and dispatches the subcommands in src/commands.

    python src/main.py track <seq_dir> [--config F] [--mode M] [--out D] [--overlay] [--init x,y,w,h]
    python src/main.py eval <results_file> <seq_dir> [--out D]
    python src/main.py synth <preset> [--out D] [--seed N]
    python src/main.py bench [seq_dir ...] [--presets a,b] [--sweep k=v1,v2] [--tag T] [--config F] [--mode M]

Exit codes: 0 success, 2 bad input layout, 3 configuration error, 4 runtime failure,
64 bad command line.
"""

import argparse
import sys
import traceback

from commands import load_commands
from jsar.errors import ConfigError
from tracker_utils.config import is_logging_enabled, validate_environment
from tracker_utils.debug import get_log_dir, log_run_end, log_run_start
from tracker_utils.runner import EXIT_OK, EXIT_USAGE, format_error, resolve_exit_code, write_error_log


class CommandParser(argparse.ArgumentParser):
    """Exits with EXIT_USAGE on a bad command line; subcommand parsers inherit it."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


def build_parser(commands: dict) -> argparse.ArgumentParser:
    parser = CommandParser(prog="jsar", description="Real-time tracker with joint scale and aspect estimation")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, module in commands.items():
        sub = subparsers.add_parser(name, help=module.HELP, description=module.__doc__,
                                    formatter_class=argparse.RawDescriptionHelpFormatter)
        module.add_arguments(sub)
    return parser


def main(argv=None) -> int:
    commands = load_commands()
    args = build_parser(commands).parse_args(argv)

    log_run_start(args.command)
    try:
        try:
            validate_environment()
        except ValueError as e:
            raise ConfigError("environment", str(e)) from None
        code = commands[args.command].run(args)
    except Exception as e:
        code = resolve_exit_code(e)
        message = format_error(e)
        print(message, file=sys.stderr)
        log_run_end(args.command, status="failed", error=message)
        if is_logging_enabled():
            write_error_log(get_log_dir(), code, message, traceback.format_exc())
        return code

    log_run_end(args.command, status="completed" if code == EXIT_OK else "failed")
    return code


if __name__ == "__main__":
    sys.exit(main())
