"""CLI subcommands.

Every module in this package that defines `COMMAND` is a subcommand:

    COMMAND = "track"
    HELP = "one line for --help"

    def add_arguments(parser): ...
    def run(args) -> int: ...

`load_commands()` discovers them, so adding a file adds a subcommand.
"""

import importlib
import pkgutil


def load_commands() -> dict:
    """{name: module} for every command module in this package, sorted by name."""
    commands = {}
    for info in sorted(pkgutil.iter_modules(__path__), key=lambda m: m.name):
        if info.name.startswith("_"):
            continue
        module = importlib.import_module(f"{__name__}.{info.name}")
        name = getattr(module, "COMMAND", None)
        if name is None:
            continue
        if name in commands:
            raise ValueError(f"duplicate command {name!r} in {info.name}")
        commands[name] = module
    return commands
