from typing import Protocol

from app.cli.commands import capacity, simulate, structure, sweep, validate
from app.core.errors import InvalidInputError
from app.models import CommandOutput, RunConfig


class CommandHandler(Protocol):
    def __call__(self, config: RunConfig, *, strict: bool) -> CommandOutput: ...


commands: dict[str, CommandHandler] = {
    "validate": validate.run,
    "structure": structure.run,
    "capacity": capacity.run,
    "sweep": sweep.run,
    "simulate": simulate.run,
}


def run_command(command: str, config: RunConfig, *, strict: bool = False) -> CommandOutput:
    handler = commands.get(command)
    if handler is None:
        raise InvalidInputError(f"unknown command {command!r}")
    return handler(config, strict=strict)
