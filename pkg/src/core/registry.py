"""
Command registry for the tben command-line interface.

Subcommand modules under src/tools register their entry points here on
import; main.py builds the argparse tree from the registry.
"""
import argparse
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

logger = logging.getLogger(__name__)

CommandFunc = Callable[[argparse.Namespace], int]
ConfigureFunc = Callable[[argparse.ArgumentParser], None]


@dataclass(frozen=True)
class RegisteredCommand:
    """A subcommand with its parser configuration and handler."""

    name: str
    help: str
    handler: CommandFunc
    configure: Optional[ConfigureFunc] = None


class CommandRegistry:
    """
    Registry of CLI subcommands.
    """

    _instance = None

    def __new__(cls, *args, **kwargs):
        """Singleton pattern to ensure only one registry exists."""
        if cls._instance is None:
            cls._instance = super(CommandRegistry, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        """Initialize the registry if not already initialized."""
        if self._initialized:
            return
        self._commands: Dict[str, RegisteredCommand] = {}
        self._initialized = True

    def register_command(self, name: str, help: str, configure: Optional[ConfigureFunc] = None):
        """
        Register a subcommand handler.

        Args:
            name: Subcommand name as typed on the command line
            help: One-line description shown by --help
            configure: Function adding the subcommand's arguments to its parser

        Returns:
            Decorator that registers the handler and returns it unchanged
        """
        def decorator(func: CommandFunc) -> CommandFunc:
            if name in self._commands:
                logger.debug(f"Replacing registered command: {name}")
            self._commands[name] = RegisteredCommand(name, help, func, configure)
            return func
        return decorator

    def build_parser(self, parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        """Attach one subparser per registered command."""
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True
        for command in self._commands.values():
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help)
            if command.configure is not None:
                command.configure(sub)
            sub.set_defaults(handler=command.handler)
        return parser


# Create and export the registry instance
registry = CommandRegistry()
