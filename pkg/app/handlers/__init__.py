from .command_handlers import COMMANDS

__all__ = ["COMMANDS"]
