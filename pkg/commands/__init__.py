"""
ChiralQ CLI subcommands
"""
from .qfi import qfi_command
from .enhancement import enhancement_command
from .sucrose import sucrose_command
from .dichroism import dichroism_command
from .simulate import simulate_command
from .validate import validate_command

__all__ = [
    "qfi_command",
    "enhancement_command",
    "sucrose_command",
    "dichroism_command",
    "simulate_command",
    "validate_command",
]
