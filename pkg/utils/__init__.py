"""
Utility functions and classes
"""
from .config import Config, load_config
from .file_utils import OutputDirectory, format_number
from .log_utils import setup_logging

__all__ = [
    'Config', 'load_config',
    'OutputDirectory', 'format_number',
    'setup_logging',
]
