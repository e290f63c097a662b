"""
Command line front end
"""
from .cli_interface import build_parser, main

__all__ = [
    'build_parser',
    'main',
]
