"""
Utility functions for the V2X delivery model
"""

from src.utils.data_utils import (
    save_summary,
    load_json,
    write_csv,
    to_json
)
from src.utils.config import Settings, get_settings, setup_logging

__all__ = [
    'save_summary',
    'load_json',
    'write_csv',
    'to_json',
    'Settings',
    'get_settings',
    'setup_logging'
]
