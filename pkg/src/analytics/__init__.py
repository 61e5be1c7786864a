"""
Analytical delivery model: direct expectations, closed forms and the optimizer
"""

from src.analytics import model_core, closed_form, optimizer

__all__ = ['model_core', 'closed_form', 'optimizer']
