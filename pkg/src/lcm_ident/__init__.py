"""Structural identifiability of linear compartmental models, with a focus
on the five one-input one-output mammillary families."""

__version__ = "0.1.0"
