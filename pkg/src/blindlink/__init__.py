"""Frequency-multiplexed secrecy coding over antenna blind regions."""

__version__ = "0.1.0"
