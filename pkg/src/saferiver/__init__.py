"""Safe-RL river-following benchmark suite."""

__version__ = "0.1.0"
