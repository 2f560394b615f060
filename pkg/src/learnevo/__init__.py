"""Deep-RL parameter control for evolutionary algorithms."""
__version__ = "0.1.0"
