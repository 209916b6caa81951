"""Surrogate multi-zone HVAC control stack: RC building simulator, PPO policy
library, decision-pretrained transformer, and a benchmark harness."""

__version__ = "0.1.0"
