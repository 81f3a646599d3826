"""portnav: port-navigation vessel simulator, RL training harness, and
dynamics-robustness sweep tooling."""

__version__ = "0.1.0"
