"""State-independent nonadiabatic geometric gates: pulse synthesis and open-system benchmarks."""

__version__ = "0.1.0"
