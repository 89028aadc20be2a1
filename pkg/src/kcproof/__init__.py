"""Knowledge-compilation proof artifact: decision-diagram stores, structured
circuit validators, proof checkers, and constructive refutation producers."""

__version__ = "0.1.0"
