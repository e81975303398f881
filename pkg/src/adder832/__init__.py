"""Fault-tolerant one-bit adder on the [[8,3,2]] colour code."""
__version__ = "0.1.0"
