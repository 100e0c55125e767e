"""Fault-tolerant quantum error correction laboratory.

Monte-Carlo simulation of a verified-ancilla recovery protocol at the
Pauli-frame level, a closed-form crash-probability model, concatenation
thresholds, and maximum-computation-size surfaces.
"""

__version__ = "0.1.0"
