"""Modulo-ADC massive MIMO uplink: folding, recovery, detection, rates."""

__version__ = "0.1.0"
