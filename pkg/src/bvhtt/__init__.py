"""Minimal models of L-infinity and unimodular L-infinity structures via BV integration."""
__version__ = "0.1.0"
