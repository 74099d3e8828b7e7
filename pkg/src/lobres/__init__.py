"""Threshold exceedance durations of limit order book liquidity and their regression models."""

__version__ = "0.1.0"
