"""Aggregated BLS signature gossip for checkpoint finalization."""

__version__ = "0.1.0"
