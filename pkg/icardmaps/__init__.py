"""
icardmaps

Ordinal Icard topologies, the provability logic GL, and d-maps from
ordinal spaces onto omega-bouquets.
"""
__version__ = "0.1.0"

__all__ = ["__version__"]
