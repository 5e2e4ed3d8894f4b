"""
icardmaps API Routers

One router module per domain:
- ordinals: Ordinal calculator
- topology: Icard topology ranks and neighborhoods
- gl: GL prover and countermodels
- bouquets: Bouquet ranks, model checking, inspection
- dmaps: D-map evaluation, witnesses, selftests
- satisfy: End-to-end witnesses
- config: Engine configuration
- reports: Saved selftest reports
"""
from icardmaps.routers import bouquets, config, dmaps, gl, ordinals, reports, satisfy, topology

__all__ = ["ordinals", "topology", "gl", "bouquets", "dmaps", "satisfy", "config", "reports"]
