"""
icardmaps Services

Domain logic and utilities:
- ordinals, ordinal_parser: Ordinal terms and their syntax
- topology: Icard topology ranks and neighborhoods
- formulas, gl_prover: GL syntax, tableau prover, tree models
- bouquet: Omega-bouquets, enumerations, model checking
- dmap, dmap_checks: D-maps onto bouquets and their certificates
- satisfy: Formula streams and end-to-end witnesses
- commands: Dispatch shared by the CLI and the routers
- file_ops: File read/write operations
- config_manager: Engine configuration management
- synthetic_data: Sample bouquets and random models
"""
from icardmaps.services import (
    bouquet,
    commands,
    config_manager,
    dmap,
    dmap_checks,
    file_ops,
    formulas,
    gl_prover,
    ordinal_parser,
    ordinals,
    satisfy,
    synthetic_data,
    topology,
)

__all__ = [
    "ordinals",
    "ordinal_parser",
    "topology",
    "formulas",
    "gl_prover",
    "bouquet",
    "dmap",
    "dmap_checks",
    "satisfy",
    "commands",
    "file_ops",
    "config_manager",
    "synthetic_data",
]
