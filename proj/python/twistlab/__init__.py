"""Twisted cohomological equations on square-tiled surfaces."""

from ._twistlab import (
    Error,
    Grid,
    Origami,
    command_names,
    config_reference,
    l_shaped,
    load_surface,
    lowest_eigenpairs,
    operators,
    parse_surface,
    quaternion,
    run,
    solve,
    torus,
    two_square_cover,
)

__version__ = "0.1.0"

__all__ = [
    "Error",
    "Grid",
    "Origami",
    "command_names",
    "config_reference",
    "l_shaped",
    "load_surface",
    "lowest_eigenpairs",
    "operators",
    "parse_surface",
    "quaternion",
    "run",
    "solve",
    "torus",
    "two_square_cover",
]
