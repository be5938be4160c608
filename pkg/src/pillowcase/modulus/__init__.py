"""Discrete extremal length on quad meshes of flat surfaces."""

from .cover import AbelianClass, FreeHomotopyClass, build_cover, shortest_cycle
from .mesh import (MeshGraph, build_pillowcase_mesh, build_rectangle_mesh,
                   build_torus_mesh)
from .qp import ConstraintRows, solve_qp
from .solver import (SolverOptions, SolverReport, cutting_plane,
                     discrete_extremal_length, extremal_density_field,
                     extremal_length, rectangle_crossing_length,
                     torus_winding_length)

__all__ = [
    "AbelianClass", "FreeHomotopyClass", "build_cover", "shortest_cycle",
    "MeshGraph", "build_pillowcase_mesh", "build_rectangle_mesh",
    "build_torus_mesh", "ConstraintRows", "solve_qp",
    "SolverOptions", "SolverReport", "cutting_plane",
    "discrete_extremal_length", "extremal_density_field", "extremal_length",
    "rectangle_crossing_length", "torus_winding_length",
]
