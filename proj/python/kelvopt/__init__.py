"""Topology optimization on truncated-octahedron lattices."""

from ._kelvopt import (
    BoundaryConditions,
    Element,
    FemSystem,
    GridSpec,
    Mask,
    Material,
    Mesh,
    MmosParams,
    PcgResult,
    TraceRecord,
    build_mesh,
    count_elements,
    count_points,
    density,
    density_jacobian_product,
    mask_value,
    optimize_file,
    phi,
    semi_axes,
    write_mesh_binary,
    write_mesh_vtk,
)

__all__ = [
    "BoundaryConditions",
    "Element",
    "FemSystem",
    "GridSpec",
    "Mask",
    "Material",
    "Mesh",
    "MmosParams",
    "PcgResult",
    "TraceRecord",
    "build_mesh",
    "count_elements",
    "count_points",
    "density",
    "density_jacobian_product",
    "mask_value",
    "optimize_file",
    "phi",
    "semi_axes",
    "write_mesh_binary",
    "write_mesh_vtk",
]

__version__ = "0.1.0"
