"""Ogden soft-tissue virtual testing and inverse calibration."""

from ._core import (
    DivergenceError,
    HexMesh,
    InvalidArgument,
    InvalidState,
    NonConvergence,
    OgdenParams,
    ParseError,
    SimConfig,
    analytic_curve,
    calibrate,
    cauchy_stress,
    generate_box_mesh,
    mesh_quality,
    nominal_strain,
    parse_mesh,
    read_mesh_file,
    run_uniaxial,
    smooth_step,
    stable_time_step,
    strain_energy,
    uniaxial_nominal_stress,
    write_mesh_file,
)

__all__ = [
    "DivergenceError",
    "HexMesh",
    "InvalidArgument",
    "InvalidState",
    "NonConvergence",
    "OgdenParams",
    "ParseError",
    "SimConfig",
    "analytic_curve",
    "calibrate",
    "cauchy_stress",
    "generate_box_mesh",
    "mesh_quality",
    "nominal_strain",
    "parse_mesh",
    "read_mesh_file",
    "run_uniaxial",
    "smooth_step",
    "stable_time_step",
    "strain_energy",
    "uniaxial_nominal_stress",
    "write_mesh_file",
]
