"""Inverse spectral toolkit for periodic magnetic Schrodinger operators.

Thin package wrapper around the compiled extension; everything public
lives in ``tsi._core``.
"""

from ._core import (  # noqa: F401
    Error,
    assemble_hamiltonian,
    build_invariant_table,
    directions_for_cutoff,
    discrete_hamiltonian,
    invariant_table,
    lattice,
    load_problem,
    lowest_eigenvalues,
    magnetic_potential,
    make_field,
    make_lattice,
    make_potential,
    roundtrip,
    scalar_field,
    smoothed_wave_trace,
    validate_problem,
    vec2,
    __version__,
)
