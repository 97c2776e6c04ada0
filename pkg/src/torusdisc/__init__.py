"""Discrepancies, torus energies and weak Latin hypercubes at desk scale."""

from .core import (
    EnergyTriple,
    GridWeights,
    Row,
    RowSumError,
    Scalar,
    SymmetryError,
    TorusGrid,
    TripleConstants,
    WeightedPointSet,
    as_fraction,
    as_float,
    canonical_triple,
    discrepancy_triple,
    product_kernel,
    triple_constants,
)

__version__ = "0.1.0"
