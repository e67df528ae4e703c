"""Structural identifiability of linear compartment models."""

from .coeffs import (
    GcdReductionWarning,
    IoEquation,
    char_poly,
    char_poly_cycle_oracle,
    coefficient_map,
    cycle_map,
    io_equation,
    minor_det_poly,
    sum_of_paths_map,
)
from .documents import DocumentError, load_fixture, load_model, parse_model, serialize_model
from .engine import ICMResult, IdentReport, Verdict, analyze, check_icm, is_identifiable_function, jacobian
from .exact import DegeneratePointError, Dual, ExactMatrix, UniPolynomial, det_exact, exact_rank
from .graphs import (
    Cycle,
    DirectedGraph,
    GraphError,
    cycle_space_basis,
    inductively_strongly_connected,
    is_strongly_connected,
    shortest_paths,
    simple_cycles,
)
from .model import CompartmentModel, ModelError, ParameterPoint, build_matrix, random_point, validate
from .transforms import (
    TieredUnionSpec,
    io_leak_variant,
    scaling_reparam,
    single_leak_variant,
    suggest_variants,
    tiered_union,
)

__version__ = "0.1.0"
