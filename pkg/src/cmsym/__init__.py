"""Symmetry algebras of the Calogero-Moser system and its symplectic
time discretization: exact symbolic construction, pointwise verification,
and dynamical simulation."""

from .algebra import (
    BracketTable,
    Generator,
    PolyExpr,
    build_table,
    closed_bracket,
    contract_discrete_table,
    ideal_check,
    table_to_json,
    table_to_text,
)
from .observables import EvalContext, GeneratorSet, Observable, evaluate
from .phase import PhasePoint, SquareMatrix, build_L, build_M, build_Mtilde, build_X
from .poisson import bracket, jacobi_check, sample_point, verify_identity
from .scalars import GaussianRational, Jet, ModelParams, alpha_sqrt_h, c0, gr

__version__ = "0.1.0"

__all__ = [
    "BracketTable",
    "EvalContext",
    "GaussianRational",
    "Generator",
    "GeneratorSet",
    "Jet",
    "ModelParams",
    "Observable",
    "PhasePoint",
    "PolyExpr",
    "SquareMatrix",
    "alpha_sqrt_h",
    "bracket",
    "build_L",
    "build_M",
    "build_Mtilde",
    "build_X",
    "build_table",
    "c0",
    "closed_bracket",
    "contract_discrete_table",
    "evaluate",
    "gr",
    "ideal_check",
    "jacobi_check",
    "sample_point",
    "table_to_json",
    "table_to_text",
    "verify_identity",
    "__version__",
]
