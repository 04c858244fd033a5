"""Canonical Poisson brackets at a point via forward jets, random exact
sampling with singularity avoidance, and multi-point identity testing.

A nonzero residual of a rational identity vanishes only on a measure-zero
set, so exact evaluation at generic rational points either refutes an
identity with a concrete witness or corroborates it across samples.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import SamplerError, SingularityError, SingularMatrixError
from .observables import EvalContext, Observable
from .phase import PhasePoint
from .scalars import (
    GaussianRational,
    Jet,
    ModelParams,
    jet_deriv,
    scalar_is_exact,
    scalar_is_zero,
    scalar_mag,
)

__all__ = [
    "BracketEvaluator",
    "IdentityTest",
    "SamplerConfig",
    "Verdict",
    "bracket",
    "bracket_fn",
    "gradient",
    "jacobi_check",
    "sample_point",
    "seed_coordinate",
    "verify_identity",
]


def seed_coordinate(pt: PhasePoint, idx: int) -> PhasePoint:
    """Wrap one flat coordinate in a unit-derivative jet."""
    return pt.with_coord(idx, Jet(pt.coord(idx), 1))


def _as_fn(f) -> Callable[[PhasePoint], object]:
    if isinstance(f, Observable):
        return lambda pt: EvalContext(pt).eval(f)
    if callable(f):
        return f
    raise TypeError(f"not an observable or callable: {f!r}")


def gradient(f, pt: PhasePoint) -> list:
    """All 2N partial derivatives of f, one seeded jet pass per coordinate."""
    fn = _as_fn(f)
    return [jet_deriv(fn(seed_coordinate(pt, idx))) for idx in range(2 * pt.n)]


def bracket(f, g, pt: PhasePoint):
    """{f, g} = sum_i (df/dx_i dg/dp_i - df/dp_i dg/dx_i) at pt."""
    gf = gradient(f, pt)
    gg = gradient(g, pt)
    n = pt.n
    acc = 0
    for i in range(n):
        acc = acc + (gf[i] * gg[n + i] - gf[n + i] * gg[i])
    return acc


def bracket_fn(f, g) -> Callable[[PhasePoint], object]:
    """The bracket as a new observable-like callable; nests for second
    derivatives since jets nest."""
    return lambda pt: bracket(f, g, pt)


def jacobi_check(f, g, h, pt: PhasePoint):
    """{f,{g,h}} + {g,{h,f}} + {h,{f,g}}; contract: exactly zero."""
    return (
        bracket(f, bracket_fn(g, h), pt)
        + bracket(g, bracket_fn(h, f), pt)
        + bracket(h, bracket_fn(f, g), pt)
    )


class BracketEvaluator:
    """Shares seeded evaluation contexts across many observables at one point.

    Building L and its powers dominates the cost of a bracket; with the 2N
    seeded contexts cached, every additional observable pair costs only trace
    reads and a short sum.
    """

    def __init__(self, pt: PhasePoint):
        self.pt = pt
        self.plain = EvalContext(pt)
        self._seeded = None
        self._grads = {}

    def _contexts(self):
        if self._seeded is None:
            self._seeded = [
                EvalContext(seed_coordinate(self.pt, idx))
                for idx in range(2 * self.pt.n)
            ]
        return self._seeded

    def value(self, obs: Observable):
        return self.plain.eval(obs)

    def gradient(self, obs: Observable):
        if obs not in self._grads:
            self._grads[obs] = tuple(
                jet_deriv(ctx.eval(obs)) for ctx in self._contexts()
            )
        return self._grads[obs]

    def bracket(self, a: Observable, b: Observable):
        ga = self.gradient(a)
        gb = self.gradient(b)
        n = self.pt.n
        acc = 0
        for i in range(n):
            acc = acc + (ga[i] * gb[n + i] - ga[n + i] * gb[i])
        return acc


@dataclass(frozen=True)
class SamplerConfig:
    """Bounds for random rational phase-space points."""

    num_range: tuple = (-20, 20)
    den_range: tuple = (1, 8)
    min_separation: float = 1e-8
    max_attempts: int = 500


def sample_point(
    n: int,
    params: ModelParams,
    seed: int,
    config: SamplerConfig = SamplerConfig(),
) -> PhasePoint:
    """Deterministic random point with pairwise-distinct positions.

    Exact params give Gaussian-rational coordinates with bounded numerators
    and denominators; float params reuse the same rationals as floats.
    """
    rng = random.Random(seed)
    lo, hi = config.num_range
    dlo, dhi = config.den_range

    def draw():
        return Fraction(rng.randint(lo, hi), rng.randint(dlo, dhi))

    for _ in range(config.max_attempts):
        xs = [draw() for _ in range(n)]
        if len(set(xs)) != n:
            continue
        if not params.exact and any(
            abs(float(a - b)) < config.min_separation
            for i, a in enumerate(xs)
            for b in xs[i + 1 :]
        ):
            continue
        ps = [draw() for _ in range(n)]
        if params.exact:
            x = tuple(GaussianRational(v) for v in xs)
            p = tuple(GaussianRational(v) for v in ps)
        else:
            x = tuple(complex(float(v)) for v in xs)
            p = tuple(complex(float(v)) for v in ps)
        return PhasePoint(x=x, p=p, params=params)
    raise SamplerError(f"could not sample {n} separated positions")


@dataclass
class IdentityTest:
    """A residual that must vanish at every sampled point.

    residual maps a PhasePoint to one scalar or an iterable of scalars;
    singular sample points (e.g. L not invertible for J_0) are rejected and
    redrawn rather than counted either way.
    """

    name: str
    n: int
    params: ModelParams
    residual: Callable[[PhasePoint], object]
    samples: int = 5
    seed: int = 0
    tol: float = 1e-9
    config: SamplerConfig = field(default_factory=SamplerConfig)


@dataclass
class Verdict:
    status: str  # "holds" or "refuted"
    checked: int
    witness: Optional[PhasePoint] = None
    residual: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def _residual_values(raw):
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [raw]


def verify_identity(test: IdentityTest) -> Verdict:
    """Evaluate the residual at independent sample points.

    Exact mode demands literal zero; float mode compares magnitudes against
    the tolerance.  Any nonzero exact residual refutes with a witness.
    """
    checked = 0
    sub = 0
    while checked < test.samples:
        pt = sample_point(
            test.n, test.params, seed=test.seed * 1_000_003 + checked * 101 + sub,
            config=test.config,
        )
        try:
            values = _residual_values(test.residual(pt))
        except (SingularityError, SingularMatrixError):
            sub += 1
            if sub > test.config.max_attempts:
                raise SamplerError(f"{test.name}: too many rejected sample points")
            continue
        for v in values:
            bad = (
                not scalar_is_zero(v)
                if scalar_is_exact(v)
                else scalar_mag(v) > test.tol
            )
            if bad:
                return Verdict(
                    status="refuted",
                    checked=checked + 1,
                    witness=pt,
                    residual=str(v),
                )
        checked += 1
    return Verdict(status="holds", checked=checked)
