"""Named identity checks driven by exact multi-point sampling.

Each builder returns IdentityTest objects whose residuals must vanish at
every sampled point; the table consistency runner compares each symbolic
table entry against the pointwise canonical bracket, which is the oracle
that validates tables with no published counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .algebra import BracketTable, PolyExpr, gen_K
from .observables import EvalContext, Observable, ktilde_via_flow
from .phase import PhasePoint
from .poisson import (
    BracketEvaluator,
    IdentityTest,
    Verdict,
    sample_point,
    verify_identity,
)
from .scalars import GaussianRational, ModelParams, scalar_is_zero

__all__ = [
    "CheckResult",
    "build_identity_suite",
    "generator_observable",
    "mutate_table",
    "run_identity_suite",
    "table_consistency_check",
]


def generator_observable(gen) -> Observable:
    if gen.kind == "F":
        return Observable.F(gen.i)
    if gen.kind == "K":
        return Observable.K(gen.i, gen.j)
    if gen.kind == "Kt":
        return Observable.Ktilde(gen.i, gen.j)
    raise ValueError(f"generator {gen.name} has no observable")


@dataclass
class CheckResult:
    name: str
    verdict: Verdict

    @property
    def holds(self) -> bool:
        return self.verdict.holds


def _necklace_residuals(n: int):
    """Residuals of {F_m,F_n} = 0, {J_m,F_n} = n F_{m+n-2},
    {J_m,J_n} = (n-m) J_{m+n-2} up to indices 2N-1."""

    def residual(pt: PhasePoint):
        ev = BracketEvaluator(pt)
        ctx = ev.plain
        out = []
        top = 2 * n - 1
        for m in range(1, top + 1):
            for nn in range(m, top + 1):
                out.append(ev.bracket(Observable.F(m), Observable.F(nn)))
                if nn > m:
                    out.append(
                        ev.bracket(Observable.J(m), Observable.J(nn))
                        - ctx.J(m + nn - 2) * (nn - m)
                    )
        for m in range(1, top + 1):
            for nn in range(1, top + 1):
                out.append(
                    ev.bracket(Observable.J(m), Observable.F(nn))
                    - ctx.F(m + nn - 2) * nn
                )
        return out

    return residual


def _funcrel_residuals(n: int, mode: str):
    def residual(pt: PhasePoint):
        ctx = EvalContext(pt)
        kfun = ctx.K if mode == "continuous" else ctx.Ktilde
        out = []
        for i in range(0, n + 1):
            for j in range(i, n + 1):
                for nn in range(0, n + 1):
                    out.append(
                        ctx.F(j) * kfun(nn, i)
                        - ctx.F(i) * kfun(nn, j)
                        + ctx.F(nn) * kfun(i, j)
                    )
        return out

    return residual


def _funcrel_k0_residuals(n: int, mode: str):
    def residual(pt: PhasePoint):
        ctx = EvalContext(pt)
        kfun = ctx.K if mode == "continuous" else ctx.Ktilde
        out = []
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                out.append(
                    ctx.F(j) * kfun(0, i)
                    - ctx.F(i) * kfun(0, j)
                    - kfun(j, i) * n
                )
        return out

    return residual


def _funcrelred_residuals(n: int, mode: str):
    # F_j G_{n-1} - F_1 K_{n,j} - F_n G_{j-1} with G_m = K_{m+1,1}
    def residual(pt: PhasePoint):
        ctx = EvalContext(pt)
        kfun = ctx.K if mode == "continuous" else ctx.Ktilde
        out = []
        for j in range(2, n + 1):
            for nn in range(j + 1, n + 1):
                out.append(
                    ctx.F(j) * kfun(nn, 1)
                    - ctx.F(1) * kfun(nn, j)
                    - ctx.F(nn) * kfun(j, 1)
                )
        return out

    return residual


def _skew_residuals(n: int, mode: str):
    def residual(pt: PhasePoint):
        ctx = EvalContext(pt)
        kfun = ctx.K if mode == "continuous" else ctx.Ktilde
        out = []
        for m in range(1, 2 * n + 1):
            for nn in range(m, 2 * n + 1):
                out.append(kfun(m, nn) + kfun(nn, m))
        return out

    return residual


def _ktilde_crosscheck_residuals(n: int):
    def residual(pt: PhasePoint):
        ctx = EvalContext(pt)
        out = []
        for m in range(2, n + 1):
            for nn in range(1, m):
                out.append(ctx.Ktilde(m, nn) - ktilde_via_flow(m, nn, ctx))
        return out

    return residual


def _flow_identification_residuals(n: int):
    # K^(2)_{m,n} coincides with K_{m,n}
    def residual(pt: PhasePoint):
        ctx = EvalContext(pt)
        out = []
        for m in range(1, n + 1):
            for nn in range(1, n + 1):
                out.append(ctx.Kflow(2, m, nn) - ctx.K(m, nn))
        return out

    return residual


def build_identity_suite(
    n: int,
    mode: str,
    params: ModelParams,
    samples: int = 5,
    seed: int = 0,
) -> list:
    tests = [
        IdentityTest(
            name="necklace-FJ-brackets",
            n=n,
            params=params,
            residual=_necklace_residuals(n),
            samples=samples,
            seed=seed,
        ),
        IdentityTest(
            name="functional-relations",
            n=n,
            params=params,
            residual=_funcrel_residuals(n, mode),
            samples=samples,
            seed=seed + 1,
        ),
        IdentityTest(
            name="index0-elimination",
            n=n,
            params=params,
            residual=_funcrel_k0_residuals(n, mode),
            samples=samples,
            seed=seed + 2,
        ),
        IdentityTest(
            name="reduced-functional-relations",
            n=n,
            params=params,
            residual=_funcrelred_residuals(n, mode),
            samples=samples,
            seed=seed + 3,
        ),
        IdentityTest(
            name="skew-symmetry",
            n=n,
            params=params,
            residual=_skew_residuals(n, mode),
            samples=samples,
            seed=seed + 4,
        ),
        IdentityTest(
            name="second-flow-identification",
            n=n,
            params=params,
            residual=_flow_identification_residuals(n),
            samples=samples,
            seed=seed + 5,
        ),
    ]
    if mode == "discrete":
        tests.append(
            IdentityTest(
                name="deformed-invariant-crosscheck",
                n=n,
                params=params,
                residual=_ktilde_crosscheck_residuals(n),
                samples=samples,
                seed=seed + 6,
            )
        )
    return tests


def run_identity_suite(tests) -> list:
    return [CheckResult(name=t.name, verdict=verify_identity(t)) for t in tests]


def table_consistency_check(
    table: BracketTable,
    params: ModelParams,
    samples: int = 5,
    seed: int = 0,
) -> CheckResult:
    """Every table entry, evaluated at sampled exact points, must equal the
    pointwise canonical bracket of its generator pair literally."""
    observables = {g.name: generator_observable(g) for g in table.generators}
    witness: Optional[PhasePoint] = None
    bad_residual = None
    checked = 0
    for k in range(samples):
        pt = sample_point(table.n, params, seed=seed * 1_000_003 + 7919 * k)
        ev = BracketEvaluator(pt)
        svalue = GaussianRational(params.s) if params.exact else params.s

        def assign(g, _ev=ev, _sv=svalue):
            if g.kind == "s":
                return _sv
            return _ev.value(generator_observable(g))

        for (name_a, name_b), poly in table.entries.items():
            lhs = ev.bracket(observables[name_a], observables[name_b])
            rhs = poly.evaluate(assign)
            diff = lhs - rhs
            if not scalar_is_zero(diff):
                witness = pt
                bad_residual = f"{{{name_a},{name_b}}} residual {diff}"
                break
        if witness is not None:
            break
        checked += 1
    if witness is None:
        verdict = Verdict(status="holds", checked=checked)
    else:
        verdict = Verdict(
            status="refuted", checked=checked + 1, witness=witness, residual=bad_residual
        )
    return CheckResult(name="table-pointwise-consistency", verdict=verdict)


def mutate_table(table: BracketTable) -> BracketTable:
    """Negative control: add K_{2,1} to the {F_1, K_21} entry."""
    kname = "K21" if table.mode == "continuous" else "Kt21"
    key = ("F1", kname)
    entries = dict(table.entries)
    entries[key] = entries[key] + PolyExpr.var(
        gen_K(2, 1, table.mode)
    )
    return BracketTable(
        n=table.n, mode=table.mode, generators=table.generators, entries=entries
    )
