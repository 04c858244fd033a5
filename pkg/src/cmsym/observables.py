"""Invariant families of the model and their pointwise evaluation.

F_k = tr(L^k), J_k = tr(X L^(k-1)), the skew family K_{m,n} = J_m F_n - J_n F_m,
the higher flows K^(a)_{m,n} = J_m F_{a+n-2} - J_n F_{a+m-2}, and the lattice
deformation Kt_{m,n} built from tr[X (1 - h/c0 L) L^(k-1)].  Index 0 members
(J_0, K_{a,0}) are first class; they need a nonsingular L.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArityError
from .phase import PhasePoint, SquareMatrix, build_L, build_X
from .scalars import alpha_sqrt_h, scalar_is_zero

__all__ = [
    "EvalContext",
    "GeneratorSet",
    "Observable",
    "evaluate",
    "eval_jet",
    "eval_n3_auxiliaries",
    "functional_relation_check",
    "ktilde_via_flow",
    "momentum_order",
]


@dataclass(frozen=True)
class Observable:
    """Symbolic descriptor of an invariant, normalized for skew-symmetry.

    kind is one of "F", "J", "K", "Kf", "Kt", "coord", "zero"; K-type indices
    are stored with m > n and a sign flag records the flip K_{n,m} = -K_{m,n}.
    """

    kind: str
    indices: tuple = ()
    sign: int = 1

    @classmethod
    def F(cls, k: int) -> "Observable":
        if k < 0:
            raise ArityError("F_k needs k >= 0")
        return cls("F", (k,))

    @classmethod
    def J(cls, k: int) -> "Observable":
        if k < 0:
            raise ArityError("J_k needs k >= 0")
        return cls("J", (k,))

    @classmethod
    def K(cls, m: int, n: int) -> "Observable":
        return cls._skew("K", (m, n))

    @classmethod
    def Ktilde(cls, m: int, n: int) -> "Observable":
        return cls._skew("Kt", (m, n))

    @classmethod
    def Kflow(cls, a: int, m: int, n: int) -> "Observable":
        if a < 1:
            raise ArityError("flow index a must be >= 1")
        if m == n:
            return cls.zero()
        if m < n:
            return cls("Kf", (a, n, m), sign=-1)
        return cls("Kf", (a, m, n))

    @classmethod
    def coord(cls, label: str, i: int) -> "Observable":
        if label not in ("x", "p"):
            raise ArityError("coordinate label must be 'x' or 'p'")
        return cls("coord", (label, i))

    @classmethod
    def zero(cls) -> "Observable":
        return cls("zero", ())

    @classmethod
    def _skew(cls, kind, mn):
        m, n = mn
        if m < 0 or n < 0:
            raise ArityError(f"{kind} indices must be nonnegative")
        if m == n:
            return cls.zero()
        if m < n:
            return cls(kind, (n, m), sign=-1)
        return cls(kind, (m, n))

    @property
    def name(self) -> str:
        prefix = "-" if self.sign < 0 else ""
        if self.kind == "zero":
            return "0"
        if self.kind in ("F", "J"):
            return f"{prefix}{self.kind}{self.indices[0]}"
        if self.kind in ("K", "Kt"):
            m, n = self.indices
            return f"{prefix}{self.kind}{m}{n}" if max(m, n) < 10 else f"{prefix}{self.kind}{m}_{n}"
        if self.kind == "Kf":
            a, m, n = self.indices
            return f"{prefix}Kf{a}_{m}{n}"
        label, i = self.indices
        return f"{prefix}{label}{i + 1}"


class EvalContext:
    """Memoizes Lax-matrix powers and trace data at one phase-space point.

    Caches are private to the context, so contexts can be used concurrently
    without coordination.
    """

    def __init__(self, pt: PhasePoint):
        self.pt = pt
        self._L = None
        self._pows = {}

    @property
    def n(self) -> int:
        return self.pt.n

    def L(self) -> SquareMatrix:
        if self._L is None:
            self._L = build_L(self.pt)
        return self._L

    def power(self, k: int) -> SquareMatrix:
        """L^k, with negative k through the exact inverse."""
        if k == 0:
            return SquareMatrix.identity(self.n)
        if k in self._pows:
            return self._pows[k]
        if k > 0:
            prev = self.power(k - 1)
            result = prev * self.L() if k > 1 else self.L()
        else:
            if -1 not in self._pows:
                self._pows[-1] = self.L().inverse()
            result = self._pows[-1] * self.power(k + 1) if k < -1 else self._pows[-1]
        self._pows[k] = result
        return result

    def F(self, k: int):
        if k == 0:
            return self.n
        return self.power(k).trace()

    def J(self, k: int):
        mat = self.power(k - 1)
        acc = 0
        for i in range(self.n):
            acc = acc + self.pt.x[i] * mat[i, i]
        return acc

    def K(self, m: int, n: int):
        return self.J(m) * self.F(n) - self.J(n) * self.F(m)

    def Kflow(self, a: int, m: int, n: int):
        return self.J(m) * self.F(a + n - 2) - self.J(n) * self.F(a + m - 2)

    def Jt(self, k: int):
        """tr[X (1 - h/c0 L) L^(k-1)] = J_k + alpha*sqrt(h) * J_{k+1}."""
        return self.J(k) + alpha_sqrt_h(self.pt.params) * self.J(k + 1)

    def Ktilde(self, m: int, n: int):
        return self.Jt(m) * self.F(n) - self.Jt(n) * self.F(m)

    def eval(self, obs: Observable):
        kind = obs.kind
        if kind == "zero":
            return 0
        if kind == "F":
            value = self.F(obs.indices[0])
        elif kind == "J":
            value = self.J(obs.indices[0])
        elif kind == "K":
            value = self.K(*obs.indices)
        elif kind == "Kt":
            value = self.Ktilde(*obs.indices)
        elif kind == "Kf":
            value = self.Kflow(*obs.indices)
        elif kind == "coord":
            label, i = obs.indices
            value = self.pt.x[i] if label == "x" else self.pt.p[i]
        else:
            raise ArityError(f"unknown observable kind {kind!r}")
        return value if obs.sign > 0 else -value


def evaluate(obs: Observable, pt: PhasePoint):
    return EvalContext(pt).eval(obs)


def eval_jet(obs: Observable, pt: PhasePoint, coord_index: int):
    """Evaluate with the given flat coordinate seeded; returns a Jet."""
    from .scalars import Jet

    seeded = pt.with_coord(coord_index, Jet(pt.coord(coord_index), 1))
    return EvalContext(seeded).eval(obs)


def ktilde_via_flow(m: int, n: int, ctx: EvalContext):
    """Cross-check evaluator: Kt_{m,n} = K_{m,n} + alpha*sqrt(h)*K^(1)_{m+1,n+1}."""
    return ctx.K(m, n) + alpha_sqrt_h(ctx.pt.params) * ctx.Kflow(1, m + 1, n + 1)


@dataclass(frozen=True)
class GeneratorSet:
    """The N(N+1)/2 linearly independent invariants for given N and mode,
    plus the 2N-1 functionally independent ones."""

    n: int
    mode: str
    members: tuple
    fi_subset: tuple

    @classmethod
    def for_n(cls, n: int, mode: str = "continuous") -> "GeneratorSet":
        if mode not in ("continuous", "discrete"):
            raise ArityError(f"unknown mode {mode!r}")
        kmaker = Observable.K if mode == "continuous" else Observable.Ktilde
        members = [Observable.F(k) for k in range(1, n + 1)]
        for m in range(2, n + 1):
            for j in range(1, m):
                members.append(kmaker(m, j))
        fi = [Observable.F(k) for k in range(1, n + 1)]
        fi += [kmaker(m + 1, 1) for m in range(1, n)]
        return cls(n=n, mode=mode, members=tuple(members), fi_subset=tuple(fi))


def momentum_order(obs: Observable, pt: PhasePoint, max_order=None) -> int:
    """Degree of the observable in the momenta, detected exactly.

    Evaluates at momenta scaled by integers lam = 1..D+2 and takes finite
    differences; the top nonvanishing difference level is the degree.
    """
    if max_order is None:
        max_order = _order_guess(obs) + 2
    values = [
        EvalContext(pt.scale_momenta(lam)).eval(obs)
        for lam in range(1, max_order + 3)
    ]
    level = 0
    degree = -1
    current = values
    while len(current) > 1:
        if not all(scalar_is_zero(v) for v in current):
            degree = level
        current = [b - a for a, b in zip(current, current[1:])]
        level += 1
    if not all(scalar_is_zero(v) for v in current):
        raise ArithmeticError(
            f"{obs.name} grows faster than degree {max_order} in the momenta"
        )
    return max(degree, 0)


def _order_guess(obs: Observable) -> int:
    if obs.kind == "F":
        return obs.indices[0]
    if obs.kind == "J":
        return max(obs.indices[0] - 1, 0)
    if obs.kind == "K":
        return obs.indices[0] + obs.indices[1] - 1
    if obs.kind == "Kt":
        return obs.indices[0] + obs.indices[1]
    if obs.kind == "Kf":
        a, m, n = obs.indices
        return max(a + m + n - 3, 0)
    return 1


def functional_relation_check(i: int, j: int, n: int, pt: PhasePoint, mode="continuous"):
    """Residual of F_j K_{n,i} - F_i K_{n,j} + F_n K_{i,j} (Kt in discrete
    mode); the contract is exact zero."""
    ctx = EvalContext(pt)
    kfun = ctx.K if mode == "continuous" else ctx.Ktilde
    return (
        ctx.F(j) * kfun(n, i)
        - ctx.F(i) * kfun(n, j)
        + ctx.F(n) * kfun(i, j)
    )


def eval_n3_auxiliaries(pt: PhasePoint) -> dict:
    """Three-body helpers: A_i = p_i**2 + sum_{j != i} nu**2/(x_i - x_j)**2 and
    Y_{i,j} = (p_i x_j + p_j x_i)/(x_i - x_j)**2, with A_1+A_2+A_3 = F_2."""
    if pt.n != 3:
        raise ArityError("the A and Y auxiliaries are defined for N = 3")
    nu2 = pt.params.nu * pt.params.nu
    a_vals = []
    for i in range(3):
        acc = pt.p[i] * pt.p[i]
        for j in range(3):
            if j == i:
                continue
            d = pt.x[i] - pt.x[j]
            acc = acc + nu2 / (d * d)
        a_vals.append(acc)
    y_vals = {}
    for i in range(3):
        for j in range(i + 1, 3):
            d = pt.x[i] - pt.x[j]
            y_vals[(i + 1, j + 1)] = (pt.p[i] * pt.x[j] + pt.p[j] * pt.x[i]) / (d * d)
    a_sum = a_vals[0] + a_vals[1] + a_vals[2]
    return {"A": tuple(a_vals), "Y": y_vals, "A_sum": a_sum}
