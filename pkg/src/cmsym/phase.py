"""Phase-space points and Lax-pair machinery.

Builds the matrices L, M, X and the lattice matrix Mt over any scalar field,
with generic dense matrix arithmetic (exact rational Gaussian elimination in
exact mode, magnitude pivoting with a condition guard in float mode).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import SingularityError, SingularMatrixError
from .scalars import (
    ModelParams,
    c0,
    scalar_is_exact,
    scalar_is_zero,
    scalar_mag,
)

__all__ = [
    "EPS_SEP",
    "PhasePoint",
    "SquareMatrix",
    "build_L",
    "build_M",
    "build_Mtilde",
    "build_X",
    "ensure_separated",
]

EPS_SEP = 1e-8  # minimum pairwise separation accepted in float mode

_COND_LIMIT = 1e14


@dataclass(frozen=True)
class PhasePoint:
    """An N-body configuration (positions, momenta) over some scalar field.

    Continuous-model positions q and lattice positions x share this storage;
    coordinates may be exact, floating, complex, or jet-valued.
    """

    x: tuple
    p: tuple
    params: ModelParams

    @property
    def n(self) -> int:
        return len(self.x)

    def coord(self, idx: int):
        """Flat coordinate access: 0..n-1 positions, n..2n-1 momenta."""
        if idx < self.n:
            return self.x[idx]
        return self.p[idx - self.n]

    def with_coord(self, idx: int, value) -> "PhasePoint":
        if idx < self.n:
            x = self.x[:idx] + (value,) + self.x[idx + 1 :]
            return replace(self, x=x)
        j = idx - self.n
        p = self.p[:j] + (value,) + self.p[j + 1 :]
        return replace(self, p=p)

    def with_xp(self, x, p) -> "PhasePoint":
        return replace(self, x=tuple(x), p=tuple(p))

    def scale_momenta(self, lam) -> "PhasePoint":
        return replace(self, p=tuple(pi * lam for pi in self.p))

    def to_float(self) -> "PhasePoint":
        from .scalars import to_complex

        return PhasePoint(
            x=tuple(to_complex(v) for v in self.x),
            p=tuple(to_complex(v) for v in self.p),
            params=self.params.to_float(),
        )


def ensure_separated(pt: PhasePoint, eps: float = EPS_SEP) -> None:
    """Reject coincident positions: exact inequality in exact mode, a minimum
    separation in float mode."""
    n = pt.n
    for i in range(n):
        for j in range(i + 1, n):
            diff = pt.x[i] - pt.x[j]
            if scalar_is_exact(diff):
                if scalar_is_zero(diff):
                    raise SingularityError(f"coincident positions x_{i+1} = x_{j+1}")
            elif scalar_mag(diff) < eps:
                raise SingularityError(
                    f"positions x_{i+1}, x_{j+1} closer than {eps}"
                )


class SquareMatrix:
    """Immutable dense square matrix over a duck-typed scalar field."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(row) for row in rows)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("matrix must be square")
        self.rows = rows

    @property
    def dim(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "SquareMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, entries) -> "SquareMatrix":
        entries = tuple(entries)
        n = len(entries)
        return cls(
            [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return SquareMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def __sub__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return SquareMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def __mul__(self, other):
        if isinstance(other, SquareMatrix):
            n = self.dim
            cols = list(zip(*other.rows))
            return SquareMatrix(
                [
                    [_dot(self.rows[i], cols[j]) for j in range(n)]
                    for i in range(n)
                ]
            )
        return SquareMatrix([[a * other for a in row] for row in self.rows])

    def __rmul__(self, other):
        return SquareMatrix([[other * a for a in row] for row in self.rows])

    def __neg__(self):
        return SquareMatrix([[-a for a in row] for row in self.rows])

    def trace(self):
        acc = self.rows[0][0]
        for i in range(1, self.dim):
            acc = acc + self.rows[i][i]
        return acc

    def transpose(self) -> "SquareMatrix":
        return SquareMatrix(list(zip(*self.rows)))

    def conjugate_transpose(self) -> "SquareMatrix":
        return SquareMatrix(
            [[a.conjugate() for a in col] for col in zip(*self.rows)]
        )

    def power(self, k: int) -> "SquareMatrix":
        if k < 0:
            return self.inverse().power(-k)
        result = SquareMatrix.identity(self.dim)
        for _ in range(k):
            result = result * self
        return result

    def determinant(self):
        n = self.dim
        rows = [list(row) for row in self.rows]
        sign = 1
        det = 1
        for col in range(n):
            piv = _select_pivot(rows, col)
            if piv is None:
                return det * 0
            if piv != col:
                rows[piv], rows[col] = rows[col], rows[piv]
                sign = -sign
            pivot = rows[col][col]
            det = det * pivot
            for r in range(col + 1, n):
                if scalar_is_zero(rows[r][col]):
                    continue
                factor = rows[r][col] / pivot
                rows[r] = [
                    a - factor * b for a, b in zip(rows[r], rows[col])
                ]
        return det * sign

    def inverse(self) -> "SquareMatrix":
        n = self.dim
        aug = [
            list(row) + [1 if i == j else 0 for j in range(n)]
            for i, row in enumerate(self.rows)
        ]
        exact = all(scalar_is_exact(a) for row in self.rows for a in row)
        pivots = []
        for col in range(n):
            piv = _select_pivot(aug, col)
            if piv is None:
                raise SingularMatrixError("matrix is singular")
            if piv != col:
                aug[piv], aug[col] = aug[col], aug[piv]
            pivot = aug[col][col]
            pivots.append(scalar_mag(pivot))
            aug[col] = [a / pivot for a in aug[col]]
            for r in range(n):
                if r == col or scalar_is_zero(aug[r][col]):
                    continue
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
        if not exact and pivots and max(pivots) > _COND_LIMIT * min(pivots):
            raise SingularMatrixError(
                "matrix is numerically ill-conditioned "
                f"(pivot ratio {max(pivots) / min(pivots):.2e})"
            )
        return SquareMatrix([row[n:] for row in aug])

    def __eq__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __repr__(self):
        return f"SquareMatrix({[list(r) for r in self.rows]!r})"


def _dot(row, col):
    acc = row[0] * col[0]
    for a, b in zip(row[1:], col[1:]):
        acc = acc + a * b
    return acc


def _select_pivot(rows, col):
    """Row index >= col with the best usable pivot in this column."""
    best = None
    best_mag = 0.0
    for r in range(col, len(rows)):
        entry = rows[r][col]
        if scalar_is_zero(entry):
            continue
        if scalar_is_exact(entry):
            return r
        mag = scalar_mag(entry)
        if mag > best_mag:
            best, best_mag = r, mag
    return best


def build_L(pt: PhasePoint) -> SquareMatrix:
    """Lax matrix: L_jj = p_j, L_jk = i*nu/(x_j - x_k) off the diagonal."""
    ensure_separated(pt)
    n = pt.n
    inu = pt.params.i_nu
    rows = []
    for j in range(n):
        row = []
        for k in range(n):
            if j == k:
                row.append(pt.p[j])
            else:
                row.append(inu / (pt.x[j] - pt.x[k]))
        rows.append(row)
    return SquareMatrix(rows)


def build_M(pt: PhasePoint) -> SquareMatrix:
    """Companion matrix with zero row sums:
    M_jk = i*nu/(x_j - x_k)**2, M_jj = -sum_{l != j} i*nu/(x_j - x_l)**2."""
    ensure_separated(pt)
    n = pt.n
    inu = pt.params.i_nu
    rows = []
    for j in range(n):
        row = [0] * n
        diag = 0
        for k in range(n):
            if k == j:
                continue
            d = pt.x[j] - pt.x[k]
            val = inu / (d * d)
            row[k] = val
            diag = diag - val
        row[j] = diag
        rows.append(row)
    return SquareMatrix(rows)


def build_X(pt: PhasePoint) -> SquareMatrix:
    """Diagonal position matrix X = diag(x_1, ..., x_N)."""
    return SquareMatrix.diagonal(pt.x)


def build_Mtilde(pt: PhasePoint, xbar) -> SquareMatrix:
    """Lattice Lax matrix Mt_jk = c0/(xbar_j - x_k + c0)."""
    n = pt.n
    xbar = tuple(xbar)
    if len(xbar) != n:
        raise ValueError("xbar must have one entry per particle")
    c = c0(pt.params)
    rows = []
    for j in range(n):
        row = []
        for k in range(n):
            denom = xbar[j] - pt.x[k] + c
            if scalar_is_exact(denom):
                if scalar_is_zero(denom):
                    raise SingularityError(
                        f"vanishing denominator xbar_{j+1} - x_{k+1} + c0"
                    )
            elif scalar_mag(denom) < 1e-300:
                raise SingularityError(
                    f"vanishing denominator xbar_{j+1} - x_{k+1} + c0"
                )
            row.append(c / denom)
        rows.append(row)
    return SquareMatrix(rows)
