"""Sparse polynomials in the abstract invariants and the closed symmetry
algebra tables.

The pipeline mirrors the structure of the derivation: formal brackets over an
extended alphabet (F and K indices beyond N, second index 0), elimination of
the index-0 pairs through N*K_{j,i} = F_i K_{j,0} - F_j K_{i,0}, and the
Bell-polynomial triangular closures that pull every out-of-range generator
back into the span of the N(N+1)/2 table generators.  The deformation
coefficient alpha*sqrt(h) is carried exactly as (1+i)*s with s a central,
degree-0 polynomial variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import ArityError, StructuralError
from .scalars import GR_ONE, GaussianRational
from .symfun import bell

__all__ = [
    "BracketTable",
    "Generator",
    "PolyExpr",
    "build_table",
    "closed_bracket",
    "contract_discrete_table",
    "eliminate_K0",
    "formal_bracket",
    "ideal_check",
    "reduce_F",
    "reduce_K",
    "table_to_json",
    "table_to_text",
]

_KIND_RANK = {"s": 0, "F": 1, "K": 2, "Kt": 2}


@dataclass(frozen=True)
class Generator:
    """Abstract generator: F_k, K_{m,n}, Kt_{m,n}, or the deformation s.

    K-type generators with j = 0 are the functionally dependent index-0
    members that exist only inside the reduction pipeline.
    """

    kind: str
    i: int = 0
    j: int = 0

    @property
    def name(self) -> str:
        if self.kind == "s":
            return "s"
        if self.kind == "F":
            return f"F{self.i}"
        if max(self.i, self.j) < 10:
            return f"{self.kind}{self.i}{self.j}"
        return f"{self.kind}{self.i}_{self.j}"

    @property
    def sort_key(self):
        return (_KIND_RANK[self.kind], self.i, self.j)

    def __repr__(self):
        return self.name


GEN_S = Generator("s")


def gen_F(k: int) -> Generator:
    return Generator("F", k)


def gen_K(m: int, n: int, mode: str = "continuous") -> Generator:
    return Generator("K" if mode == "continuous" else "Kt", m, n)


def _coeff(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    raise TypeError(f"not an exact coefficient: {value!r}")


def _mono_mul(m1, m2):
    exps = dict(m1)
    for g, e in m2:
        exps[g] = exps.get(g, 0) + e
    return tuple(sorted(exps.items(), key=lambda ge: ge[0].sort_key))


class PolyExpr:
    """Sparse polynomial over the generator alphabet with coefficients in Q(i).

    Canonical form: no zero coefficients, exponent tuples sorted by generator;
    equality is literal coefficient-map equality.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                c = _coeff(c)
                if c:
                    self.terms[mono] = c

    @classmethod
    def zero(cls) -> "PolyExpr":
        return cls()

    @classmethod
    def const(cls, value) -> "PolyExpr":
        return cls({(): value})

    @classmethod
    def var(cls, gen: Generator) -> "PolyExpr":
        return cls({((gen, 1),): GR_ONE})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, PolyExpr):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == PolyExpr.const(other)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, PolyExpr):
            if isinstance(other, (int, Fraction, GaussianRational)):
                other = PolyExpr.const(other)
            else:
                return NotImplemented
        out = dict(self.terms)
        for mono, c in other.terms.items():
            acc = out.get(mono)
            acc = c if acc is None else acc + c
            if acc:
                out[mono] = acc
            else:
                out.pop(mono, None)
        result = PolyExpr()
        result.terms = out
        return result

    __radd__ = __add__

    def __neg__(self):
        result = PolyExpr()
        result.terms = {mono: -c for mono, c in self.terms.items()}
        return result

    def __sub__(self, other):
        if not isinstance(other, PolyExpr):
            other = PolyExpr.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolyExpr):
            if isinstance(other, (int, Fraction, GaussianRational)):
                c = _coeff(other)
                if not c:
                    return PolyExpr.zero()
                result = PolyExpr()
                result.terms = {m: v * c for m, v in self.terms.items()}
                return result
            return NotImplemented
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mono_mul(m1, m2)
                c = c1 * c2
                acc = out.get(mono)
                acc = c if acc is None else acc + c
                if acc:
                    out[mono] = acc
                else:
                    out.pop(mono, None)
        result = PolyExpr()
        result.terms = out
        return result

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = PolyExpr.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def generators(self):
        seen = set()
        for mono in self.terms:
            for g, _ in mono:
                seen.add(g)
        return seen

    def substitute(self, mapping) -> "PolyExpr":
        """Replace each mapped generator by a polynomial, expanding powers."""
        out = PolyExpr.zero()
        for mono, c in self.terms.items():
            factor = PolyExpr.const(c)
            kept = []
            for g, e in mono:
                if g in mapping:
                    factor = factor * (mapping[g] ** e)
                else:
                    kept.append((g, e))
            base = PolyExpr()
            base.terms = {tuple(kept): GR_ONE}
            out = out + factor * base
        return out

    def evaluate(self, assign, coeff=lambda c: c):
        """Numeric value with generator values from assign(gen)."""
        total = 0
        for mono, c in self.terms.items():
            v = coeff(c)
            for g, e in mono:
                v = v * assign(g) ** e
            total = total + v
        return total

    def total_degree(self, include_s: bool = False) -> int:
        """Max total degree in the generators; s counts as degree 0 unless
        include_s is set."""
        best = 0
        for mono in self.terms:
            deg = sum(e for g, e in mono if include_s or g.kind != "s")
            best = max(best, deg)
        return best

    def weighted_degree(self) -> int:
        """Momentum-order grading: F_k -> k, K_{m,n} -> m+n-1, Kt -> m+n."""
        best = 0
        for mono in self.terms:
            best = max(best, _mono_weight(mono))
        return best

    def weighted_degrees(self) -> set:
        return {_mono_weight(mono) for mono in self.terms}

    def sorted_terms(self):
        """Deterministic order: deformation power ascending, then total degree
        descending, then exponent vector descending lexicographically."""
        gens = sorted(self.generators(), key=lambda g: g.sort_key)

        def key(item):
            mono, _ = item
            exps = dict(mono)
            s_exp = sum(e for g, e in mono if g.kind == "s")
            deg = sum(e for g, e in mono if g.kind != "s")
            vec = tuple(-exps.get(g, 0) for g in gens)
            return (s_exp, -deg, vec)

        return sorted(self.terms.items(), key=key)

    def render(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for mono, c in self.sorted_terms():
            neg = c.re < 0 or (c.re == 0 and c.im < 0)
            if neg:
                c = -c
            factors = " ".join(
                g.name if e == 1 else f"{g.name}^{e}" for g, e in mono
            )
            if not factors:
                coeff_str = str(c) if c.is_real else f"({c})"
                body = coeff_str
            elif c == GR_ONE:
                body = factors
            else:
                coeff_str = str(c) if c.is_real else f"({c})"
                body = f"{coeff_str} {factors}"
            if not pieces:
                pieces.append(("-" if neg else "") + body)
            else:
                pieces.append(("- " if neg else "+ ") + body)
        return " ".join(pieces)

    def __repr__(self):
        return f"PolyExpr<{self.render()}>"


def _mono_weight(mono) -> int:
    acc = 0
    for g, e in mono:
        if g.kind == "F":
            acc += g.i * e
        elif g.kind == "K":
            acc += (g.i + g.j - 1) * e
        elif g.kind == "Kt":
            acc += (g.i + g.j) * e
    return acc


def _alpha_poly() -> PolyExpr:
    # alpha*sqrt(h) carried exactly as (1+i)*s
    return PolyExpr.var(GEN_S) * GaussianRational(1, 1)


def _F(k: int, n_bodies: int) -> PolyExpr:
    if k < 0:
        raise ArityError("negative F index in a formal bracket")
    if k == 0:
        return PolyExpr.const(n_bodies)
    return PolyExpr.var(gen_F(k))


def _K(m: int, n: int, mode: str) -> PolyExpr:
    """Skew-normalized K symbol; indices may sit outside the table range."""
    if m == n:
        return PolyExpr.zero()
    if m > n:
        return PolyExpr.var(gen_K(m, n, mode))
    return -PolyExpr.var(gen_K(n, m, mode))


def formal_bracket(a: Generator, b: Generator, n_bodies: int, mode: str = "continuous") -> PolyExpr:
    """The bracket of two generators over the extended alphabet, verbatim:
    out-of-range F and K indices and index-0 members are kept symbolic, and
    F_0 = N is substituted as a constant."""
    kkind = "K" if mode == "continuous" else "Kt"
    for g in (a, b):
        if g.kind == "F":
            if not 1 <= g.i <= n_bodies:
                raise ArityError(f"{g.name} outside the generator range")
        elif g.kind == kkind:
            if not 1 <= g.j < g.i <= n_bodies:
                raise ArityError(f"{g.name} outside the generator range")
        else:
            raise ArityError(f"{g.name} is not a {mode} generator")
    if a.kind == "F" and b.kind == "F":
        return PolyExpr.zero()
    if a.kind == "F":
        return _fk_bracket(a.i, b.i, b.j, n_bodies, mode)
    if b.kind == "F":
        return -_fk_bracket(b.i, a.i, a.j, n_bodies, mode)
    return _kk_bracket(a.i, a.j, b.i, b.j, n_bodies, mode)


def _fk_bracket(i: int, m: int, n: int, nb: int, mode: str) -> PolyExpr:
    expr = (_F(m, nb) * _F(n + i - 2, nb) - _F(n, nb) * _F(m + i - 2, nb)) * i
    if mode == "discrete":
        block = (_F(m, nb) * _F(i + n - 1, nb) - _F(n, nb) * _F(i + m - 1, nb)) * i
        expr = expr + _alpha_poly() * block
    return expr


def _kk_bracket(i: int, j: int, m: int, n: int, nb: int, mode: str) -> PolyExpr:
    K = lambda mm, nn: _K(mm, nn, mode)  # noqa: E731
    F = lambda kk: _F(kk, nb)  # noqa: E731
    expr = (
        F(i) * (K(n, j + m - 2) * m + K(j + n - 2, m) * n)
        + F(j) * (K(i + m - 2, n) * m + K(m, i + n - 2) * n)
        + F(m) * (K(i + n - 2, j) * i + K(i, j + n - 2) * j)
        + F(n) * (K(j, i + m - 2) * i + K(j + m - 2, i) * j)
    )
    if mode == "discrete":
        block = (
            F(i) * (K(n, j + m - 1) * m + K(j + n - 1, m) * n)
            + F(j) * (K(i + m - 1, n) * m + K(m, i + n - 1) * n)
            + F(m) * (K(i + n - 1, j) * i + K(i, j + n - 1) * j)
            + F(n) * (K(j, i + m - 1) * i + K(j + m - 1, i) * j)
        )
        expr = expr + _alpha_poly() * block
    return expr


def eliminate_K0(expr: PolyExpr, n_bodies: int) -> PolyExpr:
    """Rewrite every paired combination F_i K_{j,0} - F_j K_{i,0} as
    N * K_{j,i}; valid inputs leave no index-0 generator behind."""
    terms = dict(expr.terms)

    def find_k0(mono):
        for g, e in mono:
            if g.kind in ("K", "Kt") and g.j == 0:
                return g, e
        return None, 0

    while True:
        target = None
        for mono, c in terms.items():
            g0, e0 = find_k0(mono)
            if g0 is not None:
                target = (mono, c, g0, e0)
                break
        if target is None:
            break
        mono, c, g0, e0 = target
        if e0 != 1:
            raise StructuralError(f"index-0 generator {g0.name} appears squared")
        j_idx = g0.i
        paired = False
        for gf, ef in mono:
            if gf.kind != "F" or ef < 1:
                continue
            i_idx = gf.i
            if i_idx == j_idx:
                continue
            partner = _swap_mono(mono, gf, g0, i_idx, j_idx)
            pc = terms.get(partner)
            if pc is None:
                continue
            # consume c * (F_i K_{j,0}) and c * (-F_j K_{i,0})
            del terms[mono]
            new_pc = pc + c
            if new_pc:
                terms[partner] = new_pc
            else:
                del terms[partner]
            base = _strip_mono(mono, gf, g0)
            replacement = PolyExpr({base: c}) * (
                _K(j_idx, i_idx, "continuous" if g0.kind == "K" else "discrete")
                * n_bodies
            )
            for m2, c2 in replacement.terms.items():
                acc = terms.get(m2)
                acc = c2 if acc is None else acc + c2
                if acc:
                    terms[m2] = acc
                else:
                    terms.pop(m2, None)
            paired = True
            break
        if not paired:
            raise StructuralError(
                f"unpaired index-0 term {PolyExpr({mono: c}).render()}"
            )
    result = PolyExpr()
    result.terms = terms
    return result


def _swap_mono(mono, gf, g0, i_idx, j_idx):
    """Monomial with F_i K_{j,0} replaced by F_j K_{i,0}."""
    exps = dict(mono)
    exps[gf] -= 1
    if exps[gf] == 0:
        del exps[gf]
    exps.pop(g0)
    gf_new = gen_F(j_idx)
    g0_new = Generator(g0.kind, i_idx, 0)
    exps[gf_new] = exps.get(gf_new, 0) + 1
    exps[g0_new] = exps.get(g0_new, 0) + 1
    return tuple(sorted(exps.items(), key=lambda ge: ge[0].sort_key))


def _strip_mono(mono, gf, g0):
    exps = dict(mono)
    exps[gf] -= 1
    if exps[gf] == 0:
        del exps[gf]
    exps.pop(g0)
    return tuple(sorted(exps.items(), key=lambda ge: ge[0].sort_key))


@lru_cache(maxsize=None)
def _bell_weight(k: int, n_bodies: int) -> PolyExpr:
    """-B_k(-0!F_1, ..., -(k-1)!F_k)/k! as a polynomial in F_1..F_N."""
    args = [PolyExpr.var(gen_F(i)) * (-factorial(i - 1)) for i in range(1, k + 1)]
    return bell(k, args) * Fraction(-1, factorial(k))


@lru_cache(maxsize=None)
def reduce_F(k: int, n_bodies: int) -> PolyExpr:
    """F_k in terms of F_1..F_N via the triangular Cayley-Hamilton system."""
    if k == 0:
        return PolyExpr.const(n_bodies)
    if k <= n_bodies:
        return PolyExpr.var(gen_F(k))
    acc = PolyExpr.zero()
    for kk in range(1, n_bodies + 1):
        acc = acc + _bell_weight(kk, n_bodies) * reduce_F(k - kk, n_bodies)
    return acc


@lru_cache(maxsize=None)
def reduce_K(m: int, n: int, n_bodies: int, mode: str = "continuous") -> PolyExpr:
    """K_{m,n} (or Kt) as an F-coefficient linear combination of in-range
    K generators, by the same triangular recursion as reduce_F."""
    if m == n:
        return PolyExpr.zero()
    if m < n:
        return -reduce_K(n, m, n_bodies, mode)
    if n < 1:
        raise ArityError("index-0 members must be eliminated, not reduced")
    if m <= n_bodies:
        return PolyExpr.var(gen_K(m, n, mode))
    acc = PolyExpr.zero()
    for kk in range(1, n_bodies + 1):
        acc = acc + _bell_weight(kk, n_bodies) * reduce_K(m - kk, n, n_bodies, mode)
    return acc


def closed_bracket(a: Generator, b: Generator, n_bodies: int, mode: str = "continuous") -> PolyExpr:
    """formal bracket -> index-0 elimination -> closure substitution; the
    result mentions only in-range generators."""
    expr = formal_bracket(a, b, n_bodies, mode)
    expr = eliminate_K0(expr, n_bodies)
    mapping = {}
    for g in expr.generators():
        if g.kind == "F" and g.i > n_bodies:
            mapping[g] = reduce_F(g.i, n_bodies)
        elif g.kind in ("K", "Kt") and g.i > n_bodies:
            mapping[g] = reduce_K(g.i, g.j, n_bodies, mode)
    if mapping:
        expr = expr.substitute(mapping)
    for g in expr.generators():
        if g.kind == "s":
            continue
        if g.i > n_bodies or (g.kind in ("K", "Kt") and g.j == 0):
            raise StructuralError(f"{g.name} survived reduction")
    return expr


def table_generators(n_bodies: int, mode: str = "continuous"):
    gens = [gen_F(k) for k in range(1, n_bodies + 1)]
    for m in range(2, n_bodies + 1):
        for j in range(1, m):
            gens.append(gen_K(m, j, mode))
    return gens


@dataclass(frozen=True)
class BracketTable:
    """All pairwise closed brackets of the generator set for (N, mode).

    degree is the maximum total polynomial degree in the generators over all
    entries (the deformation variable s counts as degree 0).
    """

    n: int
    mode: str
    generators: tuple
    entries: dict

    @property
    def degree(self) -> int:
        return max(
            (poly.total_degree() for poly in self.entries.values()), default=0
        )

    def entry(self, name_a: str, name_b: str) -> PolyExpr:
        if (name_a, name_b) in self.entries:
            return self.entries[(name_a, name_b)]
        if (name_b, name_a) in self.entries:
            return -self.entries[(name_b, name_a)]
        raise KeyError(f"no table entry for {{{name_a},{name_b}}}")


def build_table(n_bodies: int, mode: str = "continuous") -> BracketTable:
    if n_bodies < 2:
        raise ArityError("symmetry algebra tables need N >= 2")
    if mode not in ("continuous", "discrete"):
        raise ArityError(f"unknown mode {mode!r}")
    gens = table_generators(n_bodies, mode)
    entries = {}
    for idx, a in enumerate(gens):
        for b in gens[idx + 1 :]:
            entries[(a.name, b.name)] = closed_bracket(a, b, n_bodies, mode)
    return BracketTable(
        n=n_bodies, mode=mode, generators=tuple(gens), entries=entries
    )


def ideal_check(table: BracketTable) -> bool:
    """True iff every bracket against an F generator lands in the span of
    monomials containing at least one F."""
    for (name_a, name_b), poly in table.entries.items():
        if not (name_a.startswith("F") or name_b.startswith("F")):
            continue
        for mono in poly.terms:
            if not any(g.kind == "F" for g, _ in mono):
                return False
    return True


def contract_discrete_table(table: BracketTable) -> BracketTable:
    """The continuum limit of a discrete table: truncate at s = 0 and rename
    Kt generators to K."""
    if table.mode != "discrete":
        raise ArityError("only discrete tables contract")

    def contract_poly(poly: PolyExpr) -> PolyExpr:
        out = {}
        for mono, c in poly.terms.items():
            if any(g.kind == "s" for g, _ in mono):
                continue
            renamed = tuple(
                sorted(
                    (
                        (Generator("K", g.i, g.j) if g.kind == "Kt" else g, e)
                        for g, e in mono
                    ),
                    key=lambda ge: ge[0].sort_key,
                )
            )
            out[renamed] = c
        result = PolyExpr()
        result.terms = out
        return result

    gens = tuple(
        Generator("K", g.i, g.j) if g.kind == "Kt" else g for g in table.generators
    )
    entries = {
        (a.replace("Kt", "K"), b.replace("Kt", "K")): contract_poly(poly)
        for (a, b), poly in table.entries.items()
    }
    return BracketTable(n=table.n, mode="continuous", generators=gens, entries=entries)


def table_to_json(table: BracketTable) -> dict:
    return {
        "schema": "cmsym-table-v1",
        "n": table.n,
        "mode": table.mode,
        "degree": table.degree,
        "generators": [g.name for g in table.generators],
        "entries": {
            f"{a}|{b}": [
                {
                    "coeff": str(c),
                    "monomial": {g.name: e for g, e in mono},
                }
                for mono, c in poly.sorted_terms()
            ]
            for (a, b), poly in table.entries.items()
        },
    }


def table_to_text(table: BracketTable) -> str:
    lines = [
        f"# symmetry algebra  N={table.n}  mode={table.mode}  degree={table.degree}",
        f"# generators: {' '.join(g.name for g in table.generators)}",
    ]
    for (a, b), poly in table.entries.items():
        lines.append(f"{{{a},{b}}} = {poly.render()}")
    return "\n".join(lines) + "\n"
