"""Symmetric-function kernel.

Power sums, elementary symmetric polynomials, Newton's identity, complete
exponential Bell polynomials, and the Cayley-Hamilton reduction that rewrites
tr(A^(N+s)) through tr(A), ..., tr(A^N).  Everything is generic over the
scalar type: exact Gaussian rationals, floats, jets, or sparse polynomials.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial, prod

from .errors import ArityError

__all__ = [
    "bell",
    "elementary_brute",
    "elementary_via_bell",
    "newton_elementary",
    "power_sums",
    "trace_reduce",
]


@lru_cache(maxsize=None)
def _partition_multiplicities(k: int):
    """All multiplicity vectors ((part, count), ...) with sum part*count = k."""

    def rec(remaining, max_part):
        if remaining == 0:
            yield ()
            return
        for part in range(min(remaining, max_part), 0, -1):
            for count in range(1, remaining // part + 1):
                for rest in rec(remaining - part * count, part - 1):
                    yield ((part, count),) + rest

    return tuple(rec(k, k))


def bell(k: int, y) -> object:
    """Complete exponential Bell polynomial B_k(y_1, ..., y_k); B_0 = 1.

    Computed from the partition sum; every coefficient
    k! / prod((i!)**j_i * j_i!) is a positive integer (the number of set
    partitions with j_i blocks of size i).
    """
    if k < 0:
        raise ArityError("Bell polynomial index must be nonnegative")
    if k == 0:
        return 1
    y = list(y)
    if len(y) < k:
        raise ArityError(f"B_{k} needs {k} arguments, got {len(y)}")
    total = 0
    kfact = factorial(k)
    for mult in _partition_multiplicities(k):
        denom = prod(factorial(i) ** j * factorial(j) for i, j in mult)
        coeff, rem = divmod(kfact, denom)
        assert rem == 0
        term = coeff
        for i, j in mult:
            term = term * (y[i - 1] ** j)
        total = total + term
    return total


def power_sums(xs, kmax: int):
    """[f_1, ..., f_kmax] for the variable set xs, with f_k = sum x_i**k."""
    out = []
    current = list(xs)
    for _ in range(kmax):
        acc = 0
        for v in current:
            acc = acc + v
        out.append(acc)
        current = [v2 * v1 for v2, v1 in zip(current, xs)]
    return out


def elementary_brute(k: int, xs) -> object:
    """e_k by direct enumeration of all k-subsets (test oracle)."""
    xs = list(xs)
    if k == 0:
        return 1
    if k > len(xs):
        return 0
    acc = 0
    for combo in combinations(xs, k):
        term = combo[0]
        for v in combo[1:]:
            term = term * v
        acc = acc + term
    return acc


def newton_elementary(f, n: int):
    """(e_1, ..., e_n) from power sums via Newton's identity
    e_k = (1/k) * sum_{i=1..k} (-1)**(i-1) e_{k-i} f_i."""
    f = list(f)
    if len(f) < n:
        raise ArityError(f"need {n} power sums, got {len(f)}")
    es = [1]
    for k in range(1, n + 1):
        acc = 0
        for i in range(1, k + 1):
            term = es[k - i] * f[i - 1]
            acc = acc + term if i % 2 == 1 else acc - term
        es.append(acc * Fraction(1, k))
    return tuple(es[1:])


def _bell_args(f, k: int):
    """The argument vector (-0!*f_1, -1!*f_2, ..., -(k-1)!*f_k)."""
    return [f[i - 1] * (-factorial(i - 1)) for i in range(1, k + 1)]


def elementary_via_bell(k: int, f) -> object:
    """e_k = ((-1)**k / k!) * B_k(-0!*f_1, ..., -(k-1)!*f_k)."""
    f = list(f)
    if len(f) < k:
        raise ArityError(f"need {k} power sums, got {len(f)}")
    if k == 0:
        return 1
    sign = 1 if k % 2 == 0 else -1
    return bell(k, _bell_args(f, k)) * Fraction(sign, factorial(k))


def trace_reduce(n: int, f, s: int):
    """f_{n+s} expressed through f_1..f_n by the Cayley-Hamilton recursion

        f_{n+s} = -sum_{k=1..n} B_k(-0!f_1,...,-(k-1)!f_k)/k! * f_{n+s-k},

    applied repeatedly so the result depends only on the first n power sums.
    """
    if s < 1:
        raise ArityError("trace_reduce extends the sequence, so s >= 1")
    f = list(f)
    if len(f) < n:
        raise ArityError(f"need {n} power sums, got {len(f)}")
    vals = f[:n]
    weights = [
        bell(k, _bell_args(vals, k)) * Fraction(-1, factorial(k))
        for k in range(1, n + 1)
    ]
    for target in range(n + 1, n + s + 1):
        acc = 0
        for k in range(1, n + 1):
            acc = acc + weights[k - 1] * vals[target - k - 1]
        vals.append(acc)
    return vals[n + s - 1]
