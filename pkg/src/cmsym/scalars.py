"""Scalar fields: exact Gaussian rationals, complex floats, first-order jets.

Exact mode works in Q(i) so identities can be confirmed or refuted by literal
equality; float mode mirrors the same operations in complex double precision.
The deformation coefficient is parameterized through a rational square-root
parameter s with h = 2*nu*s**2, which keeps both alpha*sqrt(h) = (1+i)*s and
c0 inside Q(i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConventionError, UnsupportedParameterError

__all__ = [
    "GaussianRational",
    "Jet",
    "ModelParams",
    "GR_ZERO",
    "GR_ONE",
    "GR_I",
    "gr",
    "alpha_sqrt_h",
    "c0",
    "jet_deriv",
    "rational_sqrt",
    "scalar_is_zero",
    "scalar_is_exact",
    "scalar_mag",
    "to_complex",
]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational value: {x!r}")


class GaussianRational:
    """Element a + b*i of Q(i) with exact arbitrary-precision components.

    Fraction keeps numerator/denominator coprime with positive denominator,
    so equality is decidable and the canonical form is unique.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _as_fraction(re)
        self.im = _as_fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = GR_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Exact squared modulus re**2 + im**2."""
        return self.re * self.re + self.im * self.im

    def inverse(self):
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational(self.re / n, -self.im / n)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * float(self.im)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        imag = f"{self.im}*i" if self.im > 0 else f"{-self.im}*i"
        if self.re == 0:
            return imag if self.im > 0 else "-" + imag
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{imag}"

    def __repr__(self):
        return f"gr({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse the canonical "a/b+c/d*i" form; whitespace and omitted
        zero parts are accepted."""
        s = "".join(text.split())
        if not s:
            raise ValueError("empty Gaussian rational literal")
        terms = []
        start = 0
        for pos in range(1, len(s)):
            if s[pos] in "+-" and s[pos - 1] not in "+-*/":
                terms.append(s[start:pos])
                start = pos
        terms.append(s[start:])
        if len(terms) > 2:
            raise ValueError(f"malformed Gaussian rational: {text!r}")
        re_part = Fraction(0)
        im_part = Fraction(0)
        seen_re = seen_im = False
        for term in terms:
            if term.endswith("i"):
                if seen_im:
                    raise ValueError(f"duplicate imaginary part: {text!r}")
                body = term[:-1]
                if body.endswith("*"):
                    body = body[:-1]
                if body in ("", "+"):
                    im_part = Fraction(1)
                elif body == "-":
                    im_part = Fraction(-1)
                else:
                    im_part = Fraction(body)
                seen_im = True
            else:
                if seen_re:
                    raise ValueError(f"duplicate real part: {text!r}")
                re_part = Fraction(term)
                seen_re = True
        return cls(re_part, im_part)


def gr(value=0, im=0) -> GaussianRational:
    """Convenience constructor: gr("1/2"), gr(1, 2), gr("1/2+3*i")."""
    if isinstance(value, GaussianRational):
        return value if im == 0 else GaussianRational(value.re, value.im + _as_fraction(im))
    if isinstance(value, str) and ("i" in value or im == 0):
        parsed = GaussianRational.parse(value)
        if im != 0:
            parsed = GaussianRational(parsed.re, parsed.im + _as_fraction(im))
        return parsed
    return GaussianRational(value, im)


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


class Jet:
    """First-order jet (value, directional derivative) over any scalar field.

    Non-jet operands are treated as constants, so jets nest: a Jet whose
    components are themselves Jets yields second derivatives.
    """

    __slots__ = ("value", "deriv")

    def __init__(self, value, deriv=0):
        self.value = value
        self.deriv = deriv

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.deriv + other.deriv)
        return Jet(self.value + other, self.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value - other.value, self.deriv - other.deriv)
        return Jet(self.value - other, self.deriv)

    def __rsub__(self, other):
        return Jet(other - self.value, -self.deriv)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.value * other.value,
                self.value * other.deriv + self.deriv * other.value,
            )
        return Jet(self.value * other, self.deriv * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            v = self.value / other.value
            return Jet(v, (self.deriv - v * other.deriv) / other.value)
        return Jet(self.value / other, self.deriv / other)

    def __rtruediv__(self, other):
        v = other / self.value
        return Jet(v, -v * self.deriv / self.value)

    def __neg__(self):
        return Jet(-self.value, -self.deriv)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** (-n))
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            return Jet(self.value * 0 + 1, self.deriv * 0)
        return result

    def __eq__(self, other):
        if isinstance(other, Jet):
            return self.value == other.value and self.deriv == other.deriv
        return NotImplemented

    def __repr__(self):
        return f"Jet({self.value!r}, {self.deriv!r})"


def jet_deriv(v):
    """Derivative part of a jet; non-jets are constants with derivative 0."""
    return v.deriv if isinstance(v, Jet) else 0


def scalar_is_zero(x) -> bool:
    """Exact zero test; for jets only the value part counts."""
    if isinstance(x, Jet):
        return scalar_is_zero(x.value)
    if isinstance(x, GaussianRational):
        return not x
    return x == 0


def scalar_is_exact(x) -> bool:
    if isinstance(x, Jet):
        return scalar_is_exact(x.value)
    return isinstance(x, (GaussianRational, Fraction, int))


def scalar_mag(x) -> float:
    """Float magnitude used for pivoting and diagnostics."""
    if isinstance(x, Jet):
        return scalar_mag(x.value)
    return abs(x)


def to_complex(x) -> complex:
    if isinstance(x, GaussianRational):
        return x.to_complex()
    if isinstance(x, Fraction):
        return complex(float(x))
    if isinstance(x, Jet):
        raise TypeError("jets do not convert to a plain complex number")
    return complex(x)


def rational_sqrt(q: Fraction):
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: coupling nu, lattice parameter s with h = 2*nu*s**2.

    The attractive convention is realized at construction by nu -> i*nu; all
    downstream formulas are convention-free.  Exact mode requires rational nu
    and s so that c0 and alpha*sqrt(h) stay in Q(i).  free_h carries an
    explicit lattice spacing for the float-mode free case nu = 0, where no s
    exists (h = 2*nu*s**2 would force h = 0).
    """

    nu: object
    s: object
    exact: bool
    convention: str = "repulsive"
    free_h: object = None

    @classmethod
    def exact_params(cls, nu, s=0, convention="repulsive"):
        nu_f = _as_fraction(nu)
        if nu_f == 0:
            raise ValueError("coupling nu must be nonzero in exact mode")
        s_f = _as_fraction(s)
        if s_f < 0:
            raise ValueError("square-root parameter s must be nonnegative")
        if convention == "repulsive":
            nu_scalar = GaussianRational(nu_f)
        elif convention == "attractive":
            nu_scalar = GaussianRational(0, nu_f)
        else:
            raise ConventionError(f"unknown convention {convention!r}")
        return cls(nu=nu_scalar, s=s_f, exact=True, convention=convention)

    @classmethod
    def exact_params_from_h(cls, nu, h, convention="repulsive"):
        nu_f = _as_fraction(nu)
        h_f = _as_fraction(h)
        if nu_f == 0:
            raise ValueError("coupling nu must be nonzero in exact mode")
        s2 = h_f / (2 * nu_f)
        s_f = rational_sqrt(s2)
        if s_f is None:
            raise UnsupportedParameterError(
                f"h = {h_f} is not of the form 2*nu*s**2 with rational s"
            )
        return cls.exact_params(nu_f, s_f, convention)

    @classmethod
    def float_params(cls, nu, s=None, h=None, convention="repulsive"):
        nu_c = complex(nu)
        if convention == "attractive":
            nu_c = 1j * nu_c
        elif convention != "repulsive":
            raise ConventionError(f"unknown convention {convention!r}")
        if s is not None:
            s_val = s
        elif h is None or h == 0:
            s_val = 0.0
        else:
            if nu_c == 0:
                # free particles with an explicit lattice spacing; no s exists
                return cls(
                    nu=nu_c, s=None, exact=False, convention=convention, free_h=h
                )
            ratio = h / (2 * nu_c)
            if abs(ratio.imag) < 1e-14 * max(1.0, abs(ratio)) and ratio.real < 0:
                raise ConventionError(
                    "h/(2*nu) < 0: negative lattice ratio contradicts the "
                    "repulsive convention"
                )
            import cmath

            root = cmath.sqrt(ratio)
            s_val = root.real if abs(root.imag) < 1e-14 * max(1.0, abs(root)) else root
        return cls(nu=nu_c, s=s_val, exact=False, convention=convention)

    @property
    def h(self):
        if self.free_h is not None:
            return self.free_h
        if self.s is None:
            return 0.0
        return 2 * self.nu * self.s * self.s

    @property
    def i_nu(self):
        """The combination i*nu entering the Lax matrices."""
        if self.exact:
            return GR_I * self.nu
        return 1j * self.nu

    def to_float(self) -> "ModelParams":
        if not self.exact:
            return self
        s_val = float(self.s)
        return ModelParams(
            nu=self.nu.to_complex(), s=s_val, exact=False, convention=self.convention
        )


def alpha_sqrt_h(params: ModelParams):
    """The deformation coefficient alpha*sqrt(h) = (1+i)*s.

    With h = 2*nu*s**2 and alpha = (1+i)/sqrt(2*nu), the product collapses to
    (1+i)*s independently of nu, which keeps it in Q(i) in exact mode.
    """
    if params.s is None:
        raise ValueError("alpha*sqrt(h) is undefined without a lattice parameter s")
    if params.exact:
        return GaussianRational(params.s, params.s)
    return (1 + 1j) * params.s


def c0(params: ModelParams):
    """Lattice constant with c0**2 = -i*h*nu, on the branch c0 = nu*s*(i-1).

    This branch makes h/c0 = -alpha*sqrt(h), so the deformed invariants
    decompose with a plus sign in front of the alpha*sqrt(h) block; the
    opposite (principal) root flips every odd power of the deformation.
    """
    if params.s is None:
        if params.exact:
            raise ValueError("exact parameters always carry s")
        return 0j
    if params.exact:
        return params.nu * GaussianRational(-params.s, params.s)
    return params.nu * params.s * (-1 + 1j)
