"""Slice hyperholomorphic functions represented by stem pairs.

A function of the closed family evaluates on a slice as

    f(x + J*y) = alpha(x, y) + J * beta(x, y),

with alpha even and beta odd in y and (alpha, beta) satisfying the
Cauchy-Riemann equations.  The family is a small algebra: integer powers,
the rational regularizers s^n / (1+s)^(2n), sums, products with an
intrinsic left factor, and left scalar multiples of the stem pair.  Keeping
the family closed lets decay and growth certificates be derived instead of
assumed.

Stems of the intrinsic core are complex-analytic functions of z = x + iy,
so slice derivatives and the pointwise fine-structure operators come from
exact complex differentiation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ClassMismatch, NotIntrinsic, UnsupportedKind
from .quaternion import (DEFAULT_TOL, Quaternion, qarr, qarr_mul,
                         qarr_norm, to_slice)

_GRID_RADII = np.geomspace(1e-3, 1e3, 41)
_GRID_UNITS = (
    Quaternion(0, 1, 0, 0),
    Quaternion(0, 0, 1, 0),
    Quaternion(0, 0.6, 0.8, 0),
    Quaternion(0, 1, 1, 1) / math.sqrt(3.0),
)


@dataclass(frozen=True)
class DecayCertificate:
    """|f(s)| <= C * |s|**(a-1+delta) for |s|<=1 and C * |s|**(b-1-delta) for |s|>=1 on the sector of angle theta."""

    a: float
    b: float
    delta: float
    constant: float
    theta: float


@dataclass(frozen=True)
class GrowthCertificate:
    """|f(s)| <= C * (|s|**k + |s|**(-k)) on the sector of angle theta."""

    k: float
    constant: float
    theta: float


def _perm(n: int, m: int) -> float:
    # falling factorial n*(n-1)*...*(n-m+1)
    out = 1.0
    for i in range(m):
        out *= n - i
    return out


def _rising(k: int, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= k + i
    return out


class StemFunction:
    """Base node of the closed function algebra."""

    kind = "abstract"
    intrinsic = False
    # Leading power-law orders: f ~ |s|**ord0 near 0 and ~ |s|**ordinf near
    # infinity.  Exact for every member of the rational family.
    ord0 = 0.0
    ordinf = 0.0

    def __init__(self):
        self.decay: DecayCertificate | None = None
        self.growth: GrowthCertificate | None = None
        self._cert_cache: dict = {}

    # -- evaluation ---------------------------------------------------------

    def cval(self, z: np.ndarray, m: int = 0) -> np.ndarray:
        """m-th complex derivative of the intrinsic stem at z = x + iy."""
        raise NotIntrinsic(f"{self.kind} has no complex stem")

    def stem_arrays(self, x: np.ndarray, y: np.ndarray):
        """Stem pair (alpha, beta) as quaternion component arrays (..., 4)."""
        w = self.cval(x + 1j * y)
        alpha = np.zeros(w.shape + (4,))
        beta = np.zeros_like(alpha)
        alpha[..., 0] = w.real
        beta[..., 0] = w.imag
        return alpha, beta

    def stem_dx_arrays(self, x: np.ndarray, y: np.ndarray):
        """x-derivatives of the stem pair, same layout as stem_arrays."""
        w = self.cval(x + 1j * y, 1)
        da = np.zeros(w.shape + (4,))
        db = np.zeros_like(da)
        da[..., 0] = w.real
        db[..., 0] = w.imag
        return da, db

    def stem(self, x: float, y: float) -> tuple[Quaternion, Quaternion]:
        a, b = self.stem_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return Quaternion.from_components(a), Quaternion.from_components(b)

    def eval(self, q: Quaternion) -> Quaternion:
        """f(q) = alpha + J*beta at the slice decomposition of q."""
        p = to_slice(q)
        alpha, beta = self.stem(p.x, p.y)
        return alpha + p.j * beta

    # -- structure ----------------------------------------------------------

    def slice_derivative(self) -> "StemFunction":
        raise UnsupportedKind(f"no derivative rule for kind {self.kind!r}")

    def __add__(self, other: "StemFunction") -> "StemFunction":
        return Sum(self, other)

    def __mul__(self, other):
        if isinstance(other, StemFunction):
            return Product(self, other)
        return Scale(other, self)

    def __rmul__(self, c):
        return Scale(c, self)

    # -- certificates -------------------------------------------------------

    def _sample_sup(self, theta: float, weight) -> float:
        """max over a sector grid of |f(s)| / weight(|s|)."""
        angles = np.linspace(-0.999 * theta, 0.999 * theta, 13)
        best = 0.0
        for j in _GRID_UNITS:
            jq = qarr(j)
            for ang in angles:
                x = _GRID_RADII * math.cos(ang)
                y = _GRID_RADII * abs(math.sin(ang))
                alpha, beta = self.stem_arrays(x, y)
                vals = qarr_norm(alpha + qarr_mul(np.broadcast_to(jq, alpha.shape), beta))
                ratio = vals / weight(_GRID_RADII)
                best = max(best, float(ratio.max()))
        return best

    def certify_decay(self, a: float, b: float, theta: float) -> DecayCertificate:
        """Certificate of membership in the class with exponents (a, b) on the sector of angle theta.

        delta comes from the exact leading orders; the constant from coarse
        grid maximisation inflated by 2.  Raises ClassMismatch when the
        orders admit no positive delta.
        """
        key = ("decay", a, b, round(theta, 12))
        if key in self._cert_cache:
            return self._cert_cache[key]
        delta = min(self.ord0 - a + 1.0, b - 1.0 - self.ordinf, 8.0)
        if delta <= 0.0:
            raise ClassMismatch(
                f"{self!r} is not in the ({a:g},{b:g}) decay class: "
                f"orders ({self.ord0:g}, {self.ordinf:g}) give delta = {delta:g}")

        def weight(r):
            return np.where(r <= 1.0, r ** (a - 1.0 + delta), r ** (b - 1.0 - delta))

        # floor keeps the truncation formulas sane for near-zero functions
        c = max(2.0 * self._sample_sup(theta, weight), 1e-6)
        cert = DecayCertificate(a, b, delta, c, theta)
        self._cert_cache[key] = cert
        self.decay = cert
        return cert

    def certify_growth(self, theta: float) -> GrowthCertificate:
        key = ("growth", round(theta, 12))
        if key in self._cert_cache:
            return self._cert_cache[key]
        k = max(self.ordinf, -self.ord0)
        if k <= 0.0:
            k = 0.5

        def weight(r):
            return r ** k + r ** (-k)

        c = 2.0 * self._sample_sup(theta, weight)
        cert = GrowthCertificate(k, c, theta)
        self._cert_cache[key] = cert
        self.growth = cert
        return cert


class Power(StemFunction):
    """f(s) = s**n for an integer n >= 0."""

    kind = "power"
    intrinsic = True

    def __init__(self, n: int):
        super().__init__()
        if not isinstance(n, int) or n < 0:
            raise ValueError("power exponent must be a nonnegative integer")
        self.n = n
        self.ord0 = float(n)
        self.ordinf = float(n)

    def cval(self, z, m: int = 0):
        z = np.asarray(z, dtype=complex)
        if m > self.n:
            return np.zeros_like(z)
        return _perm(self.n, m) * z ** (self.n - m)

    def slice_derivative(self):
        if self.n == 0:
            return Scale(0.0, Power(0))
        return Scale(float(self.n), Power(self.n - 1))

    def __repr__(self):
        return f"pow({self.n})"


class Regularizer(StemFunction):
    """f(s) = s**n / (1+s)**(2n); decays like |s|**n at 0 and |s|**-n at infinity."""

    kind = "regularizer"
    intrinsic = True

    def __init__(self, n: int):
        super().__init__()
        if not isinstance(n, int) or n < 1:
            raise ValueError("regularizer index must be a positive integer")
        self.n = n
        self.ord0 = float(n)
        self.ordinf = float(-n)

    def cval(self, z, m: int = 0):
        z = np.asarray(z, dtype=complex)
        denom = 1.0 + z
        if np.any(np.abs(denom) < 1e-12):
            raise ZeroDivisionError("regularizer evaluated at its pole s = -1")
        # z**(n-j) (1+z)**(-2n-i) written through the bounded ratios
        # w = z/(1+z) and v = 1/(1+z) to stay inside float range on long
        # contour tails
        w = z / denom
        v = 1.0 / denom
        n = self.n
        out = np.zeros_like(z)
        for j in range(min(m, n) + 1):
            i = m - j
            out += (math.comb(m, j) * _perm(n, j) * (-1.0) ** i
                    * _rising(2 * n, i) * w ** (n - j) * v ** (n + j + i))
        return out

    def slice_derivative(self):
        return Derivative(self, 1)

    def __repr__(self):
        return f"reg({self.n})"


class Derivative(StemFunction):
    """order-th slice derivative of an intrinsic base node."""

    kind = "derivative"

    def __init__(self, base: StemFunction, order: int):
        super().__init__()
        if not base.intrinsic:
            raise NotIntrinsic("derivative nodes require an intrinsic base")
        self.base = base
        self.order = order
        self.intrinsic = True
        self.ord0 = base.ord0 - order
        self.ordinf = base.ordinf - order

    def cval(self, z, m: int = 0):
        return self.base.cval(z, m + self.order)

    def slice_derivative(self):
        return Derivative(self.base, self.order + 1)

    def __repr__(self):
        return f"d{self.order}({self.base!r})"


class Sum(StemFunction):
    kind = "sum"

    def __init__(self, f: StemFunction, g: StemFunction):
        super().__init__()
        self.f = f
        self.g = g
        self.intrinsic = f.intrinsic and g.intrinsic
        self.ord0 = min(f.ord0, g.ord0)
        self.ordinf = max(f.ordinf, g.ordinf)

    def cval(self, z, m: int = 0):
        if not self.intrinsic:
            raise NotIntrinsic("complex stem of a non-intrinsic sum")
        return self.f.cval(z, m) + self.g.cval(z, m)

    def stem_arrays(self, x, y):
        fa, fb = self.f.stem_arrays(x, y)
        ga, gb = self.g.stem_arrays(x, y)
        return fa + ga, fb + gb

    def stem_dx_arrays(self, x, y):
        fa, fb = self.f.stem_dx_arrays(x, y)
        ga, gb = self.g.stem_dx_arrays(x, y)
        return fa + ga, fb + gb

    def slice_derivative(self):
        return Sum(self.f.slice_derivative(), self.g.slice_derivative())

    def __repr__(self):
        return f"({self.f!r} + {self.g!r})"


class Product(StemFunction):
    """Pointwise product g*f; the left factor must be intrinsic so the stem
    product (a1*a2 - b1*b2, a1*b2 + b1*a2) is again a valid stem pair."""

    kind = "product"

    def __init__(self, g: StemFunction, f: StemFunction):
        super().__init__()
        if not g.intrinsic:
            raise NotIntrinsic("the left factor of a product must be intrinsic")
        self.g = g
        self.f = f
        self.intrinsic = f.intrinsic
        self.ord0 = g.ord0 + f.ord0
        self.ordinf = g.ordinf + f.ordinf

    def cval(self, z, m: int = 0):
        if not self.intrinsic:
            raise NotIntrinsic("complex stem of a non-intrinsic product")
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for j in range(m + 1):
            out += math.comb(m, j) * self.g.cval(z, j) * self.f.cval(z, m - j)
        return out

    def stem_arrays(self, x, y):
        ga, gb = self.g.stem_arrays(x, y)
        fa, fb = self.f.stem_arrays(x, y)
        return (qarr_mul(ga, fa) - qarr_mul(gb, fb),
                qarr_mul(ga, fb) + qarr_mul(gb, fa))

    def stem_dx_arrays(self, x, y):
        ga, gb = self.g.stem_arrays(x, y)
        fa, fb = self.f.stem_arrays(x, y)
        dga, dgb = self.g.stem_dx_arrays(x, y)
        dfa, dfb = self.f.stem_dx_arrays(x, y)
        da = (qarr_mul(dga, fa) + qarr_mul(ga, dfa)
              - qarr_mul(dgb, fb) - qarr_mul(gb, dfb))
        db = (qarr_mul(dga, fb) + qarr_mul(ga, dfb)
              + qarr_mul(dgb, fa) + qarr_mul(gb, dfa))
        return da, db

    def slice_derivative(self):
        return Sum(Product(self.g.slice_derivative(), self.f),
                   Product(self.g, self.f.slice_derivative()))

    def __repr__(self):
        return f"({self.g!r} * {self.f!r})"


class Scale(StemFunction):
    """Left scalar multiple of the stem pair: (alpha, beta) -> (c*alpha, c*beta).

    For an intrinsic child this equals the pointwise right module action
    f(s)*c, which is the slice-preserving notion of scalar multiple.
    """

    kind = "scale"

    def __init__(self, c, f: StemFunction):
        super().__init__()
        if isinstance(c, (int, float)):
            c = Quaternion(float(c))
        if not isinstance(c, Quaternion):
            raise TypeError("scale factor must be a real number or Quaternion")
        self.c = c
        self.f = f
        self.intrinsic = f.intrinsic and c.is_real()
        if c.norm() == 0.0:
            # the zero function decays faster than any power
            self.ord0, self.ordinf = math.inf, -math.inf
        else:
            self.ord0, self.ordinf = f.ord0, f.ordinf

    def cval(self, z, m: int = 0):
        if not self.intrinsic:
            raise NotIntrinsic("complex stem of a non-intrinsic scale")
        return self.c.s0 * self.f.cval(z, m)

    def stem_arrays(self, x, y):
        fa, fb = self.f.stem_arrays(x, y)
        c = np.broadcast_to(qarr(self.c), fa.shape)
        return qarr_mul(c, fa), qarr_mul(c, fb)

    def stem_dx_arrays(self, x, y):
        fa, fb = self.f.stem_dx_arrays(x, y)
        c = np.broadcast_to(qarr(self.c), fa.shape)
        return qarr_mul(c, fa), qarr_mul(c, fb)

    def slice_derivative(self):
        return Scale(self.c, self.f.slice_derivative())

    def __repr__(self):
        if self.c.is_real():
            return f"({self.c.s0:g} * {self.f!r})"
        return f"({self.c!r} * {self.f!r})"


def pow_fn(n: int) -> Power:
    return Power(n)


def reg_fn(n: int) -> Regularizer:
    return Regularizer(n)


# ---------------------------------------------------------------------------
# Pointwise fine-structure oracles.
# ---------------------------------------------------------------------------

def pointwise_fine(f: StemFunction, q: Quaternion):
    """Closed forms of (Df, Dbar f, Laplacian f) at a non-real point.

    For a slice function alpha + J*beta the Cauchy-Fueter operator reduces
    to Df = -(2/y) beta, its conjugate to Dbar f = 2 f' + (2/y) beta, and
    the Laplacian to -(2/y) d_x beta + J (2/y)(d_y beta - beta/y).  These
    serve as independent references for the operator-level calculi.
    """
    p = to_slice(q)
    if p.y <= DEFAULT_TOL:
        raise ValueError("fine-structure forms are singular on the reals (y = 0)")
    alpha, beta = f.stem(p.x, p.y)
    da, db = (Quaternion.from_components(v)
              for v in f.stem_dx_arrays(np.asarray(p.x), np.asarray(p.y)))
    fprime = da + p.j * db
    two_over_y = 2.0 / p.y
    d_f = -two_over_y * beta
    dbar_f = 2.0 * fprime + two_over_y * beta
    # Cauchy-Riemann gives d_y beta = d_x alpha.
    delta_f = -two_over_y * db + p.j * (two_over_y * (da - beta * (1.0 / p.y)))
    return d_f, dbar_f, delta_f


def choose_regularizer(f: StemFunction, alpha: float, beta: float,
                       theta: float) -> Regularizer:
    """Smallest rational regularizer making e*f integrable for the calculi.

    Uses the growth certificate (k, C) of f and returns reg(n) with the
    minimal integer n > max(k + 3*alpha - 1, k - 3*beta + 1).
    """
    cert = f.growth if f.growth is not None else f.certify_growth(theta)
    bound = max(cert.k + 3.0 * alpha - 1.0, cert.k - 3.0 * beta + 1.0)
    n = max(1, math.floor(bound) + 1)
    if n <= bound:  # guards exact-integer floor
        n += 1
    return Regularizer(n)


# ---------------------------------------------------------------------------
# Tiny text grammar: pow(n), reg(n), a*F, F+G, F*G.  Operators associate
# left-to-right with equal precedence; parentheses group.
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>pow|reg)"
                    r"|(?P<sym>[()*+]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad function expression near {text[pos:]!r}")
        if m.group("num") is not None:
            prev = out[-1][0] if out else None
            tok = m.group("num")
            # a leading sign is only part of the literal at term position
            if tok[0] in "+-" and prev in ("num", "func", ")"):
                out.append(("sym", tok[0]))
                out.append(("num", float(tok[1:])))
            else:
                out.append(("num", float(tok)))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("sym", m.group("sym")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse_expr(self):
        value = self.parse_term()
        while True:
            kind, sym = self.peek()
            if kind == "sym" and sym in "+*":
                self.next()
                rhs = self.parse_term()
                value = _combine(sym, value, rhs)
            else:
                return value

    def parse_term(self):
        kind, val = self.next()
        if kind == "num":
            return val
        if kind == "name":
            k, s = self.next()
            if (k, s) != ("sym", "("):
                raise ValueError(f"{val} needs a parenthesised integer argument")
            k, arg_ = self.next()
            if k != "num" or arg_ != int(arg_):
                raise ValueError(f"{val} takes an integer argument")
            k, s = self.next()
            if (k, s) != ("sym", ")"):
                raise ValueError(f"unclosed argument list of {val}")
            return Power(int(arg_)) if val == "pow" else Regularizer(int(arg_))
        if (kind, val) == ("sym", "("):
            inner = self.parse_expr()
            k, s = self.next()
            if (k, s) != ("sym", ")"):
                raise ValueError("unbalanced parentheses")
            return inner
        raise ValueError(f"unexpected token {val!r}")


def _combine(op, a, b):
    scalars = isinstance(a, float) and isinstance(b, float)
    if scalars:
        return a + b if op == "+" else a * b
    if isinstance(a, float):
        a = Scale(a, Power(0)) if op == "+" else a
    if isinstance(b, float):
        b = Scale(b, Power(0)) if op == "+" else b
    if op == "+":
        return Sum(a, b)
    if isinstance(a, float):
        return Scale(a, b)
    if isinstance(b, float):
        return Scale(b, a)
    return Product(a, b)


def parse(text: str) -> StemFunction:
    """Parse a function expression like '2*reg(2) + pow(1)*reg(3)'."""
    parser = _Parser(_tokenize(text))
    value = parser.parse_expr()
    if parser.i != len(parser.toks):
        raise ValueError("trailing tokens in function expression")
    if isinstance(value, float):
        return Scale(value, Power(0))
    return value
