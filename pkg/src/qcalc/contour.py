"""Quadrature along sector boundaries for the kernel calculi.

The path is the boundary of a sector of half-opening angle phi inside one
complex slice: gamma(t) = -t e^{J phi} for t < 0 and t e^{-J phi} for
t > 0, so the integral of K(s) ds_J f(s) reduces to

    int_{tmin}^{tmax} [ K(r e^{J phi}) (e^{J phi} J) f(r e^{J phi})
                      - K(r e^{-J phi}) (e^{-J phi} J) f(r e^{-J phi}) ] dr.

The substitution r = e^u equidistributes the decay at both ends; each panel
carries a fixed Gauss-Legendre rule and the panel set is bisected until two
consecutive refinements agree in the whole-matrix Frobenius norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoDecayMetadata, ToleranceNotMet
from .operators import (QuatMatrix, _AB_FAMILY, _chain, bq_scalar,
                        kernel_batch, stack_fro)
from .quaternion import Quaternion, SlicePoint, exp_j, qarr, qarr_mul

GAUSS_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)

# Truncation radii are clamped to keep intermediate powers of |s| inside
# float range; contour_for refuses certificates that would need more.
_RADIUS_CLAMP = 1e60


@dataclass(frozen=True)
class SectorContour:
    """Integration path along the boundary rays of a sector.

    phi: ray angle, strictly between the spectral angle and the function
    sector; unit: the imaginary unit J spanning the slice; t_min/t_max:
    truncation radii with 0 < t_min < 1 < t_max; panels: initial panel
    count on the log-radius axis; tol: Frobenius target for refinement.
    """

    phi: float
    unit: Quaternion
    t_min: float
    t_max: float
    panels: int = 8
    tol: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.phi < math.pi:
            raise ValueError("contour angle must lie in (0, pi)")
        if abs(self.unit.s0) > 1e-9 or abs(self.unit.norm() - 1.0) > 1e-9:
            raise ValueError("contour unit must be a unit imaginary quaternion")
        if not (0.0 < self.t_min < 1.0 < self.t_max < math.inf):
            raise ValueError("truncation radii must satisfy 0 < t_min < 1 < t_max")
        if self.panels < 1:
            raise ValueError("need at least one panel")


def _one_sided_radius(delta: float, c: float, tol: float, side: str) -> float:
    # bound 2 C t**delta / delta <= tol / 20 near zero (mirrored at
    # infinity); the min(delta, 1) keeps extra headroom for delta > 1
    if delta <= 0.0:
        raise ValueError("decay rate delta must be positive")
    if not math.isfinite(tol):
        return 1.0
    base = min(delta, 1.0) * tol / (40.0 * max(c, 1e-300))
    if side == "min":
        return base ** (1.0 / delta)
    return base ** (-1.0 / delta)


def tail_radius(delta: float, c: float, tol: float) -> tuple[float, float]:
    """Truncation radii making each tail of the two-ray integral <= tol/20.

    Solves 2 C t_min**delta / delta <= tol/20 and the mirrored bound at
    infinity.  tol = inf returns the degenerate pair (1, 1), which the
    SectorContour invariant rejects.
    """
    return (_one_sided_radius(delta, c, tol, "min"),
            _one_sided_radius(delta, c, tol, "max"))


def contour_for(f, kernel_bound, phi: float, unit: Quaternion,
                tol: float = 1e-9, panels: int = 8) -> SectorContour:
    """Build a contour whose truncation error is certified below tol/10.

    kernel_bound is (C_K, a_K, b_K): the kernel norm is bounded by
    C_K |s|**-a_K below radius one and C_K |s|**-b_K above.  The function
    must carry a decay certificate; the integrand then decays like
    t**(-1+delta0) at zero and t**(-1-deltainf) at infinity.
    """
    cert = getattr(f, "decay", None)
    if cert is None:
        raise NoDecayMetadata("integrand carries no decay certificate")
    c_k, a_k, b_k = kernel_bound
    delta0 = cert.delta + (cert.a - a_k)
    deltainf = cert.delta + (b_k - cert.b)
    if delta0 <= 0.0 or deltainf <= 0.0:
        raise NoDecayMetadata(
            f"certificate (a={cert.a:g}, b={cert.b:g}, delta={cert.delta:g}) "
            f"cannot absorb a kernel of orders ({a_k:g}, {b_k:g})")
    c_total = c_k * cert.constant
    t_min = _one_sided_radius(delta0, c_total, tol, "min")
    t_max = _one_sided_radius(deltainf, c_total, tol, "max")
    if t_min < 1.0 / _RADIUS_CLAMP or t_max > _RADIUS_CLAMP:
        raise ToleranceNotMet(
            "certified truncation radii exceed the floating-point safe range")
    return SectorContour(phi, unit, t_min, t_max, panels=panels, tol=tol)


class OperatorKernel:
    """Batched evaluator of one kernel kind for a fixed operator."""

    def __init__(self, kind: str, t):
        self.kind = kind
        self.operator = t
        self.n = t.n

    def rays(self, x: np.ndarray, y: np.ndarray, unit: Quaternion):
        """Kernel stacks on the conjugate pair of rays (x, +y) and (x, -y)."""
        fam = _AB_FAMILY[self.kind]
        a, b = _chain(self.operator, x, y, upto=fam)[fam]
        jq = np.broadcast_to(qarr(unit), (a.shape[0], 4))
        scalar_side = "left" if self.kind.endswith("_R") else "right"
        bj = bq_scalar(jq, b, scalar_side)
        return a + bj, a - bj

    def __call__(self, p: SlicePoint) -> QuatMatrix:
        return QuatMatrix(kernel_batch(self.kind, self.operator,
                                       np.array([p.x]), np.array([p.y]), p.j)[0])


def _point_kernel_rays(k, x, y, unit, n):
    plus = np.empty((len(x), 4, n, n))
    minus = np.empty_like(plus)
    for i, (xi, yi) in enumerate(zip(x, y)):
        plus[i] = k(SlicePoint(float(xi), float(yi), unit)).components
        minus[i] = k(SlicePoint(float(xi), float(yi), -1.0 * unit)).components
    return plus, minus


def _level_value(k, f, contour: SectorContour, side: str, panels: int,
                 matrix_dim: int | None) -> np.ndarray:
    u0, u1 = math.log(contour.t_min), math.log(contour.t_max)
    j = contour.unit
    c_plus = qarr(exp_j(j, contour.phi) * j)
    c_minus = qarr(exp_j(j, -contour.phi) * j)

    edges = np.linspace(u0, u1, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    t = np.exp(u)
    w = w * t  # jacobian of r = e^u
    x = t * math.cos(contour.phi)
    y = t * math.sin(contour.phi)

    if isinstance(k, OperatorKernel):
        k_plus, k_minus = k.rays(x, y, j)
    else:
        if matrix_dim is None:
            matrix_dim = k(SlicePoint(float(x[0]), float(y[0]), j)).n
        k_plus, k_minus = _point_kernel_rays(k, x, y, j, matrix_dim)

    alpha, bet = f.stem_arrays(x, y)
    jb = qarr_mul(np.broadcast_to(qarr(j), bet.shape), bet)
    f_plus, f_minus = alpha + jb, alpha - jb

    if side == "left":
        s_plus = qarr_mul(np.broadcast_to(c_plus, f_plus.shape), f_plus)
        s_minus = qarr_mul(np.broadcast_to(c_minus, f_minus.shape), f_minus)
        vals = (bq_scalar(s_plus, k_plus, "right")
                - bq_scalar(s_minus, k_minus, "right"))
    elif side == "right":
        s_plus = qarr_mul(f_plus, np.broadcast_to(c_plus, f_plus.shape))
        s_minus = qarr_mul(f_minus, np.broadcast_to(c_minus, f_minus.shape))
        vals = (bq_scalar(s_plus, k_plus, "left")
                - bq_scalar(s_minus, k_minus, "left"))
    else:
        raise ValueError("side must be 'left' or 'right'")
    return np.einsum("m,mcij->cij", w, vals)


def integrate(k, f, contour: SectorContour, *, side: str = "left",
              max_refinements: int = 9):
    """Adaptively evaluate the sector-boundary integral of K ds_J f.

    k is either an OperatorKernel (batched fast path) or any callable
    SlicePoint -> QuatMatrix.  side selects the sandwich order: "left" is
    K ds_J f, "right" is f ds_J K.  Returns (QuatMatrix, diagnostics).
    """
    dim = getattr(k, "n", None)
    panels = contour.panels
    value = _level_value(k, f, contour, side, panels, dim)
    diff = math.inf
    for _ in range(max_refinements):
        panels *= 2
        refined = _level_value(k, f, contour, side, panels, dim)
        diff = float(stack_fro(refined - value))
        value = refined
        if diff <= contour.tol:
            return QuatMatrix(value), {"panels": panels, "tol_achieved": diff,
                                       "t_min": contour.t_min,
                                       "t_max": contour.t_max}
    raise ToleranceNotMet(
        f"Frobenius difference {diff:.3g} above target {contour.tol:.3g} "
        f"after {panels} panels")


def integrate_fixed(k, f, contour: SectorContour, *, side: str = "left"):
    """Single quadrature pass at exactly contour.panels panels, no refinement.

    Used by linearity and panel-scaling tests where the node set must match
    across calls.
    """
    dim = getattr(k, "n", None)
    value = _level_value(k, f, contour, side, contour.panels, dim)
    return QuatMatrix(value), {"panels": contour.panels}
