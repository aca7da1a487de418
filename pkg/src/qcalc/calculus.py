"""The four kernel calculi for decaying functions and their H-infinity forms.

For an operator of type (alpha, beta, omega) and a function f certified in
the (3 alpha, 3 beta) decay class on a sector strictly larger than omega,
the calculi are the contour integrals

    S :  (1/2pi)  int S_L^-1(s,T) ds_J f(s)
    Q :  (-1/pi)  int Q_{c,s}^-1(T) ds_J f(s)
    P2:  (1/2pi)  int P_2^L(s,T) ds_J f(s)
    F :  (1/2pi)  int F_L(s,T) ds_J f(s)

over the boundary of a sector between the spectral angle and the function
sector.  Polynomially growing functions are handled by multiplying in a
rational regularizer e(s) = s^n/(1+s)^(2n), evaluating the decaying-class
calculi, and inverting the prescribed prefactor built from e(T) and
e(conj T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contour import OperatorKernel, SectorContour, contour_for, integrate
from .errors import NotInjective, NotIntrinsic
from .operators import (CommutingOperator, QuatMatrix, TypeProfile, conj_op,
                        kernel)
from .quaternion import E1, Quaternion

CALC_KINDS = ("S", "Q", "P2", "F")

# prefactor of the defining integral, per calculus kind
_PREFACTOR = {"S": 1.0 / (2.0 * math.pi), "Q": -1.0 / math.pi,
              "P2": 1.0 / (2.0 * math.pi), "F": 1.0 / (2.0 * math.pi)}

_LEFT_KERNEL = {"S": "S_L", "Q": "Qc", "P2": "P2_L", "F": "F_L"}
_RIGHT_KERNEL = {"S": "S_R", "Q": "Qc", "P2": "P2_R", "F": "F_R"}

# norm bounds of the kernels outside the phi-sector, as multiples of the
# sampled S-resolvent constant: (multiplier(C), exponent factor); the kernel
# norm is bounded by mult * |s|**(-factor*alpha) below radius one and
# mult * |s|**(-factor*beta) above.
_KERNEL_ENVELOPE = {
    "S_L": (lambda c: c, 1.0),
    "S_R": (lambda c: 2.0 * c, 1.0),
    "Qc": (lambda c: 10.0 * c * c, 2.0),
    "P2_L": (lambda c: 10.0 * c * c, 2.0),
    "P2_R": (lambda c: 16.0 * c * c, 2.0),
    "F_L": (lambda c: 40.0 * c ** 3, 3.0),
    "F_R": (lambda c: 80.0 * c ** 3, 3.0),
}

INJECTIVITY_FACTOR = 1e-10


def kernel_bound(kernel_kind: str, profile: TypeProfile, phi: float):
    """(C_K, a_K, b_K) tail envelope of a kernel outside the phi-sector."""
    mult, factor = _KERNEL_ENVELOPE[kernel_kind]
    c = profile.constant_at(phi)
    return mult(c), factor * profile.alpha, factor * profile.beta


@dataclass
class CalcDiagnostics:
    tol_achieved: float
    panels: int
    t_min: float
    t_max: float
    phi: float
    theta: float
    commutation_residual: float
    regularizer_n: int | None = None
    range_residual: float | None = None


@dataclass
class CalculusResult:
    value: QuatMatrix
    kind: str
    regime: str
    diagnostics: CalcDiagnostics


def _check_profile(profile: TypeProfile) -> None:
    if profile.alpha < 1.0 / 3.0 - 1e-12:
        raise ValueError("profile exponent alpha must be at least 1/3")
    if not 0.0 < profile.beta <= 1.0 / 3.0 + 1e-12:
        raise ValueError("profile exponent beta must lie in (0, 1/3]")


def _angles(profile: TypeProfile, theta, phi):
    omega = profile.omega
    if theta is None:
        theta = omega + 0.75 * (math.pi - omega)
    if phi is None:
        phi = 0.5 * (omega + theta)
    if not omega < phi < theta < math.pi:
        raise ValueError("need omega < phi < theta < pi")
    return theta, phi


def _initial_panels(contour: SectorContour) -> int:
    span = math.log(contour.t_max) - math.log(contour.t_min)
    return max(8, int(math.ceil(span / 2.0)))


def calc(kind: str, t: CommutingOperator, f, profile: TypeProfile, *,
         theta: float | None = None, phi: float | None = None,
         unit: Quaternion = E1, tol: float = 1e-9,
         side: str = "left") -> CalculusResult:
    """Decaying-regime functional calculus of f at t.

    side = "left" uses the left kernel with f on the right of ds_J; the
    "right" form (intrinsic f only) integrates f ds_J K_R instead.
    """
    if kind not in CALC_KINDS:
        raise ValueError(f"unknown calculus kind {kind!r}")
    _check_profile(profile)
    theta, phi = _angles(profile, theta, phi)
    if side == "right":
        if not f.intrinsic:
            raise NotIntrinsic("the right-kernel form needs an intrinsic function")
        kernel_kind = _RIGHT_KERNEL[kind]
    else:
        kernel_kind = _LEFT_KERNEL[kind]

    f.certify_decay(3.0 * profile.alpha, 3.0 * profile.beta, theta)
    bound = kernel_bound(kernel_kind, profile, phi)
    contour = contour_for(f, bound, phi, unit, tol=tol)
    contour = SectorContour(contour.phi, contour.unit, contour.t_min,
                            contour.t_max, panels=_initial_panels(contour),
                            tol=tol)
    raw, info = integrate(OperatorKernel(kernel_kind, t), f, contour, side=side)
    value = _PREFACTOR[kind] * raw
    diag = CalcDiagnostics(tol_achieved=info["tol_achieved"],
                           panels=info["panels"], t_min=contour.t_min,
                           t_max=contour.t_max, phi=phi, theta=theta,
                           commutation_residual=value.commutation_residual())
    return CalculusResult(value, kind, "decaying", diag)


def calc_right(kind: str, t: CommutingOperator, f, profile: TypeProfile,
               **opts) -> CalculusResult:
    """Same value as calc, evaluated through the right kernel (intrinsic f)."""
    return calc(kind, t, f, profile, side="right", **opts)


def calc_on_conj(kind: str, t: CommutingOperator, f, profile: TypeProfile,
                 profile_bar: TypeProfile | None = None, **opts) -> CalculusResult:
    """Calculus of f at the conjugate operator.

    For intrinsic f this is the entrywise conjugate of the value at t; in
    general it is evaluated directly on conj(T), whose type profile is
    estimated on demand when not supplied.
    """
    if f.intrinsic:
        res = calc(kind, t, f, profile, **opts)
        return CalculusResult(res.value.conj(), kind, res.regime, res.diagnostics)
    if profile_bar is None:
        profile_bar = _conj_profile(t, profile)
    return calc(kind, conj_op(t), f, profile_bar, **opts)


def _conj_profile(t: CommutingOperator, profile: TypeProfile) -> TypeProfile:
    from .operators import estimate_type_profile
    return estimate_type_profile(conj_op(t), profile.omega,
                                 sorted(profile.c_phi), alpha=profile.alpha,
                                 beta=profile.beta)


# ---------------------------------------------------------------------------
# H-infinity regime.
# ---------------------------------------------------------------------------

def _require_injective(t: CommutingOperator, label: str) -> None:
    if t.min_singular_value() <= INJECTIVITY_FACTOR * max(t.norm(), 1e-300):
        raise NotInjective(f"{label} is numerically non-injective")


def _solve_prefactor(pref: QuatMatrix, bracket: QuatMatrix):
    emb = pref.embed()
    cond = np.linalg.cond(emb)
    if not np.isfinite(cond) or cond > 1e12:
        raise NotInjective("regularized prefactor is numerically non-injective")
    inv = pref.inverse()
    x = inv @ bracket
    resid = (pref @ x - bracket).fro() / max(1.0, bracket.fro())
    return x, resid


def hinf(kind: str, t: CommutingOperator, f, profile: TypeProfile, *,
         theta: float | None = None, phi: float | None = None,
         unit: Quaternion = E1, tol: float = 1e-12,
         regularizer_power: int | None = None) -> CalculusResult:
    """H-infinity calculus of a polynomially growing function.

    The value is assembled from decaying-regime sub-calculi of e and e*f,
    where e is the rational regularizer chosen from the growth certificate
    of f (or of the given power), and the prefactors e(T), e(T) e(conj T),
    e(T)^2 e(conj T) are inverted through the real embedding.  Requires T
    and conj(T) injective.

    Inverting the prefactor amplifies quadrature error by up to the norm of
    e(T)^-1, so the sub-integrals tighten their tolerance adaptively once
    that norm is known (down to the roundoff floor of the quadrature).
    """
    from .slicefun import Product, Regularizer, choose_regularizer

    if kind not in CALC_KINDS:
        raise ValueError(f"unknown calculus kind {kind!r}")
    _check_profile(profile)
    theta, phi = _angles(profile, theta, phi)
    _require_injective(t, "T")
    _require_injective(conj_op(t), "conj(T)")

    if regularizer_power is None:
        e = choose_regularizer(f, profile.alpha, profile.beta, theta)
    else:
        e = Regularizer(regularizer_power)
    ef = Product(e, f)

    opts = dict(theta=theta, phi=phi, unit=unit, tol=min(tol, 1e-12))

    def dec(k, fun, on_conj=False):
        if on_conj:
            return calc_on_conj(k, t, fun, profile, **opts).value
        return calc(k, t, fun, profile, **opts).value

    e_t = dec("S", e)
    try:
        amplification = e_t.inverse().norm()
    except np.linalg.LinAlgError as exc:
        raise NotInjective("e(T) is numerically singular") from exc
    if not math.isfinite(amplification):
        raise NotInjective("e(T) is numerically singular")
    tol_eff = max(min(opts["tol"], 1e-8 / max(amplification, 1.0)), 2e-13)
    if tol_eff < opts["tol"]:
        opts["tol"] = tol_eff
        e_t = dec("S", e)
    e_tbar = e_t.conj()  # e is intrinsic
    ef_t = dec("S", ef)

    if kind == "S":
        pref = e_t
        bracket = ef_t
    elif kind == "Q":
        de_t = dec("Q", e)
        def_t = dec("Q", ef)
        pref = e_t @ e_tbar
        bracket = e_t @ def_t - de_t @ ef_t
    elif kind == "P2":
        de_t = dec("Q", e)
        dbe_t = dec("P2", e)
        dbef_t = dec("P2", ef)
        ef_tbar = dec("S", ef, on_conj=True)
        pref = e_t @ e_t @ e_tbar
        bracket = (e_t @ e_tbar @ dbef_t - e_tbar @ dbe_t @ ef_t
                   + e_t @ de_t @ ef_tbar - e_tbar @ de_t @ ef_t)
    else:  # F
        de_t = dec("Q", e)
        le_t = dec("F", e)
        lef_t = dec("F", ef)
        def_t = dec("Q", ef)
        pref = e_t @ e_t @ e_tbar
        bracket = (e_t @ e_tbar @ lef_t - e_tbar @ le_t @ ef_t
                   + e_t @ de_t @ def_t - de_t @ de_t @ ef_t)

    value, range_resid = _solve_prefactor(pref, bracket)
    diag = CalcDiagnostics(tol_achieved=opts["tol"], panels=0, t_min=0.0,
                           t_max=0.0, phi=phi, theta=theta,
                           commutation_residual=value.commutation_residual(),
                           regularizer_n=e.n, range_residual=range_resid)
    return CalculusResult(value, kind, "h_infinity", diag)


# ---------------------------------------------------------------------------
# Algebraic resolvent identities (no quadrature).
# ---------------------------------------------------------------------------

def resolvent_identity_residuals(t: CommutingOperator, s: Quaternion,
                                 p: Quaternion) -> dict[str, float]:
    """Residuals of the four two-point kernel identities at (s, p), s not in [p].

    Each residual is the embedding norm of LHS - RHS divided by
    max(1, ||RHS||).
    """
    tbar = conj_op(t)
    w = p * p - 2.0 * s.re * p + Quaternion(s.norm_sq())
    if w.norm() < 1e-12:
        raise ValueError("s and p lie on a common sphere; identities degenerate")
    w_inv = w.inverse()
    sbar = s.conj()

    def lhs(k_s: QuatMatrix, k_p: QuatMatrix) -> QuatMatrix:
        expr = (k_s.scalar_mul(p, "right") - k_p.scalar_mul(p, "right")
                - k_s.scalar_mul(sbar, "left") + k_p.scalar_mul(sbar, "left"))
        return expr.scalar_mul(w_inv, "right")

    def rel(a: QuatMatrix, b: QuatMatrix) -> float:
        return (a - b).norm() / max(1.0, b.norm())

    out = {}
    sl_p = kernel("S_L", t, p)
    sr_s = kernel("S_R", t, s)
    out["resolvent_identity_S"] = rel(lhs(sr_s, sl_p), sr_s @ sl_p)

    q_s = kernel("Qc", t, s)
    q_p = kernel("Qc", t, p)
    sl_p_bar = kernel("S_L", tbar, p)
    sr_s_bar = kernel("S_R", tbar, s)
    rhs_a = q_s @ sl_p + sr_s_bar @ q_p
    rhs_b = q_s @ sl_p_bar + sr_s @ q_p
    l_q = lhs(q_s, q_p)
    out["resolvent_identity_Q"] = max(rel(l_q, rhs_a), rel(l_q, rhs_b))

    p2l_p = kernel("P2_L", t, p)
    p2r_s = kernel("P2_R", t, s)
    rhs_p2 = (p2r_s @ sl_p + sr_s @ p2l_p
              - 2.0 * (q_s @ (sl_p - sl_p_bar)))
    out["resolvent_identity_P2"] = rel(lhs(p2r_s, p2l_p), rhs_p2)

    fl_p = kernel("F_L", t, p)
    fr_s = kernel("F_R", t, s)
    rhs_f = fr_s @ sl_p + sr_s @ fl_p - 4.0 * (q_s @ q_p)
    out["resolvent_identity_F"] = rel(lhs(fr_s, fl_p), rhs_f)
    return out


# ---------------------------------------------------------------------------
# Theorem-shaped residual helpers shared by the suites and the test suite.
# ---------------------------------------------------------------------------

def _rel(a: QuatMatrix, b: QuatMatrix) -> float:
    return (a - b).norm() / max(1.0, b.norm())


def _subspace_rel(a: QuatMatrix, b: QuatMatrix, vectors: np.ndarray) -> float:
    worst = 0.0
    for v in vectors:
        dv = a.apply(v) - b.apply(v)
        worst = max(worst, float(np.linalg.norm(dv))
                    / max(1.0, float(np.linalg.norm(b.apply(v)))))
    return worst


def product_rule_residuals(t: CommutingOperator, g, f, profile: TypeProfile,
                           regime: str = "decaying",
                           subspace: np.ndarray | None = None,
                           **opts) -> dict[str, float]:
    """Residuals of the four product rules for intrinsic g and left-slice f.

    By default the rules are compared as full-matrix equalities (every
    operator here is everywhere defined); passing `subspace`, an array of
    quaternion vectors shaped (k, n, 4), restricts the comparison to those
    vectors for callers modeling genuinely partial operators.
    """
    from .slicefun import Product

    if not g.intrinsic:
        raise NotIntrinsic("product rules require an intrinsic left factor")
    gf = Product(g, f)
    compare = (_rel if subspace is None
               else lambda a, b: _subspace_rel(a, b, subspace))

    if regime == "decaying":
        def ev(kind, fun):
            return calc(kind, t, fun, profile, **opts).value

        def ev_bar(kind, fun):
            return calc_on_conj(kind, t, fun, profile, **opts).value
    elif regime == "h_infinity":
        def ev(kind, fun):
            return hinf(kind, t, fun, profile, **opts).value

        def ev_bar(kind, fun):
            res = hinf(kind, t, fun, profile, **opts)
            if fun.intrinsic:
                return res.value.conj()
            return hinf(kind, conj_op(t), fun,
                        _conj_profile(t, profile), **opts).value
    else:
        raise ValueError("regime must be 'decaying' or 'h_infinity'")

    g_t, f_t = ev("S", g), ev("S", f)
    g_tbar, f_tbar = ev_bar("S", g), ev_bar("S", f)
    dg_t, df_t = ev("Q", g), ev("Q", f)
    dbg_t, dbf_t = ev("P2", g), ev("P2", f)
    lg_t, lf_t = ev("F", g), ev("F", f)

    out = {
        "product_rule_S": compare(ev("S", gf), g_t @ f_t),
        "product_rule_Q": max(
            compare(ev("Q", gf), dg_t @ f_t + g_tbar @ df_t),
            compare(ev("Q", gf), dg_t @ f_tbar + g_t @ df_t)),
        "product_rule_P2": compare(
            ev("P2", gf), dbg_t @ f_t + g_t @ dbf_t + dg_t @ (f_t - f_tbar)),
        "product_rule_F": compare(
            ev("F", gf), lg_t @ f_t + g_t @ lf_t - dg_t @ df_t),
    }
    return out


def power_recurrence_residuals(t: CommutingOperator, f, n_max: int,
                               profile: TypeProfile, *,
                               theta: float | None = None,
                               **opts) -> dict[str, float]:
    """Residuals of the four recurrences linking s^n f to s^(n-1) f."""
    from .slicefun import Power, Product

    _check_profile(profile)
    theta_eff, _ = _angles(profile, theta, opts.get("phi"))
    # membership that keeps s^n f inside the calculus class up to n_max
    f.certify_decay(3.0 * profile.alpha, 3.0 * profile.beta - n_max, theta_eff)

    tq = t.as_qmatrix()
    tbq = conj_op(t).as_qmatrix()
    opts = dict(opts, theta=theta)

    def ev(kind, fun):
        return calc(kind, t, fun, profile, **opts).value

    def ev_bar(kind, fun):
        return calc_on_conj(kind, t, fun, profile, **opts).value

    f_t_base = ev("S", f)
    f_tbar_base = ev_bar("S", f)
    out = {}
    for n in range(1, n_max + 1):
        lo = Product(Power(n - 1), f)
        hi = Product(Power(n), f)
        tn_f = tq.matpow(n - 1) @ f_t_base
        tbn_f = tbq.matpow(n - 1) @ f_tbar_base

        out[f"recurrence_S_n{n}"] = _rel(ev("S", hi), tq @ ev("S", lo))
        d_lo = ev("Q", lo)
        d_hi = ev("Q", hi)
        ra = tq @ d_lo - 2.0 * tbn_f
        rb = tbq @ d_lo - 2.0 * tn_f
        out[f"recurrence_Q_n{n}"] = max(_rel(d_hi, ra), _rel(d_hi, rb),
                                        _rel(ra, rb))
        out[f"recurrence_P2_n{n}"] = _rel(
            ev("P2", hi), tq @ ev("P2", lo) + 2.0 * tbn_f + 2.0 * tn_f)
        out[f"recurrence_F_n{n}"] = _rel(
            ev("F", hi), tq @ ev("F", lo) + 2.0 * d_lo)
    return out


# report-style alias used by the CLI suites
power_recurrence_check = power_recurrence_residuals


def derivative_combination_residual(t: CommutingOperator, f,
                                    profile: TypeProfile, **opts) -> float:
    """Residual of Dbar f(T) = 2 f'(T) - D f(T)."""
    fprime = f.slice_derivative()
    lhs = calc("P2", t, f, profile, **opts).value
    rhs = (2.0 * calc("S", t, fprime, profile, **opts).value
           - calc("Q", t, f, profile, **opts).value)
    return _rel(lhs, rhs)


def power_reference(kind: str, t: CommutingOperator, n: int) -> QuatMatrix:
    """Closed-form value the H-infinity calculi must give on s**n.

    S: T^n.  Q: -2 sum_{k=0}^{n-1} conj(T)^(n-1-k) T^k.  P2: 2n T^(n-1) plus
    the same sum with factor +2.  F: -4 sum_{k=1}^{n-1} k conj(T)^(n-1-k)
    T^(k-1).
    """
    tq = t.as_qmatrix()
    tbq = conj_op(t).as_qmatrix()
    if kind == "S":
        return tq.matpow(n)
    if kind == "Q" or kind == "P2":
        acc = QuatMatrix.zeros(t.n)
        for k in range(n):
            acc = acc + tbq.matpow(n - 1 - k) @ tq.matpow(k)
        if kind == "Q":
            return -2.0 * acc
        if n == 0:
            return 2.0 * acc
        return 2.0 * float(n) * tq.matpow(n - 1) + 2.0 * acc
    if kind == "F":
        acc = QuatMatrix.zeros(t.n)
        for k in range(1, n):
            acc = acc + float(k) * (tbq.matpow(n - 1 - k) @ tq.matpow(k - 1))
        return -4.0 * acc
    raise ValueError(f"unknown calculus kind {kind!r}")
