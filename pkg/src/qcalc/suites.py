"""Theorem suites: operator generation, residual checks, reports.

Each suite maps a block of algebraic identities onto (tag, residual,
tolerance) records computed on a generated or loaded operator.  Residuals
are embedding-norm differences divided by max(1, reference norm) unless a
check states otherwise.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import calculus as calc_mod
from .calculus import (calc, calc_right, derivative_combination_residual,
                       hinf, power_recurrence_residuals, power_reference,
                       product_rule_residuals, resolvent_identity_residuals)
from .errors import NotInjective
from .operators import (CommutingOperator, QuatMatrix, ab_decompose, conj_op,
                        estimate_type_profile, f_spectrum_check, kernel,
                        kernel_batch, stack_norm)
from .quaternion import E1, Quaternion, random_unit_imaginary, to_slice
from .slicefun import Power, Regularizer, parse

SUITE_NAMES = ("identities", "product_rules", "independence", "powers",
               "hinf", "oracle", "kernels")

REPORT_VERSION = "1"

E12 = Quaternion(0.0, 1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0)


@dataclass(frozen=True)
class OperatorSpec:
    """Generator recipe: eigenspheres in the omega-sector with moduli in the
    given annulus, components conjugated by a random orthogonal basis."""

    dim: int = 4
    seed: int = 7
    annulus: tuple[float, float] = (0.5, 2.0)
    omega: float = math.pi / 4.0
    diagonal: bool = False


@dataclass
class GeneratedOperator:
    operator: CommutingOperator
    eigenvalues: list[Quaternion]
    basis: np.ndarray
    spec: OperatorSpec

    def expected_diag(self, values: list[Quaternion]) -> QuatMatrix:
        """Quaternion matrix with the given values on the eigen-basis diagonal."""
        o = self.basis
        comps = np.stack([o.T @ np.diag([v.components[i] for v in values]) @ o
                          for i in range(4)])
        return QuatMatrix(comps)


def generate_operator(spec: OperatorSpec) -> GeneratedOperator:
    """Simultaneously diagonalizable commuting components with a known
    eigensphere list, reproducible from the seed."""
    if not 0.0 < spec.omega < math.pi:
        raise ValueError("sector angle must lie in (0, pi)")
    lo, hi = spec.annulus
    if lo <= 0.0 or hi < lo:
        raise ValueError("annulus must satisfy 0 < r_min <= r_max")
    rng = np.random.default_rng(spec.seed)
    eigs = []
    for _ in range(spec.dim):
        modulus = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        angle = rng.uniform(0.1 * spec.omega, 0.9 * spec.omega)
        unit = random_unit_imaginary(rng)
        eigs.append(Quaternion(modulus * math.cos(angle))
                    + unit * (modulus * math.sin(angle)))
    if spec.diagonal:
        basis = np.eye(spec.dim)
    else:
        basis, _ = np.linalg.qr(rng.normal(size=(spec.dim, spec.dim)))
    comps = np.stack([basis.T @ np.diag([q.components[i] for q in eigs]) @ basis
                      for i in range(4)])
    return GeneratedOperator(CommutingOperator(comps), eigs, basis, spec)


# ---------------------------------------------------------------------------
# Suite context and runner.
# ---------------------------------------------------------------------------

@dataclass
class SuiteContext:
    gen: GeneratedOperator
    tol: float = 1e-9
    theta: float | None = None
    angles: tuple[float, float] | None = None
    units: tuple[Quaternion, ...] = (E1, E12)
    n_max: int = 5
    pairs: int = 50
    seed: int = 7
    profile_angles: tuple[float, ...] | None = None
    subspace_dim: int | None = None

    def __post_init__(self):
        omega = self.gen.spec.omega
        if self.theta is None:
            self.theta = omega + 0.75 * (math.pi - omega)
        room = self.theta - omega
        if self.angles is None:
            # the nominal offsets, pulled inward when the sector gap is slim
            off = min(0.2, 0.25 * room)
            self.angles = (omega + off, self.theta - off)
        if self.profile_angles is None:
            gap = math.pi - omega
            self.profile_angles = (omega + 0.1 * gap, omega + 0.5 * gap,
                                   omega + 0.9 * gap)
        self._profile = None

    @property
    def operator(self) -> CommutingOperator:
        return self.gen.operator

    @property
    def profile(self):
        if self._profile is None:
            self._profile = estimate_type_profile(
                self.operator, self.gen.spec.omega, self.profile_angles)
        return self._profile

    def calc_opts(self, **extra):
        opts = dict(theta=self.theta, tol=self.tol)
        opts.update(extra)
        return opts

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.seed + 1000 * salt)

    def random_resolvent_point(self, rng) -> Quaternion:
        """Random quaternion staying clear of every eigensphere."""
        spectrum = [(q.re, to_slice(q).y) for q in self.gen.eigenvalues]
        while True:
            s = Quaternion(*rng.normal(size=4)) * rng.uniform(0.3, 2.0)
            if s.norm() < 0.1:
                continue
            p = to_slice(s)
            if all(math.hypot(p.x - x0, p.y - y0) > 0.15 for x0, y0 in spectrum):
                return s


@dataclass
class CheckRecord:
    tag: str
    residual: float
    tol: float
    passed: bool
    ms: float


@dataclass
class SuiteReport:
    suite: str
    operator: dict
    checks: list[CheckRecord] = field(default_factory=list)
    env: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "suite": self.suite,
            "operator": self.operator,
            "checks": [{"tag": c.tag, "residual": c.residual, "tol": c.tol,
                        "pass": c.passed, "ms": c.ms} for c in self.checks],
            "env": self.env,
        }

    def to_csv(self) -> str:
        lines = ["suite,tag,residual,tol,pass"]
        for c in self.checks:
            lines.append(f"{self.suite},{c.tag},{c.residual:.17g},{c.tol:.17g},"
                         f"{str(c.passed).lower()}")
        return "\n".join(lines) + "\n"


def _run_groups(groups, parallel: bool) -> list[CheckRecord]:
    def run_one(item):
        _, fn = item
        start = time.perf_counter()
        results = fn()
        ms = (time.perf_counter() - start) * 1000.0
        return [CheckRecord(tag, float(res), tol, bool(res <= tol), ms)
                for tag, res, tol in results]

    if parallel:
        with ThreadPoolExecutor() as pool:
            chunks = list(pool.map(run_one, groups))
    else:
        chunks = [run_one(g) for g in groups]
    return [rec for chunk in chunks for rec in chunk]


# ---------------------------------------------------------------------------
# The seven suites.
# ---------------------------------------------------------------------------

def _suite_identities(ctx: SuiteContext):
    def group():
        rng = ctx.rng(1)
        t = ctx.operator
        worst: dict[str, float] = {}
        done = 0
        while done < ctx.pairs:
            s = ctx.random_resolvent_point(rng)
            p = ctx.random_resolvent_point(rng)
            w = p * p - 2.0 * s.re * p + Quaternion(s.norm_sq())
            if w.norm() < 1e-2:  # too close to the sphere of s
                continue
            for tag, res in resolvent_identity_residuals(t, s, p).items():
                worst[tag] = max(worst.get(tag, 0.0), res)
            done += 1
        return [(tag, res, 1e-10) for tag, res in sorted(worst.items())]

    return [("identities", group)]


def _suite_product_rules(ctx: SuiteContext):
    groups = []
    cases = [("reg2", parse("reg(2)")), ("pow1reg3", parse("pow(1)*reg(3)"))]
    subspace = None
    if ctx.subspace_dim:
        rng = ctx.rng(9)
        subspace = rng.normal(size=(ctx.subspace_dim, ctx.operator.n, 4))
    for regime, rtag in (("decaying", "decaying"), ("h_infinity", "hinf")):
        for ftag, f in cases:
            def group(f=f, regime=regime, rtag=rtag, ftag=ftag):
                g = Regularizer(2)
                tol_q = ctx.tol if regime == "decaying" else min(ctx.tol, 1e-12)
                res = product_rule_residuals(
                    ctx.operator, g, f, ctx.profile, regime=regime,
                    subspace=subspace, **ctx.calc_opts(tol=tol_q))
                return [(f"{tag}_{rtag}_{ftag}", val, 1e-6)
                        for tag, val in sorted(res.items())]

            groups.append((f"product_{rtag}_{ftag}", group))
    return groups


def _suite_independence(ctx: SuiteContext):
    groups = []
    f = parse("reg(2)")
    for kind in calc_mod.CALC_KINDS:
        def group(kind=kind):
            values = []
            for phi in ctx.angles:
                for unit in ctx.units:
                    values.append(calc(kind, ctx.operator, f, ctx.profile,
                                       **ctx.calc_opts(phi=phi, unit=unit)).value)
            worst = max(((v - values[0]).norm() for v in values[1:]),
                        default=0.0)
            return [(f"independence_{kind}", worst, 1e-7)]

        groups.append((f"independence_{kind}", group))
    return groups


def _suite_powers(ctx: SuiteContext):
    groups = []

    for n in range(1, ctx.n_max + 1):
        def group(n=n):
            out = []
            for kind in calc_mod.CALC_KINDS:
                res = hinf(kind, ctx.operator, Power(n), ctx.profile,
                           **ctx.calc_opts(tol=min(ctx.tol, 1e-12)))
                ref = power_reference(kind, ctx.operator, n)
                val = (res.value - ref).norm() / max(1.0, ref.norm())
                out.append((f"hinf_power_{kind}_n{n}", val, 1e-6))
            return out

        groups.append((f"hinf_powers_n{n}", group))

    def recurrences():
        res = power_recurrence_residuals(ctx.operator, Regularizer(4), 3,
                                         ctx.profile, **ctx.calc_opts())
        return [(tag, val, 1e-6) for tag, val in sorted(res.items())]

    groups.append(("recurrences", recurrences))

    def reg_shift():
        a = hinf("F", ctx.operator, Power(2), ctx.profile,
                 **ctx.calc_opts(tol=min(ctx.tol, 1e-12)))
        b = hinf("F", ctx.operator, Power(2), ctx.profile,
                 regularizer_power=a.diagnostics.regularizer_n + 1,
                 **ctx.calc_opts(tol=min(ctx.tol, 1e-12)))
        val = (a.value - b.value).norm() / max(1.0, a.value.norm())
        return [("regularizer_shift", val, 1e-6)]

    groups.append(("regularizer_shift", reg_shift))
    return groups


def _suite_hinf(ctx: SuiteContext):
    groups = []

    def agreement():
        out = []
        f = Regularizer(2)
        for kind in calc_mod.CALC_KINDS:
            a = hinf(kind, ctx.operator, f, ctx.profile,
                     **ctx.calc_opts(tol=min(ctx.tol, 1e-12)))
            b = calc(kind, ctx.operator, f, ctx.profile, **ctx.calc_opts())
            val = (a.value - b.value).norm() / max(1.0, b.value.norm())
            out.append((f"hinf_matches_decaying_{kind}", val, 1e-7))
            out.append((f"hinf_range_residual_{kind}",
                        a.diagnostics.range_residual, 1e-10))
        return out

    groups.append(("hinf_agreement", agreement))

    def injectivity_guard():
        zero = CommutingOperator(np.zeros((4, ctx.gen.spec.dim,
                                           ctx.gen.spec.dim)))
        try:
            hinf("S", zero, Power(1), ctx.profile, **ctx.calc_opts())
        except NotInjective:
            return [("hinf_rejects_noninjective", 0.0, 0.5)]
        return [("hinf_rejects_noninjective", 1.0, 0.5)]

    groups.append(("injectivity_guard", injectivity_guard))

    def commutation():
        g = Regularizer(2)
        val = hinf("Q", ctx.operator, g, ctx.profile,
                   **ctx.calc_opts(tol=min(ctx.tol, 1e-12))).value
        tq = ctx.operator.as_qmatrix()
        res = (val @ tq - tq @ val).norm() / max(1.0, val.norm() * tq.norm())
        return [("hinf_commutation_T", res, 1e-9)]

    groups.append(("hinf_commutation", commutation))
    return groups


def _suite_oracle(ctx: SuiteContext):
    groups = []
    f = Regularizer(2)

    def cauchy():
        got = calc("S", ctx.operator, f, ctx.profile, **ctx.calc_opts()).value
        want = ctx.gen.expected_diag([f.eval(q) for q in ctx.gen.eigenvalues])
        return [("cauchy_reproduction", (got - want).norm(), 1e-7)]

    groups.append(("cauchy", cauchy))

    def fine():
        from .slicefun import pointwise_fine
        vals = [pointwise_fine(f, q) for q in ctx.gen.eigenvalues]
        out = []
        for idx, kind in enumerate(("Q", "P2", "F")):
            got = calc(kind, ctx.operator, f, ctx.profile,
                       **ctx.calc_opts()).value
            want = ctx.gen.expected_diag([v[idx] for v in vals])
            out.append((f"fine_oracle_{kind}", (got - want).norm(), 1e-6))
        return out

    groups.append(("fine_oracles", fine))

    def left_right():
        out = []
        for kind in calc_mod.CALC_KINDS:
            a = calc(kind, ctx.operator, f, ctx.profile, **ctx.calc_opts()).value
            b = calc_right(kind, ctx.operator, f, ctx.profile,
                           **ctx.calc_opts()).value
            out.append((f"left_right_{kind}", (a - b).norm(), 1e-8))
        return out

    groups.append(("left_right", left_right))

    def conj_and_friends():
        out = []
        for kind in calc_mod.CALC_KINDS:
            a = calc(kind, ctx.operator, f, ctx.profile,
                     **ctx.calc_opts()).value.conj()
            b = calc(kind, conj_op(ctx.operator), f,
                     estimate_type_profile(conj_op(ctx.operator),
                                           ctx.gen.spec.omega,
                                           ctx.profile_angles),
                     **ctx.calc_opts()).value
            out.append((f"intrinsic_conj_{kind}", (a - b).norm(), 1e-8))
        out.append(("two_fprime",
                    derivative_combination_residual(
                        ctx.operator, Regularizer(3), ctx.profile,
                        **ctx.calc_opts()), 1e-6))
        val = calc("S", ctx.operator, f, ctx.profile, **ctx.calc_opts()).value
        tq = ctx.operator.as_qmatrix()
        out.append(("commutation_T",
                    (val @ tq - tq @ val).norm()
                    / max(1.0, val.norm() * tq.norm()), 1e-9))
        out.append(("value_components_commute",
                    val.commutation_residual(), 1e-9))
        return out

    groups.append(("conjugation_commutation", conj_and_friends))
    return groups


def _suite_kernels(ctx: SuiteContext):
    groups = []
    t = ctx.operator
    kinds = ("S_L", "S_R", "Qc", "P2_L", "P2_R", "F_L", "F_R")

    def reconstruction():
        rng = ctx.rng(3)
        worst = 0.0
        worst_sym = 0.0
        for _ in range(6):
            s = ctx.random_resolvent_point(rng)
            p = to_slice(s)
            for kind in kinds:
                a, b = ab_decompose(kind, t, p.x, p.y)
                a2, b2 = ab_decompose(kind, t, p.x, -p.y)
                worst_sym = max(worst_sym, (a - a2).norm(), (b + b2).norm())
                for _ in range(8):
                    j = random_unit_imaginary(rng)
                    k = kernel(kind, t, Quaternion(p.x) + j * p.y)
                    if kind.endswith("_R"):
                        recon = a + b.scalar_mul(j, "left")
                    else:
                        recon = a + b.scalar_mul(j, "right")
                    worst = max(worst, (k - recon).norm()
                                / max(1.0, k.norm()))
        return [("ab_reconstruction", worst, 1e-10),
                ("ab_symmetry", worst_sym, 1e-10)]

    groups.append(("ab_reconstruction", reconstruction))

    def cauchy_riemann():
        rng = ctx.rng(4)
        worst = 0.0
        for _ in range(4):
            s = ctx.random_resolvent_point(rng)
            p = to_slice(s)
            h = 1e-5 * max(1.0, s.norm())
            for kind in kinds:
                ax_p, bx_p = ab_decompose(kind, t, p.x + h, p.y)
                ax_m, bx_m = ab_decompose(kind, t, p.x - h, p.y)
                ay_p, by_p = ab_decompose(kind, t, p.x, p.y + h)
                ay_m, by_m = ab_decompose(kind, t, p.x, p.y - h)
                da_dx = (ax_p - ax_m) * (0.5 / h)
                db_dx = (bx_p - bx_m) * (0.5 / h)
                da_dy = (ay_p - ay_m) * (0.5 / h)
                db_dy = (by_p - by_m) * (0.5 / h)
                scale = max(da_dx.norm(), db_dy.norm(), da_dy.norm(),
                            db_dx.norm(), 1e-30)
                worst = max(worst, (da_dx - db_dy).norm() / scale,
                            (da_dy + db_dx).norm() / scale)
        return [("kernel_cauchy_riemann", worst, 1e-5)]

    groups.append(("cauchy_riemann", cauchy_riemann))

    def norms_and_conj():
        rng = ctx.rng(5)
        worst_comp = 0.0
        worst_conj_norm = 0.0
        worst_conj_rel = 0.0
        count = 0
        while count < 100:
            s = ctx.random_resolvent_point(rng)
            kind = kinds[count % len(kinds)]
            k = kernel(kind, t, s)
            nk = k.norm()
            for i in range(4):
                ni = float(np.linalg.norm(k.components[i], 2))
                worst_comp = max(worst_comp, ni - nk)
            worst_conj_norm = max(worst_conj_norm, k.conj().norm() - 2.0 * nk)
            count += 1
        for _ in range(10):
            s = ctx.random_resolvent_point(rng)
            lhs = kernel("S_L", conj_op(t), s)
            rhs = kernel("S_R", t, s.conj()).conj()
            worst_conj_rel = max(worst_conj_rel,
                                 (lhs - rhs).norm() / max(1.0, rhs.norm()))
        return [("component_norms", max(worst_comp, 0.0), 1e-12),
                ("conjugate_norm", max(worst_conj_norm, 0.0), 1e-12),
                ("conj_relation", worst_conj_rel, 1e-10)]

    groups.append(("norms_conj", norms_and_conj))

    def spectrum_and_commutation():
        rng = ctx.rng(6)
        out = []
        sym_ok = 0.0
        for q in ctx.gen.eigenvalues[: min(3, len(ctx.gen.eigenvalues))]:
            base = f_spectrum_check(t, q)
            p = to_slice(q)
            for _ in range(16):
                j = random_unit_imaginary(rng)
                other = f_spectrum_check(t, Quaternion(p.x) + j * p.y)
                if other != base:
                    sym_ok = 1.0
        s = ctx.random_resolvent_point(rng)
        base = f_spectrum_check(t, s)
        p = to_slice(s)
        for _ in range(16):
            j = random_unit_imaginary(rng)
            if f_spectrum_check(t, Quaternion(p.x) + j * p.y) != base:
                sym_ok = 1.0
        out.append(("axial_symmetry", sym_ok, 0.5))
        out.append(("spectrum_detects_eigensphere",
                    1.0 if f_spectrum_check(t, ctx.gen.eigenvalues[0]) else 0.0,
                    0.5))

        from .operators import q_inverse, q_operator
        worst_comm = 0.0
        worst_back = 0.0
        for _ in range(10):
            s = ctx.random_resolvent_point(rng)
            g = q_inverse(t, s)
            back = q_operator(t, s) @ g - QuatMatrix.identity(t.n)
            worst_back = max(worst_back, back.norm())
            for i in range(4):
                ti = QuatMatrix.from_real(t.components[i])
                worst_comm = max(worst_comm, (ti @ g - g @ ti).norm()
                                 / max(1.0, g.norm()))
        out.append(("q_inverse_multiply_back", worst_back, 1e-10))
        out.append(("q_inverse_commutes", worst_comm, 1e-10))
        return out

    groups.append(("spectrum_commutation", spectrum_and_commutation))

    def estimate_scaling():
        prof = ctx.profile
        phi = min(prof.c_phi)
        worst = 0.0
        radii = np.geomspace(5e-3, 5e2, 24)
        for kind in kinds:
            c_k, a_k, b_k = calc_mod.kernel_bound(kind, prof, phi)
            bound = np.where(radii <= 1.0, radii ** (-a_k), radii ** (-b_k))
            for psi in (phi, (phi + math.pi) / 2.0, math.pi):
                x = radii * math.cos(psi)
                y = radii * np.abs(math.sin(psi))
                norms = stack_norm(kernel_batch(kind, t, x, y, E1))
                worst = max(worst, float(np.max(norms / (c_k * bound))))
        return [("estimate_scaling_envelope", worst / 10.0, 1.0)]

    groups.append(("estimate_scaling", estimate_scaling))
    return groups


_SUITE_BUILDERS = {
    "identities": _suite_identities,
    "product_rules": _suite_product_rules,
    "independence": _suite_independence,
    "powers": _suite_powers,
    "hinf": _suite_hinf,
    "oracle": _suite_oracle,
    "kernels": _suite_kernels,
}


def run_suite(name: str, ctx: SuiteContext, parallel: bool = False) -> SuiteReport:
    if name not in _SUITE_BUILDERS:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    groups = _SUITE_BUILDERS[name](ctx)
    checks = _run_groups(groups, parallel)
    spec = ctx.gen.spec
    report = SuiteReport(
        suite=name,
        operator={"dim": spec.dim, "seed": spec.seed,
                  "annulus": list(spec.annulus), "omega": spec.omega,
                  "diagonal": spec.diagonal},
        checks=checks,
        env={"seed": ctx.seed, "tol": ctx.tol, "theta": ctx.theta,
             "angles": list(ctx.angles),
             "units": [list(u.components) for u in ctx.units],
             "n_max": ctx.n_max, "pairs": ctx.pairs, "parallel": parallel},
    )
    return report


def write_report(report: SuiteReport, directory) -> tuple[str, str]:
    import os
    os.makedirs(directory, exist_ok=True)
    json_path = os.path.join(directory, f"{report.suite}_report.json")
    csv_path = os.path.join(directory, f"{report.suite}_report.csv")
    with open(json_path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w") as fh:
        fh.write(report.to_csv())
    return json_path, csv_path
