import math

import numpy as np
import pytest

from conftest import scalar_operator
from qcalc.contour import (OperatorKernel, SectorContour, contour_for,
                           integrate, integrate_fixed, tail_radius)
from qcalc.errors import NoDecayMetadata, ToleranceNotMet
from qcalc.quaternion import E1, E2, ONE, Quaternion
from qcalc.slicefun import Regularizer, Scale, Sum

E12 = Quaternion(0, 1, 1, 0) * (1.0 / math.sqrt(2.0))


def cauchy_setup(tol=1e-9):
    """Scalar operator q = 1 with the S kernel and f = reg(1)."""
    t = scalar_operator(ONE)
    f = Regularizer(1)
    f.certify_decay(1.0, 1.0, 2.4)
    return t, f


class TestTailRadius:
    def test_spec_values(self):
        t_min, t_max = tail_radius(1.0, 1.0, 1e-8)
        assert t_min == pytest.approx(2.5e-10, rel=1e-12)
        assert t_max == pytest.approx(4e9, rel=1e-12)

        t_min, _ = tail_radius(2.0, 1.0, 1e-8)
        assert t_min == pytest.approx(math.sqrt(2.5e-10), rel=1e-12)

    @pytest.mark.parametrize("delta,c,tol", [(0.5, 3.0, 1e-6), (1.0, 1.0, 1e-8),
                                             (2.0, 10.0, 1e-9), (0.2, 0.5, 1e-7)])
    def test_tail_bound_postcondition(self, delta, c, tol):
        t_min, t_max = tail_radius(delta, c, tol)
        assert 2.0 * c * t_min ** delta / delta <= tol / 20.0 * (1 + 1e-12)
        assert 2.0 * c * t_max ** (-delta) / delta <= tol / 20.0 * (1 + 1e-12)

    def test_degenerate_rejected(self):
        t_min, t_max = tail_radius(1.0, 1.0, math.inf)
        assert (t_min, t_max) == (1.0, 1.0)
        with pytest.raises(ValueError):
            SectorContour(1.0, E1, t_min, t_max)
        with pytest.raises(ValueError):
            tail_radius(0.0, 1.0, 1e-8)


class TestContourValidation:
    def test_invariants(self):
        with pytest.raises(ValueError):
            SectorContour(0.0, E1, 1e-6, 1e6)
        with pytest.raises(ValueError):
            SectorContour(1.0, ONE, 1e-6, 1e6)
        with pytest.raises(ValueError):
            SectorContour(1.0, E1, 2.0, 1e6)

    def test_contour_for_requires_certificate(self):
        f = Regularizer(1)
        with pytest.raises(NoDecayMetadata):
            contour_for(f, (1.0, 1.0, 1.0), 1.0, E1)

    def test_contour_for_rejects_uncovered_kernel(self):
        f = Regularizer(1)
        f.certify_decay(1.0, 1.0, 2.4)
        # kernel growing faster at infinity than the certificate decays
        with pytest.raises(NoDecayMetadata):
            contour_for(f, (1.0, 1.0, -3.0), 1.0, E1)


class TestCauchyFormula:
    def test_reproduces_value(self):
        t, f = cauchy_setup()
        contour = contour_for(f, (2.0, 1.0, 1.0), math.pi / 2, E1, tol=1e-9)
        value, info = integrate(OperatorKernel("S_L", t), f, contour)
        got = value.components[:, 0, 0] / (2.0 * math.pi)
        assert abs(got[0] - 0.25) <= 1e-8
        assert np.abs(got[1:]).max() <= 1e-10
        assert info["tol_achieved"] <= 1e-9

    def test_unit_independence(self):
        t, f = cauchy_setup()
        vals = []
        for unit in (E1, E2, E12):
            contour = contour_for(f, (2.0, 1.0, 1.0), math.pi / 2, unit)
            value, _ = integrate(OperatorKernel("S_L", t), f, contour)
            vals.append(value.components[:, 0, 0])
        for v in vals[1:]:
            assert np.abs(v - vals[0]).max() <= 1e-8

    def test_angle_independence(self):
        t, f = cauchy_setup()
        vals = []
        for phi in (0.9, 1.4, 2.0):
            contour = contour_for(f, (2.0, 1.0, 1.0), phi, E1)
            value, _ = integrate(OperatorKernel("S_L", t), f, contour)
            vals.append(value.components[:, 0, 0])
        for v in vals[1:]:
            assert np.abs(v - vals[0]).max() <= 1e-8

    def test_q_kernel_matches_fine_oracle(self):
        # (1/2pi) * integral of -2 Q^-1 ds f equals D f pointwise
        from qcalc.slicefun import pointwise_fine
        j = E1
        q = Quaternion(math.cos(math.pi / 8)) + j * math.sin(math.pi / 8)
        t = scalar_operator(q)
        f = Regularizer(2)
        f.certify_decay(1.0, 1.0, 2.4)
        contour = contour_for(f, (4.0, 2.0 / 3.0, 2.0 / 3.0), 1.2, E2)
        value, _ = integrate(OperatorKernel("Qc", t), f, contour)
        got = Quaternion.from_components(-2.0 * value.components[:, 0, 0]
                                         / (2.0 * math.pi))
        want, _, _ = pointwise_fine(f, q)
        assert (got - want).norm() <= 1e-8


class TestQuadratureMechanics:
    def test_linearity(self):
        t, _ = cauchy_setup()
        f = Regularizer(1)
        g = Regularizer(2)
        h = Sum(Scale(2.5, f), g)
        contour = SectorContour(1.2, E1, 1e-8, 1e8, panels=64)
        k = OperatorKernel("S_L", t)
        vf, _ = integrate_fixed(k, f, contour)
        vg, _ = integrate_fixed(k, g, contour)
        vh, _ = integrate_fixed(k, h, contour)
        lin = 2.5 * vf + vg
        assert (vh - lin).norm() <= 1e-12 * max(1.0, lin.norm())

    def test_doubling_improves(self):
        t, f = cauchy_setup()
        k = OperatorKernel("S_L", t)
        want, _ = integrate_fixed(f=f, k=k, contour=SectorContour(
            1.2, E1, 1e-8, 1e8, panels=512))
        errors = []
        for panels in (1, 2, 4):
            v, _ = integrate_fixed(k, f, SectorContour(1.2, E1, 1e-8, 1e8,
                                                       panels=panels))
            errors.append((v - want).norm())
        assert errors[1] <= 0.5 * errors[0]
        assert errors[2] <= 0.5 * errors[1]

    def test_tolerance_not_met(self):
        t, f = cauchy_setup()
        contour = SectorContour(1.2, E1, 1e-8, 1e8, panels=1, tol=1e-30)
        with pytest.raises(ToleranceNotMet):
            integrate(OperatorKernel("S_L", t), f, contour, max_refinements=2)

    def test_point_callable_matches_batched(self):
        t, f = cauchy_setup()
        contour = SectorContour(1.2, E1, 1e-6, 1e6, panels=24)
        fast = OperatorKernel("S_L", t)
        slow = lambda p: fast(p)  # plain SlicePoint -> QuatMatrix callable
        va, _ = integrate_fixed(fast, f, contour)
        vb, _ = integrate_fixed(slow, f, contour)
        assert (va - vb).norm() <= 1e-13

    def test_right_sandwich_order(self):
        # for an intrinsic f and the scalar operator the two orders agree
        t, f = cauchy_setup()
        contour = SectorContour(1.2, E1, 1e-8, 1e8, panels=64)
        va, _ = integrate_fixed(OperatorKernel("S_L", t), f, contour)
        vb, _ = integrate_fixed(OperatorKernel("S_R", t), f, contour,
                                side="right")
        assert (va - vb).norm() <= 1e-12
