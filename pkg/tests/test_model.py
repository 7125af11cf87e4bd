"""Model validation, discriminant classification, root extraction."""

import numpy as np
import pytest

from smilekernel.model import (
    ModelError,
    QnvModel,
    Regime,
    classify,
    roots,
    sigma_factored,
)


class TestClassify:
    def test_hyperbolic(self):
        geo = classify(QnvModel(1, 0, -1))
        assert geo.regime is Regime.HYPERBOLIC
        assert geo.discriminant == pytest.approx(4.0)
        assert (geo.s_lower, geo.s_upper) == pytest.approx((-1.0, 1.0))

    def test_euclidean_perfect_square(self):
        geo = classify(QnvModel(1, -2, 1))
        assert geo.regime is Regime.EUCLIDEAN
        assert geo.discriminant == 0.0
        assert geo.s_lower == pytest.approx(1.0)

    def test_spherical(self):
        geo = classify(QnvModel(1, 0, 1))
        assert geo.regime is Regime.SPHERICAL
        assert geo.discriminant == pytest.approx(-4.0)
        assert geo.s_lower is None

    def test_near_degenerate_tolerance(self):
        # floating-point discriminant of a nearly perfect square
        eps = 1e-14
        geo = classify(QnvModel(1.0, -2.0, 1.0 + eps))
        assert geo.regime is Regime.EUCLIDEAN

    def test_degenerate_all_zero_rejected(self):
        with pytest.raises(ModelError):
            QnvModel(0.0, 0.0, 0.0)

    def test_constant_and_linear_are_flat(self):
        assert classify(QnvModel(0, 0, 0.2)).regime is Regime.EUCLIDEAN
        geo = classify(QnvModel(0, 2.0, -1.0))
        assert geo.regime is Regime.EUCLIDEAN
        assert geo.s_lower == pytest.approx(0.5)

    def test_scale_consistency(self, rng):
        for _ in range(50):
            a, b, c = rng.uniform(-2, 2, 3)
            if a == 0 and b == 0 and c == 0:
                continue
            t = float(rng.uniform(0.1, 10.0))
            g1 = classify(QnvModel(a, b, c))
            g2 = classify(QnvModel(t * a, t * b, t * c))
            assert g1.regime is g2.regime
            assert g2.discriminant == pytest.approx(t * t * g1.discriminant, rel=1e-12, abs=1e-300)


class TestRoots:
    def test_trivial_cases(self):
        assert roots(QnvModel(1, 0, -1)) == pytest.approx((-1.0, 1.0))
        assert roots(QnvModel(2, -6, 4)) == pytest.approx((1.0, 2.0))

    def test_derived_factored_expansion(self):
        # 1 (S - 0.3)(S - 0.7) expands to S^2 - S + 0.21
        s_l, s_u = roots(QnvModel(1, -1, 0.21))
        assert (s_l, s_u) == pytest.approx((0.3, 0.7), rel=1e-12)

    def test_non_hyperbolic_rejected(self):
        with pytest.raises(ModelError):
            roots(QnvModel(1, 0, 1))
        with pytest.raises(ModelError):
            roots(QnvModel(1, -2, 1))

    def test_cancellation_stability(self):
        # b^2 >> 4ac: naive formula would cancel in one root
        m = QnvModel(1.0, -1e8, 1.0)
        s_l, s_u = roots(m)
        assert s_l == pytest.approx(1e-8, rel=1e-10)
        assert s_u == pytest.approx(1e8, rel=1e-12)

    def test_coefficient_round_trip(self, rng):
        for _ in range(100):
            a = float(rng.uniform(0.1, 3.0))
            s_l = float(rng.uniform(-5.0, 2.0))
            s_u = s_l + float(rng.uniform(0.1, 5.0))
            b = -a * (s_l + s_u)
            c = a * s_l * s_u
            got = roots(QnvModel(a, b, c))
            assert got[0] == pytest.approx(s_l, rel=1e-12, abs=1e-12)
            assert got[1] == pytest.approx(s_u, rel=1e-12, abs=1e-12)

    def test_sigma_positive_inside(self, rng):
        for _ in range(30):
            a = float(rng.uniform(0.1, 3.0))
            s_l = float(rng.uniform(-5.0, 2.0))
            s_u = s_l + float(rng.uniform(0.1, 5.0))
            m = QnvModel(a, -a * (s_l + s_u), a * s_l * s_u)
            mid = 0.5 * (s_l + s_u)
            assert sigma_factored(m, mid) > 0.0


class TestConfigFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "model.cfg"
        path.write_text("a = 2.0\nb = -6\nc = 4\nr = 0.03\n")
        m = QnvModel.from_config(path)
        assert (m.a, m.b, m.c, m.r) == (2.0, -6.0, 4.0, 0.03)

    def test_sectioned_file(self, tmp_path):
        path = tmp_path / "model.cfg"
        path.write_text("[model]\na = 1\nb = 0\nc = -1\n")
        m = QnvModel.from_config(path)
        assert m.r == 0.0

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "model.cfg"
        path.write_text("a = 1\nb = 0\n")
        with pytest.raises(ModelError):
            QnvModel.from_config(path)

    def test_non_finite_rejected(self):
        with pytest.raises(ModelError):
            QnvModel(float("nan"), 0.0, 1.0)
