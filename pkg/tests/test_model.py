import numpy as np
import pytest

from kirchfem.errors import DomainError, UnsupportedLawError
from kirchfem.fem import build_interval_mesh
from kirchfem.model import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    KirchhoffLaw,
    Nonlinearity,
    SamplingConfig,
    adaptive_simpson,
    affine_law,
    bump_nonlinearity,
    check_hypotheses,
    constant_law,
    decay_law,
    linear_nonlinearity,
    scale_nonlinearity,
    sine_forcing,
    sine_t_nonlinearity,
    specimen_library,
)

from conftest import simpson_oracle

X0 = np.zeros((1, 1))


class TestLawPrimitive:
    def test_affine_value(self):
        # primitive of a + b t is a t + b t^2 / 2
        assert affine_law(1.0, 2.0).primitive_at(3.0) == pytest.approx(12.0, abs=1e-12)

    def test_zero(self):
        assert affine_law(1.0, 1.0).primitive_at(0.0) == 0.0

    def test_constant(self):
        assert constant_law(5.0).primitive_at(4.0) == pytest.approx(20.0, abs=1e-12)

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            affine_law(1.0, 1.0).primitive_at(-1.0)

    def test_quadrature_path_matches_closed_form(self):
        closed = affine_law(2.0, 3.0)
        numeric = KirchhoffLaw(coefficient=closed.coefficient, growth_exponent=2.0)
        for t in np.logspace(-3, 4, 15):
            ref = closed.primitive_at(t)
            assert abs(numeric.primitive_at(t) - ref) <= 1e-9 * (1.0 + abs(ref))

    def test_quadrature_path_decay_law(self):
        numeric = KirchhoffLaw(coefficient=lambda t: np.exp(-np.asarray(t)), growth_exponent=1.0)
        for t in (0.1, 1.0, 7.5):
            assert numeric.primitive_at(t) == pytest.approx(-np.expm1(-t), abs=1e-9)

    def test_nondecreasing_for_nonnegative_coefficient(self):
        law = affine_law(0.5, 1.0)
        ts = np.linspace(0.0, 10.0, 50)
        vals = [law.primitive_at(t) for t in ts]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_derivative_finite_difference_fallback(self):
        law = KirchhoffLaw(coefficient=lambda t: 1.0 + np.asarray(t) ** 2, growth_exponent=3.0)
        for t in (0.0, 0.5, 4.0):
            assert law.derivative_at(t) == pytest.approx(2.0 * t, abs=1e-5)

    def test_primitive_derivative_consistency(self):
        # d/dt primitive = coefficient at sampled points
        for law in (affine_law(1.0, 1.0), decay_law()):
            for t in np.logspace(-2, 2, 9):
                h = 1e-6 * (1.0 + t)
                fd = (law.primitive_at(t + h) - law.primitive_at(max(t - h, 0.0))) / (
                    t + h - max(t - h, 0.0)
                )
                k = float(law.coefficient(t))
                assert abs(fd - k) <= 1e-6 * (1.0 + abs(k))


class TestLeftInverse:
    def test_identity_for_unit_coefficient(self):
        assert constant_law(1.0).left_inverse(3.7) == pytest.approx(3.7, abs=1e-12)

    def test_affine_one_one(self):
        assert affine_law(1.0, 1.0).left_inverse(2.0) == pytest.approx(1.0, abs=1e-12)

    def test_affine_two_three(self):
        assert affine_law(2.0, 3.0).left_inverse(5.0) == pytest.approx(1.0, abs=1e-12)

    def test_zero(self):
        assert affine_law(1.0, 1.0).left_inverse(0.0) == 0.0

    def test_unsupported_law(self):
        with pytest.raises(UnsupportedLawError):
            decay_law().left_inverse(1.0)

    @pytest.mark.parametrize("a,b", [(1.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
    def test_forward_recovery_on_log_grid(self, a, b):
        law = affine_law(a, b)
        for s in np.concatenate(([0.0], np.logspace(-6, 6, 25))):
            t = law.left_inverse(s)
            assert abs(law.forward_map(t) - s) <= 1e-12 * (1.0 + s)


class TestNonlinearities:
    def test_bump_pointwise(self):
        bump = bump_nonlinearity()
        assert bump.value_at(X0, np.array([1.5]))[0] == pytest.approx(0.25, abs=1e-15)
        ts = np.array([-3.0, 0.0, 0.5, 1.0, 2.0, 5.0])
        assert np.all(bump.value_at(X0.repeat(6, 0), ts) == 0.0)
        dense = np.linspace(-5, 5, 2001)
        assert np.all(bump.value_at(np.zeros((dense.size, 1)), dense) >= 0.0)

    def test_bump_primitive_vanishes_left_of_support(self):
        bump = bump_nonlinearity()
        ts = np.array([-2.0, 0.0, 1.0])
        assert np.all(bump.primitive_at(np.zeros((3, 1)), ts) == 0.0)

    def test_bump_primitive_against_quadrature_oracle(self):
        bump = bump_nonlinearity()
        for t in (1.2, 1.5, 1.8, 2.0, 3.0):
            oracle = simpson_oracle(
                lambda s: np.maximum(0.0, (s - 1.0) * (2.0 - s)), 0.0, t
            )
            assert bump.primitive_at(X0, np.array([t]))[0] == pytest.approx(oracle, abs=1e-9)

    def test_bump_saturation_value(self):
        bump = bump_nonlinearity()
        assert bump.primitive_at(X0, np.array([2.0]))[0] == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_linear_primitive(self):
        lin = linear_nonlinearity()
        assert lin.primitive_at(X0, np.array([2.0]))[0] == pytest.approx(2.0, abs=1e-14)
        assert lin.primitive_at(X0, np.array([0.0]))[0] == 0.0

    def test_primitive_quadrature_fallback_backward(self):
        # no closed form: integrate from 0 to t, backward for t < 0
        nl = Nonlinearity(value=lambda x, t: np.asarray(t, float), growth_exponent=1.0)
        assert nl.primitive_at(X0, np.array([2.0]))[0] == pytest.approx(2.0, abs=1e-9)
        assert nl.primitive_at(X0, np.array([-2.0]))[0] == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize(
        "nl",
        [bump_nonlinearity(), linear_nonlinearity(), sine_forcing(), sine_t_nonlinearity()],
        ids=lambda nl: nl.name,
    )
    def test_primitive_and_derivative_consistency(self, nl):
        xs = np.array([[0.3], [0.7]])
        for t in (-2.3, -0.4, 0.0, 0.6, 1.4, 1.9, 3.2):
            tt = np.full(2, t)
            h = 1e-6 * (1.0 + abs(t))
            fd = (nl.primitive_at(xs, tt + h) - nl.primitive_at(xs, tt - h)) / (2.0 * h)
            f = nl.value_at(xs, tt)
            assert np.all(np.abs(fd - f) <= 1e-6 * (1.0 + np.abs(f)) + 1e-9)
            assert np.all(nl.primitive_at(xs, np.zeros(2)) == 0.0)

    def test_scale_preserves_closed_forms(self):
        nl = scale_nonlinearity(bump_nonlinearity(), 10.0)
        assert nl.primitive is not None
        assert nl.value_at(X0, np.array([1.5]))[0] == pytest.approx(2.5, abs=1e-14)
        assert nl.primitive_at(X0, np.array([2.0]))[0] == pytest.approx(10.0 / 6.0, rel=1e-12)

    def test_library_names(self):
        lib = specimen_library()
        for name in ("affine(1,1)", "constant", "decay", "bump", "linear", "sin_forcing", "sin_t"):
            assert name in lib


def test_adaptive_simpson_polynomial_and_tolerance():
    assert adaptive_simpson(lambda s: s**3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-12)
    assert adaptive_simpson(lambda s: np.sin(s), 0.0, np.pi) == pytest.approx(2.0, abs=1e-9)


def test_adaptive_simpson_reports_nonconvergence():
    from kirchfem.errors import IntegrationError

    # integrable singularity with a hostile tolerance exhausts the depth budget
    with pytest.raises(IntegrationError):
        adaptive_simpson(
            lambda s: abs(s - 0.3) ** -0.9, 0.0, 1.0, tol=1e-300, max_depth=20
        )


def test_left_inverse_bounded_forward_map_reports_no_root():
    from kirchfem.errors import NoRootError

    # t K(t^2) = t / (1 + t^2) is bounded by 1/2; the onto claim is wrong
    bounded = KirchhoffLaw(
        coefficient=lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float)),
        growth_exponent=1.0,
        monotone_onto=True,
        name="bounded",
    )
    with pytest.raises(NoRootError):
        bounded.left_inverse(5.0)


@pytest.fixture(scope="module")
def mesh():
    return build_interval_mesh(32, 1.0)


@pytest.fixture(scope="module")
def cfg():
    return SamplingConfig(points_per_decade=50)


class TestHypothesisAudit:
    def test_specimen_all_pass(self, mesh, cfg):
        report = check_hypotheses(affine_law(1.0, 1.0), bump_nonlinearity(), mesh, cfg)
        assert {k: c.status for k, c in report.conditions.items()} == {
            "a1": PASS, "a2": PASS, "a3": PASS, "a4": PASS, "a5": PASS, "a6": PASS,
            "growth": PASS,
        }
        assert report.ok()
        assert report.gamma >= 1.0
        # the primitive grows quadratically, matching the declared exponent
        assert report.conditions["a3"].evidence["log_slope"] == pytest.approx(2.0, abs=0.1)

    def test_decay_law_fails_positivity_with_witness(self, mesh, cfg):
        report = check_hypotheses(decay_law(), bump_nonlinearity(), mesh, cfg)
        cond = report.conditions["a2"]
        assert cond.status == FAIL
        assert cond.witness is not None
        assert cond.witness["K"] <= cfg.positive_tol
        assert float(np.exp(-cond.witness["t"])) == pytest.approx(cond.witness["K"], rel=1e-9)
        assert not report.ok() and report.failures() == ["a2"]

    def test_linear_source_fails_small_t_with_ratio_half(self, mesh, cfg):
        report = check_hypotheses(affine_law(1.0, 1.0), linear_nonlinearity(), mesh, cfg)
        cond = report.conditions["a5"]
        assert cond.status == FAIL
        assert cond.witness["ratio"] == pytest.approx(0.5, rel=1e-9)

    def test_embedding_shortcut_for_large_t(self, mesh, cfg):
        report = check_hypotheses(
            affine_law(1.0, 1.0),
            bump_nonlinearity(),
            mesh,
            SamplingConfig(points_per_decade=50, ambient_dim=4),
        )
        cond = report.conditions["a6"]
        assert cond.status == PASS
        assert "shortcut" in cond.evidence

    def test_left_inverse_status_inconclusive_without_flag(self, mesh, cfg):
        report = check_hypotheses(decay_law(), bump_nonlinearity(), mesh, cfg)
        assert report.conditions["a4"].status == INCONCLUSIVE

    def test_deterministic(self, mesh, cfg):
        r1 = check_hypotheses(affine_law(1.0, 1.0), bump_nonlinearity(), mesh, cfg)
        r2 = check_hypotheses(affine_law(1.0, 1.0), bump_nonlinearity(), mesh, cfg)
        assert r1.to_dict() == r2.to_dict()
