import dataclasses
import json

import numpy as np
import pytest

from conftest import J2, make_models
from oqrisk.errors import (
    ConfigError,
    DimensionMismatch,
    NotAntisymmetric,
    NotSymmetric,
    SingularCcr,
)
from oqrisk.fixtures import PAPER_EXAMPLE, paper_example_model
from oqrisk.model import (
    CcrMatrix,
    PhysicalParams,
    build_model,
    canonical_ccr,
    model_from_json,
    model_from_matrices,
    pr_residual,
    stability_margin,
)

PAPER_EIGS = np.array([-4.2068, -1.3302, -0.5532 - 2.5929j, -0.5532 + 2.5929j])


class TestBuildModel:
    def test_tiny_closed_form(self, tiny):
        assert np.array_equal(tiny.a, -np.eye(2))
        assert np.array_equal(tiny.b, J2)

    def test_paper_eigenvalues(self, paper):
        model, _ = paper
        eigs = np.sort_complex(np.linalg.eigvals(model.a))
        target = np.sort_complex(PAPER_EIGS)
        assert np.abs(eigs - target).max() < 1e-3

    def test_decoupled_field(self):
        rng = np.random.default_rng(0)
        r = rng.standard_normal((4, 4))
        r = 0.5 * (r + r.T)
        model = model_from_matrices(canonical_ccr(4).theta, r, np.zeros((4, 4)))
        assert np.array_equal(model.b, np.zeros((4, 4)))
        assert np.allclose(model.a, 2.0 * model.theta @ r)

    def test_deterministic_bitwise(self, paper):
        model, _ = paper
        again, _ = paper_example_model()
        assert np.array_equal(model.a, again.a)
        assert np.array_equal(model.b, again.b)

    def test_omega_eigenvalues(self):
        for m in (2, 4, 6):
            model = model_from_matrices(
                canonical_ccr(m).theta, np.zeros((m, m)), np.eye(m)
            )
            w = np.linalg.eigvalsh(model.omega)
            dist = np.minimum(np.abs(w), np.abs(w - 2.0))
            assert dist.max() < 1e-12


class TestValidation:
    def test_rejects_nonantisymmetric_theta(self):
        with pytest.raises(NotAntisymmetric):
            CcrMatrix(np.array([[0.0, 1.0], [-1.0 + 1e-15, 0.0]]))

    def test_rejects_singular_theta(self):
        with pytest.raises(SingularCcr):
            CcrMatrix(np.zeros((2, 2)))

    def test_rejects_odd_order(self):
        with pytest.raises(DimensionMismatch):
            CcrMatrix(np.zeros((3, 3)))

    def test_rejects_asymmetric_energy(self):
        with pytest.raises(NotSymmetric):
            PhysicalParams(r=np.array([[0.0, 1.0], [0.0, 0.0]]), m=np.eye(2))

    def test_rejects_odd_channels(self):
        with pytest.raises(DimensionMismatch):
            PhysicalParams(r=np.zeros((2, 2)), m=np.zeros((1, 2)))

    def test_rejects_mismatched_dims(self):
        with pytest.raises(DimensionMismatch):
            build_model(canonical_ccr(2), PhysicalParams(r=np.zeros((4, 4)), m=np.eye(4)))


class TestPrResidual:
    def test_tiny_exact(self, tiny):
        assert pr_residual(tiny) <= 1e-14

    def test_paper(self, paper):
        assert pr_residual(paper[0]) <= 1e-10

    def test_tampered_model_violates(self, tiny):
        bad = dataclasses.replace(tiny, a=tiny.a + np.eye(2))
        assert pr_residual(bad) > 0.1

    def test_random_models_normalized(self):
        for model, _ in make_models(seed=101, count=200):
            scale = 1.0 + np.linalg.norm(model.a) * np.linalg.norm(model.theta)
            assert pr_residual(model) <= 1e-10 * scale


class TestStabilityMargin:
    def test_tiny(self, tiny):
        hurwitz, abscissa = stability_margin(tiny)
        assert hurwitz
        assert abscissa == pytest.approx(-1.0, abs=1e-12)

    def test_paper(self, paper):
        hurwitz, abscissa = stability_margin(paper[0])
        assert hurwitz
        assert abscissa == pytest.approx(-0.5532, abs=1e-3)

    def test_marginal_zero_drift(self):
        model = model_from_matrices(0.5 * J2, np.zeros((2, 2)), np.zeros((2, 2)))
        hurwitz, abscissa = stability_margin(model)
        assert not hurwitz
        assert abscissa == pytest.approx(0.0, abs=1e-14)


class TestJsonIngestion:
    def test_round_trip(self, tiny):
        doc = {
            "n": 2,
            "m": 2,
            "theta": (0.5 * J2).tolist(),
            "R": np.zeros((2, 2)).tolist(),
            "M": np.eye(2).tolist(),
            "Pi": np.eye(2).tolist(),
        }
        model, pi = model_from_json(json.dumps(doc))
        assert np.array_equal(model.a, tiny.a)
        assert np.array_equal(pi, np.eye(2))

    def test_paper_fixture_document(self):
        doc = dict(PAPER_EXAMPLE)
        doc["theta"] = canonical_ccr(4).theta.tolist()
        model, pi = model_from_json(doc)
        ref, ref_pi = paper_example_model()
        assert np.array_equal(model.a, ref.a)
        assert np.array_equal(pi, ref_pi)

    def test_missing_field(self):
        with pytest.raises(ConfigError):
            model_from_json({"n": 2, "m": 2})

    def test_bad_shape(self):
        with pytest.raises(ConfigError):
            model_from_json(
                {"n": 2, "m": 2, "theta": [[0.0]], "R": [[0.0]], "M": [[0.0]]}
            )

    def test_nonfinite_rejected(self):
        doc = {
            "n": 2,
            "m": 2,
            "theta": [[0.0, 0.5], [-0.5, 0.0]],
            "R": [[float("nan"), 0.0], [0.0, 0.0]],
            "M": np.eye(2).tolist(),
        }
        with pytest.raises(ConfigError):
            model_from_json(doc)


def test_arrays_are_immutable(tiny):
    with pytest.raises(ValueError):
        tiny.a[0, 0] = 5.0
