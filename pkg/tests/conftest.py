import numpy as np
import pytest

from oqrisk import DeviationAnalysis, model_from_matrices, paper_example_model, random_model

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@pytest.fixture(scope="session")
def tiny():
    """One-mode vacuum-eigenstate example: A = -I, B = J2, P = I/2."""
    return model_from_matrices(0.5 * J2, np.zeros((2, 2)), np.eye(2))


@pytest.fixture(scope="session")
def paper():
    """The pinned two-mode regression example: (model, Pi)."""
    return paper_example_model()


@pytest.fixture(scope="session")
def tiny_deviation(tiny):
    return DeviationAnalysis(tiny, np.eye(2))


@pytest.fixture(scope="session")
def paper_deviation(paper):
    model, pi = paper
    return DeviationAnalysis(model, pi)


def make_models(seed, count, sizes=(2, 4, 6)):
    """Deterministic stream of random Hurwitz models of mixed size."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = sizes[k % len(sizes)]
        out.append((random_model(rng, n=n), rng))
    return out


def random_sym(rng, n, psd=False):
    a = rng.standard_normal((n, n))
    a = 0.5 * (a + a.T)
    if psd:
        a = a @ a.T + 0.05 * np.eye(n)
        a = 0.5 * (a + a.T)
    return a
