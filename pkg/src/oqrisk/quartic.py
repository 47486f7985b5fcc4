"""Quartic approximation of the risk-sensitive cost.

For the running cost ``phi(t) = integral_0^t X' Pi X ds`` in the invariant
regime, the first two cumulants grow linearly:

    E phi(t)          = <Pi, P> t,
    var phi(t)        = 4 integral_0^t (t - tau) <Pi, e^{tau A} C e^{tau A'}> dtau,
    var phi(t) / t -> 4 <Pi, T> = 4 <Q, C>,      C = P Pi P + Theta Pi Theta,

with ``T`` and ``Q`` solving ``AT + TA' + C = 0`` and ``A'Q + QA + Pi = 0``.
The quartic growth rate of the exponential cost is ``theta <Pi, P + 2 theta T>``,
trustworthy for risk parameters well below
``theta0 = <Pi, P> / (2 <Pi, T>)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeTheta, NegativeTime, NotSymmetric, NumericalDefect
from .gaussian import gramian_steady
from .matfun import QuadratureSpec, expm, integrate_line, lyap_solve
from .model import OqhoModel

__all__ = [
    "WeightMatrix",
    "QuarticReport",
    "mean_rate",
    "variance_finite",
    "variance_rate",
    "theta_threshold",
    "quartic_rate",
    "quartic_report",
]


@dataclass(frozen=True)
class WeightMatrix:
    """Real symmetric cost weight; ``psd=True`` additionally certifies
    nonnegativity up to a 1e-10 rounding band."""

    pi: np.ndarray
    psd: bool = False

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        if np.linalg.norm(pi - pi.T) != 0.0:
            raise NotSymmetric("Pi - Pi' must vanish exactly")
        if self.psd:
            wmin = np.linalg.eigvalsh(pi)[0]
            if wmin < -1e-10 * max(np.linalg.norm(pi, 2), 1e-300):
                raise NotSymmetric(f"Pi flagged PSD has eigenvalue {wmin:.3e}")
        pi = pi.copy()
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)


def _as_weight(pi) -> np.ndarray:
    if isinstance(pi, WeightMatrix):
        return pi.pi
    return WeightMatrix(np.asarray(pi, dtype=float)).pi


@dataclass(frozen=True)
class QuarticReport:
    """Rates and certificates of the quartic approximation.

    ``assumes_invariant_state`` records the standing hypothesis that the
    oscillator starts in its invariant Gaussian state.
    """

    mean_rate: float
    t_matrix: np.ndarray
    q_matrix: np.ndarray
    variance_rate: float
    theta0: float
    theta: float
    quartic_rate: float
    assumes_invariant_state: bool = True


def mean_rate(model: OqhoModel, pi) -> float:
    """Growth rate of the mean cost, ``<Pi, P>``."""
    pi = _as_weight(pi)
    p = gramian_steady(model).p
    return float(np.sum(pi * p))


def _variance_seed(model: OqhoModel, pi: np.ndarray) -> np.ndarray:
    p = gramian_steady(model).p
    theta = model.theta
    return p @ pi @ p + theta @ pi @ theta


def variance_finite(
    model: OqhoModel, pi, t: float, spec: QuadratureSpec | None = None
) -> float:
    """Variance of the cost over ``[0, t]`` by adaptive quadrature of
    ``4 (t - tau) <Pi, e^{tau A} C e^{tau A'}>``."""
    if t < 0:
        raise NegativeTime(f"horizon must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    pi = _as_weight(pi)
    seed = _variance_seed(model, pi)

    def integrand(tau):
        e = expm(model.a, tau)
        return 4.0 * (t - tau) * np.sum(pi * (e @ seed @ e.T))

    spec = spec or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-9)
    return float(integrate_line(integrand, 0.0, t, spec))


def variance_rate(model: OqhoModel, pi) -> tuple[float, np.ndarray, np.ndarray]:
    """Asymptotic variance growth rate with its two Lyapunov certificates.

    Returns ``(rate, T, Q)`` where ``rate = 4 <Pi, T>``; the dual identity
    ``4 <Pi, T> = 4 <Q, C>`` is certified to 1e-9 relative before
    returning.
    """
    pi = _as_weight(pi)
    seed = _variance_seed(model, pi)
    t_mat = lyap_solve(model.a, seed)
    q_mat = lyap_solve(model.a.T, pi)
    primal = 4.0 * float(np.sum(pi * t_mat))
    dual = 4.0 * float(np.sum(q_mat * seed))
    if abs(primal - dual) > 1e-9 * (1.0 + abs(primal)):
        raise NumericalDefect(
            f"Lyapunov duality violated: {primal:.12e} vs {dual:.12e}"
        )
    return primal, t_mat, q_mat


def theta_threshold(model: OqhoModel, pi) -> float:
    """Risk-parameter threshold ``<Pi, P> / (2 <Pi, T>)``.

    Returns ``inf`` when the variance certificate vanishes (the cost
    observable is deterministic in the invariant state, as for the
    vacuum-mode example), rather than failing.
    """
    pi = _as_weight(pi)
    p = gramian_steady(model).p
    _, t_mat, _ = variance_rate(model, pi)
    denom = float(np.sum(pi * t_mat))
    floor = 1e-12 * np.linalg.norm(pi) * np.linalg.norm(p) ** 2
    if denom <= floor:
        return math.inf
    return 0.5 * float(np.sum(pi * p)) / denom


def quartic_rate(model: OqhoModel, pi, theta: float) -> float:
    """Quartic growth rate ``theta <Pi, P + 2 theta T>``; equals
    ``theta * mean_rate + theta^2 / 2 * variance_rate``."""
    if theta < 0:
        raise NegativeTheta(f"risk parameter must be nonnegative, got {theta}")
    pi = _as_weight(pi)
    p = gramian_steady(model).p
    _, t_mat, _ = variance_rate(model, pi)
    return theta * float(np.sum(pi * (p + 2.0 * theta * t_mat)))


def quartic_report(model: OqhoModel, pi, theta: float) -> QuarticReport:
    """All quartic-approximation outputs for one risk parameter."""
    pi = _as_weight(pi)
    rate, t_mat, q_mat = variance_rate(model, pi)
    mean = mean_rate(model, pi)
    return QuarticReport(
        mean_rate=mean,
        t_matrix=t_mat,
        q_matrix=q_mat,
        variance_rate=rate,
        theta0=theta_threshold(model, pi),
        theta=theta,
        quartic_rate=quartic_rate(model, pi, theta),
    )
