"""Cramer-type tail bounds for the running quadratic cost.

Everything is driven by the scalar kernel ``N(tau) = ||sqrt(Pi) S(tau)
sqrt(Pi)||`` (operator norm) and its cosine transform ``F``.  For risk
parameters ``0 <= theta < 1/(2 F(0))`` the exponential-cost growth rate is
bounded by

    qef_upper_rate(theta) = -(n / 4 pi) * integral ln(1 - 2 theta F(lam)) dlam,

and Legendre transformation of that bound yields a tail estimate for
``phi(t)/t`` above a scale ``eps``.  Two evaluation routes are provided:

* numeric: ``F`` from high-order product (Filon) cosine quadrature of the
  sampled kernel, the frequency integral with an analytically corrected
  tail, and the optimal ``theta`` by bisection on the monotone derivative
  equation;
* closed form: the exponential envelope ``N(tau) <= alpha e^{-mu |tau|}``
  certified by a Lyapunov inequality, for which every integral is explicit
  and the bound is ``(n mu / 4)(2 - n alpha / eps - eps / (n alpha))``.

``|F(lam)| <= F(0)`` holds because ``N >= 0``:
``|F(lam)| = |2 int N cos| <= 2 int N = F(0)``; tests sample this.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import (
    DefectiveAndUnstableShift,
    EpsilonTooSmall,
    NoConvergence,
    NotHurwitz,
    NumericalDefect,
    ThetaOutOfRange,
)
from .gaussian import gramian_steady
from .matfun import expm, inv_sqrt_psd, lyap_solve, opnorm2, sqrt_psd
from .model import OqhoModel
from .quartic import _as_weight

__all__ = [
    "EnvelopeParams",
    "TailBoundCurve",
    "DeviationAnalysis",
    "envelope_params",
    "n_kernel",
    "f_transform",
    "f_infnorm",
    "qef_upper_rate",
    "cramer_bound_numeric",
    "cramer_bound_closed",
    "closed_theta_star",
    "bound_curve",
    "envelope_log_integral",
    "envelope_log_integral_closed",
]


@dataclass(frozen=True)
class EnvelopeParams:
    """Exponential-envelope certificate ``N(tau) <= alpha e^{-mu tau}``.

    ``gamma`` solves the Lyapunov inequality ``A G + G A' <= -2 mu G``;
    ``alpha`` is the induced amplitude from the weighted norms.
    """

    mu: float
    gamma: np.ndarray
    alpha: float


@dataclass(frozen=True)
class TailBoundCurve:
    """Tail-bound values over a grid of scale parameters."""

    epsilon: np.ndarray
    bound: np.ndarray
    theta_star: np.ndarray
    method: str  # "closed_form" | "numeric"


def envelope_params(model: OqhoModel, pi) -> EnvelopeParams:
    """Decay-rate certificate for the kernel envelope.

    For diagonalizable drifts (eigenvector condition number below 1e8)
    takes ``mu`` as the negated spectral abscissa and ``Gamma = U U*``
    from unit-norm eigenvectors (real by conjugate pairing, which is
    asserted).  Otherwise retreats to ``mu' = 0.9 mu`` and solves the
    shifted Lyapunov equation ``(A + mu' I) G + G (A + mu' I)' = -I``;
    any valid pair is admissible, at a modest decay-rate sacrifice.
    """
    if not model.is_hurwitz:
        raise NotHurwitz("the envelope needs a Hurwitz drift")
    pi = _as_weight(pi)
    a = model.a
    mu = -model.spectral_abscissa
    lam, vecs = np.linalg.eig(a)
    cond = np.linalg.cond(vecs)
    if np.isfinite(cond) and cond < 1e8:
        gamma_c = vecs @ vecs.conj().T
        if np.abs(gamma_c.imag).max() > 1e-10 * max(opnorm2(gamma_c.real), 1e-300):
            raise NumericalDefect("eigenvector Gram matrix has an imaginary part")
        gamma = gamma_c.real
    else:
        mu = 0.9 * mu
        shifted = a + mu * np.eye(model.n)
        if np.linalg.eigvals(shifted).real.max() >= 0.0:
            raise DefectiveAndUnstableShift(
                "shifted drift is not Hurwitz; no envelope certificate"
            )
        gamma = lyap_solve(shifted, np.eye(model.n))
    gamma = 0.5 * (gamma + gamma.T)
    ali = a @ gamma + gamma @ a.T + 2.0 * mu * gamma
    wmax = np.linalg.eigvalsh(ali)[-1]
    if wmax > 1e-8 * opnorm2(gamma):
        raise NumericalDefect(f"Lyapunov inequality residual {wmax:.3e} too large")
    root_pi = sqrt_psd(pi)
    quantum = gramian_steady(model).quantum_cov
    alpha = opnorm2(root_pi @ sqrt_psd(gamma)) * opnorm2(
        inv_sqrt_psd(gamma) @ quantum @ root_pi
    )
    return EnvelopeParams(mu=mu, gamma=gamma, alpha=float(alpha))


def _filon_cos(fvals: np.ndarray, h: float, lam: float, grid: np.ndarray) -> float:
    """integral f(t) cos(lam t) dt over the uniform grid (odd point count),
    exact for piecewise-quadratic f at any frequency."""
    th = lam * h
    if abs(th) > 1e-4:
        s, c = math.sin(th), math.cos(th)
        alpha = (th * th + th * s * c - 2.0 * s * s) / th**3
        beta = 2.0 * (th * (1.0 + c * c) - 2.0 * s * c) / th**3
        gamma = 4.0 * (s - th * c) / th**3
    else:
        t2 = th * th
        alpha = th * t2 * (2.0 / 45 - t2 * (2.0 / 315 - t2 * (2.0 / 4725)))
        beta = 2.0 / 3 + t2 * (2.0 / 15 - t2 * (4.0 / 105 - t2 * (2.0 / 567)))
        gamma = 4.0 / 3 - t2 * (2.0 / 15 - t2 * (1.0 / 210 - t2 / 11340))
    ct = np.cos(lam * grid)
    even = fvals[0::2] @ ct[0::2] - 0.5 * (fvals[0] * ct[0] + fvals[-1] * ct[-1])
    odd = fvals[1::2] @ ct[1::2]
    ends = alpha * (fvals[-1] * math.sin(lam * grid[-1]) - fvals[0] * math.sin(0.0))
    return float(h * (ends + beta * even + gamma * odd))


def _quad(f, a, b, tol):
    # tolerances sit at the transform's noise floor by design; QUADPACK's
    # roundoff advisory is expected there and not actionable
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, a, b, epsabs=0.25 * tol, epsrel=1e-12, limit=400)
    return val


def _one_minus(theta, fval):
    arg = 2.0 * theta * fval
    if arg >= 1.0:
        raise NoConvergence(
            "1 - 2 theta F crossed zero inside the integration range; theta "
            "is too close to the boundary for the numeric route"
        )
    return arg


def _tail_corrected_log_integral(ffun, theta, n0, lam_cut, tol):
    """integral over R of ln(1 - 2 theta F); the [lam_cut, inf) tail uses
    the exact identity int_0^inf F = pi N(0) for the linear term and the
    F ~ c / lam^2 asymptote for the quadratic and cubic terms."""
    for _ in range(7):
        c_inf = ffun(lam_cut) * lam_cut**2
        k3 = (2.0 * theta) ** 3 / 3.0 * c_inf**3 / (5.0 * lam_cut**5)
        if abs(k3) <= 0.1 * tol:
            break
        lam_cut *= 2.0
    else:
        raise NoConvergence("tail corrections did not settle")
    core = _quad(lambda l: math.log1p(-_one_minus(theta, ffun(l))), 0.0, lam_cut, tol)
    int_f = _quad(ffun, 0.0, lam_cut, tol)
    c_inf = ffun(lam_cut) * lam_cut**2
    tail = (
        -2.0 * theta * (math.pi * n0 - int_f)
        - (2.0 * theta) ** 2 / 2.0 * c_inf**2 / (3.0 * lam_cut**3)
        - (2.0 * theta) ** 3 / 3.0 * c_inf**3 / (5.0 * lam_cut**5)
    )
    return 2.0 * (core + tail)


def _tail_corrected_deriv_integral(ffun, theta, n0, lam_cut, tol):
    """integral over R of F / (1 - 2 theta F), with the same tail policy."""
    for _ in range(7):
        c_inf = ffun(lam_cut) * lam_cut**2
        k3 = (2.0 * theta) ** 2 * c_inf**3 / (5.0 * lam_cut**5)
        if abs(k3) <= 0.1 * tol:
            break
        lam_cut *= 2.0
    else:
        raise NoConvergence("tail corrections did not settle")
    core = _quad(
        lambda l: ffun(l) / (1.0 - _one_minus(theta, ffun(l))), 0.0, lam_cut, tol
    )
    int_f = _quad(ffun, 0.0, lam_cut, tol)
    c_inf = ffun(lam_cut) * lam_cut**2
    tail = (
        (math.pi * n0 - int_f)
        + 2.0 * theta * c_inf**2 / (3.0 * lam_cut**3)
        + (2.0 * theta) ** 2 * c_inf**3 / (5.0 * lam_cut**5)
    )
    return 2.0 * (core + tail)


class DeviationAnalysis:
    """Shared state for the deviation bounds of one ``(model, Pi)`` pair.

    Builds the kernel sampler lazily on first transform use: the kernel is
    tabulated on a uniform grid long enough for the certified envelope to
    push the truncation error below the working tolerance, and ``F`` is
    then a pair of weighted dot products per frequency (memoized).
    """

    def __init__(self, model: OqhoModel, pi, tol: float = 1e-9):
        if not model.is_hurwitz:
            raise NotHurwitz("deviation bounds need a Hurwitz drift")
        self.model = model
        self.pi = _as_weight(pi)
        self.tol = float(tol)
        self.root_pi = sqrt_psd(self.pi)
        steady = gramian_steady(model)
        self.quantum = steady.quantum_cov
        self.n0 = float(opnorm2(self.root_pi @ self.quantum @ self.root_pi))
        self.degenerate = not np.any(self.pi)
        self.envelope = None if self.degenerate else envelope_params(model, self.pi)
        self._grid = None
        self._nvals = None
        self._f_memo = {}
        self._f0 = None

    # -- kernel -----------------------------------------------------------

    def n_kernel(self, tau: float) -> float:
        """``N(tau)``; even in ``tau`` by construction."""
        e = expm(self.model.a, abs(tau))
        return float(opnorm2(self.root_pi @ e @ self.quantum @ self.root_pi))

    def _build_grid(self):
        if self._grid is not None or self.degenerate:
            return
        env = self.envelope
        mu, alpha = env.mu, env.alpha
        f0_est = max(2.0 * alpha / mu, 1e-3)
        tail_tol = 1e-13 * max(f0_est, 1.0)
        tau_star = math.log(max(2.0 * alpha / mu, 1e-6) / tail_tol) / mu
        omega = opnorm2(self.model.a) + mu
        eps_f = 1e-8 * max(f0_est, 0.1)
        h = (180.0 * eps_f / (max(alpha, 1e-6) * omega**4 * tau_star)) ** 0.25
        npts = int(np.clip(math.ceil(tau_star / h), 2001, 200_001))
        if npts % 2 == 0:
            npts += 1
        grid = np.linspace(0.0, tau_star, npts)
        step = grid[1] - grid[0]
        # batch-evaluate N on the ladder
        lam, vecs = np.linalg.eig(self.model.a)
        cond = np.linalg.cond(vecs)
        nvals = np.empty(npts)
        if np.isfinite(cond) and cond < 1e8:
            vinv = np.linalg.inv(vecs)
            right = vinv @ (self.quantum @ self.root_pi)
            left = self.root_pi @ vecs
            for lo in range(0, npts, 65536):
                hi = min(lo + 65536, npts)
                phases = np.exp(np.multiply.outer(grid[lo:hi], lam))
                block = np.einsum("ij,kj,jl->kil", left, phases, right)
                nvals[lo:hi] = np.linalg.svd(block, compute_uv=False)[:, 0]
        else:
            estep = expm(self.model.a, step)
            prop = np.eye(self.model.n)
            for k in range(npts):
                nvals[k] = opnorm2(self.root_pi @ prop @ self.quantum @ self.root_pi)
                prop = estep @ prop
        self._grid = grid
        self._nvals = nvals
        self._step = step

    # -- transform ---------------------------------------------------------

    def f_transform(self, lam: float) -> float:
        """``F(lam) = 2 int_0^inf N(tau) cos(lam tau) dtau``."""
        if self.degenerate:
            return 0.0
        key = float(lam)
        hit = self._f_memo.get(key)
        if hit is not None:
            return hit
        self._build_grid()
        val = 2.0 * _filon_cos(self._nvals, self._step, key, self._grid)
        self._f_memo[key] = val
        return val

    def f_infnorm(self) -> float:
        """``||F||_inf = F(0)`` (valid since ``N >= 0``)."""
        if self._f0 is None:
            self._f0 = self.f_transform(0.0)
        return self._f0

    # -- bounds ------------------------------------------------------------

    def _lam_base(self) -> float:
        return max(50.0, 20.0 * (opnorm2(self.model.a) + self.envelope.mu))

    def qef_upper_rate(self, theta: float) -> float:
        """Upper bound on the exponential-cost growth rate; zero at
        ``theta = 0`` and finite up to ``1 / (2 F(0))`` exclusive."""
        if theta < 0:
            raise ThetaOutOfRange("theta must be nonnegative")
        if theta == 0.0:
            return 0.0
        if self.degenerate:
            return 0.0
        f0 = self.f_infnorm()
        if theta >= 1.0 / (2.0 * f0):
            raise ThetaOutOfRange(
                f"theta = {theta} outside [0, {1.0 / (2.0 * f0):.6e})"
            )
        val = _tail_corrected_log_integral(
            self.f_transform, theta, self.n0, self._lam_base(), self.tol
        )
        return -self.model.n / (4.0 * math.pi) * val

    def _deriv(self, theta: float) -> float:
        val = _tail_corrected_deriv_integral(
            self.f_transform, theta, self.n0, self._lam_base(), self.tol
        )
        return self.model.n / (2.0 * math.pi) * val

    def cramer_bound_numeric(self, epsilon: float) -> tuple[float, float]:
        """Optimized tail bound ``inf_theta (qef_upper_rate - theta eps)``.

        The minimizer solves the strictly increasing derivative equation;
        bisection runs to a 1e-10 relative theta tolerance.  Returns
        ``(bound, theta_star)``.  For the zero-cost degenerate weight the
        objective is unbounded below and ``(-inf, inf)`` is returned as a
        documented sentinel.
        """
        n = self.model.n
        if self.degenerate or self.f_infnorm() == 0.0:
            if epsilon == 0.0:
                return 0.0, 0.0
            return -math.inf, math.inf
        threshold = n * self.n0
        if epsilon < threshold * (1.0 - 1e-12):
            raise EpsilonTooSmall(
                f"epsilon = {epsilon} below the threshold n*N(0) = {threshold}"
            )
        if epsilon <= threshold * (1.0 + 1e-14):
            return 0.0, 0.0
        theta_max = 1.0 / (2.0 * self.f_infnorm())
        # stop the bracket short of theta_max by more than the transform's
        # noise floor, so 1 - 2 theta F stays numerically positive
        delta = 1e-6
        hi = theta_max * (1.0 - delta)
        while self._deriv(hi) < epsilon:
            delta *= 1e-2
            if delta < 1e-9:
                raise NoConvergence(
                    "derivative equation has no bracketable root below the "
                    "numerically safe end of the theta interval"
                )
            hi = theta_max * (1.0 - delta)
        lo = 0.0
        while hi - lo > 1e-10 * theta_max:
            mid = 0.5 * (lo + hi)
            if self._deriv(mid) < epsilon:
                lo = mid
            else:
                hi = mid
        theta_star = 0.5 * (lo + hi)
        bound = self.qef_upper_rate(theta_star) - theta_star * epsilon
        return float(bound), float(theta_star)

    def bound_curve(self, eps_grid) -> list[TailBoundCurve]:
        """Closed-form curve over the grid, plus the numeric curve whenever
        the transform admits one."""
        eps = np.asarray(eps_grid, dtype=float)
        env = self.envelope
        curves = []
        if env is not None:
            closed = np.array(
                [cramer_bound_closed(env.mu, env.alpha, self.model.n, e) for e in eps]
            )
            stars = np.array(
                [closed_theta_star(env.mu, env.alpha, self.model.n, e) for e in eps]
            )
            curves.append(
                TailBoundCurve(
                    epsilon=eps, bound=closed, theta_star=stars, method="closed_form"
                )
            )
        if not self.degenerate and self.f_infnorm() > 0.0:
            pairs = [self.cramer_bound_numeric(e) for e in eps]
            curves.append(
                TailBoundCurve(
                    epsilon=eps,
                    bound=np.array([p[0] for p in pairs]),
                    theta_star=np.array([p[1] for p in pairs]),
                    method="numeric",
                )
            )
        return curves


def cramer_bound_closed(mu: float, alpha: float, n: int, epsilon: float) -> float:
    """Envelope tail bound ``(n mu / 4)(2 - n alpha / eps - eps / (n alpha))``,
    zero at ``eps = n alpha`` and decreasing beyond."""
    scale = n * alpha
    if epsilon < scale * (1.0 - 1e-12):
        raise EpsilonTooSmall(f"epsilon = {epsilon} below n*alpha = {scale}")
    return 0.25 * n * mu * (2.0 - scale / epsilon - epsilon / scale)


def closed_theta_star(mu: float, alpha: float, n: int, epsilon: float) -> float:
    """Minimizer of the envelope bound, ``(mu/4 alpha)(1 - (n alpha/eps)^2)``."""
    scale = n * alpha
    if epsilon < scale * (1.0 - 1e-12):
        raise EpsilonTooSmall(f"epsilon = {epsilon} below n*alpha = {scale}")
    return 0.25 * mu / alpha * (1.0 - (scale / epsilon) ** 2)


def envelope_log_integral(alpha: float, mu: float, theta: float, tol=1e-10) -> float:
    """Numeric ``-integral ln(1 - 2 theta Fhat)`` for the analytic envelope
    transform ``Fhat = 2 alpha mu / (lam^2 + mu^2)``; crosscheck target for
    the closed form ``2 pi (mu - sqrt(mu^2 - 4 theta alpha mu))``."""
    if not 0 <= theta < 0.25 * mu / alpha:
        raise ThetaOutOfRange("theta outside the envelope interval [0, mu/(4 alpha))")

    def fhat(lam):
        return 2.0 * alpha * mu / (lam * lam + mu * mu)

    val = _tail_corrected_log_integral(fhat, theta, alpha, max(50.0, 20.0 * mu), tol)
    return -val


def envelope_log_integral_closed(alpha: float, mu: float, theta: float) -> float:
    return 2.0 * math.pi * (mu - math.sqrt(mu * mu - 4.0 * theta * alpha * mu))


# -- one-shot wrappers ------------------------------------------------------


def n_kernel(model: OqhoModel, pi, tau: float) -> float:
    return DeviationAnalysis(model, pi).n_kernel(tau)


def f_transform(model: OqhoModel, pi, lam: float) -> float:
    return DeviationAnalysis(model, pi).f_transform(lam)


def f_infnorm(model: OqhoModel, pi) -> float:
    return DeviationAnalysis(model, pi).f_infnorm()


def qef_upper_rate(model: OqhoModel, pi, theta: float) -> float:
    return DeviationAnalysis(model, pi).qef_upper_rate(theta)


def cramer_bound_numeric(model: OqhoModel, pi, epsilon: float) -> tuple[float, float]:
    return DeviationAnalysis(model, pi).cramer_bound_numeric(epsilon)


def bound_curve(model: OqhoModel, pi, eps_grid) -> list[TailBoundCurve]:
    return DeviationAnalysis(model, pi).bound_curve(eps_grid)
