"""Confidence intervals for functionals of the mean and the subspace test.

With known sigma the interval around <b, P_U y> uses the exact normal pivot
and has exact coverage.  With unknown sigma the half-width couples the
variance estimator with the quantities tau = tr(Q (I - P_U)),
lam = ||Q (I - P_U)|| and the multiplicity n of lam; the resulting interval
is conservative (coverage at least the nominal level).  The subspace test
compares a scaled ratio of projection norms against a Fisher quantile and
is conservative in the same sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import f_quantile, norm_quantile, t_quantile
from .estimators import est_functional, est_variance
from .sampling import noise_decomposition
from .spectral import (
    HVector,
    SpectralModel,
    Subspace,
    default_use_tail,
    project,
    sup_eig_on,
    top_multiplicity,
    trace_q_on,
)


class ZeroResidualError(ArithmeticError):
    """Observation with no component outside U; a probability-zero event
    under the model, reported distinctly instead of dividing by zero."""


@dataclass(frozen=True)
class Interval:
    """Two-sided confidence interval (center - hw, center + hw)."""

    center: float
    half_width: float
    level: float

    def __post_init__(self):
        if self.half_width < 0.0:
            raise ValueError("half_width must be nonnegative")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie strictly between 0 and 1")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def covers(self, value: float) -> bool:
        return abs(value - self.center) <= self.half_width

    def to_dict(self) -> dict:
        return {"center": self.center, "half_width": self.half_width, "level": self.level}


@dataclass(frozen=True)
class TestResult:
    """Outcome of the subspace test; reject iff statistic >= threshold."""

    statistic: float
    threshold: float
    reject: bool
    params: dict

    @classmethod
    def from_statistic(cls, statistic: float, threshold: float, params: dict) -> "TestResult":
        statistic = float(statistic)
        threshold = float(threshold)
        return cls(statistic=statistic, threshold=threshold, reject=statistic >= threshold, params=params)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "reject": self.reject,
            "params": dict(self.params),
        }


def functional_variance_factor(b: HVector, model: SpectralModel, U: Subspace) -> float:
    """<Q b, P_U b>, the variance factor of the functional estimator.

    Must be positive for any interval to exist; zero means b acts like an
    element of the orthogonal complement of U.
    """
    pb = project(b, U).coeffs
    return float(model.eigenvalues @ (pb * b.coeffs))


def _checked_variance_factor(b, model, U) -> float:
    v = functional_variance_factor(b, model, U)
    if v <= 0.0:
        raise ValueError("<Q b, P_U b> is not positive; b carries no signal inside U")
    return v


def ci_known(b: HVector, y: HVector, model: SpectralModel, U: Subspace, sigma: float, alpha: float) -> Interval:
    """Exact-coverage interval for <b, zeta> with known sigma.

    Center <b, P_U y>, half-width z_{1 - alpha/2} sigma sqrt(<Q b, P_U b>).
    """
    sigma = float(sigma)
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    alpha = _check_alpha(alpha)
    v = _checked_variance_factor(b, model, U)
    z = norm_quantile(1.0 - alpha / 2.0)
    return Interval(
        center=est_functional(b, y, U),
        half_width=z * sigma * float(np.sqrt(v)),
        level=1.0 - alpha,
    )


def ci_params_unknown(model: SpectralModel, U: Subspace, use_tail: bool | None = None):
    """The quantities (tau, lam, n) of Q on the complement of U.

    tau is the complement trace (tail per convention), lam the largest
    complement eigenvalue, n its multiplicity.
    """
    if use_tail is None:
        use_tail = default_use_tail(model)
    comp = U.complement()
    tau = trace_q_on(model, comp, use_tail=use_tail)
    if tau <= 0.0:
        raise ValueError("tr(Q (I - P_U)) is zero; no variance information outside U")
    lam = sup_eig_on(model, comp)
    if lam <= 0.0:
        raise ValueError("Q vanishes on the truncated complement of U")
    n = top_multiplicity(model, comp)
    return tau, lam, n


def ci_unknown(
    b: HVector,
    y: HVector,
    model: SpectralModel,
    U: Subspace,
    alpha: float,
    use_tail: bool | None = None,
) -> Interval:
    """Conservative interval for <b, zeta> with unknown sigma.

    Half-width sqrt(tau / (lam n)) t_{n, 1 - alpha/2} s(y) sqrt(<Q b, P_U b>)
    where s(y)^2 is the variance estimator.  Coverage is at least 1 - alpha.
    A zero residual yields a degenerate zero-width interval.
    """
    alpha = _check_alpha(alpha)
    v = _checked_variance_factor(b, model, U)
    tau, lam, n = ci_params_unknown(model, U, use_tail=use_tail)
    s2 = est_variance(y, model, U, use_tail=use_tail)
    t = t_quantile(float(n), 1.0 - alpha / 2.0)
    half_width = float(np.sqrt(tau / (lam * n)) * t * np.sqrt(s2) * np.sqrt(v))
    return Interval(center=est_functional(b, y, U), half_width=half_width, level=1.0 - alpha)


def test_params(model: SpectralModel, U: Subspace, U0: Subspace):
    """The quantities (lam, mu, n, m) for testing zeta in U0 against U.

    lam, n come from Q on the complement of U; mu, m from Q on U minus U0
    (largest eigenvalue and rank).  Both operators must be nonzero.
    """
    dec = noise_decomposition(model, U, U0)
    return dec.lam, dec.mu, dec.n, dec.m


def test_subspace(y: HVector, model: SpectralModel, U: Subspace, U0: Subspace, alpha: float) -> TestResult:
    """Level-alpha test of the hypothesis that the mean lies in U0.

    Rejects when (n lam / (m mu)) ||P_U y - P_U0 y||^2 / ||y - P_U y||^2
    reaches the Fisher quantile F_{m, n, 1 - alpha}.  The test is
    conservative: under the hypothesis the rejection probability is at most
    alpha.  A zero residual outside U is a probability-zero event and
    raises ZeroResidualError.
    """
    alpha = _check_alpha(alpha)
    lam, mu, n, m = test_params(model, U, U0)
    residual = y - project(y, U)
    denom = residual.norm_sq()
    if denom <= 0.0:
        raise ZeroResidualError(
            "observation has no component outside U; the test statistic is undefined"
        )
    shift = project(y, U) - project(y, U0)
    statistic = (n * lam) / (m * mu) * shift.norm_sq() / denom
    threshold = f_quantile(float(m), float(n), 1.0 - alpha)
    return TestResult.from_statistic(
        statistic,
        threshold,
        params={"lam": lam, "mu": mu, "n": n, "m": m},
    )


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha
