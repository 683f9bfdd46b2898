"""Quantiles, CDFs, and samplers for the normal, Student-t, Fisher, Gamma,
and chi-square families, plus the scale-family reductions used to recognize
normal-over-root-Gamma and Gamma-over-Gamma ratios.

Quantiles are computed by safeguarded Newton iteration (bisection fallback)
on CDFs built from the regularized incomplete gamma and beta functions, so
non-integer degrees of freedom work everywhere.  Gamma sampling uses a
squeeze/rejection scheme for shapes at or above 1 and boosts smaller shapes
from shape + 1; only uniform and normal draws from the supplied generator
are consumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

_SQRT2 = np.sqrt(2.0)


def _check_prob(a: float) -> float:
    a = float(a)
    if not 0.0 < a < 1.0:
        raise ValueError(f"probability must lie strictly between 0 and 1, got {a}")
    return a


def _check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive real, got {value}")
    return value


def _maybe_scalar(x, out):
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# densities and CDFs


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return _maybe_scalar(x, out)


def norm_cdf(x):
    """Standard normal CDF, accurate in both tails via erfc."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-x / _SQRT2)
    return _maybe_scalar(x, out)


def t_pdf(x, dof):
    dof = _check_positive(dof, "dof")
    x = np.asarray(x, dtype=float)
    logc = special.gammaln((dof + 1.0) / 2.0) - special.gammaln(dof / 2.0) - 0.5 * np.log(dof * np.pi)
    out = np.exp(logc - 0.5 * (dof + 1.0) * np.log1p(x * x / dof))
    return _maybe_scalar(x, out)


def t_cdf(x, dof):
    """Student-t CDF for real degrees of freedom via the incomplete beta."""
    dof = _check_positive(dof, "dof")
    x = np.asarray(x, dtype=float)
    z = dof / (dof + x * x)
    tail = 0.5 * special.betainc(dof / 2.0, 0.5, z)
    out = np.where(x >= 0.0, 1.0 - tail, tail)
    return _maybe_scalar(x, out)


def f_pdf(x, m, n):
    m = _check_positive(m, "m")
    n = _check_positive(n, "n")
    x = np.asarray(x, dtype=float)
    logbeta = special.gammaln(m / 2.0) + special.gammaln(n / 2.0) - special.gammaln((m + n) / 2.0)
    with np.errstate(divide="ignore"):
        logpdf = (
            0.5 * m * np.log(m / n)
            + (0.5 * m - 1.0) * np.log(x)
            - 0.5 * (m + n) * np.log1p(m * x / n)
            - logbeta
        )
    out = np.where(x > 0.0, np.exp(logpdf), 0.0)
    return _maybe_scalar(x, out)


def f_cdf(x, m, n):
    """Fisher F CDF for real degrees of freedom via the incomplete beta."""
    m = _check_positive(m, "m")
    n = _check_positive(n, "n")
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, 0.0, None)
    out = special.betainc(m / 2.0, n / 2.0, m * xc / (m * xc + n))
    return _maybe_scalar(x, out)


def gamma_pdf(x, alpha, beta):
    """Gamma density with shape alpha and rate beta (mean alpha / beta)."""
    alpha = _check_positive(alpha, "alpha")
    beta = _check_positive(beta, "beta")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logpdf = alpha * np.log(beta) + (alpha - 1.0) * np.log(x) - beta * x - special.gammaln(alpha)
    out = np.where(x > 0.0, np.exp(logpdf), 0.0)
    return _maybe_scalar(x, out)


def gamma_cdf(x, alpha, beta):
    """Gamma CDF with shape alpha and rate beta (regularized lower gamma)."""
    alpha = _check_positive(alpha, "alpha")
    beta = _check_positive(beta, "beta")
    x = np.asarray(x, dtype=float)
    out = special.gammainc(alpha, beta * np.clip(x, 0.0, None))
    return _maybe_scalar(x, out)


def chi2_cdf(x, dof):
    return gamma_cdf(x, _check_positive(dof, "dof") / 2.0, 0.5)


# ---------------------------------------------------------------------------
# quantiles


def _invert_cdf(cdf, pdf, a, lo, hi, ftol):
    """Solve cdf(x) = a on a monotone bracket by Newton with bisection guard."""
    flo = cdf(lo) - a
    fhi = cdf(hi) - a
    if flo > 0.0 or fhi < 0.0:
        raise ValueError("quantile bracket does not straddle the target")
    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = cdf(x) - a
        if f > 0.0:
            hi = x
        elif f < 0.0:
            lo = x
        prev = x
        step_ok = False
        d = pdf(x)
        if d > 0.0:
            xn = x - f / d
            if lo < xn < hi:
                x = xn
                step_ok = True
        if not step_ok:
            x = 0.5 * (lo + hi)
        # Converge in both function value and argument: flat tails (small
        # density) would otherwise stall far from the true quantile.
        if abs(f) <= ftol and abs(x - prev) <= 1e-12 * max(1.0, abs(prev)):
            return prev
        if hi - lo <= 1e-15 * max(1.0, abs(x)):
            return x
    return x


def _expand_symmetric(cdf, a):
    lo, hi = -1.0, 1.0
    while cdf(lo) > a:
        lo *= 2.0
        if lo < -1e10:
            break
    while cdf(hi) < a:
        hi *= 2.0
        if hi > 1e10:
            break
    return lo, hi


def _expand_positive(cdf, a):
    hi = 1.0
    while cdf(hi) < a:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("quantile bracket expansion failed")
    return 0.0, hi


@lru_cache(maxsize=512)
def norm_quantile(a: float) -> float:
    """Standard normal a-quantile, |CDF(result) - a| below 1e-12."""
    a = _check_prob(a)
    if a == 0.5:
        return 0.0
    lo, hi = _expand_symmetric(norm_cdf, a)
    return _invert_cdf(norm_cdf, norm_pdf, a, lo, hi, ftol=1e-13)


@lru_cache(maxsize=512)
def t_quantile(dof: float, a: float) -> float:
    """Student-t a-quantile for real dof >= 1, |CDF(result) - a| below 1e-10."""
    dof = _check_positive(dof, "dof")
    a = _check_prob(a)
    if a == 0.5:
        return 0.0
    lo, hi = _expand_symmetric(lambda x: t_cdf(x, dof), a)
    return _invert_cdf(lambda x: t_cdf(x, dof), lambda x: t_pdf(x, dof), a, lo, hi, ftol=1e-11)


@lru_cache(maxsize=512)
def f_quantile(m: float, n: float, a: float) -> float:
    """Fisher F a-quantile for real dofs, |CDF(result) - a| below 1e-9."""
    m = _check_positive(m, "m")
    n = _check_positive(n, "n")
    a = _check_prob(a)
    lo, hi = _expand_positive(lambda x: f_cdf(x, m, n), a)
    return _invert_cdf(lambda x: f_cdf(x, m, n), lambda x: f_pdf(x, m, n), a, lo, hi, ftol=1e-10)


@lru_cache(maxsize=512)
def gamma_quantile(alpha: float, beta: float, a: float) -> float:
    """Gamma a-quantile with shape alpha and rate beta."""
    alpha = _check_positive(alpha, "alpha")
    beta = _check_positive(beta, "beta")
    a = _check_prob(a)
    lo, hi = _expand_positive(lambda x: gamma_cdf(x, alpha, beta), a)
    return _invert_cdf(
        lambda x: gamma_cdf(x, alpha, beta), lambda x: gamma_pdf(x, alpha, beta), a, lo, hi, ftol=1e-11
    )


# ---------------------------------------------------------------------------
# sampling


def _gamma_shape_ge_one(rng, shape: float, count: int) -> np.ndarray:
    # Squeeze/rejection sampler with cubed-normal proposals; acceptance is
    # above 99 percent for every shape >= 1, and the squeeze avoids most
    # logarithm evaluations.
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(count)
    filled = 0
    while filled < count:
        need = count - filled
        x = rng.standard_normal(need)
        v = (1.0 + c * x) ** 3
        u = rng.uniform(size=need)
        pos = v > 0.0
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        safe_v = np.where(pos, v, 1.0)
        accept = pos & (squeeze | (np.log(u) < 0.5 * x2 + d * (1.0 - safe_v + np.log(safe_v))))
        good = d * v[accept]
        out[filled : filled + good.size] = good
        filled += good.size
    return out


def gamma_sample(rng, alpha: float, beta: float, size=None):
    """Draw from the Gamma distribution with shape alpha and rate beta.

    Parameters
    ----------
    rng : numpy.random.Generator
        Source of uniform and normal variates; nothing else is consumed.
    alpha, beta : float
        Shape and rate, both positive.  The mean is alpha / beta.
    size : int, optional
        Number of draws; a scalar float is returned when omitted.
    """
    alpha = _check_positive(alpha, "alpha")
    beta = _check_positive(beta, "beta")
    count = 1 if size is None else int(size)
    if count < 0:
        raise ValueError("size must be nonnegative")
    if alpha >= 1.0:
        g = _gamma_shape_ge_one(rng, alpha, count)
    else:
        # Boost: X ~ Gamma(alpha + 1), U uniform; X * U^(1/alpha) ~ Gamma(alpha).
        g = _gamma_shape_ge_one(rng, alpha + 1.0, count)
        u = rng.uniform(size=count)
        g = g * u ** (1.0 / alpha)
    g = g / beta
    return float(g[0]) if size is None else g


def t_sample(rng, dof: float, size=None):
    """Draw from Student-t with real dof via normal over root chi-square."""
    dof = _check_positive(dof, "dof")
    count = 1 if size is None else int(size)
    z = rng.standard_normal(count)
    v = gamma_sample(rng, dof / 2.0, 0.5, size=count)
    out = z / np.sqrt(v / dof)
    return float(out[0]) if size is None else out


def f_sample(rng, m: float, n: float, size=None):
    """Draw from Fisher F with real dofs via a ratio of chi-squares."""
    m = _check_positive(m, "m")
    n = _check_positive(n, "n")
    count = 1 if size is None else int(size)
    num = gamma_sample(rng, m / 2.0, 0.5, size=count) / m
    den = gamma_sample(rng, n / 2.0, 0.5, size=count) / n
    out = num / den
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# scale-family reductions


@dataclass(frozen=True)
class Pearson7Params:
    """Pearson type VII parameters: scale alpha > 0 and shape m > 1/2."""

    alpha: float
    m: float

    def __post_init__(self):
        _check_positive(self.alpha, "alpha")
        if not np.isfinite(self.m) or self.m <= 0.5:
            raise ValueError(f"shape m must exceed 1/2, got {self.m}")

    def scaled(self, c: float) -> "Pearson7Params":
        """Law of c * Z for Z with these parameters: the scale multiplies."""
        return Pearson7Params(alpha=_check_positive(c, "c") * self.alpha, m=self.m)


@dataclass(frozen=True)
class GenFisherParams:
    """Generalized Fisher parameters: dofs m, n and positive scales a, b."""

    m: float
    n: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("m", "n", "a", "b"):
            _check_positive(getattr(self, name), name)

    def scaled(self, c: float) -> "GenFisherParams":
        """Law of c * Z for Z with these parameters: a picks up the factor."""
        return GenFisherParams(m=self.m, n=self.n, a=_check_positive(c, "c") * self.a, b=self.b)


def t_ratio_reduction(alpha: float, beta: float):
    """Recognize X / sqrt(Y) for X standard normal and Y ~ Gamma(alpha, beta).

    Returns (scale, dof, pearson): the ratio equals scale times a Student-t
    variable with dof = 2 * alpha degrees of freedom, where
    scale = sqrt(beta / alpha); as a scale family this is Pearson type VII
    with parameters (sqrt(2 * beta), alpha + 1/2).
    """
    alpha = _check_positive(alpha, "alpha")
    beta = _check_positive(beta, "beta")
    scale = float(np.sqrt(beta / alpha))
    dof = 2.0 * alpha
    pearson = Pearson7Params(alpha=float(np.sqrt(2.0 * beta)), m=alpha + 0.5)
    return scale, dof, pearson


def gamma_ratio_reduction(alpha: float, beta: float, gamma: float, delta: float):
    """Recognize X / Y for independent X ~ Gamma(alpha, beta), Y ~ Gamma(gamma, delta).

    Returns (scale, fparams): the ratio equals scale times a Fisher variable
    with (2 * alpha, 2 * gamma) degrees of freedom, where
    scale = alpha * delta / (beta * gamma); as a scale family this is the
    generalized Fisher law with parameters (2 alpha, 2 gamma, scale, 1).
    """
    alpha = _check_positive(alpha, "alpha")
    beta = _check_positive(beta, "beta")
    gamma = _check_positive(gamma, "gamma")
    delta = _check_positive(delta, "delta")
    scale = alpha * delta / (beta * gamma)
    return scale, GenFisherParams(m=2.0 * alpha, n=2.0 * gamma, a=scale, b=1.0)


# ---------------------------------------------------------------------------
# goodness of fit


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a vectorized CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_statistic_two_sample(x, y) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("need at least one sample on each side")
    both = np.concatenate([x, y])
    fx = np.searchsorted(x, both, side="right") / x.size
    fy = np.searchsorted(y, both, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def ks_critical_value(n: int, m: int | None = None, alpha: float = 0.05) -> float:
    """Asymptotic Kolmogorov-Smirnov critical value.

    One-sample when m is omitted: c(alpha) / sqrt(n) with
    c(alpha) = sqrt(-log(alpha / 2) / 2); two-sample otherwise with the
    usual sqrt((n + m) / (n * m)) scaling.
    """
    alpha = _check_prob(alpha)
    c = float(np.sqrt(-0.5 * np.log(alpha / 2.0)))
    if m is None:
        return c / float(np.sqrt(n))
    return c * float(np.sqrt((n + m) / (n * m)))
