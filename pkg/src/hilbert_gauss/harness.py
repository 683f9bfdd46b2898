"""Monte Carlo experiment runner producing reproducible verification reports.

Each experiment draws `replicates` independent observations, one per
replicate-indexed random stream, evaluates the construction under test, and
compares the aggregate against its analytic target.  Two-sided checks use a
three-standard-error tolerance; one-sided (conservative) claims use the same
margin on the bounded side only.  A report is deterministic given its
configuration, including the master seed: rerunning, or running the
replicates concurrently, reproduces it byte for byte apart from the runtime
field.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimators import est_functional, est_mean, est_variance, risk_mean, risk_partial, variance_est_risk
from .distributions import gamma_cdf, ks_critical_value, ks_statistic
from .inference import ci_known, ci_params_unknown, ci_unknown, test_subspace
from .processes import bridge_model, custom_model, wiener_model
from .sampling import (
    GaussianLaw,
    leading_complement_norm_sq,
    noise_decomposition,
    norm_sq_moments,
    sample,
    whitened_difference_norm_sq,
)
from .spectral import HVector, SpectralModel, Subspace, default_use_tail, inner

EXPERIMENT_KINDS = (
    "coverage_known",
    "coverage_unknown",
    "level",
    "unbiasedness",
    "moments",
    "independence",
    "noise_law",
    "risk",
    "learning_curve",
)

# Replicates per work unit; chunk boundaries are fixed by the replicate
# count alone so serial and concurrent runs reduce identically.
CHUNK_SIZE = 4096

DEFAULT_REPLICATES = 100_000
DEFAULT_MODEL_DIM = 256


def derive_stream(master_seed: int, replicate: int) -> np.random.Generator:
    """Independent, reproducible random stream for one replicate.

    Counter-based keying: the 128-bit stream key is the master seed in the
    high word and the replicate index in the low word, so stream creation
    is O(1) and distinct indices give statistically independent streams.
    """
    master_seed = int(master_seed)
    replicate = int(replicate)
    if not 0 <= master_seed < 2**64:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    if not 0 <= replicate < 2**64:
        raise ValueError("replicate index must fit in an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=(master_seed << 64) | replicate))


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one Monte Carlo experiment."""

    kind: str
    model: SpectralModel
    subspace: Subspace | None = None
    subspace0: Subspace | None = None
    zeta: HVector | None = None
    b: HVector | None = None
    sigma: float = 1.0
    alpha: float = 0.05
    replicates: int = DEFAULT_REPLICATES
    master_seed: int = 0
    use_tail: bool | None = None
    cutoffs: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        kind = data.pop("kind", None)
        if kind is None:
            raise ValueError("experiment config needs a 'kind'")
        model = _parse_model(data.pop("model", None))
        subspace = _parse_subspace(data.pop("subspace", None), model)
        subspace0 = _parse_subspace(data.pop("subspace0", None), model)
        zeta = _parse_vector(data.pop("zeta", None), model.dim)
        b = _parse_vector(data.pop("b", None), model.dim)
        cutoffs = data.pop("cutoffs", None)
        if cutoffs is not None:
            cutoffs = tuple(int(c) for c in cutoffs)
        known = {"sigma", "alpha", "replicates", "master_seed", "use_tail", "workers"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(
            kind=kind,
            model=model,
            subspace=subspace,
            subspace0=subspace0,
            zeta=zeta,
            b=b,
            sigma=float(data.get("sigma", 1.0)),
            alpha=float(data.get("alpha", 0.05)),
            replicates=int(data.get("replicates", DEFAULT_REPLICATES)),
            master_seed=int(data.get("master_seed", 0)),
            use_tail=data.get("use_tail", None),
            cutoffs=cutoffs,
            workers=int(data.get("workers", 1)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _parse_model(spec) -> SpectralModel:
    if spec is None:
        return wiener_model(DEFAULT_MODEL_DIM)
    if isinstance(spec, str):
        return SpectralModel.load(spec)
    if isinstance(spec, dict):
        basis_id = spec.get("basis_id", "abstract")
        if "eigenvalues" not in spec:
            dim = int(spec.get("dim", DEFAULT_MODEL_DIM))
            if basis_id == "wiener":
                return wiener_model(dim)
            if basis_id == "bridge":
                return bridge_model(dim)
            raise ValueError("abstract models need explicit eigenvalues")
        if basis_id == "abstract":
            return custom_model(spec["eigenvalues"], tail_trace=spec.get("tail_trace", 0.0))
        return SpectralModel.from_dict(spec)
    raise ValueError("model spec must be a path or a mapping")


def _parse_subspace(spec, model: SpectralModel) -> Subspace | None:
    if spec is None:
        return None
    if isinstance(spec, str):
        return Subspace.load(spec, model=model)
    if isinstance(spec, (list, tuple)):
        return Subspace.from_indices(model.dim, spec)
    if isinstance(spec, dict):
        return Subspace.from_dict(spec, model=model)
    raise ValueError("subspace spec must be a path, an index list, or a mapping")


def _parse_vector(spec, dim: int) -> HVector | None:
    if spec is None:
        return None
    if isinstance(spec, dict) and "coords" in spec:
        coeffs = np.zeros(dim)
        for key, value in spec["coords"].items():
            k = int(key)
            if not 1 <= k <= dim:
                raise ValueError(f"coordinate index {k} outside 1..{dim}")
            coeffs[k - 1] = float(value)
        return HVector(coeffs)
    if isinstance(spec, dict) and "coeffs" in spec:
        spec = spec["coeffs"]
    arr = np.asarray(spec, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(f"coefficient vector must have length {dim}")
    return HVector(arr)


# ---------------------------------------------------------------------------
# report


@dataclass
class Report:
    """Aggregated experiment outcome with labelled targets and checks."""

    kind: str
    passed: bool
    estimates: dict
    standard_errors: dict
    targets: dict
    checks: list
    replicates: int
    master_seed: int
    use_tail: bool | None
    config_summary: dict
    runtime_seconds: float = field(default=0.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "estimates": self.estimates,
            "standard_errors": self.standard_errors,
            "targets": self.targets,
            "checks": self.checks,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "use_tail": self.use_tail,
            "config_summary": self.config_summary,
            "runtime_seconds": self.runtime_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    def comparable_json(self) -> str:
        """Report serialization with the runtime field removed, for
        determinism comparisons."""
        data = self.to_dict()
        data.pop("runtime_seconds")
        return json.dumps(data, indent=2, sort_keys=True)

    def check_rows(self) -> list:
        """Flat rows (name, estimate, target, tolerance, sided, passed)."""
        return [
            [c["name"], c["estimate"], c["target"], c["tolerance"], c["sided"], c["passed"]]
            for c in self.checks
        ]


def _check(name, estimate, target, tolerance, sided) -> dict:
    estimate = float(estimate)
    target = float(target)
    # Small absolute floor so zero-variance configurations are not failed
    # by floating-point summation order alone.
    tolerance = float(tolerance) + 1e-12 * (1.0 + abs(target))
    if sided == "two":
        passed = abs(estimate - target) <= tolerance
    elif sided == "lower":
        passed = estimate >= target - tolerance
    elif sided == "upper":
        passed = estimate <= target + tolerance
    else:
        raise ValueError(f"unknown sidedness {sided!r}")
    return {
        "name": name,
        "estimate": estimate,
        "target": target,
        "tolerance": tolerance,
        "sided": sided,
        "passed": bool(passed),
    }


def _target(value, provenance, note=None) -> dict:
    out = {"value": float(value), "provenance": provenance}
    if note:
        out["note"] = note
    return out


def _mean_se(values: np.ndarray):
    m = values.size
    mean = float(values.sum() / m)
    if m > 1:
        var = float(np.sum((values - mean) ** 2) / (m - 1))
    else:
        var = 0.0
    return mean, float(np.sqrt(var / m))


# ---------------------------------------------------------------------------
# per-kind replicate loops
#
# Each function handles replicates [start, start + count) and returns a dict
# of per-replicate arrays and/or partial sums.  Chunk boundaries and the
# reduction order are fixed by the replicate count alone, so the outcome is
# independent of how chunks are scheduled.


def _resolved_use_tail(config: ExperimentConfig) -> bool:
    if config.kind == "risk":
        return False
    if config.use_tail is None:
        return default_use_tail(config.model)
    return bool(config.use_tail)


def _law(config: ExperimentConfig, attach: Subspace | None) -> GaussianLaw:
    zeta = config.zeta if config.zeta is not None else HVector.zero(config.model.dim)
    return GaussianLaw(config.model, zeta, config.sigma, subspace=attach)


def _chunk_coverage_known(config, start, count):
    law = _law(config, config.subspace)
    truth = inner(config.b, law.mean)
    covered = np.zeros(count, dtype=np.uint8)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        interval = ci_known(config.b, y, config.model, config.subspace, config.sigma, config.alpha)
        covered[i] = interval.covers(truth)
    return {"arrays": {"covered": covered}}


def _chunk_coverage_unknown(config, start, count):
    law = _law(config, config.subspace)
    truth = inner(config.b, law.mean)
    use_tail = _resolved_use_tail(config)
    covered = np.zeros(count, dtype=np.uint8)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        interval = ci_unknown(config.b, y, config.model, config.subspace, config.alpha, use_tail=use_tail)
        covered[i] = interval.covers(truth)
    return {"arrays": {"covered": covered}}


def _chunk_level(config, start, count):
    law = _law(config, config.subspace0)
    rejects = np.zeros(count, dtype=np.uint8)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        outcome = test_subspace(y, config.model, config.subspace, config.subspace0, config.alpha)
        rejects[i] = outcome.reject
    return {"arrays": {"rejects": rejects}}


def _chunk_unbiasedness(config, start, count):
    law = _law(config, config.subspace)
    use_tail = _resolved_use_tail(config)
    dim = config.model.dim
    coord_sum = np.zeros(dim)
    coord_sumsq = np.zeros(dim)
    s2 = np.zeros(count)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        zhat = est_mean(y, config.subspace).coeffs
        coord_sum += zhat
        coord_sumsq += zhat * zhat
        s2[i] = est_variance(y, config.model, config.subspace, use_tail=use_tail)
    return {"arrays": {"s2": s2}, "sums": {"coord_sum": coord_sum, "coord_sumsq": coord_sumsq}}


def _chunk_moments(config, start, count):
    law = _law(config, None)
    norm_sq = np.zeros(count)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        norm_sq[i] = y.norm_sq()
    return {"arrays": {"norm_sq": norm_sq}}


def _chunk_independence(config, start, count):
    law = _law(config, config.subspace)
    use_tail = _resolved_use_tail(config)
    functional = np.zeros(count)
    s2 = np.zeros(count)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        functional[i] = est_functional(config.b, y, config.subspace)
        s2[i] = est_variance(y, config.model, config.subspace, use_tail=use_tail)
    return {"arrays": {"functional": functional, "s2": s2}}


def _chunk_noise_law(config, start, count):
    law = _law(config, config.subspace)
    with_t = config.subspace0 is not None
    s_vals = np.zeros(count)
    t_vals = np.zeros(count) if with_t else None
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        s_vals[i] = leading_complement_norm_sq(config.model, config.subspace, y, config.sigma)
        if with_t:
            t_vals[i] = whitened_difference_norm_sq(
                config.model, config.subspace, config.subspace0, y, config.sigma
            )
    arrays = {"s_stat": s_vals}
    if with_t:
        arrays["t_stat"] = t_vals
    return {"arrays": arrays}


def _chunk_risk(config, start, count):
    law = _law(config, config.subspace)
    use_tail = _resolved_use_tail(config)
    sigma_sq = config.sigma**2
    mean_err = np.zeros(count)
    s2_err = np.zeros(count)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        diff = est_mean(y, config.subspace) - law.mean
        mean_err[i] = diff.norm_sq()
        s2 = est_variance(y, config.model, config.subspace, use_tail=use_tail)
        s2_err[i] = (s2 - sigma_sq) ** 2
    return {"arrays": {"mean_err": mean_err, "s2_err": s2_err}}


def _chunk_learning_curve(config, start, count):
    law = _law(config, config.subspace)
    cutoffs = config.cutoffs
    order = np.array(config.subspace.indices, dtype=int) - 1
    zeta = law.mean.coeffs
    n_cut = len(cutoffs)
    risk_sum = np.zeros(n_cut)
    risk_sumsq = np.zeros(n_cut)
    for i in range(count):
        rng = derive_stream(config.master_seed, start + i)
        y = sample(law, rng)
        # prefix noise residual + suffix bias over the ordered modes of U
        noise_sq = (y.coeffs[order] - zeta[order]) ** 2
        bias_sq = zeta[order] ** 2
        prefix = np.concatenate([[0.0], np.cumsum(noise_sq)])
        suffix = np.concatenate([np.cumsum(bias_sq[::-1])[::-1], [0.0]])
        errs = np.array([prefix[c] + suffix[c] for c in cutoffs])
        risk_sum += errs
        risk_sumsq += errs * errs
    return {"sums": {"risk_sum": risk_sum, "risk_sumsq": risk_sumsq}}


_CHUNK_FUNCS = {
    "coverage_known": _chunk_coverage_known,
    "coverage_unknown": _chunk_coverage_unknown,
    "level": _chunk_level,
    "unbiasedness": _chunk_unbiasedness,
    "moments": _chunk_moments,
    "independence": _chunk_independence,
    "noise_law": _chunk_noise_law,
    "risk": _chunk_risk,
    "learning_curve": _chunk_learning_curve,
}


def _run_chunk(config: ExperimentConfig, start: int, count: int) -> dict:
    return _CHUNK_FUNCS[config.kind](config, start, count)


# ---------------------------------------------------------------------------
# validation and aggregation per kind


def _validate_config(config: ExperimentConfig) -> None:
    needs_subspace = config.kind in {
        "coverage_known",
        "coverage_unknown",
        "level",
        "unbiasedness",
        "independence",
        "noise_law",
        "risk",
        "learning_curve",
    }
    if needs_subspace and config.subspace is None:
        raise ValueError(f"experiment {config.kind!r} needs a subspace")
    if config.kind in {"coverage_known", "coverage_unknown", "independence"} and config.b is None:
        raise ValueError(f"experiment {config.kind!r} needs a functional vector b")
    if config.kind == "level" and config.subspace0 is None:
        raise ValueError("the level experiment needs the hypothesis subspace subspace0")
    if config.kind == "learning_curve":
        if config.subspace.kind != "indices" or config.subspace.is_complement:
            raise ValueError("learning_curve needs a plain index-set subspace")
        if config.zeta is None:
            raise ValueError("learning_curve needs an explicit mean")
    # Building the law validates that the mean lies where it must.
    attach = config.subspace0 if config.kind == "level" else config.subspace
    if config.kind != "moments":
        _law(config, attach)
    if config.kind == "risk" and config.use_tail:
        # The variance-estimator risk formula is exact for the truncated
        # denominator only; a tail denominator would shift the target.
        raise ValueError("the risk experiment requires use_tail false or omitted")
    # Parameter quantities must exist up front, not at replicate time.
    if config.kind in {"coverage_unknown", "unbiasedness", "independence", "risk"}:
        ci_params_unknown(config.model, config.subspace, use_tail=_resolved_use_tail(config))
    if config.kind == "level":
        noise_decomposition(config.model, config.subspace, config.subspace0)
    if config.kind == "noise_law":
        noise_decomposition(config.model, config.subspace, config.subspace0)


def _resolve_cutoffs(config: ExperimentConfig) -> "ExperimentConfig":
    if config.kind != "learning_curve":
        return config
    size = len(config.subspace.indices)
    cutoffs = config.cutoffs if config.cutoffs is not None else tuple(range(1, size + 1))
    for c in cutoffs:
        if not 0 <= c <= size:
            raise ValueError(f"cutoff {c} outside 0..{size}")
    return ExperimentConfig(
        **{**_config_kwargs(config), "cutoffs": tuple(int(c) for c in cutoffs)}
    )


def _config_kwargs(config: ExperimentConfig) -> dict:
    return {
        "kind": config.kind,
        "model": config.model,
        "subspace": config.subspace,
        "subspace0": config.subspace0,
        "zeta": config.zeta,
        "b": config.b,
        "sigma": config.sigma,
        "alpha": config.alpha,
        "replicates": config.replicates,
        "master_seed": config.master_seed,
        "use_tail": config.use_tail,
        "cutoffs": config.cutoffs,
        "workers": config.workers,
    }


def _binomial_tolerance(alpha: float, m: int) -> float:
    return 3.0 * float(np.sqrt(alpha * (1.0 - alpha) / m))


def _aggregate(config: ExperimentConfig, arrays: dict, sums: dict) -> tuple:
    """Build (estimates, standard_errors, targets, checks) for the report."""
    m = config.replicates
    use_tail = _resolved_use_tail(config)
    kind = config.kind
    estimates, ses, targets, checks = {}, {}, {}, []

    if kind in ("coverage_known", "coverage_unknown"):
        rate = float(arrays["covered"].sum()) / m
        estimates["coverage"] = rate
        ses["coverage"] = float(np.sqrt(max(rate * (1.0 - rate), 0.0) / m))
        level = 1.0 - config.alpha
        tol = _binomial_tolerance(config.alpha, m)
        if kind == "coverage_known":
            targets["coverage"] = _target(level, "analytic", "exact-coverage construction")
            checks.append(_check("coverage", rate, level, tol, "two"))
        else:
            targets["coverage"] = _target(level, "analytic", "conservative construction, coverage at least the level")
            checks.append(_check("coverage", rate, level, tol, "lower"))

    elif kind == "level":
        rate = float(arrays["rejects"].sum()) / m
        estimates["rejection_rate"] = rate
        ses["rejection_rate"] = float(np.sqrt(max(rate * (1.0 - rate), 0.0) / m))
        tol = _binomial_tolerance(config.alpha, m)
        targets["rejection_rate"] = _target(config.alpha, "analytic", "conservative test, level at most alpha")
        checks.append(_check("rejection_rate", rate, config.alpha, tol, "upper"))

    elif kind == "unbiasedness":
        zeta = (config.zeta if config.zeta is not None else HVector.zero(config.model.dim)).coeffs
        mean_coords = sums["coord_sum"] / m
        var_coords = np.maximum(sums["coord_sumsq"] / m - mean_coords**2, 0.0) * m / max(m - 1, 1)
        se_coords = np.sqrt(var_coords / m)
        dev = np.abs(mean_coords - zeta)
        # Worst coordinate relative to its own standard error decides the check.
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(se_coords > 0.0, dev / se_coords, np.where(dev > 0.0, np.inf, 0.0))
        worst = int(np.argmax(ratio))
        estimates["mean_coord_worst"] = float(mean_coords[worst])
        ses["mean_coord_worst"] = float(se_coords[worst])
        targets["mean_coord_worst"] = _target(
            zeta[worst], "analytic", f"unbiased mean estimator, coordinate {worst + 1}"
        )
        checks.append(
            _check(
                "mean_coord_worst",
                mean_coords[worst],
                zeta[worst],
                3.0 * max(se_coords[worst], 0.0),
                "two",
            )
        )
        s2_mean, s2_se = _mean_se(arrays["s2"])
        estimates["s2_mean"] = s2_mean
        ses["s2_mean"] = s2_se
        targets["s2_mean"] = _target(config.sigma**2, "analytic", "unbiased variance estimator")
        checks.append(_check("s2_mean", s2_mean, config.sigma**2, 3.0 * s2_se, "two"))

    elif kind == "moments":
        vals = arrays["norm_sq"]
        mean, mean_se = _mean_se(vals)
        m1 = mean
        centered = vals - m1
        var = float(np.sum(centered**2) / (m - 1)) if m > 1 else 0.0
        mu4 = float(np.mean(centered**4))
        var_se = float(np.sqrt(max(mu4 - var**2, 0.0) / m))
        target_mean, target_var = norm_sq_moments(_law(config, None), use_tail=use_tail)
        estimates["norm_sq_mean"] = mean
        ses["norm_sq_mean"] = mean_se
        targets["norm_sq_mean"] = _target(target_mean, "closed-form", "trace plus squared mean norm")
        checks.append(_check("norm_sq_mean", mean, target_mean, 3.0 * mean_se, "two"))
        estimates["norm_sq_var"] = var
        ses["norm_sq_var"] = var_se
        targets["norm_sq_var"] = _target(target_var, "closed-form", "weighted chi-square variance")
        checks.append(_check("norm_sq_var", var, target_var, 3.0 * var_se, "two"))

    elif kind == "independence":
        fa = arrays["functional"]
        s2 = arrays["s2"]
        fa_c = fa - fa.sum() / m
        s2_c = s2 - s2.sum() / m
        denom = float(np.sqrt(np.sum(fa_c**2) * np.sum(s2_c**2)))
        corr = float(np.sum(fa_c * s2_c) / denom) if denom > 0.0 else 0.0
        tol = 3.0 / float(np.sqrt(m))
        estimates["correlation"] = corr
        ses["correlation"] = 1.0 / float(np.sqrt(m))
        targets["correlation"] = _target(0.0, "analytic", "independence of the two estimators")
        checks.append(_check("correlation", abs(corr), 0.0, tol, "upper"))

    elif kind == "noise_law":
        dec = noise_decomposition(config.model, config.subspace, config.subspace0)
        crit = ks_critical_value(m, alpha=0.05)
        d_s = ks_statistic(arrays["s_stat"], lambda x: gamma_cdf(x, dec.s_shape, dec.s_rate))
        estimates["ks_s"] = d_s
        ses["ks_s"] = 0.0
        targets["ks_s"] = _target(
            0.0, "closed-form", f"KS distance to Gamma({dec.s_shape:g}, rate {dec.s_rate:g})"
        )
        checks.append(_check("ks_s", d_s, 0.0, crit, "upper"))
        if "t_stat" in arrays:
            d_t = ks_statistic(arrays["t_stat"], lambda x: gamma_cdf(x, dec.t_shape, dec.t_rate))
            estimates["ks_t"] = d_t
            ses["ks_t"] = 0.0
            targets["ks_t"] = _target(
                0.0, "closed-form", f"KS distance to Gamma({dec.t_shape:g}, rate {dec.t_rate:g})"
            )
            checks.append(_check("ks_t", d_t, 0.0, crit, "upper"))

    elif kind == "risk":
        mean_risk, mean_risk_se = _mean_se(arrays["mean_err"])
        target_mean_risk = risk_mean(config.model, config.subspace, config.sigma)
        estimates["mean_risk"] = mean_risk
        ses["mean_risk"] = mean_risk_se
        targets["mean_risk"] = _target(target_mean_risk, "closed-form", "sigma^2 tr(Q P_U)")
        checks.append(_check("mean_risk", mean_risk, target_mean_risk, 3.0 * mean_risk_se, "two"))
        s2_risk, s2_risk_se = _mean_se(arrays["s2_err"])
        target_s2_risk = variance_est_risk(config.model, config.subspace, config.sigma)
        bound = 2.0 * config.sigma**4
        estimates["s2_risk"] = s2_risk
        ses["s2_risk"] = s2_risk_se
        targets["s2_risk"] = _target(target_s2_risk, "closed-form", "variance estimator risk, truncated")
        checks.append(_check("s2_risk", s2_risk, target_s2_risk, 3.0 * s2_risk_se, "two"))
        targets["s2_risk_bound"] = _target(bound, "closed-form", "universal cap 2 sigma^4")
        checks.append(_check("s2_risk_bound", s2_risk, bound, 3.0 * s2_risk_se, "upper"))

    elif kind == "learning_curve":
        cutoffs = config.cutoffs
        order = np.array(config.subspace.indices, dtype=int)
        mc_mean = sums["risk_sum"] / m
        mc_var = np.maximum(sums["risk_sumsq"] / m - mc_mean**2, 0.0) * m / max(m - 1, 1)
        mc_se = np.sqrt(mc_var / m)
        for j, c in enumerate(cutoffs):
            head = Subspace.from_indices(config.model.dim, order[:c].tolist())
            analytic = risk_partial(config.model, head, config.zeta, config.sigma).risk
            name = f"risk_cutoff_{c}"
            estimates[name] = float(mc_mean[j])
            ses[name] = float(mc_se[j])
            targets[name] = _target(analytic, "closed-form", "partial-observation risk")
            checks.append(_check(name, mc_mean[j], analytic, 3.0 * mc_se[j], "two"))

    else:  # pragma: no cover - kinds are validated up front
        raise ValueError(f"unknown experiment kind {kind!r}")

    return estimates, ses, targets, checks


def _config_summary(config: ExperimentConfig) -> dict:
    def sub_repr(s: Subspace | None):
        if s is None:
            return None
        data = s.to_dict()
        if "frame" in data:
            data["frame"] = f"rank {len(data['frame'])}"
        return data

    return {
        "model": {
            "basis_id": config.model.basis_id,
            "dim": config.model.dim,
            "tail_trace": config.model.tail_trace,
        },
        "subspace": sub_repr(config.subspace),
        "subspace0": sub_repr(config.subspace0),
        "sigma": config.sigma,
        "alpha": config.alpha,
        "cutoffs": list(config.cutoffs) if config.cutoffs else None,
    }


def run_experiment(config: ExperimentConfig, workers: int | None = None, stream_path=None) -> Report:
    """Run one experiment and return its report.

    `workers` overrides the configured worker count; with more than one the
    chunks run in separate processes.  The report is identical either way
    apart from the runtime field.  `stream_path` optionally writes the
    per-replicate arrays as CSV for external plotting.
    """
    start_time = time.perf_counter()
    _validate_config(config)
    config = _resolve_cutoffs(config)
    workers = config.workers if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be at least 1")

    chunks = [
        (start, min(CHUNK_SIZE, config.replicates - start))
        for start in range(0, config.replicates, CHUNK_SIZE)
    ]
    if workers == 1:
        partials = [_run_chunk(config, start, count) for start, count in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, config, start, count) for start, count in chunks]
            partials = [f.result() for f in futures]

    arrays = {}
    sums = {}
    for key in partials[0].get("arrays", {}):
        arrays[key] = np.concatenate([p["arrays"][key] for p in partials])
    for key in partials[0].get("sums", {}):
        total = partials[0]["sums"][key].copy()
        for p in partials[1:]:
            total += p["sums"][key]
        sums[key] = total

    if stream_path is not None and arrays:
        _write_stream(stream_path, arrays)

    estimates, ses, targets, checks = _aggregate(config, arrays, sums)
    report = Report(
        kind=config.kind,
        passed=all(c["passed"] for c in checks),
        estimates=estimates,
        standard_errors=ses,
        targets=targets,
        checks=checks,
        replicates=config.replicates,
        master_seed=config.master_seed,
        use_tail=_resolved_use_tail(config),
        config_summary=_config_summary(config),
        runtime_seconds=0.0,
    )
    report.runtime_seconds = time.perf_counter() - start_time
    return report


def _write_stream(path, arrays: dict) -> None:
    keys = sorted(arrays)
    columns = [np.asarray(arrays[k], dtype=float) for k in keys]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("replicate," + ",".join(keys) + "\n")
        for i in range(columns[0].size):
            fh.write(str(i) + "," + ",".join(repr(float(col[i])) for col in columns) + "\n")
