"""Least squares over a finite-dimensional parameter space mapped into H.

The design operator A sends parameter vectors beta to sum_j beta_j A g_j,
with the column images A g_j expressed in the eigenbasis.  Its range U must
be Q-invariant, which is checked numerically at construction.  The unique
least-squares estimate solves the normal equations Gram beta = (<A g_j, y>)_j
and satisfies A beta = P_U y, so confidence intervals for <c, beta> and the
test of beta lying in a subspace G0 reduce to the functional interval and
subspace test with b = A Gram^{-1} c and U0 = A(G0).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .inference import Interval, TestResult, ci_known, ci_unknown, test_subspace
from .spectral import HVector, SpectralModel, Subspace

# Rank threshold of the rank-revealing QR, relative to the largest pivot.
RANK_TOL = 1e-12
# Gram matrix conditioning bound: smallest eigenvalue must exceed this
# multiple of the largest for A to count as injective.
GRAM_COND_TOL = 1e-12


class DesignOperator:
    """Injective finite-rank map from parameter space into H.

    Parameters
    ----------
    model : SpectralModel
        The ambient spectral model; the range must be Q-invariant under it.
    columns : sequence
        The p column images A g_1 .. A g_p as HVectors or coefficient
        arrays of length model.dim.
    """

    __slots__ = ("model", "columns", "gram", "range")

    def __init__(self, model: SpectralModel, columns):
        cols = [c.coeffs if isinstance(c, HVector) else np.asarray(c, dtype=float) for c in columns]
        if not cols:
            raise ValueError("design needs at least one column")
        mat = np.column_stack(cols)
        if mat.shape[0] != model.dim:
            raise ValueError(f"columns have dim {mat.shape[0]}, model has {model.dim}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("column entries must be finite")
        gram = mat.T @ mat
        eigs = np.linalg.eigvalsh(gram)
        if eigs[-1] <= 0.0 or eigs[0] <= GRAM_COND_TOL * eigs[-1]:
            raise ValueError("design columns are not linearly independent enough to invert")
        mat.flags.writeable = False
        gram.flags.writeable = False
        self.model = model
        self.columns = mat
        self.gram = gram
        self.range = _range_subspace(model, mat)

    @property
    def n_params(self) -> int:
        return int(self.columns.shape[1])

    def apply(self, beta) -> HVector:
        """A beta, the element of H with coefficients columns @ beta."""
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (self.n_params,):
            raise ValueError(f"beta must have shape ({self.n_params},)")
        return HVector(self.columns @ beta)

    def __repr__(self) -> str:
        return f"DesignOperator(dim={self.model.dim}, n_params={self.n_params})"


def _range_subspace(model: SpectralModel, mat: np.ndarray) -> Subspace:
    # Fast path: pure coordinate columns span an index set.
    nonzero_rows = [np.flatnonzero(mat[:, j]) for j in range(mat.shape[1])]
    if all(rows.size == 1 for rows in nonzero_rows):
        indices = sorted(int(rows[0]) + 1 for rows in nonzero_rows)
        return Subspace.from_indices(model.dim, indices)
    q, r, _ = scipy.linalg.qr(mat, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > RANK_TOL * diag[0])) if diag.size else 0
    if rank < mat.shape[1]:
        raise ValueError("design columns are rank deficient")
    return Subspace.from_frame(model, q[:, :rank].T)


def range_subspace(A: DesignOperator) -> Subspace:
    """The range of A as a validated Q-invariant subspace."""
    return A.range


def lse(A: DesignOperator, y: HVector) -> np.ndarray:
    """Unique least-squares estimate solving Gram beta = (<A g_j, y>)_j.

    The fitted element A beta equals the projection of y onto ran(A).
    """
    if y.dim != A.model.dim:
        raise ValueError("observation dimension does not match the model")
    rhs = A.columns.T @ y.coeffs
    return np.linalg.solve(A.gram, rhs)


def pullback_functional(A: DesignOperator, c) -> HVector:
    """The element b of ran(A) with <b, A g> = <c, g> for every parameter g.

    Computed as A Gram^{-1} c; composing the least-squares estimate with
    <c, .> equals the functional estimator with this b.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (A.n_params,):
        raise ValueError(f"c must have shape ({A.n_params},)")
    return HVector(A.columns @ np.linalg.solve(A.gram, c))


def ci_beta_known(c, A: DesignOperator, y: HVector, sigma: float, alpha: float) -> Interval:
    """Known-sigma interval for <c, beta>, via the pullback functional."""
    b = pullback_functional(A, c)
    return ci_known(b, y, A.model, A.range, sigma, alpha)


def ci_beta_unknown(c, A: DesignOperator, y: HVector, alpha: float, use_tail: bool | None = None) -> Interval:
    """Unknown-sigma (conservative) interval for <c, beta>."""
    b = pullback_functional(A, c)
    return ci_unknown(b, y, A.model, A.range, alpha, use_tail=use_tail)


def test_beta(y: HVector, A: DesignOperator, G0_columns, alpha: float) -> TestResult:
    """Test whether beta lies in the span of the given parameter vectors.

    G0_columns must span a proper nonzero subspace of the parameter space;
    the hypothesis subspace in H is spanned by the A-images of that basis.
    """
    g0 = [np.asarray(g, dtype=float) for g in G0_columns]
    if not g0:
        raise ValueError("G0 needs at least one parameter vector")
    g0_mat = np.column_stack(g0)
    if g0_mat.shape[0] != A.n_params:
        raise ValueError(f"G0 vectors must have length {A.n_params}")
    if g0_mat.shape[1] >= A.n_params:
        raise ValueError("G0 must span a proper subspace of the parameter space")
    images = A.columns @ g0_mat
    U0 = _range_subspace(A.model, images)
    return test_subspace(y, A.model, A.range, U0, alpha)
