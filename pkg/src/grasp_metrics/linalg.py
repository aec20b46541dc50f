"""Dense symmetric linear algebra used by the population metrics.

Covariance matrices of descriptor populations are symmetric and
near-positive-semidefinite but often rank-deficient (descriptor entries
can be constant across a population, and populations can be smaller than
the descriptor dimension). Operations here clamp negative rounding noise
and keep exact-zero eigendirections out of square roots, where they
would otherwise inflate O(eps) noise into O(sqrt(eps)) error.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EigenFailure, NotPsd

# Eigenvalues below this fraction of the largest one are treated as the
# exact zeros of a rank-deficient matrix blurred by rounding.
_RANK_TOL = 1e-12
_PSD_TOL = 1e-8
_SYM_RTOL = 1e-10
_REGULARIZE_EPS = 1e-6
_TERM_NOISE = 1e-6


def _check_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    if m.size and float(np.abs(m - m.T).max()) > _SYM_RTOL * scale:
        raise ValueError(f"{name} is not symmetric within tolerance")
    return m


def sym_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvector columns) such
    that V @ diag(w) @ V.T reconstructs the input.
    """
    m = _check_symmetric(m)
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"symmetric eigendecomposition failed: {exc}") from exc


def _checked_psd_eigenvalues(w: np.ndarray, name: str) -> np.ndarray:
    """Validate near-PSD and clamp negative noise eigenvalues to zero."""
    lam_max = float(w[-1]) if w.size else 0.0
    tol = _PSD_TOL * max(1.0, lam_max)
    if w.size and float(w[0]) < -tol:
        raise NotPsd(f"{name} has eigenvalue {w[0]:.3e} below -{tol:.3e}")
    return np.maximum(w, 0.0)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric square root of a near-PSD matrix.

    Negative eigenvalues within 1e-8 * max(1, lambda_max) are clamped to
    zero; anything below that raises NotPsd.
    """
    w, v = sym_eig(m)
    w = _checked_psd_eigenvalues(w, "matrix")
    root = (v * np.sqrt(w)) @ v.T
    return (root + root.T) / 2.0


def frechet_trace_term(s1: np.ndarray, s2: np.ndarray, regularize: bool = False) -> float:
    """Tr(s1) + Tr(s2) - 2 Tr((s1 s2)^(1/2)) for near-PSD s1, s2.

    The cross trace is the symmetric reformulation
    Tr((R s1 R)^(1/2)), R = psd_sqrt(s2), which shares the trace of the
    square root of the nonsymmetric product. It is evaluated through the
    congruent problem: with s1 = A A^T restricted to its numerically
    nonzero eigenspace, R s1 R and A^T s2 A share nonzero eigenvalues, so
    the trace is the sum of square roots of the eigenvalues of the small
    PSD matrix A^T s2 A. Exact-zero directions of s1 never reach the
    square root, keeping rank-deficient inputs (n < dim covariances)
    accurate.

    Results within -1e-6 of zero are clamped to 0; ``regularize`` adds
    1e-6 I to both inputs first (off by default, for pathological inputs).
    """
    s1 = _check_symmetric(s1, "s1")
    s2 = _check_symmetric(s2, "s2")
    if s1.shape != s2.shape:
        raise DimensionMismatch(f"covariance shapes differ: {s1.shape} vs {s2.shape}")
    if regularize:
        eye = _REGULARIZE_EPS * np.eye(s1.shape[0])
        s1 = s1 + eye
        s2 = s2 + eye

    w1, v1 = sym_eig(s1)
    w1 = _checked_psd_eigenvalues(w1, "s1")
    try:
        w2 = np.linalg.eigvalsh(s2)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigendecomposition of s2 failed: {exc}") from exc
    _checked_psd_eigenvalues(w2, "s2")

    keep = w1 > _RANK_TOL * float(w1[-1] if w1.size else 0.0)
    factor = v1[:, keep] * np.sqrt(w1[keep])
    mid = factor.T @ s2 @ factor
    mid = (mid + mid.T) / 2.0
    try:
        nu = np.linalg.eigvalsh(mid) if mid.size else np.empty(0)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigendecomposition of the product failed: {exc}") from exc
    cross_trace = float(np.sum(np.sqrt(np.maximum(nu, 0.0))))

    term = float(np.trace(s1) + np.trace(s2)) - 2.0 * cross_trace
    if -_TERM_NOISE <= term < 0.0:
        return 0.0
    return term
