"""Softmax parametrization of the probability simplex.

Allocations and logit vectors are plain 1-D float arrays. ``as_allocation``
and ``as_logits`` validate them and return read-only copies so the values
can be shared freely.
"""

import numpy as np

from .exceptions import InvalidArgumentError

SIMPLEX_TOL = 1e-12


def _frozen(x):
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


def as_allocation(weights, tol=SIMPLEX_TOL):
    """Validate a point of the unit simplex.

    Entries may undershoot zero or miss a unit sum by at most ``tol``; such
    round-off is clipped and renormalized. Anything further off raises.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvalidArgumentError(f"allocation must be a non-empty vector, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidArgumentError("allocation has non-finite entries")
    if w.min() < -tol:
        raise InvalidArgumentError(f"allocation has negative entry {w.min():.3g}")
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise InvalidArgumentError(f"allocation sums to {total!r}, not 1")
    w = np.clip(w, 0.0, None)
    return _frozen(w / w.sum())


def as_logits(H):
    H = np.asarray(H, dtype=float)
    if H.ndim != 1 or H.size == 0:
        raise InvalidArgumentError(f"logits must be a non-empty vector, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise InvalidArgumentError("logits must be finite")
    return H


def uniform(n_assets):
    return _frozen(np.full(n_assets, 1.0 / n_assets))


def softmax(H):
    """Map logits to the interior of the simplex (max-shifted for stability)."""
    H = as_logits(H)
    e = np.exp(H - H.max())
    return e / e.sum()


def jacobian_apply(pi, v):
    """Apply ``diag(pi) - pi pi^T`` to ``v`` without forming the matrix.

    This is the Jacobian of the softmax at the logits producing ``pi``; the
    result always sums to zero.
    """
    pi = np.asarray(pi, dtype=float)
    v = np.asarray(v, dtype=float)
    if pi.shape != v.shape or pi.ndim != 1:
        raise InvalidArgumentError(f"dimension mismatch: pi {pi.shape}, v {v.shape}")
    return pi * (v - pi @ v)


def leveraged_allocation(H, lam):
    """Softmax stretched by ``1 + lam`` around the uniform point.

    Entries still sum to one but may go as low as ``-lam / K``, allowing a
    bounded amount of short selling.
    """
    if lam < 0:
        raise InvalidArgumentError(f"lambda must be nonnegative, got {lam}")
    pi = softmax(H)
    return (1.0 + lam) * pi - lam / pi.size


def is_interior(pi, eps):
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    return bool(np.all(np.asarray(pi) >= eps))
