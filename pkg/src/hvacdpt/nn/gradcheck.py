"""Central finite-difference gradient checking."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def numeric_gradient(f, t: Tensor, eps: float) -> np.ndarray:
    """Central differences of scalar-valued f with respect to t.data."""
    grad = np.zeros_like(t.data, dtype=np.float64)
    flat = t.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f().data)
        flat[i] = orig - eps
        lo = float(f().data)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad


def check_gradients(f, tensors: dict[str, Tensor], eps: float, tol: float) -> dict[str, float]:
    """Compare analytic and numeric gradients of scalar loss f().

    Returns the worst normalized error per tensor and raises AssertionError
    when any exceeds tol. Error is |a - n| / max(1, |a|, |n|) elementwise.
    """
    for t in tensors.values():
        t.grad = None
    loss = f()
    loss.backward()
    errors: dict[str, float] = {}
    for name, t in tensors.items():
        analytic = np.zeros_like(t.data, dtype=np.float64) if t.grad is None else t.grad.astype(np.float64)
        numeric = numeric_gradient(f, t, eps)
        denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
        err = float(np.max(np.abs(analytic - numeric) / denom))
        errors[name] = err
        assert err < tol, f"gradient mismatch for '{name}': {err:.3e} >= {tol:.0e}"
    return errors
