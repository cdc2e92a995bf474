"""Dense polynomial least squares on a Vandermonde basis.

This is the numerical core of the streaming uncertainty fitter: build
``X_ij = x_i**j``, solve the (optionally ridge-regularized) normal
equations with a symmetric positive-definite factorization, and evaluate
the resulting polynomial in Horner order.  Degrees stay small (<= ~5), so
double precision with a tiny ridge is adequate.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DegenerateFitError, InsufficientDataError


def vandermonde(xs: np.ndarray, degree: int) -> np.ndarray:
    """Vandermonde matrix with entry (i, j) equal to ``xs[i]**j``.

    Column 0 is all ones; shape is ``(len(xs), degree + 1)``.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size < 1:
        raise ValueError("xs must be a non-empty 1-D array")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if not np.all(np.isfinite(xs)):
        raise ValueError("xs must be finite")
    return np.vander(xs, N=degree + 1, increasing=True)


def least_squares_fit(
    xs: np.ndarray,
    ys: np.ndarray,
    degree: int,
    ridge: float = 0.0,
) -> np.ndarray:
    """Fit polynomial coefficients minimizing ``||X w - y||^2 + ridge * ||w||^2``.

    Returns coefficients ``w`` of length ``degree + 1`` (index k is the
    coefficient of ``x**k``).

    Raises:
        InsufficientDataError: fewer than ``degree + 1`` points with ridge=0.
        DegenerateFitError: singular normal matrix with ridge=0 (e.g.
            repeated xs); callers may retry with ridge > 0.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("xs and ys must be finite")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    if ridge == 0.0 and xs.size < degree + 1:
        raise InsufficientDataError(
            f"need at least {degree + 1} points for an exact degree-{degree} fit, got {xs.size}"
        )
    X = vandermonde(xs, degree)
    gram = X.T @ X
    if ridge > 0.0:
        gram = gram + ridge * np.eye(degree + 1)
    rhs = X.T @ ys
    try:
        coeffs = cho_solve(cho_factor(gram), rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFitError(f"singular normal equations: {exc}") from exc
    if not np.all(np.isfinite(coeffs)):
        raise DegenerateFitError("non-finite coefficients from normal equations")
    return coeffs


def poly_eval(coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate ``sum_k coeffs[k] * x**k`` in Horner order.

    ``x`` may be a scalar or an array; the result matches its shape.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise ValueError("coeffs must be a non-empty 1-D array")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    out = np.full_like(x, coeffs[-1], dtype=float)
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out if out.ndim else float(out)
