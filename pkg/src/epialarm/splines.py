"""Natural cubic spline basis construction.

Uses the truncated-power representation: for sorted knots
``k_1 < ... < k_K`` (boundary knots included) the space of natural cubic
splines -- cubic between knots, C2 everywhere, linear beyond the boundary
knots -- has dimension K with basis

    N_1(x) = 1,  N_2(x) = x,  N_{j+2}(x) = d_j(x) - d_{K-1}(x)

where ``d_j(x) = [(x - k_j)_+^3 - (x - k_K)_+^3] / (k_K - k_j)``.
"""

from __future__ import annotations

import numpy as np


def natural_cubic_basis(x, knots) -> np.ndarray:
    """Evaluate the natural cubic spline basis at ``x``.

    Parameters
    ----------
    x : array_like
        Evaluation points.
    knots : array_like
        Strictly increasing knot vector of length >= 2, boundary knots
        included. The returned basis has one column per knot.

    Returns
    -------
    ndarray of shape (len(x), len(knots))
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    knots = np.asarray(knots, dtype=np.float64)
    if knots.ndim != 1 or knots.size < 2:
        raise ValueError("need at least two knots")
    if not np.all(np.diff(knots) > 0):
        raise ValueError("knots must be strictly increasing")
    k = knots.size
    basis = np.empty((x.size, k), dtype=np.float64)
    basis[:, 0] = 1.0
    basis[:, 1] = x
    if k > 2:
        trunc = np.clip(x[:, None] - knots[None, :], 0.0, None) ** 3
        d = (trunc[:, :-1] - trunc[:, -1:]) / (knots[-1] - knots[:-1])
        basis[:, 2:] = d[:, :-1] - d[:, -1:]
    return basis
