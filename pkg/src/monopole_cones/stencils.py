"""Five-point central finite-difference stencils on uniform sample grids.

Each function differentiates along axis 0 and returns values for the interior
points ``2 .. N-3`` (two samples are consumed at each end), so outputs of the
three orders align index-for-index and can be combined directly.
"""

from __future__ import annotations

import numpy as np


def fd1(values: np.ndarray, h: float) -> np.ndarray:
    """First derivative, O(h^4)."""
    y = np.asarray(values, dtype=float)
    return (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)


def fd2(values: np.ndarray, h: float) -> np.ndarray:
    """Second derivative, O(h^4)."""
    y = np.asarray(values, dtype=float)
    return (-y[:-4] + 16.0 * y[1:-3] - 30.0 * y[2:-2]
            + 16.0 * y[3:-1] - y[4:]) / (12.0 * h * h)


def fd3(values: np.ndarray, h: float) -> np.ndarray:
    """Third derivative, O(h^2)."""
    y = np.asarray(values, dtype=float)
    return (-y[:-4] + 2.0 * y[1:-3] - 2.0 * y[3:-1] + y[4:]) / (2.0 * h**3)


def interior(values: np.ndarray) -> np.ndarray:
    """The samples the stencils differentiate (drops two at each end)."""
    y = np.asarray(values)
    return y[2:-2]
