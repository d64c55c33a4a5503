"""Input validation helpers shared across the package."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

# Entrywise tolerance for closed-form complex algebra at these dimensions.
ATOL = 1e-12


def check_finite_complex(x, name: str = "array") -> np.ndarray:
    arr = np.array(x, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_square(x, dim: int, name: str = "operator") -> np.ndarray:
    arr = check_finite_complex(x, name)
    if arr.shape != (dim, dim):
        raise ValueError(f"{name} must have shape ({dim}, {dim}), got {arr.shape}")
    return arr


def check_state(x, dim: int, name: str = "state", atol: float = ATOL) -> np.ndarray:
    arr = check_finite_complex(x, name)
    if arr.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > atol:
        raise ValueError(f"{name} must be normalized, got norm {norm!r}")
    return arr


def check_outcomes(x, name: str = "outcomes") -> np.ndarray:
    """Return an int8 array, rejecting anything that is not exactly +1 or -1."""
    arr = np.asarray(x)
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise ValueError(f"{name} must contain only +1 and -1")
    return arr.astype(np.int8)


def check_outcome_pairs(X) -> np.ndarray:
    """Validate an ``(n, 2)`` array of (alice, bob) outcome pairs."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (alice, bob), got {X.shape[1]}")
    return check_outcomes(X, "outcome pairs")


def check_probability(p: float, name: str = "probability", atol: float = ATOL) -> None:
    if not (-atol <= p <= 1 + atol):
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
