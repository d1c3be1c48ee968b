"""Small input checks shared by the modules."""

import numpy as np


def as_vector(x, dim=None, name="x"):
    v = np.atleast_1d(np.asarray(x, dtype=complex))
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_matrix(a, dim=None, name="matrix", dtype=complex):
    m = np.asarray(a, dtype=dtype)
    if m.ndim == 0:
        if dim is None:
            m = m.reshape(1, 1)
        else:
            m = m * np.eye(dim, dtype=dtype)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"{name} has size {m.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return float(value)


def rng_from(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
