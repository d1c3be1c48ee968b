"""Sampled signals in exponentially weighted L2 spaces.

A signal is a uniform sample of a function t -> H = C^m together with the
weight rho of the norm

    ||f||_rho^2 = sum_k ||f(t_k)||^2 exp(-2 rho t_k) dt.

The finite window stands in for the real line.  All objects handled by the
library decay in the weighted norm, so the window only has to be long enough
that the weighted tail is negligible (see :func:`window_for`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, CompatibilityError, NoLimitError

_ALIGN_TOL = 1e-7


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes ``t_k = t_start + k*dt`` for ``k = 0..n_points-1``."""

    t_start: float
    dt: float
    n_points: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))
        if self.t_start < 0 < self.t_end:
            k = -self.t_start / self.dt
            if abs(k - round(k)) > _ALIGN_TOL * max(1.0, abs(k)):
                raise AlignmentError("grid spans t=0 but 0 is not a node")

    @classmethod
    def covering(cls, t_min, t_max, n_points):
        """Grid of ``n_points`` nodes with period ``t_max - t_min`` and 0 on a node."""
        if t_max <= t_min:
            raise ValueError("t_max must exceed t_min")
        dt = (t_max - t_min) / n_points
        k0 = math.ceil(-t_min / dt - 1e-9) if t_min < 0 else -math.floor(t_min / dt + 1e-9)
        return cls(-k0 * dt, dt, n_points)

    @classmethod
    def from_step(cls, dt, t_min, t_max):
        """Grid with the given step, 0 on a node, covering at least [t_min, t_max)."""
        k0 = math.ceil(-t_min / dt - 1e-9)
        n = math.ceil((t_max - t_min) / dt - 1e-9)
        return cls(-k0 * dt, dt, max(n, 2))

    @classmethod
    def aligned(cls, t_min, span_min, n_points, unit=1.0):
        """Grid starting at ``t_min`` with ``unit/dt`` an integer and period >= ``span_min``.

        Keeps every multiple of ``unit`` on a node (``t_min`` should be one).
        """
        per_unit = math.floor(n_points * unit / span_min)
        if per_unit < 1:
            raise ValueError("n_points too small for the requested span")
        dt = unit / per_unit
        return cls(round(t_min / dt) * dt, dt, n_points)

    @property
    def t_end(self):
        return self.t_start + (self.n_points - 1) * self.dt

    @property
    def period(self):
        return self.n_points * self.dt

    @property
    def times(self):
        return self.t_start + self.dt * np.arange(self.n_points)

    def index(self, t):
        """Index of the node at time ``t``; raises if ``t`` is off-grid."""
        k = (t - self.t_start) / self.dt
        kr = int(round(k))
        if abs(k - kr) > _ALIGN_TOL * max(1.0, abs(k)):
            raise AlignmentError(f"t={t} is not a grid node (dt={self.dt})")
        if not 0 <= kr < self.n_points:
            raise AlignmentError(f"t={t} lies outside the window")
        return kr

    def steps(self, t):
        """``t / dt`` as an integer; raises if ``t`` is not a multiple of dt."""
        k = t / self.dt
        kr = int(round(k))
        if abs(k - kr) > _ALIGN_TOL * max(1.0, abs(k)):
            raise AlignmentError(f"shift {t} is not a multiple of dt={self.dt}")
        return kr

    @property
    def zero_index(self):
        return self.index(0.0)

    def matches(self, other):
        return (
            self.n_points == other.n_points
            and math.isclose(self.dt, other.dt, rel_tol=1e-12)
            and abs(self.t_start - other.t_start) <= 1e-9 * self.dt
        )


def window_for(rho, t_support, t_final, n_points, growth=0.0, tol=1e-10, pad=0.0):
    """Grid whose weighted tail beyond the data is below ``tol``.

    ``t_support`` is where the data starts, ``t_final`` the last time of
    interest and ``growth`` an exponential growth rate of the solution.
    The window is extended to the right until ``exp(-(rho-growth) L)`` drops
    below ``tol``.
    """
    if rho <= growth:
        raise ValueError("rho must exceed the growth rate")
    t_min = t_support - pad
    t_max = max(t_final + pad, t_min + math.log(1.0 / tol) / (rho - growth))
    return TimeGrid.covering(t_min, t_max, n_points)


class WeightedSignal:
    """Samples of an H-valued function plus the weight of its norm."""

    __slots__ = ("grid", "rho", "values")

    def __init__(self, grid, rho, values):
        vals = np.asarray(values, dtype=complex)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.ndim != 2 or vals.shape[0] != grid.n_points:
            raise ValueError(
                f"values must have shape ({grid.n_points}, m), got {vals.shape}"
            )
        self.grid = grid
        self.rho = float(rho)
        self.values = vals

    @classmethod
    def from_function(cls, grid, rho, fn):
        """Sample ``fn(times)``; ``fn`` returns shape (n,) or (n, m)."""
        return cls(grid, rho, fn(grid.times))

    @classmethod
    def zeros(cls, grid, rho, dim):
        return cls(grid, rho, np.zeros((grid.n_points, dim), dtype=complex))

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def times(self):
        return self.grid.times

    def weights(self, rho=None):
        """``exp(-rho t_k)`` (the square root of the quadrature weight, without dt)."""
        r = self.rho if rho is None else rho
        return np.exp(-r * self.grid.times)

    def norm(self):
        return weighted_norm(self)

    def with_values(self, values):
        return WeightedSignal(self.grid, self.rho, values)

    def with_rho(self, rho):
        return WeightedSignal(self.grid, rho, self.values)

    def copy(self):
        return WeightedSignal(self.grid, self.rho, self.values.copy())

    def at(self, t):
        """Sample at the node ``t``."""
        return self.values[self.grid.index(t)].copy()

    def restrict(self, t_min=-np.inf, t_max=np.inf):
        """Zero the samples outside ``[t_min, t_max]``."""
        t = self.grid.times
        keep = (t >= t_min - 1e-9 * self.grid.dt) & (t <= t_max + 1e-9 * self.grid.dt)
        return self.with_values(np.where(keep[:, None], self.values, 0.0))

    def extend_to(self, grid):
        """Zero-extend onto a larger grid with the same step and aligned nodes."""
        if not math.isclose(grid.dt, self.grid.dt, rel_tol=1e-12):
            raise CompatibilityError("extension needs the same step")
        off = grid.steps(self.grid.t_start - grid.t_start)
        out = np.zeros((grid.n_points, self.dim), dtype=complex)
        lo, hi = max(off, 0), min(off + self.grid.n_points, grid.n_points)
        out[lo:hi] = self.values[lo - off : hi - off]
        return WeightedSignal(grid, self.rho, out)

    def _check(self, other):
        check_compatible(self, other)

    def __add__(self, other):
        self._check(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self.with_values(self.values - other.values)

    def __neg__(self):
        return self.with_values(-self.values)

    def __mul__(self, c):
        if isinstance(c, WeightedSignal):
            return NotImplemented
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __repr__(self):
        g = self.grid
        return (
            f"WeightedSignal(n={g.n_points}, dt={g.dt:g}, t0={g.t_start:g}, "
            f"rho={self.rho:g}, dim={self.dim})"
        )


def check_compatible(f, g):
    if not f.grid.matches(g.grid):
        raise CompatibilityError("signals live on different grids")
    if not math.isclose(f.rho, g.rho, rel_tol=1e-14, abs_tol=1e-14):
        raise CompatibilityError(f"weights differ: {f.rho} vs {g.rho}")
    if f.dim != g.dim:
        raise CompatibilityError(f"dimensions differ: {f.dim} vs {g.dim}")


def weighted_inner(f, g):
    """sum_k <f(t_k), g(t_k)> exp(-2 rho t_k) dt, conjugate-linear in ``f``."""
    check_compatible(f, g)
    w = np.exp(-2.0 * f.rho * f.grid.times) * f.grid.dt
    return complex(np.sum(w * np.sum(np.conj(f.values) * g.values, axis=1)))


def weighted_norm(f, rho=None):
    r = f.rho if rho is None else rho
    w = np.exp(-r * f.grid.times)
    return float(np.sqrt(f.grid.dt) * np.linalg.norm(f.values * w[:, None]))


def translate(f, t):
    """``(tau_t f)(s) = f(s + t)``; samples shifted in from outside are zero."""
    k = f.grid.steps(t)
    out = np.zeros_like(f.values)
    n = f.grid.n_points
    if k >= 0:
        if k < n:
            out[: n - k] = f.values[k:]
    else:
        if -k < n:
            out[-k:] = f.values[: n + k]
    return f.with_values(out)


def one_sided_limit(f, t, side, rtol=1e-4, full_output=False):
    """Limit of ``f`` at the node ``t`` from the left or the right.

    Uses the three nearest samples strictly on the requested side and the
    Richardson table E1 = f1, E2 = 2 f1 - f2, E3 = 3 f1 - 3 f2 + f3 (constant,
    linear and quadratic extrapolation).  If E3 and E2 differ by more than
    ``rtol`` relative to the local magnitude the samples are oscillating or
    jumping and :class:`NoLimitError` is raised.  The local magnitude is
    floored at 1e-3 of the largest sample, so a limit of zero approached
    polynomially (a delayed onset, say) is not mistaken for oscillation.  With ``full_output`` the
    pair ``(value, spread)`` is returned, ``spread = ||E3 - E2||``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    k = f.grid.index(t)
    step = 1 if side == "right" else -1
    idx = [k + step * j for j in (1, 2, 3)]
    if min(idx) < 0 or max(idx) >= f.grid.n_points:
        raise NoLimitError(f"not enough samples on the {side} of t={t}")
    f1, f2, f3 = (f.values[i] for i in idx)
    e2 = 2.0 * f1 - f2
    e3 = 3.0 * f1 - 3.0 * f2 + f3
    spread = float(np.linalg.norm(e3 - e2))
    scale = max(
        np.linalg.norm(e3),
        np.linalg.norm(f1),
        np.linalg.norm(f2),
        np.linalg.norm(f3),
        1e-3 * float(np.max(np.abs(f.values), initial=0.0)),
    )
    if spread > rtol * scale:
        raise NoLimitError(
            f"{side} limit at t={t} did not settle (spread {spread:.3e}, scale {scale:.3e})"
        )
    return (e3, spread) if full_output else e3


def cweighted_norm(f, omega):
    """max over nodes t_k >= 0 of ||f(t_k)|| exp(-omega t_k)."""
    t = f.grid.times
    mask = t >= -1e-9 * f.grid.dt
    if not np.any(mask):
        return 0.0
    mags = np.linalg.norm(f.values[mask], axis=1) * np.exp(-omega * t[mask])
    return float(np.max(mags))


def heaviside(grid, s=0.0, at_node=1.0):
    """Samples of chi_{t >= s}; the node at ``s`` gets ``at_node``.

    ``at_node=1`` is the right-continuous convention, ``0.5`` the mean of
    the one-sided limits (the value the trapezoidal calculus integrates
    correctly).
    """
    t = grid.times
    out = (t > s).astype(float)
    out[np.abs(t - s) <= 1e-9 * grid.dt] = at_node
    return out


def indicator(grid, a, b, convention="right"):
    """Samples of chi_{[a, b)}.

    ``convention='right'`` gives 1 at ``a`` and 0 at ``b``; ``'mean'`` puts
    1/2 on both jump nodes.
    """
    v = 1.0 if convention == "right" else 0.5
    return heaviside(grid, a, v) - heaviside(grid, b, v if convention == "mean" else 1.0)


def write_signal_csv(f, path):
    """Write ``t,re_0,im_0,...`` rows with round-trip precision."""
    header = ["t"]
    for j in range(f.dim):
        header += [f"re_{j}", f"im_{j}"]
    t = f.grid.times
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(f.grid.n_points):
            row = [repr(float(t[k]))]
            for z in f.values[k]:
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)


def read_signal_csv(path, rho):
    """Inverse of :func:`write_signal_csv`; the grid is rebuilt from the t column."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "t" or (len(rows[0]) - 1) % 2:
        raise ValueError(f"{path}: expected header t,re_0,im_0,...")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two rows")
    t = data[:, 0]
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if np.max(np.abs(np.diff(t) - dt)) > 1e-6 * dt:
        raise ValueError(f"{path}: time column is not uniform")
    if t[0] < 0 < t[-1]:
        k0 = round(-t[0] / dt)
        t0 = -k0 * dt
    else:
        t0 = t[0]
    grid = TimeGrid(t0, dt, len(t))
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return WeightedSignal(grid, rho, vals)
