"""A one-dimensional wave equation with delayed damping and delayed transport.

Unknowns are the velocity ``v`` on the mesh nodes and the flux ``q`` on the
cell faces (staggered grid).  The first-order system is

    d/dt M(d/dt) (v, q) + A (v, q) = 0,
    M(z) = [[1, z^{-1} M1(z)], [0, k^{-1}]],
    M1(z)(v, q) = c0 exp(-h0 z) v - c1 k^{-1} exp(-h1 z) q,
    A = [[0, div], [grad, 0]],

so the first row reads ``v' + c0 v(t - h0) - c1 k^{-1} q(t - h1) + div q = 0``
and the second ``(k^{-1} q)' + grad v = 0``.  ``c1`` maps face values to
node values; a scalar ``c1`` is expanded with the face-to-node average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla

from ._validation import as_vector, check_positive
from .errors import AlignmentError, OracleFailure, WellPosednessNotEstablishedError
from .evo_core import SpatialOperator, as_operator
from .fourier_laplace import (
    MaterialLaw,
    Spectrum,
    _bin_chunks,
    antiderivative,
    derivative_symbol,
    frequencies,
    inverse_laplace,
    laplace,
)
from .history_ivp import history_value, solve_ivp
from .weighted_time import TimeGrid, WeightedSignal, translate

BOUNDARIES = ("dirichlet", "neumann")


@dataclass(frozen=True)
class SpatialMesh:
    """Interval ``[a, b]`` with ``n_x`` velocity nodes.

    Dirichlet: the nodes are interior points of a uniform grid with
    ``n_x + 1`` cells, v vanishes at the end points and the flux lives on
    all ``n_x + 1`` faces.  Neumann: the nodes are cell centres of ``n_x``
    cells and the flux lives on the ``n_x - 1`` interior faces (zero flux
    through the boundary).
    """

    a: float = 0.0
    b: float = 1.0
    n_x: int = 16
    boundary: str = "dirichlet"

    def __post_init__(self):
        if self.n_x < 2:
            raise ValueError("n_x must be at least 2")
        if not self.b > self.a:
            raise ValueError("interval must have b > a")
        b = self.boundary.lower()
        if b not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        object.__setattr__(self, "boundary", b)

    @property
    def n_cells(self):
        return self.n_x + 1 if self.boundary == "dirichlet" else self.n_x

    @property
    def dx(self):
        return (self.b - self.a) / self.n_cells

    @property
    def n_v(self):
        return self.n_x

    @property
    def n_q(self):
        return self.n_x + 1 if self.boundary == "dirichlet" else self.n_x - 1

    @property
    def dim(self):
        return self.n_v + self.n_q

    @property
    def nodes(self):
        if self.boundary == "dirichlet":
            return self.a + self.dx * np.arange(1, self.n_x + 1)
        return self.a + self.dx * (np.arange(self.n_x) + 0.5)

    @property
    def faces(self):
        if self.boundary == "dirichlet":
            return self.a + self.dx * (np.arange(self.n_q) + 0.5)
        return self.a + self.dx * np.arange(1, self.n_x)

    def gradient(self):
        """Difference matrix nodes -> faces (grad_0 for Dirichlet, grad for Neumann)."""
        G = np.zeros((self.n_q, self.n_v))
        if self.boundary == "dirichlet":
            idx = np.arange(self.n_v)
            G[idx, idx] = 1.0
            G[idx + 1, idx] = -1.0
        else:
            idx = np.arange(self.n_q)
            G[idx, idx] = -1.0
            G[idx, idx + 1] = 1.0
        return G / self.dx

    def divergence(self):
        """The negative adjoint of :meth:`gradient`."""
        return -self.gradient().T

    def face_average(self):
        """Average of the two faces adjacent to each node (missing faces count as 0)."""
        P = np.zeros((self.n_v, self.n_q))
        for j in range(self.n_v):
            for f in ((j, j + 1) if self.boundary == "dirichlet" else (j - 1, j)):
                if 0 <= f < self.n_q:
                    P[j, f] = 0.5
        return P

    def split(self, values):
        values = np.asarray(values)
        return values[..., : self.n_v], values[..., self.n_v :]


def build_block_operator(mesh):
    """A = [[0, div], [grad, 0]] on (v, q); skew-symmetric by construction."""
    G = mesh.gradient()
    A = np.zeros((mesh.dim, mesh.dim))
    A[: mesh.n_v, mesh.n_v :] = -G.T
    A[mesh.n_v :, : mesh.n_v] = G
    return SpatialOperator(A, kind=f"wave-{mesh.boundary}")


def _spd_inverse(k, name="k"):
    k = np.asarray(k, dtype=float)
    if not np.allclose(k, k.T, atol=1e-12 * max(1.0, np.max(np.abs(k)))):
        raise ValueError(f"{name} must be symmetric")
    ev = np.linalg.eigvalsh(k)
    if ev[0] <= 0:
        raise ValueError(f"{name} must be positive definite, smallest eigenvalue {ev[0]}")
    return np.linalg.inv(k), float(ev[0]), float(ev[-1])


@dataclass
class DelayLaw:
    """Delays ``h = [h0]`` or ``[h0, h1]`` with coefficient matrices ``c`` and flux law ``k``.

    ``c[0]`` acts on v (n_v x n_v), ``c[1]`` maps faces to nodes (n_v x n_q),
    ``k`` is symmetric positive definite on the faces.  ``d`` is the
    smallest eigenvalue of ``k``.  Use :meth:`on_mesh` to expand scalars.
    """

    h: list
    c: list
    k: np.ndarray
    d: float = field(init=False)

    def __post_init__(self):
        self.h = [check_positive(float(x), "delay") for x in self.h]
        if len(self.h) != len(self.c) or not 1 <= len(self.h) <= 2:
            raise ValueError("need one delay per coefficient, one or two of them")
        self.k = np.asarray(self.k, dtype=float)
        self.c = [np.asarray(ci, dtype=float) for ci in self.c]
        self.kinv, self.d, self.k_norm = _spd_inverse(self.k)
        n_q = self.k.shape[0]
        n_v = self.c[0].shape[0]
        if self.c[0].shape != (n_v, n_v):
            raise ValueError("c0 must be square on the nodes")
        if len(self.c) == 2 and self.c[1].shape != (n_v, n_q):
            raise ValueError(f"c1 must have shape {(n_v, n_q)}")

    @classmethod
    def on_mesh(cls, mesh, h, c, k=1.0):
        """Expand scalar coefficients: c0 -> c0 I, c1 -> c1 (face average), k -> k I."""
        h = list(np.atleast_1d(h))
        c = list(c) if np.ndim(c) else [c]
        mats = []
        for i, ci in enumerate(c):
            if np.ndim(ci) == 0:
                ci = float(ci) * (np.eye(mesh.n_v) if i == 0 else mesh.face_average())
            mats.append(ci)
        k = float(k) * np.eye(mesh.n_q) if np.ndim(k) == 0 else k
        return cls(h, mats, k)

    @property
    def n_v(self):
        return self.c[0].shape[0]

    @property
    def n_q(self):
        return self.k.shape[0]

    @property
    def dim(self):
        return self.n_v + self.n_q

    @property
    def h_max(self):
        return max(self.h)

    @property
    def h_min(self):
        return min(self.h)

    def delay_blocks(self):
        """``[(h_j, B_j)]`` with the delayed term sum_j B_j x(t - h_j) of the first row."""
        m, nv = self.dim, self.n_v
        out = []
        B0 = np.zeros((m, m))
        B0[:nv, :nv] = self.c[0]
        out.append((self.h[0], B0))
        if len(self.c) == 2:
            B1 = np.zeros((m, m))
            B1[:nv, nv:] = -self.c[1] @ self.kinv
            out.append((self.h[1], B1))
        return out

    def instantaneous(self):
        """E0 = diag(1, k^{-1}), the delay-free part of M."""
        E0 = np.zeros((self.dim, self.dim))
        E0[: self.n_v, : self.n_v] = np.eye(self.n_v)
        E0[self.n_v :, self.n_v :] = self.kinv
        return E0

    def m1_norm_bound(self, rho):
        """||c0|| e^{-h0 rho} + ||c1|| ||k^{-1}|| e^{-h1 rho}."""
        b = np.linalg.norm(self.c[0], 2) * math.exp(-self.h[0] * rho)
        if len(self.c) == 2:
            b += np.linalg.norm(self.c[1], 2) / self.d * math.exp(-self.h[1] * rho)
        return float(b)

    def describe(self):
        return {
            "h": self.h,
            "c_norms": [float(np.linalg.norm(ci, 2)) for ci in self.c],
            "k_min": self.d,
            "k_max": self.k_norm,
        }


class DelayBlockLaw(MaterialLaw):
    """The block law M(z) of a :class:`DelayLaw`.

    ``symbol(s, z)`` uses the derivative symbol ``s`` for the factor z^{-1}
    and the exact ``z`` for the delays, which are exact grid shifts.  The
    time-domain form is shifts plus the cumulative trapezoidal integral.
    """

    kind = "delay-block"

    def __init__(self, law, rho0=0.0):
        super().__init__(law.dim, rho0)
        self.law = law
        self.E0 = law.instantaneous()
        self.blocks = law.delay_blocks()

    def symbol(self, s, z):
        out = np.empty((len(s), self.dim, self.dim), dtype=complex)
        out[:] = self.E0
        for h, B in self.blocks:
            out += (np.exp(-h * z) / s)[:, None, None] * B
        return out

    def delay_part(self, z):
        """N(z) = sum_j exp(-h_j z) B_j, so that s M = s E0 + N."""
        out = np.zeros((len(z), self.dim, self.dim), dtype=complex)
        for h, B in self.blocks:
            out += np.exp(-h * z)[:, None, None] * B
        return out

    def apply_time(self, f):
        delayed = np.zeros_like(f.values)
        for h, B in self.blocks:
            delayed += translate(f, -h).values @ B.T
        integrated = antiderivative(f.with_values(delayed)).values
        return f.with_values(f.values @ self.E0.T + integrated)

    def regularising_value(self):
        return self.E0.copy()

    def describe(self):
        return {"kind": self.kind, **self.law.describe()}


def delay_material_law(law, rho0=0.0):
    return DelayBlockLaw(law, rho0)


def _phase_samples(law, n_xi):
    """Frequencies covering the phases of every delay factor."""
    period = 2.0 * math.pi / law.h_min
    span = period * max(1, math.ceil(law.h_max / law.h_min))
    xi = np.linspace(-span, span, 2 * n_xi + 1)
    return xi


def accretivity_constant(law, A, rho, n_xi=32):
    """min over sampled xi of the smallest eigenvalue of Re(z M(z) + A), z = rho + i xi.

    This is the exact minimum of Re<(z M(z) + A)x, x>/|x|^2 over x at each
    sampled z; for skew A only the M part contributes.
    """
    A = as_operator(A, law.dim).matrix
    HA = 0.5 * (A + A.conj().T)
    xi = _phase_samples(law, n_xi)
    z = rho + 1j * xi
    M = DelayBlockLaw(law)
    zM = M.symbol(z, z) * z[:, None, None]
    H = 0.5 * (zM + np.conj(np.swapaxes(zM, 1, 2))) + HA
    return float(np.min(np.linalg.eigvalsh(H)[:, 0]))


def accretivity_estimate(law, A, rho_candidates=None, n_xi=32):
    """Smallest candidate rho with a positive accretivity constant, and that constant."""
    if rho_candidates is None:
        rho_candidates = np.geomspace(0.01, 100.0, 41)
    best = None
    for rho in sorted(float(r) for r in rho_candidates):
        if rho <= 0:
            continue
        c = accretivity_constant(law, A, rho, n_xi)
        if c > 0:
            best = (rho, c)
            break
    if best is None:
        raise WellPosednessNotEstablishedError(
            "no candidate rho gives Re<(zM(z) + A)x, x> >= c|x|^2 with c > 0"
        )
    return best


def default_delay_rho(law, A, margin=0.5):
    return accretivity_estimate(law, A)[0] + margin


def delay_grid(law, rho, t_final, n_points=4096, decay=30.0, past=None, dt=None, unit=None):
    """Grid with every delay on a node, reaching back ``past`` (default 2 h_max).

    Either ``n_points`` fixes the sample count (the step follows from the
    window) or ``dt`` fixes the step, rounded down so that ``h_min / dt`` is
    an integer, and the sample count follows.  ``unit`` (default h_min)
    is kept on the grid together with its multiples.
    """
    past = 2.0 * law.h_max if past is None else float(past)
    unit = law.h_min if unit is None else float(unit)
    span = past + max(t_final, decay / rho) + unit
    if dt is None:
        grid = TimeGrid.aligned(-past, span, n_points, unit=unit)
    else:
        dt = unit / math.ceil(unit / float(dt) - 1e-9)
        n = sfft.next_fast_len(math.ceil(span / dt) + 1)
        grid = TimeGrid(round(-past / dt) * dt, dt, n)
    for h in law.h:
        grid.steps(h)
    return grid


def cosine_history(grid, rho, x, width):
    """g(t) = x (1 + cos(pi t / width)) / 2 on [-width, 0], zero before.

    Vanishes with its derivative at -width and has g(0-) = x, g'(0-) = 0.
    """
    x = as_vector(x)
    t = grid.times
    prof = np.where((t >= -width) & (t <= 0), 0.5 * (1.0 + np.cos(np.pi * t / width)), 0.0)
    return WeightedSignal(grid, rho, np.outer(prof, x))


def admissible_history(law, mesh, x, rho, t_final=2.0, n_points=4096, grid=None, width=None,
                       dt=None):
    """A history in the admissible class: cosine ramp of width h_min ending at x.

    It vanishes at every -h_j, and in finite dimensions the compatibility
    condition on A g(0-) holds automatically.
    """
    if grid is None:
        grid = delay_grid(law, rho, t_final, n_points, dt=dt)
    width = law.h_min if width is None else float(width)
    return cosine_history(grid, rho, x, width)


def history_constraints(law, g, atol=1e-10, points=None):
    """Values |g(-h_j)| and whether all vanish.

    ``points`` replaces the delays as the places where g must vanish.
    """
    vals = []
    for h in (law.h if points is None else points):
        k = g.grid.index(-h)
        vals.append(float(np.linalg.norm(g.values[k])))
    scale = max(1.0, float(np.max(np.abs(g.values), initial=0.0)))
    return {"g_at_minus_h": vals, "vanishes": bool(max(vals) <= atol * scale)}


def neumann_solver(max_iter=200, tol=1e-13, threshold=0.5):
    """Frequency solver that splits off the delays: (s E0 + A + N(z)) y = b.

    With B = s E0 + A, iterate y <- B^{-1}(b - N y).  B is diagonalised
    once (E0 is positive, A skew), so every iteration is a batch of matrix
    products.  The split is used only when ||N|| ||B^{-1}|| < ``threshold``
    on every bin; otherwise ``ValueError`` is raised and the direct solve
    is the one to use.
    """

    def run(M, A, w):
        return solve_integrated_neumann(M, A, w, max_iter, tol, threshold)

    return run


def solve_integrated_neumann(M, A, w, max_iter=200, tol=1e-13, threshold=0.5):
    """Neumann-series counterpart of :func:`evosg.evo_core.solve_integrated`."""
    if not isinstance(M, DelayBlockLaw):
        raise TypeError("the Neumann split needs a delay block law")
    A = as_operator(A, M.dim).matrix
    W = laplace(w)
    xi = frequencies(w.grid)
    z = 1j * xi + w.rho
    s = derivative_symbol(w.grid, w.rho, "trapezoid")
    # E0^{-1/2} A E0^{-1/2} is skew, so it is unitarily diagonalisable
    e0 = np.diag(M.E0).real
    r = 1.0 / np.sqrt(e0)
    S = r[:, None] * A * r[None, :]
    lam, V = np.linalg.eig(S)
    VH = np.linalg.inv(V)
    if np.linalg.norm(V.conj().T @ V - np.eye(len(lam))) > 1e-8:
        raise ValueError("E0^{-1/2} A E0^{-1/2} is not normal; Neumann split unavailable")
    L = r[:, None] * V
    R = VH * r[None, :]

    def b_inv(b, sl):
        d = s[sl, None] + lam[None, :]
        return np.einsum("ij,kj->ki", L, np.einsum("ij,kj->ki", R, b) / d)

    inv_norm = np.max(1.0 / np.abs(s[:, None] + lam[None, :]), axis=1) / np.min(e0)
    n_norm = M.law.m1_norm_bound(w.rho)
    factor = float(np.max(n_norm * inv_norm))
    if factor >= threshold:
        raise ValueError(f"Neumann split not contractive (factor {factor:.3f} >= {threshold})")
    y = np.empty_like(W.values)
    for sl in _bin_chunks(len(z), M.dim):
        N = M.delay_part(z[sl])
        b = W.values[sl]
        yk = b_inv(b, sl)
        for _ in range(max_iter):
            y_new = b_inv(b - np.einsum("kij,kj->ki", N, yk), sl)
            delta = np.linalg.norm(y_new - yk) / max(np.linalg.norm(y_new), 1e-300)
            yk = y_new
            if delta < tol:
                break
        y[sl] = yk
    U = y * s[:, None]
    return inverse_laplace(Spectrum(w.grid, w.rho, U))


def simulate_delay(law, mesh, history, t_final=2.0, rho=None, method="direct"):
    """Solve the delay wave system with the given history; returns u on [0, t_final].

    ``rho`` defaults to the history's weight.  ``method='neumann'`` uses the
    series solver of :func:`solve_integrated_neumann`.
    """
    A = build_block_operator(mesh)
    if law.dim != mesh.dim:
        raise ValueError(f"law has dimension {law.dim}, mesh needs {mesh.dim}")
    rho = history.rho if rho is None else float(rho)
    M = delay_material_law(law)
    for h in law.h:
        history.grid.steps(h)
    if method == "direct":
        solver = None
    elif method == "neumann":
        solver = neumann_solver()
    else:
        raise ValueError(f"unknown method {method!r}")
    sol = solve_ivp(M, A, history, rho, solver=solver)
    return sol.u.restrict(0.0, t_final), sol


def march_delay_system(E0, A, delays, x0, past, dt, n_steps, conserve_tol=None):
    """Implicit midpoint for E0 x' + A x + sum_j B_j x(t - h_j) = 0.

    ``delays`` is a list of ``(h_j, B_j)`` with ``h_j`` a positive multiple of
    ``dt``; ``past(k)`` returns x at time ``k dt`` for ``k < 0``.  Returns the
    array of states at ``0, dt, ..., n_steps dt``.  With ``conserve_tol`` the
    E0-energy drift per step is checked, which is only meaningful for skew A
    and no delays.
    """
    E0 = np.asarray(E0, dtype=complex)
    A = np.asarray(A, dtype=complex)
    m = E0.shape[0]
    lags = []
    for h, B in delays:
        k = h / dt
        if abs(k - round(k)) > 1e-9 * max(1.0, k) or round(k) < 1:
            raise AlignmentError(f"delay {h} is not a positive multiple of dt = {dt}")
        lags.append((int(round(k)), np.asarray(B, dtype=complex)))
    lhs = sla.lu_factor(E0 / dt + 0.5 * A)
    rhs_mat = E0 / dt - 0.5 * A
    x = np.zeros((n_steps + 1, m), dtype=complex)
    x[0] = as_vector(x0, m, "x0")

    def at(k):
        return x[k] if k >= 0 else past(k)

    def delayed(n):
        out = np.zeros(m, dtype=complex)
        for lag, B in lags:
            out += B @ at(n - lag)
        return out

    d_prev = delayed(0)
    for n in range(n_steps):
        d_next = delayed(n + 1)
        x[n + 1] = sla.lu_solve(lhs, rhs_mat @ x[n] - 0.5 * (d_prev + d_next))
        d_prev = d_next
        if not np.all(np.isfinite(x[n + 1])):
            raise OracleFailure(f"non-finite state at step {n + 1}")
        if conserve_tol is not None:
            e0 = np.vdot(x[n], E0 @ x[n]).real
            e1 = np.vdot(x[n + 1], E0 @ x[n + 1]).real
            if abs(e1 - e0) > conserve_tol * max(e0, 1e-300):
                raise OracleFailure(f"energy drift {abs(e1 - e0) / e0:.2e} at step {n + 1}")
    return x


def method_of_steps_oracle(law, mesh, history, t_final=2.0, dt=None):
    """Independent time-marching reference for :func:`simulate_delay`.

    Marches the delay system from x(0) = g(0-) with the delayed terms read
    from the history (t < 0) or the stored trajectory.  Returns a signal on
    the grid ``0, dt, ..., t_final`` with the history's weight.
    """
    A = build_block_operator(mesh).matrix
    dt = history.grid.dt if dt is None else float(dt)
    n_steps = int(round(t_final / dt))
    if abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise AlignmentError(f"t_final = {t_final} is not a multiple of dt = {dt}")
    ratio = dt / history.grid.dt
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise AlignmentError("oracle step must be a multiple of the history grid step")
    stride = int(round(ratio))
    x0 = history_value(history)
    k0 = history.grid.zero_index

    def past(k):
        j = k0 + k * stride
        if j < 0:
            return np.zeros(law.dim, dtype=complex)
        return history.values[j]

    delays = law.delay_blocks()
    no_delay = all(np.max(np.abs(B), initial=0.0) == 0 for _, B in delays)
    x = march_delay_system(
        law.instantaneous(), A, delays, x0, past, dt, n_steps,
        conserve_tol=1e-10 if no_delay else None,
    )
    grid = TimeGrid(0.0, dt, n_steps + 1)
    return WeightedSignal(grid, history.rho, x)


def relative_l2_error(u, reference):
    """Relative discrete L2 difference of two signals sampled at the same times."""
    t_ref = reference.times
    idx = np.array([u.grid.index(t) for t in t_ref])
    diff = u.values[idx] - reference.values
    return float(np.linalg.norm(diff) / max(np.linalg.norm(reference.values), 1e-300))


def delay_report(law, mesh, history, sol, rho, rho0, c):
    A = build_block_operator(mesh)
    cons = history_constraints(law, history)
    return {
        "rho": rho,
        "accretivity": {"rho0": rho0, "c": c},
        "skew_residual": A.skew_residual(),
        "history": cons,
        "his_member": sol.his_member,
        "diagnostics": sol.diagnostics,
        "law": law.describe(),
    }
