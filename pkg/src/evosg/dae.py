"""Differential-algebraic systems E u' + A u = 0 given by a matrix pencil.

The evolutionary framework treats the pencil with the constant material law
M(z) = E.  This module adds the finite-dimensional pieces: the space of
consistent initial values, the resolvent-power (Hille-Yosida type)
condition, the semigroup built from tent histories, and an independent
reference solver based on the generalized Schur (QZ) decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._validation import as_matrix, as_vector, rng_from
from .errors import InadmissibleHistoryError, OracleUnavailableError
from .fourier_laplace import ConstantLaw
from .history_ivp import fit_growth_bound, solve_ivp, tent_history
from .weighted_time import TimeGrid, WeightedSignal, heaviside

_RANK_TOL = 1e-10


@dataclass
class MatrixPencil:
    E: np.ndarray
    A: np.ndarray
    _regular: bool | None = field(default=None, repr=False)

    def __post_init__(self):
        self.E = as_matrix(self.E, name="E")
        self.A = as_matrix(self.A, dim=self.E.shape[0], name="A")

    @property
    def dim(self):
        return self.E.shape[0]

    @property
    def regular(self):
        """det(lambda E + A) is not identically zero (checked via QZ)."""
        if self._regular is None:
            S, T, *_ = sla.qz(-self.A, self.E, output="complex")
            alpha, beta = np.diag(S), np.diag(T)
            scale = max(np.linalg.norm(self.A), np.linalg.norm(self.E), 1e-300)
            tiny = 1e-10 * scale
            self._regular = not bool(np.any((np.abs(alpha) < tiny) & (np.abs(beta) < tiny)))
        return self._regular

    def law(self):
        return ConstantLaw(self.E)

    def finite_eigenvalues(self):
        """Roots lambda of det(lambda E + A) = 0."""
        S, T, *_ = sla.qz(-self.A, self.E, output="complex")
        alpha, beta = np.diag(S), np.diag(T)
        keep = np.abs(beta) > 1e-10 * max(np.linalg.norm(self.E), 1e-300)
        return alpha[keep] / beta[keep]

    def spectral_bound(self):
        """max Re lambda over the finite generalized eigenvalues (growth rate of solutions)."""
        ev = self.finite_eigenvalues()
        return float(np.max(ev.real)) if ev.size else -np.inf


@dataclass
class IvSpaceBasis:
    basis: np.ndarray
    residual: float

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.conj().T

    def contains(self, x, tol=1e-8):
        x = as_vector(x)
        r = x - self.projector() @ x
        return float(np.linalg.norm(r)) <= tol * max(1.0, float(np.linalg.norm(x)))


def _range_basis(E):
    U, s, _ = np.linalg.svd(E)
    r = int(np.sum(s > _RANK_TOL * max(s[0] if s.size else 0.0, 1e-300)))
    return U[:, :r]


def iv_space(p):
    """Orthonormal basis of U = {x : A x in ran E}."""
    Ur = _range_basis(p.E)
    C = p.A - Ur @ (Ur.conj().T @ p.A)
    if np.allclose(C, 0.0, atol=_RANK_TOL * max(1.0, np.linalg.norm(p.A))):
        basis = np.eye(p.dim, dtype=complex)
    else:
        basis = sla.null_space(C, rcond=_RANK_TOL)
    res = 0.0
    for j in range(basis.shape[1]):
        y, *_ = np.linalg.lstsq(p.E, p.A @ basis[:, j], rcond=None)
        res = max(res, float(np.linalg.norm(p.E @ y - p.A @ basis[:, j])))
    return IvSpaceBasis(basis, res)


def principal_angles(U, V):
    if U.shape[1] == 0 and V.shape[1] == 0:
        return np.zeros(0)
    if U.shape[1] != V.shape[1]:
        return np.array([np.pi / 2])
    return sla.subspace_angles(U, V)


def _pencil_powers(p, lam, n_max):
    """Spectral norms of ((lam E + A)^{-1} E)^n for n = 1..n_max (inf if singular)."""
    B = lam * p.E + p.A
    if np.linalg.cond(B) > 1e12:
        return np.full(n_max, np.inf)
    RE = np.linalg.solve(B, p.E)
    out = np.empty(n_max)
    P = np.eye(p.dim, dtype=complex)
    for n in range(n_max):
        P = RE @ P
        out[n] = np.linalg.norm(P, 2)
    return out


@dataclass
class HyConditionReport:
    passed: bool
    M: float
    omega: float
    witness: dict
    omega_grid: list
    delta_grid: list
    n_max: int

    def as_dict(self):
        return {
            "pass": self.passed,
            "M": self.M,
            "omega": self.omega,
            "witness": self.witness,
            "omega_grid": self.omega_grid,
            "delta_grid": self.delta_grid,
            "n_max": self.n_max,
        }


def hy_condition(p, lambda_grid=None, n_max=32, omega_grid=None, delta_grid=None, tol=0.05):
    """Fit (M, omega) in ||((l E + A)^{-1} E)^n|| <= M / (l - omega)^n.

    For each candidate omega the points ``l = omega + delta`` (``delta``
    on a log grid, plus any explicit ``lambda_grid`` points right of omega)
    are scanned and ``M(omega) = max(1, sup (l - omega)^n ||...||)``.  The
    fitted omega is the smallest one for which the bound does not grow with
    n (see :func:`evosg.history_ivp.fit_growth_bound`).

    No omega below the spectral bound s of the pencil can satisfy the
    condition, so candidates left of s are discarded.  ``tol`` absorbs the
    slow O(1/n) rise of the powers towards sup_t ||exp(-omega t) S(t)||,
    which is not growth in the exponential sense.
    """
    if delta_grid is None:
        delta_grid = np.geomspace(1e-3, 1e3, 61)
    delta_grid = np.asarray(delta_grid, dtype=float)
    extra = np.array([] if lambda_grid is None else lambda_grid, dtype=float)
    s = p.spectral_bound()
    s = -np.inf if not np.isfinite(s) else s
    if omega_grid is None:
        base = 0.0 if not np.isfinite(s) else s
        width = max(1.0, 0.5 * float(np.linalg.norm(p.A, 2)) / max(1e-12, _min_sv(p.E)))
        omega_grid = base + np.linspace(0.0, width, 81)
    omega_grid = np.asarray(omega_grid, dtype=float)
    if np.isfinite(s):
        omega_grid = omega_grid[omega_grid >= s - 1e-12 * max(1.0, abs(s))]
    if omega_grid.size == 0:
        return HyConditionReport(False, float("inf"), float("nan"), {}, [],
                                 delta_grid.tolist(), n_max)
    cache = {}

    def powers(lam):
        key = float(lam)
        if key not in cache:
            cache[key] = _pencil_powers(p, lam, n_max)
        return cache[key]

    ns = np.arange(1, n_max + 1)

    def table(om):
        lams = np.concatenate([om + delta_grid, extra[extra > om]])
        rows = []
        for lam in lams:
            nrm = powers(lam)
            with np.errstate(over="ignore", invalid="ignore"):
                rows.append(np.where(np.isfinite(nrm), (lam - om) ** ns * nrm, np.inf))
        return lams, np.array(rows)

    def ratios(om):
        return np.max(table(om)[1], axis=0)

    omega, sup = fit_growth_bound(omega_grid, ratios, n_max - 1, tol)
    if omega is None:
        return HyConditionReport(False, float("inf"), float("nan"), {}, omega_grid.tolist(),
                                 delta_grid.tolist(), n_max)
    lams, tab = table(omega)
    i, j = np.unravel_index(int(np.argmax(tab)), tab.shape)
    return HyConditionReport(
        True,
        max(1.0, float(sup)),
        float(omega),
        {"lambda": float(lams[i]), "n": int(ns[j]), "value": float(tab[i, j])},
        omega_grid.tolist(),
        delta_grid.tolist(),
        n_max,
    )


def _min_sv(E):
    s = np.linalg.svd(E, compute_uv=False)
    pos = s[s > _RANK_TOL * max(s[0], 1e-300)]
    return float(pos[-1]) if pos.size else 1.0


@dataclass
class WeierstrassSolution:
    times: np.ndarray
    values: np.ndarray
    consistent: bool
    consistency_basis: np.ndarray
    index: int


def weierstrass_solve(p, x0, t_grid, tol=1e-8):
    """Reference trajectory of E u' + A u = 0, u(0) = x0, via ordered QZ.

    The finite generalized eigenvalues are moved to the leading block; the
    solution lives in the corresponding deflating subspace and is advanced
    there by a matrix exponential.  ``consistent`` reports whether x0 lies in
    that subspace; an inconsistent x0 is projected along the infinite part.
    """
    if not p.regular:
        raise OracleUnavailableError("pencil is singular (det(lambda E + A) vanishes identically)")
    x0 = as_vector(x0, p.dim, "x0")
    scale = max(np.linalg.norm(p.E), 1e-300)

    def finite(alpha, beta):
        return np.abs(beta) > 1e-10 * scale

    S, T, alpha, beta, Q, Z = sla.ordqz(-p.A, p.E, sort=finite, output="complex")
    k = int(np.sum(finite(alpha, beta)))
    Zf = Z[:, :k]
    y0 = Z.conj().T @ x0
    consistent = bool(np.linalg.norm(y0[k:]) <= tol * max(1.0, np.linalg.norm(x0)))
    index = 0
    if k < p.dim:
        # nilpotency index of N = S22^{-1} T22 on the infinite block
        N = np.linalg.solve(S[k:, k:], T[k:, k:])
        P = N.copy()
        index = 1
        while np.linalg.norm(P) > 1e-10 * max(1.0, np.linalg.norm(N)) and index < p.dim:
            P = N @ P
            index += 1
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.zeros((len(t_grid), p.dim), dtype=complex)
    if k:
        # on the deflating subspace T11 y1' = S11 y1, and y2 = 0
        G = np.linalg.solve(T[:k, :k], S[:k, :k])
        for i, t in enumerate(t_grid):
            out[i] = Zf @ (sla.expm(t * G) @ y0[:k])
    return WeierstrassSolution(t_grid, out, consistent, Zf, index)


def consistency_angle(p):
    """Largest principal angle between iv_space and the QZ consistency subspace."""
    U = iv_space(p).basis
    W = weierstrass_solve(p, np.zeros(p.dim), [0.0]).consistency_basis
    ang = principal_angles(U, W)
    return float(np.max(ang)) if ang.size else 0.0


def default_dae_rho(p, margin=2.0):
    s = p.spectral_bound()
    return max(0.0, s if np.isfinite(s) else 0.0) + margin


def dae_grid(rho, t_final, width=1.0, n_points=1 << 15, decay=30.0, growth=0.0):
    """Window from -2 width past ``t_final`` until exp(-(rho - growth) L) < exp(-decay).

    The step divides ``width`` so that the tent kink sits on a node.
    """
    t_min = -2.0 * width
    span = max(t_final, decay / max(rho - growth, 1e-3)) - t_min
    return TimeGrid.aligned(t_min, span, n_points, unit=width)


def dae_trajectory(p, x, rho=None, grid=None, t_final=2.0, width=1.0, history="tent"):
    """Solution u of the pencil problem started from x.

    ``history='tent'`` runs the history machinery on the tent f_x,
    ``history='zero'`` evaluates T_1(t)(x, 0) by the Dirac-atom route
    (source E x delta_0).  Both must agree for x in the closure of U.
    """
    x = as_vector(x, p.dim, "x")
    rho = default_dae_rho(p) if rho is None else rho
    if grid is None:
        growth = max(0.0, p.spectral_bound())
        # trapezoid error grows like dt^2 growth^3 t; refine fast-growing modes
        n_points = 1 << 15 if growth <= 2.0 else 1 << 16
        grid = dae_grid(rho, t_final, width, n_points, growth=growth)
    law = p.law()
    if history == "tent":
        g = tent_history(grid, rho, x, width)
        sol = solve_ivp(law, p.A, g, rho)
        return sol.u, sol
    if history == "zero":
        from .evo_core import solve_integrated

        w = WeightedSignal(grid, rho, np.outer(heaviside(grid, 0.0, 0.5), p.E @ x))
        u = solve_integrated(law, p.A, w, warn=False)
        return u, None
    raise ValueError(f"unknown history {history!r}")


def dae_semigroup(p, x, t, rho=None, grid=None, width=1.0, history="tent", tol=1e-8):
    """S(t) x = T_1(t)(x, f_x) for x in the closure of U."""
    x = as_vector(x, p.dim, "x")
    if t < 0:
        raise ValueError("t must be non-negative")
    basis = iv_space(p)
    if not basis.contains(x, tol):
        raise InadmissibleHistoryError(
            "x is not a consistent initial value: A x is not in the range of E"
        )
    u, _ = dae_trajectory(p, x, rho, grid, max(t, 1e-12), width, history)
    k = (t - u.grid.t_start) / u.grid.dt
    i = int(np.floor(k))
    theta = k - i
    if theta < 1e-9 or theta > 1 - 1e-9:
        return u.values[int(round(k))].copy()
    # off-grid t: linear interpolation, O(dt^2) like the scheme itself
    return (1 - theta) * u.values[i] + theta * u.values[i + 1]


def random_index1_pencil(m, rank, rng=None, j_scale=1.0, cond_limit=20.0):
    """E = P diag(I_r, 0) Q, A = P diag(J, I) Q with well-conditioned P, Q."""
    rng = rng_from(rng)

    def well_conditioned():
        while True:
            X = rng.standard_normal((m, m))
            if np.linalg.cond(X) < cond_limit:
                return X

    P, Q = well_conditioned(), well_conditioned()
    D = np.zeros((m, m))
    D[:rank, :rank] = np.eye(rank)
    J = j_scale * rng.standard_normal((rank, rank)) / np.sqrt(max(rank, 1))
    B = np.eye(m)
    B[:rank, :rank] = J
    E = P @ D @ Q
    A = P @ B @ Q
    # consistent directions: Q^{-1} (y1, 0)
    Qi = np.linalg.inv(Q)
    return MatrixPencil(E, A), Qi[:, :rank]
