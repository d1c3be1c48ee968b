"""Initial value problems with prescribed history, and the associated semigroup.

A history ``g`` lives on t <= 0.  The problem is to find u = v + g with
spt v in [0, inf) and

    (d/dt M(d/dt) + A) v = Gamma g delta_0 - K g,

where ``Gamma g = (M(d/dt) chi_{>=0} g(0-))(0+)`` is the initial jump and
``K g = P_0 d/dt M(d/dt) g`` the history forcing.  Adding
``(d/dt M + A) g`` to both sides gives an equation for u whose source has
the continuous antiderivative

    w_F = chi_{<0} M g + chi_{>=0} (Gamma + (M g)(0+)) + int_{-inf}^{min(t,0)} A g,

(continuity at 0 is the jump formula for Gamma).  Solving for u through
``w_F`` avoids every jump and is the default route; the literal route with
the Dirac atom is available as ``method='direct'`` for cross-checking.

Jumps of sampled data at t = 0 are represented by the mean of the one-sided
values at the node, the value the trapezoidal calculus integrates exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_vector
from .cutoff_ops import DiracAtom, MinusOneElement
from .errors import (
    InadmissibleHistoryError,
    NoLimitError,
    NotRegularisingError,
    ResolventError,
)
from .evo_core import as_operator, h1_surrogate, resolvent, solve, solve_integrated
from .fourier_laplace import ConstantLaw, apply_material_law, laplace
from .weighted_time import TimeGrid, WeightedSignal, heaviside, one_sided_limit, translate

_EPS = np.finfo(float).eps


@dataclass
class HistoryState:
    """A point (x, g) of the state space: current value and past trajectory."""

    x: np.ndarray
    g: WeightedSignal

    def __post_init__(self):
        self.x = as_vector(self.x, self.g.dim, "x")

    @classmethod
    def from_history(cls, g):
        return cls(history_value(g), g)

    @property
    def rho(self):
        return self.g.rho

    def distance(self, other, mu=None):
        """||x - x'|| + ||g - g'||_{L2,mu(t<=0)}."""
        d = other.g.values - self.g.values
        t = self.g.grid.times
        d[t > 0] = 0.0
        diff = self.g.with_values(d)
        if mu is not None:
            diff = diff.with_rho(mu)
        return float(np.linalg.norm(self.x - other.x) + diff.norm())


@dataclass
class IvpSolution:
    v: WeightedSignal
    u: WeightedSignal
    his_member: bool
    diagnostics: dict = field(default_factory=dict)
    gamma: np.ndarray | None = None

    def at(self, t):
        return self.u.at(t)


def _zero_index(g):
    return g.grid.zero_index


def history_value(g):
    """g(0-), the left limit of the history at 0."""
    try:
        return one_sided_limit(g, 0.0, "left")
    except NoLimitError as err:
        raise InadmissibleHistoryError(f"history has no left limit at 0: {err}") from err


def check_history(g, atol=0.0):
    t = g.grid.times
    tail = g.values[t > 1e-9 * g.grid.dt]
    if tail.size and np.max(np.abs(tail)) > atol:
        raise InadmissibleHistoryError("history has nonzero samples at t > 0")


def _mean_at_zero(g, x):
    """History samples with the jump node at 0 set to the mean g(0-)/2."""
    vals = g.values.copy()
    t = g.grid.times
    vals[t > 0] = 0.0
    vals[_zero_index(g)] = 0.5 * x
    return g.with_values(vals)


def _full_at_zero(g, x):
    vals = g.values.copy()
    vals[g.grid.times > 0] = 0.0
    vals[_zero_index(g)] = x
    return g.with_values(vals)


def tent_history(grid, rho, x, width=1.0):
    """f_x: linear from 0 at -width up to x at 0, zero elsewhere."""
    x = as_vector(x)
    t = grid.times
    grid.index(-width)
    prof = np.where((t >= -width) & (t <= 0), 1.0 + t / width, 0.0)
    return WeightedSignal(grid, rho, np.outer(prof, x))


def default_history_grid(rho, t_past, t_future, n_points=1 << 13, decay=30.0):
    return TimeGrid.covering(-t_past, max(t_future, decay / rho - t_past), n_points)


def regularising_limit(M, x, rho, grid=None, rtol=1e-4):
    """(M(d/dt) chi_{>=0} x)(0+)."""
    x = as_vector(x, M.dim)
    if grid is None:
        grid = default_history_grid(rho, 1.0, 2.0, 1 << 12)
    step = WeightedSignal(grid, rho, np.outer(heaviside(grid, 0.0, 0.5), x))
    out = apply_material_law(M, step, calculus="trapezoid")
    try:
        return one_sided_limit(out, 0.0, "right", rtol=rtol)
    except NoLimitError as err:
        raise NotRegularisingError(f"(M chi x)(0+) does not settle: {err}") from err


def history_response(M, g, x=None):
    """M(d/dt) g for the history, with the jump node at 0 carrying g(0-)/2."""
    x = history_value(g) if x is None else x
    return apply_material_law(M, _mean_at_zero(g, x), calculus="trapezoid")


def _right_limit(sig, what):
    try:
        return one_sided_limit(sig, 0.0, "right")
    except NoLimitError as err:
        raise NotRegularisingError(f"{what} has no right limit at 0: {err}") from err


def gamma(M, g, rho=None):
    """Gamma g = (M(d/dt) chi_{>=0} g(0-))(0+), via the regularising limit."""
    rho = g.rho if rho is None else rho
    return regularising_limit(M, history_value(g), rho, grid=g.grid)


def gamma_jump(M, g):
    """Gamma g from the jump formula (M g)(0-) - (M g)(0+)."""
    Mg = history_response(M, g)
    try:
        left = one_sided_limit(Mg, 0.0, "left")
    except NoLimitError as err:
        raise InadmissibleHistoryError(f"(M g)(0-) does not exist: {err}") from err
    return left - _right_limit(Mg, "M g")


def k_op(M, g):
    """K g as an element of H^{-1}: antiderivative chi_{>=0}(M g - (M g)(0+)), no atoms."""
    Mg = history_response(M, g)
    r = _right_limit(Mg, "M g")
    vals = np.zeros_like(Mg.values)
    k0 = _zero_index(g)
    vals[k0 + 1 :] = Mg.values[k0 + 1 :] - r
    return MinusOneElement(Mg.with_values(vals))


def ivp_rhs(M, g):
    """Gamma g delta_0 - K g as an element of H^{-1}."""
    G = gamma(M, g)
    return -k_op(M, g) + MinusOneElement(
        WeightedSignal.zeros(g.grid, g.rho, g.dim), [DiracAtom(0.0, G)]
    )


def _integrated_source(M, A, g, x, G):
    Mg = history_response(M, g, x)
    r = _right_limit(Mg, "M g")
    k0 = _zero_index(g)
    vals = Mg.values.copy()
    vals[k0:] = G + r
    Ag = _full_at_zero(g, x).values @ A.matrix.T
    dt = g.grid.dt
    J = np.zeros_like(Ag)
    J[1 : k0 + 1] = np.cumsum(0.5 * dt * (Ag[1 : k0 + 1] + Ag[:k0]), axis=0)
    J[k0 + 1 :] = J[k0]
    return Mg.with_values(vals + J)


def solve_ivp(M, A, g, rho=None, method="integrated", jump_tol=1e-6, tail_tol=1e-6,
              calculus="trapezoid", solver=None):
    """Solve the homogeneous problem with history ``g``; returns :class:`IvpSolution`.

    ``solver(M, A, w)`` replaces :func:`evosg.evo_core.solve_integrated` on
    the integrated route (used for alternative frequency-domain solvers).

    ``his_member`` is the admissibility surrogate: no jump of u at 0
    (``|v(0+) - g(0-)| <= jump_tol (1 + |g(0-)|)``) and u resolved as an
    H^1 function by the spectral test of :func:`evosg.evo_core.h1_surrogate`.
    """
    A = as_operator(A, M.dim)
    if rho is not None and rho != g.rho:
        g = g.with_rho(rho)
    check_history(g)
    x = history_value(g)
    G = gamma(M, g)
    ghalf = _mean_at_zero(g, x)
    if method == "integrated":
        w = _integrated_source(M, A, g, x, G)
        if solver is None:
            u = solve_integrated(M, A, w, calculus=calculus, warn=False)
        else:
            u = solver(M, A, w)
        v = u - ghalf
    elif method == "direct":
        v = solve(M, A, ivp_rhs(M, g), calculus=calculus, warn=False)
        u = v + ghalf
    else:
        raise ValueError(f"unknown method {method!r}")

    k0 = _zero_index(g)
    t = g.grid.times
    pre = v.with_values(np.where((t < 0)[:, None], v.values, 0.0)).norm()
    try:
        v_plus = one_sided_limit(v, 0.0, "right")
        jump = float(np.linalg.norm(v_plus - x))
    except NoLimitError:
        jump = float("inf")
    jump_ok = jump <= jump_tol * (1.0 + float(np.linalg.norm(x)))
    U = laplace(u)
    smooth_ok, frac, ratio = h1_surrogate(U.values * (1j * U.xi + u.rho)[:, None], u.grid, tail_tol)
    diag = {
        "jump_at_zero": jump,
        "jump_tol": jump_tol,
        "tail_fraction": frac,
        "octave_ratio": ratio,
        "tail_tol": tail_tol,
        "pre_zero_norm": pre,
        "method": method,
        "node_zero": int(k0),
    }
    return IvpSolution(v, u, bool(jump_ok and smooth_ok), diag, G)


def _state_at(sol, t):
    u = sol.u
    k = u.grid.index(t)
    shifted = translate(u, t)
    vals = shifted.values
    vals[u.grid.times > 0] = 0.0
    return HistoryState(u.values[k].copy(), shifted.with_values(vals))


def semigroup_step(M, A, state, t, rho=None, check=True, **kw):
    """T(t)(x, g) = (u(t), chi_{<=0} tau_t u)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    g = state.g if rho is None else state.g.with_rho(rho)
    if check:
        x0 = history_value(g)
        if np.linalg.norm(x0 - state.x) > 1e-6 * (1.0 + np.linalg.norm(x0)):
            raise InadmissibleHistoryError("state value x differs from g(0-)")
    sol = solve_ivp(M, A, g, **kw)
    if check and not sol.his_member:
        raise InadmissibleHistoryError(
            f"history is not admissible (jump {sol.diagnostics['jump_at_zero']:.2e}, "
            f"tail fraction {sol.diagnostics['tail_fraction']:.2e})"
        )
    return _state_at(sol, t)


def semigroup_orbit(M, A, state, times, rho=None, check=True, **kw):
    """T(t) state for several t from a single solve."""
    g = state.g if rho is None else state.g.with_rho(rho)
    sol = solve_ivp(M, A, g, **kw)
    if check and not sol.his_member:
        raise InadmissibleHistoryError("history is not admissible")
    return [_state_at(sol, t) for t in times]


class RFunction:
    """r_g(lambda) = (lambda M(lambda) + A)^{-1}((M g)(0-) - lambda int_0^inf e^{-lambda t} (M g)(t) dt).

    This equals the Laplace transform at real ``lambda`` of the solution v.
    The history response is computed once; each evaluation costs one dense
    solve and one quadrature.
    """

    def __init__(self, M, A, g, rho=None):
        self.M = M
        self.A = as_operator(A, M.dim)
        self.rho = g.rho if rho is None else rho
        self.x = history_value(g)
        Mg = history_response(M, g, self.x)
        self.left = one_sided_limit(Mg, 0.0, "left")
        k0 = _zero_index(g)
        self.tail_t = g.grid.times[k0:]
        tail = Mg.values[k0:].copy()
        tail[0] = _right_limit(Mg, "M g")
        self.tail = tail
        self.dt = g.grid.dt
        self.constant = isinstance(M, ConstantLaw)

    def transform_tail(self, lam, order=0):
        """int_0^inf (-t)^order e^{-lam t} (M g)(t) dt by the trapezoidal rule."""
        wts = np.exp(-lam * self.tail_t) * (-self.tail_t) ** order
        f = self.tail * wts[:, None]
        return self.dt * (f.sum(axis=0) - 0.5 * (f[0] + f[-1]))

    def __call__(self, lam):
        if lam <= self.rho:
            raise ResolventError(f"r_g is evaluated at lambda={lam} <= rho={self.rho}")
        b = self.left - lam * self.transform_tail(lam)
        return resolvent(self.M, self.A, lam) @ b

    def derivative(self, lam, k):
        """Closed form for constant M: (-1)^k k! (R E)^k R b; None otherwise."""
        if not self.constant:
            return None
        R = resolvent(self.M, self.A, lam)
        RE = R @ self.M.E
        b = self.left - lam * self.transform_tail(lam)
        y = R @ b
        for _ in range(k):
            y = RE @ y
        return (-1.0) ** k * math.factorial(k) * y


def r_function(M, A, g, rho, lam):
    return RFunction(M, A, g, rho)(lam)


def fornberg_weights(offsets, k):
    """Finite-difference weights of the k-th derivative at 0 on the given offsets."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    c = np.zeros((n, k + 1))
    c1, c4 = 1.0, x[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, k)
        c2, c5, c4 = 1.0, c4, x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, k]


def _stencil(k):
    """Half-width p and accuracy order of the central stencil used for order k."""
    p = (k + 2) // 2 + 1
    order = 2 * p + 1 - k
    return p, order + order % 2


def fd_step(lam, k):
    """Base step: max(1e-3, 1e-4 lam) up to k = 2, then lam eps^{1/(k+order)}."""
    if k <= 2:
        return max(1e-3, lam * 1e-4)
    return lam * _EPS ** (1.0 / (k + _stencil(k)[1]))


def fd_derivative(fun, lam, k, h=None, lower=None):
    """k-th derivative of ``fun`` at ``lam`` by central differences with one Richardson step.

    Returns ``(value, error_estimate)``; the estimate is the size of the
    Richardson correction between the step ``h`` and ``h/2`` results.  ``lower`` keeps all
    stencil points right of a singular boundary.
    """
    if k == 0:
        v = np.asarray(fun(lam), dtype=complex)
        return v, 0.0
    p, order = _stencil(k)
    h = fd_step(lam, k) if h is None else h
    if lower is not None:
        h = min(h, 0.9 * (lam - lower) / p)
    offs = np.arange(-p, p + 1)

    def est(hh):
        wts = fornberg_weights(offs * hh, k)
        return sum(wj * np.asarray(fun(lam + o * hh), dtype=complex) for wj, o in zip(wts, offs))

    d1, d2 = est(h), est(0.5 * h)
    correction = (d2 - d1) / (2.0**order - 1.0)
    return d2 + correction, float(np.linalg.norm(correction))


@dataclass
class PostWidderResult:
    value: np.ndarray
    error_estimate: float
    confident: bool
    k: int
    lam: float


def post_widder_invert(r, t, k, derivative=None, rtol=1e-3):
    """(-1)^k / k! lam^{k+1} r^{(k)}(lam) at lam = k/t.

    ``derivative(lam, k)`` may supply exact derivatives; otherwise they are
    estimated by :func:`fd_derivative`, and ``confident`` reports whether
    the two step sizes agreed to ``rtol``.
    """
    if k < 1 or k > 8:
        raise ValueError("k must be in 1..8")
    if t <= 0:
        raise ValueError("t must be positive")
    lam = k / t
    if derivative is not None:
        d = np.asarray(derivative(lam, k), dtype=complex)
        err = 0.0
    else:
        d, err = fd_derivative(r, lam, k)
    scale = float(np.linalg.norm(d))
    val = (-1.0) ** k / math.factorial(k) * lam ** (k + 1) * d
    return PostWidderResult(val, err, bool(err <= rtol * max(scale, 1e-300)), k, lam)


@dataclass
class HyReport:
    M_fit: float
    omega_fit: float
    worst_ratio: float
    confidence: str
    omega_grid: list
    lambda_grid: list
    k_max: int
    mu: float
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "M_fit": self.M_fit,
            "omega_fit": self.omega_fit,
            "worst_ratio": self.worst_ratio,
            "confidence": self.confidence,
            "omega_grid": self.omega_grid,
            "lambda_grid": self.lambda_grid,
            "k_max": self.k_max,
            "mu": self.mu,
            **self.details,
        }


def _history_norm(g, x, mu):
    vals = g.values.copy()
    vals[g.grid.times > 0] = 0.0
    return float(np.linalg.norm(x) + g.with_values(vals).with_rho(mu).norm())


def fit_growth_bound(omega_grid, ratio_fn, k_max, tol=1e-3, refine_steps=30):
    """Smallest omega for which the scaled derivative bounds stop growing in k.

    ``ratio_fn(omega)`` returns an array indexed by k (after maximising over
    everything else).  ``omega`` is admissible when the sup over the upper
    half of k stays within ``1 + tol`` of the sup over the lower half.
    The grid search is refined by bisection between the last inadmissible
    and the first admissible grid point.
    """
    half = max(1, (k_max + 1) // 2)

    def admissible(om):
        q = ratio_fn(om)
        if not np.all(np.isfinite(q)):
            return False, np.inf
        lo, hi = float(np.max(q[:half])), float(np.max(q[half:]))
        return hi <= (1.0 + tol) * max(lo, 1e-300), max(lo, hi)

    grid = sorted(float(w) for w in omega_grid)
    flags = [admissible(w)[0] for w in grid]
    if not any(flags):
        return None, np.inf
    j = flags.index(True)
    good = grid[j]
    if j > 0:
        bad = grid[j - 1]
        for _ in range(refine_steps):
            mid = 0.5 * (bad + good)
            if admissible(mid)[0]:
                good = mid
            else:
                bad = mid
            if good - bad < 1e-6 * max(1.0, abs(good)):
                break
    return good, admissible(good)[1]


def hy_bound_check(M, A, histories, rho, omega_grid=None, k_max=8, lambda_grid=None, mu=None,
                   tol=1e-3):
    """Fit (M, omega) in ((l - w)^{k+1}/k!) |r_g^{(k)}(l)| <= M (|g(0-)| + |g|_{L2,mu}).

    Derivatives are exact for constant laws and finite differences
    otherwise.  ``confidence`` is 'high' with exact derivatives, 'medium'
    when every finite-difference estimate passed its two-step agreement
    check, 'low' otherwise.
    """
    if k_max > 8:
        raise ValueError("k_max is limited to 8")
    mu = rho if mu is None else mu
    A = as_operator(A, M.dim)
    if lambda_grid is None:
        lambda_grid = rho + np.geomspace(0.02, 50.0, 40)
    lambda_grid = np.array([lam for lam in lambda_grid if lam > rho], dtype=float)
    if omega_grid is None:
        omega_grid = np.linspace(-10.0, float(lambda_grid.min()) - 1e-3, 201)

    # derivative norms per history, lambda and k
    data = []
    confidence = "high" if isinstance(M, ConstantLaw) else "medium"
    for g in histories:
        x = history_value(g)
        nrm = _history_norm(g, x, mu)
        if nrm == 0.0:
            continue
        rf = RFunction(M, A, g, rho)
        table = np.zeros((len(lambda_grid), k_max + 1))
        for i, lam in enumerate(lambda_grid):
            for k in range(k_max + 1):
                d = rf.derivative(lam, k)
                if d is None:
                    d, err = fd_derivative(rf, lam, k, lower=rho)
                    if err > 1e-3 * max(np.linalg.norm(d), 1e-300):
                        confidence = "low"
                table[i, k] = np.linalg.norm(d) / nrm
        data.append(table)

    if not data:
        return HyReport(1.0, float(min(omega_grid)), 0.0, "high", list(map(float, omega_grid)),
                        lambda_grid.tolist(), k_max, mu, {"trivial": True})

    stack = np.max(np.stack(data), axis=0)
    ks = np.arange(k_max + 1)
    logfact = np.array([math.lgamma(k + 1) for k in ks])

    def ratios(om):
        sel = lambda_grid > om
        if not np.any(sel):
            return np.full(k_max + 1, np.inf)
        lam = lambda_grid[sel][:, None]
        with np.errstate(divide="ignore"):
            q = np.exp((ks + 1) * np.log(lam - om) - logfact) * stack[sel]
        return np.max(q, axis=0)

    omega, sup = fit_growth_bound(omega_grid, ratios, k_max, tol)
    if omega is None:
        return HyReport(float("inf"), float("nan"), float("inf"), "low",
                        list(map(float, omega_grid)), lambda_grid.tolist(), k_max, mu,
                        {"pass": False})
    q = ratios(omega)
    half = max(1, (k_max + 1) // 2)
    growth = float(np.max(q[half:]) / max(np.max(q[:half]), 1e-300))
    return HyReport(
        max(1.0, float(sup)),
        float(omega),
        growth,
        confidence,
        list(map(float, omega_grid)),
        lambda_grid.tolist(),
        k_max,
        mu,
        {"pass": True, "sup_ratio": float(sup), "histories": len(data)},
    )
