"""The acceptance suite: twelve numerical checks with thresholds and time limits.

Each check returns a :class:`CheckResult`; ``run_suite`` runs a named group
and is what ``evosg verify`` calls.  Seeds are fixed per check and recorded
in the result.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .cutoff_ops import (
    DiracAtom,
    MinusOneElement,
    cutoff_P,
    cutoff_Q,
    embed,
    is_supported_left_of,
    jump_atom,
    total_antiderivative,
)
from .dae import (
    MatrixPencil,
    consistency_angle,
    dae_trajectory,
    hy_condition,
    random_index1_pencil,
    weierstrass_solve,
)
from .delay_wave import (
    DelayLaw,
    SpatialMesh,
    accretivity_estimate,
    admissible_history,
    build_block_operator,
    delay_grid,
    delay_material_law,
    method_of_steps_oracle,
    relative_l2_error,
    simulate_delay,
)
from .evo_core import check_causality, check_rho_independence, random_source
from .fourier_laplace import (
    ConstantLaw,
    ShiftLaw,
    antiderivative,
    derivative,
    laplace,
)
from .history_ivp import (
    HistoryState,
    gamma,
    gamma_jump,
    post_widder_invert,
    semigroup_orbit,
    solve_ivp,
    tent_history,
)
from .weighted_time import TimeGrid, WeightedSignal


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    measured: dict
    thresholds: dict
    margin: float
    runtime: float
    runtime_limit: float
    seed: int
    notes: str = ""
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.id:2d} {self.name}: margin {self.margin:.3g}, "
                f"{self.runtime:.1f}s / {self.runtime_limit:.0f}s")

    def as_dict(self):
        return asdict(self)


def _margin_upper(value, bound):
    """Relative margin of ``value <= bound`` (positive means passing)."""
    return float((bound - value) / bound)


def _margin_lower(value, bound):
    return float((value - bound) / abs(bound))


def _finish(cid, name, start, limit, seed, measured, thresholds, margins, notes=""):
    runtime = time.perf_counter() - start
    margin = float(min(margins))
    passed = bool(margin >= 0 and runtime < limit)
    return CheckResult(cid, name, passed, measured, thresholds, margin, runtime, limit, seed, notes)


# 1 ------------------------------------------------------------------------


def check_transform_unitarity(seed=1, n_signals=100):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_signals):
        rho = (0.5, 1.0, 2.0)[i % 3]
        m = int(rng.integers(1, 5))
        dt = float(rng.uniform(0.005, 0.02))
        grid = TimeGrid(-dt * int(rng.integers(0, 1000)), dt, 4096)
        vals = rng.standard_normal((4096, m)) + 1j * rng.standard_normal((4096, m))
        f = WeightedSignal(grid, rho, vals)
        nf = f.norm()
        worst = max(worst, abs(laplace(f).norm() - nf) / nf)
    return _finish(1, "transform unitarity", start, 5.0, seed,
                   {"max_relative_defect": worst}, {"max_relative_defect": 1e-10},
                   [_margin_upper(worst, 1e-10)])


# 2 ------------------------------------------------------------------------


def check_inverse_derivative(seed=2, trials=20):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_roundtrip = 0.0
    worst_ratio = 0.0
    grid = TimeGrid.covering(-8.0, 24.0, 1 << 13)
    for i in range(trials):
        rho = (0.5, 1.0, 2.0)[i % 3]
        f = random_source(grid, rho, int(rng.integers(1, 4)), -4.0, 4.0, rng)
        F = antiderivative(f, method="spectral")
        back = derivative(F)
        worst_roundtrip = max(worst_roundtrip, (back - f).norm() / f.norm())
        worst_ratio = max(worst_ratio, F.norm() * rho / f.norm())
    # slowly varying witness: e^{rho t} times a wide Gaussian
    rho = 1.0
    wide = TimeGrid.covering(-200.0, 200.0, 1 << 14)
    t = wide.times
    w = WeightedSignal(wide, rho, (np.exp(rho * t) * np.exp(-0.5 * (t / 40.0) ** 2))[:, None])
    witness = antiderivative(w, method="spectral").norm() * rho / w.norm()
    return _finish(
        2, "inverse-derivative consistency and norm bound", start, 5.0, seed,
        {"roundtrip": worst_roundtrip, "max_rho_ratio": worst_ratio, "witness_rho_ratio": witness},
        {"roundtrip": 1e-8, "max_rho_ratio": 1.0 + 1e-10, "witness_rho_ratio": 0.9},
        [_margin_upper(worst_roundtrip, 1e-8), _margin_upper(worst_ratio, 1.0 + 1e-10),
         _margin_lower(witness, 0.9)],
    )


# shared small delay example ---------------------------------------------


def small_delay_system(n_x=4, h=(0.25,), c=(0.5,), k=1.0, interval=(0.0, 1.0)):
    mesh = SpatialMesh(interval[0], interval[1], n_x, "dirichlet")
    law = DelayLaw.on_mesh(mesh, list(h), list(c), k)
    return mesh, law, delay_material_law(law), build_block_operator(mesh)


def _accretive(rng, m):
    """Random A with Re<Ax, x> >= |x|^2, so every rho > 0 is above the growth bound."""
    B = rng.standard_normal((m, m))
    return B - B.T + np.eye(m)


# 3 ------------------------------------------------------------------------


def check_causality_leakage(seed=3):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    E = rng.standard_normal((3, 3))
    E = E @ E.T + 3 * np.eye(3)
    A = _accretive(rng, 3)
    _, _, Md, Ad = small_delay_system()
    leaks = {
        "constant": check_causality(ConstantLaw(E), A, 1.0, a=0.5, seed=seed),
        "delay_block": check_causality(Md, Ad, 2.0, a=0.5, seed=seed, trials=3),
    }
    anti = check_causality(ShiftLaw(-1.0), 5.0, 0.5, a=0.0, seed=seed, trials=3)
    worst = max(leaks.values())
    return _finish(
        3, "causality leakage", start, 10.0, seed,
        {**leaks, "anti_causal_flagged": anti},
        {"shipped": 1e-6, "anti_causal_min": 1e-2},
        [_margin_upper(worst, 1e-6), _margin_lower(anti, 1e-2)],
    )


# 4 ------------------------------------------------------------------------


def check_rho_independence_suite(seed=4):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    E = rng.standard_normal((2, 2))
    E = E @ E.T + 2 * np.eye(2)
    A = _accretive(rng, 2)
    _, _, Md, Ad = small_delay_system()
    d1 = check_rho_independence(ConstantLaw(E), A, 2.0, 1.0, seed=seed)
    d2 = check_rho_independence(Md, Ad, 2.0, 1.0, seed=seed, trials=2)
    worst = max(d1, d2)
    return _finish(4, "rho-independence", start, 10.0, seed,
                   {"constant": d1, "delay_block": d2}, {"relative": 1e-6},
                   [_margin_upper(worst, 1e-6)])


# 5 ------------------------------------------------------------------------


def _random_element(grid, rho, rng, dim, t_lo, t_hi, n_atoms):
    f = random_source(grid, rho, dim, t_lo, t_hi, rng)
    F = embed(f)
    nodes = rng.choice(np.flatnonzero((grid.times >= t_lo) & (grid.times <= t_hi)), n_atoms,
                       replace=False)
    atoms = [DiracAtom(grid.times[k], rng.standard_normal(dim)) for k in nodes]
    return MinusOneElement(F.regular_antiderivative, atoms)


def check_cutoff_algebra(seed=5, cases=50):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    rho = 1.0
    grid = TimeGrid(-4.0, 1.0 / 1024, 1 << 13)
    times = grid.times
    routing_ok = True
    worst_decomp = 0.0
    support_ok = 0
    for case in range(cases):
        dim = int(rng.integers(1, 3))
        t = float(times[rng.integers(3 << 10, 5 << 10)])
        # routing of single atoms left of, at and right of t
        for s in (t - 0.5, t, t + 0.5):
            y = rng.standard_normal(dim)
            F = MinusOneElement.atom(grid, rho, s, y)
            P, Q, J = cutoff_P(F, t), cutoff_Q(F, t), jump_atom(F, t)
            want_P = [s] if s > t else []
            want_Q = [s] if s < t else []
            routing_ok &= [a.location for a in P.atoms] == want_P
            routing_ok &= [a.location for a in Q.atoms] == want_Q
            routing_ok &= bool(np.all(P.regular_antiderivative.values == 0))
            routing_ok &= bool(np.all(Q.regular_antiderivative.values == 0))
            routing_ok &= bool(np.allclose(J.weight, y if s == t else np.zeros(dim), rtol=1e-14, atol=0))
            for part in P.atoms + Q.atoms:
                routing_ok &= bool(np.array_equal(part.weight, y))
        # decomposition F = P_t F + Q_t F + jump atom at t
        F = _random_element(grid, rho, rng, dim, t - 2.0, t + 2.0, 3)
        if case % 2 == 0:
            F = F + MinusOneElement.atom(grid, rho, t, rng.standard_normal(dim))
        P, Q = cutoff_P(F, t), cutoff_Q(F, t)
        R = P + Q + MinusOneElement(
            WeightedSignal.zeros(grid, rho, dim), [jump_atom(F, t)])
        diff = total_antiderivative(R).values - total_antiderivative(F).values
        resid = float(np.linalg.norm(diff) / np.linalg.norm(total_antiderivative(F).values))
        worst_decomp = max(worst_decomp, resid)
        # support characterisation: left-supported elements, then ones that reach past t
        G = _random_element(grid, rho, rng, dim, t - 3.0, t - 0.25, 2)
        if case % 3 == 1:
            G = G + MinusOneElement.atom(grid, rho, t, rng.standard_normal(dim))
        left = case % 2 == 0
        if not left:
            if case % 4 == 1:
                s = float(times[grid.index(t) + int(rng.integers(1, 1024))])
                G = G + MinusOneElement.atom(grid, rho, s, rng.standard_normal(dim))
            else:
                G = G + embed(random_source(grid, rho, dim, t, t + 1.0, rng, n_bumps=1))
        P = cutoff_P(G, t)
        p_zero = total_antiderivative(P).norm() <= 1e-8 * G.norm()
        support_ok += int(is_supported_left_of(G, t) == left and p_zero == left)
    return _finish(
        5, "cut-off algebra", start, 5.0, seed,
        {"routing_exact": routing_ok, "decomposition_residual": worst_decomp,
         "support_cases_ok": support_ok},
        {"decomposition_residual": 1e-8, "support_cases": cases},
        [1.0 if routing_ok else -1.0, _margin_upper(worst_decomp, 1e-8),
         1.0 if support_ok == cases else (support_ok - cases) / cases],
    )


# 6 ------------------------------------------------------------------------


def _smooth_history(grid, rho, dim, rng):
    """A random smooth history: low-order polynomial times a smooth cut-off on [-3, 0]."""
    t = grid.times
    cut = np.zeros_like(t)
    inner = (t > -3.0) & (t <= 0.0)
    s = (t[inner] + 3.0) / 2.0
    cut[inner] = np.where(s >= 1.0, 1.0,
                          np.exp(1.0 - 1.0 / np.clip(s, 1e-300, None) ** 2) * (s > 0))
    coeff = rng.standard_normal((3, dim))
    poly = sum(np.outer(t ** j, coeff[j]) for j in range(3))
    return WeightedSignal(grid, rho, poly * cut[:, None])


def check_gamma_equivalence(seed=6, trials=20):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    rho = 2.0
    grid = TimeGrid(-4.0, 1.0 / 512, 1 << 13)
    E = rng.standard_normal((3, 3))
    E = E @ E.T + np.eye(3)
    _, _, Md, _ = small_delay_system(n_x=3, h=(0.25, 0.5), c=(0.5, 0.3))
    worst = {"constant": 0.0, "delay_block": 0.0}
    for i in range(trials):
        for name, M in (("constant", ConstantLaw(E)), ("delay_block", Md)):
            g = _smooth_history(grid, rho, M.dim, rng)
            a, b = gamma(M, g), gamma_jump(M, g)
            worst[name] = max(worst[name], float(np.linalg.norm(a - b) / np.linalg.norm(a)))
    top = max(worst.values())
    return _finish(6, "Gamma jump-formula equivalence", start, 10.0, seed, worst,
                   {"relative": 1e-6}, [_margin_upper(top, 1e-6)])


# 7 ------------------------------------------------------------------------


def check_scalar_ivp(seed=7):
    start = time.perf_counter()
    rho = 3.0
    grid = TimeGrid.covering(-2.0, 14.0, 1 << 15)
    t = grid.times
    win = (t >= 0) & (t <= 2)
    errs = {}
    for a in (0.5, 1.0, 2.0):
        g = tent_history(grid, rho, [1.0])
        sol = solve_ivp(ConstantLaw(1.0), a, g)
        errs[str(a)] = float(np.max(np.abs(sol.u.values[win, 0] - np.exp(-a * t[win]))))
    worst = max(errs.values())
    return _finish(7, "scalar IVP oracle", start, 5.0, seed, errs, {"c_norm": 1e-6},
                   [_margin_upper(worst, 1e-6)])


# 8 ------------------------------------------------------------------------


def delay_semigroup_example():
    """Mesh, law and the admissible start state used for the semigroup check."""
    mesh, law, M, A = small_delay_system(n_x=8, h=(1.0,), c=(0.5,), k=1.0, interval=(0.0, 4.0))
    rho = 12.0
    grid = delay_grid(law, rho, 1.0, 1 << 17, decay=20.0, past=2.0, unit=0.25)
    x = np.concatenate([np.sin(np.pi * mesh.nodes / 4.0), np.zeros(mesh.n_q)])
    g = admissible_history(law, mesh, x, rho, grid=grid)
    return M, A, HistoryState.from_history(g)


def _state_norm(s, mu):
    zero = HistoryState(0 * s.x, s.g.with_values(0 * s.g.values))
    return s.distance(zero, mu)


def check_semigroup_laws(seed=8, mu=1.0):
    """Semigroup laws in the state norm ||x|| + ||g||_{L2,mu}, mu below the solve weight."""
    start = time.perf_counter()
    M, A, s0 = delay_semigroup_example()
    dt = s0.g.grid.dt
    nrm = _state_norm(s0, mu)
    small = [160, 40, 10]
    times = [0.0, 0.25, 0.5, 0.75, 1.0] + [k * dt for k in small]
    orbit = dict(zip(times, semigroup_orbit(M, A, s0, times)))
    identity = s0.distance(orbit[0.0], mu) / nrm
    comp = 0.0
    for s in (0.25, 0.5):
        later = dict(zip((0.25, 0.5), semigroup_orbit(M, A, orbit[s], (0.25, 0.5))))
        for t in (0.25, 0.5):
            ref = orbit[s + t]
            comp = max(comp, later[t].distance(ref, mu) / _state_norm(ref, mu))
    cont = [s0.distance(orbit[k * dt], mu) / nrm for k in small]
    decreasing = all(a > b for a, b in zip(cont, cont[1:]))
    return _finish(
        8, "semigroup laws on the delay example", start, 30.0, seed,
        {"identity": identity, "composition": comp, "continuity": cont,
         "continuity_steps": small, "continuity_decreasing": decreasing, "mu": mu},
        {"identity": 1e-8, "composition": 1e-6, "continuity_final": 1e-3},
        [_margin_upper(identity, 1e-8), _margin_upper(comp, 1e-6),
         _margin_upper(cont[-1], 1e-3), 1.0 if decreasing else -1.0],
        notes="distances are relative to the state norm ||x|| + ||g||_{L2,mu}",
    )


# 9 ------------------------------------------------------------------------


def check_dae_oracle(seed=9, n_pencils=50):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_err = 0.0
    worst_angle = 0.0
    for _ in range(n_pencils):
        m = int(rng.integers(2, 7))
        r = int(rng.integers(1, m + 1))
        pencil, basis = random_index1_pencil(m, r, rng)
        x = basis @ rng.standard_normal(r)
        u, _ = dae_trajectory(pencil, x)
        t = u.grid.times
        win = (t >= 0) & (t <= 2)
        ref = weierstrass_solve(pencil, x, t[win])
        err = np.linalg.norm(u.values[win] - ref.values) / np.linalg.norm(ref.values)
        worst_err = max(worst_err, float(err))
        worst_angle = max(worst_angle, consistency_angle(pencil))
    return _finish(9, "DAE oracle equivalence", start, 30.0, seed,
                   {"trajectory_relative_l2": worst_err, "max_principal_angle": worst_angle},
                   {"trajectory_relative_l2": 1e-6, "max_principal_angle": 1e-8},
                   [_margin_upper(worst_err, 1e-6), _margin_upper(worst_angle, 1e-8)])


# 10 -----------------------------------------------------------------------


def skew_pencil_example(m=8, kappa=4.0, seed=10):
    """E spd with eigenvalues 1 and kappa, A skew pairing the two eigenspaces.

    Pairing the extreme eigendirections makes sup_t ||S(t)|| equal to
    sqrt(kappa) = ||sqrt E|| ||sqrt E^{-1}||.
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    half = m // 2
    D = np.concatenate([np.ones(half), kappa * np.ones(m - half)])
    J = np.zeros((m, m))
    for i in range(half):
        J[i, half + i] = 1.0
        J[half + i, i] = -1.0
    return MatrixPencil(Q @ np.diag(D) @ Q.T, Q @ J @ Q.T)


def check_hille_yosida(seed=10):
    start = time.perf_counter()
    m = 16
    A = 2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    rep1 = hy_condition(MatrixPencil(np.eye(m), A))
    bound = -float(np.linalg.eigvalsh(A)[0])
    p = skew_pencil_example(seed=seed)
    rep2 = hy_condition(p)
    ev = np.linalg.eigvalsh(p.E.real)
    target = float(np.sqrt(ev[-1] / ev[0]))
    rel = abs(rep2.M - target) / target
    return _finish(
        10, "Hille-Yosida recovery", start, 60.0, seed,
        {"spd_M": rep1.M, "spd_omega": rep1.omega, "spd_omega_bound": bound,
         "skew_M": rep2.M, "skew_omega": rep2.omega, "skew_target": target,
         "skew_relative_gap": rel, "passed_flags": [rep1.passed, rep2.passed]},
        {"spd_M": [1.0, 1.05], "spd_omega_slack": 0.05, "skew_relative_gap": 0.1},
        [_margin_upper(rep1.M, 1.05), 1.0 if rep1.M >= 1.0 else -1.0,
         _margin_upper(rep1.omega - bound, 0.05), _margin_upper(rel, 0.1),
         1.0 if rep1.passed and rep2.passed else -1.0],
    )


# 11 -----------------------------------------------------------------------


def check_delay_cross_validation(seed=11, n_steps=4096, t_final=2.0, rho=6.0):
    start = time.perf_counter()
    mesh = SpatialMesh(0.0, 1.0, 64, "dirichlet")
    law = DelayLaw.on_mesh(mesh, [0.25], [0.5], 1.0)
    A = build_block_operator(mesh)
    rho0, c = accretivity_estimate(law, A)
    rho = max(rho, rho0 + 0.5)
    x = np.concatenate([np.sin(np.pi * mesh.nodes), np.zeros(mesh.n_q)])
    g = admissible_history(law, mesh, x, rho, t_final, dt=t_final / n_steps)
    u, _ = simulate_delay(law, mesh, g, t_final)
    ref = method_of_steps_oracle(law, mesh, g, t_final)
    err = relative_l2_error(u, ref)
    skew = A.skew_residual()
    return _finish(
        11, "delay wave cross-validation", start, 120.0, seed,
        {"relative_l2": err, "accretivity_rho0": rho0, "accretivity_c": c,
         "skew_residual": skew, "rho": rho},
        {"relative_l2": 1e-3, "accretivity_c_min": 0.0, "skew_residual": 1e-12},
        [_margin_upper(err, 1e-3), 1.0 if c > 0 else -1.0, _margin_upper(skew, 1e-12)],
    )


# 12 -----------------------------------------------------------------------


def check_post_widder(seed=12, a=1.0, k=8):
    start = time.perf_counter()
    worst = 0.0
    for t in np.linspace(0.1, 2.0, 20):
        res = post_widder_invert(lambda lam: 1.0 / (lam + a), float(t), k)
        worst = max(worst, abs(res.value - np.exp(-a * t)) / np.exp(-a * t))
    return _finish(12, "Post-Widder diagnostic", start, 5.0, seed,
                   {"max_relative_error": float(worst), "a": a, "k": k},
                   {"max_relative_error": 0.1}, [_margin_upper(worst, 0.1)])


CHECKS = {
    1: check_transform_unitarity,
    2: check_inverse_derivative,
    3: check_causality_leakage,
    4: check_rho_independence_suite,
    5: check_cutoff_algebra,
    6: check_gamma_equivalence,
    7: check_scalar_ivp,
    8: check_semigroup_laws,
    9: check_dae_oracle,
    10: check_hille_yosida,
    11: check_delay_cross_validation,
    12: check_post_widder,
}

SUITES = {
    "core": [1, 2, 3, 4, 5, 6, 7, 12],
    "dae": [9, 10],
    "delay": [8, 11],
    "all": sorted(CHECKS),
}


def run_suite(name="all", echo=None):
    """Run a named suite; ``echo`` is called with each result line."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for cid in SUITES[name]:
        res = CHECKS[cid]()
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
