"""Elements of H^{-1}_rho and the cut-off operators P_t, Q_t.

An element F of the extrapolation space is stored through its
antiderivative: a regular part (an ordinary weighted signal) plus a list of
Dirac atoms.  The atom ``delta_s y`` has antiderivative
``exp(2 rho s) chi_{t >= s} y`` (for rho > 0), so the total antiderivative

    w = regular + sum_atoms exp(2 rho s) chi_{t >= s} y

is always an L2 signal and F = d/dt w.  Cut-offs only ever touch ``w``.
One-sided limits of the atom part are known in closed form; only the
regular part goes through the sampled limit estimator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_vector
from .errors import CompatibilityError, InvalidWeightError, NoLimitError, NotInDomainError
from .fourier_laplace import antiderivative
from .weighted_time import (
    WeightedSignal,
    heaviside,
    one_sided_limit,
    read_signal_csv,
    write_signal_csv,
)


@dataclass(frozen=True)
class DiracAtom:
    location: float
    weight: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "weight", as_vector(self.weight, name="atom weight"))


def _require_positive_rho(rho):
    if not rho > 0:
        raise InvalidWeightError(f"cut-off machinery needs rho > 0, got {rho}")


@dataclass
class MinusOneElement:
    regular_antiderivative: WeightedSignal
    atoms: list = field(default_factory=list)

    def __post_init__(self):
        _require_positive_rho(self.regular_antiderivative.rho)
        grid = self.grid
        seen = set()
        atoms = []
        for a in self.atoms:
            if not isinstance(a, DiracAtom):
                a = DiracAtom(*a)
            k = grid.index(a.location)
            if k in seen:
                raise ValueError(f"two atoms at t={a.location}")
            if a.weight.shape[0] != self.dim:
                raise ValueError("atom weight has the wrong dimension")
            seen.add(k)
            atoms.append(a)
        self.atoms = sorted(atoms, key=lambda a: a.location)

    @property
    def rho(self):
        return self.regular_antiderivative.rho

    @property
    def grid(self):
        return self.regular_antiderivative.grid

    @property
    def dim(self):
        return self.regular_antiderivative.dim

    @classmethod
    def zeros(cls, grid, rho, dim):
        return cls(WeightedSignal.zeros(grid, rho, dim))

    @classmethod
    def atom(cls, grid, rho, s, y):
        y = as_vector(y)
        return cls(WeightedSignal.zeros(grid, rho, y.shape[0]), [DiracAtom(s, y)])

    def norm(self):
        """||d^{-1} F||_rho, the norm of the extrapolation space."""
        return total_antiderivative(self).norm()

    def __add__(self, other):
        if not isinstance(other, MinusOneElement):
            return NotImplemented
        reg = self.regular_antiderivative + other.regular_antiderivative
        merged = {}
        for a in self.atoms + other.atoms:
            k = self.grid.index(a.location)
            merged[k] = DiracAtom(a.location, merged[k].weight + a.weight) if k in merged else a
        return MinusOneElement(reg, list(merged.values()))

    def __mul__(self, c):
        return MinusOneElement(
            self.regular_antiderivative * c,
            [DiracAtom(a.location, c * a.weight) for a in self.atoms],
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)


def embed(f):
    """L2 signal as an element of H^{-1}: antiderivative, no atoms."""
    _require_positive_rho(f.rho)
    return MinusOneElement(antiderivative(f))


def atom_antiderivative(grid, rho, atom, at_node=1.0):
    """Samples of exp(2 rho s) chi_{t >= s} y."""
    step = heaviside(grid, atom.location, at_node)
    return np.exp(2.0 * rho * atom.location) * np.outer(step, atom.weight)


def total_antiderivative(F, at_node=1.0):
    """The signal w with F = d/dt w.

    ``at_node`` is the sample given to each atom step at its own node; the
    default 1 is the right-continuous reading, 1/2 is the mean used by the
    trapezoidal solver.
    """
    vals = F.regular_antiderivative.values.copy()
    for a in F.atoms:
        vals += atom_antiderivative(F.grid, F.rho, a, at_node)
    return F.regular_antiderivative.with_values(vals)


def _regular_limit(F, t, side):
    try:
        return one_sided_limit(F.regular_antiderivative, t, side)
    except NoLimitError as err:
        raise NotInDomainError(
            f"antiderivative has no {side} limit at t={t}; element is not in the "
            f"domain of the {'P' if side == 'right' else 'Q'} cut-off"
        ) from err


def _limit(F, t, side):
    reg = _regular_limit(F, t, side)
    k = F.grid.index(t)
    for a in F.atoms:
        ka = F.grid.index(a.location)
        if ka < k or (side == "right" and ka == k):
            reg = reg + np.exp(2.0 * F.rho * a.location) * a.weight
    return reg


def antiderivative_limit(F, t, side):
    """(d^{-1} F)(t+) or (d^{-1} F)(t-)."""
    return _limit(F, float(t), side)


def cutoff_P(F, t):
    """P_t F = d chi_{>=t} w - exp(-2 rho t) w(t+) delta_t.

    Its antiderivative is chi_{>=t}(w - w(t+)): atoms right of ``t`` are
    kept, atoms at or left of ``t`` cancel against the limit correction.
    """
    t = float(t)
    k = F.grid.index(t)
    reg = F.regular_antiderivative
    r_plus = _regular_limit(F, t, "right")
    vals = np.zeros_like(reg.values)
    vals[k:] = reg.values[k:] - r_plus
    atoms = [a for a in F.atoms if F.grid.index(a.location) > k]
    return MinusOneElement(reg.with_values(vals), atoms)


def cutoff_Q(F, t):
    """Q_t F = d chi_{<=t} w + exp(-2 rho t) w(t-) delta_t.

    Its antiderivative equals w left of ``t`` and is frozen at w(t-) from
    ``t`` on; atoms strictly left of ``t`` are kept.
    """
    t = float(t)
    k = F.grid.index(t)
    reg = F.regular_antiderivative
    r_minus = _regular_limit(F, t, "left")
    vals = reg.values.copy()
    vals[k:] = r_minus
    atoms = [a for a in F.atoms if F.grid.index(a.location) < k]
    return MinusOneElement(reg.with_values(vals), atoms)


def jump_atom(F, t):
    """The atom exp(-2 rho t)(w(t+) - w(t-)) delta_t left over by P_t + Q_t."""
    t = float(t)
    jump = _limit(F, t, "right") - _limit(F, t, "left")
    return DiracAtom(t, np.exp(-2.0 * F.rho * t) * jump)


def is_supported_left_of(F, t, atol=1e-8):
    """Support test: P_t F = 0 iff the total antiderivative is constant on (t, inf)."""
    w = total_antiderivative(F).values[F.grid.index(t) + 1 :]
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    return bool(np.max(np.abs(w - w[0]), initial=0.0) <= atol * scale)


def save_minus_one(F, json_path, csv_path):
    """JSON record ``{rho, atoms, antiderivative_csv}`` plus the CSV of the regular part."""
    write_signal_csv(F.regular_antiderivative, csv_path)
    doc = {
        "rho": F.rho,
        "atoms": [
            {"s": a.location, "y": [[float(v.real), float(v.imag)] for v in a.weight]}
            for a in F.atoms
        ],
        "antiderivative_csv": str(csv_path),
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def load_minus_one(json_path):
    with open(json_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    reg = read_signal_csv(doc["antiderivative_csv"], doc["rho"])
    atoms = []
    for a in doc.get("atoms", []):
        y = np.array([complex(*p) if isinstance(p, list) else complex(p) for p in a["y"]])
        atoms.append(DiracAtom(a["s"], y))
    return MinusOneElement(reg, atoms)


def check_same_space(F, G):
    if not (F.grid.matches(G.grid) and F.rho == G.rho):
        raise CompatibilityError("elements live on different grids or weights")
