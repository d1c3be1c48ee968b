"""Evolutionary equations with memory in exponentially weighted L2 spaces.

Submodules:

* ``weighted_time``: time grids, weighted signals, one-sided limits.
* ``fourier_laplace``: the Fourier-Laplace transform, d/dt and material laws.
* ``cutoff_ops``: the extrapolation space H^{-1} and the cut-offs P_t, Q_t.
* ``evo_core``: the solution operator of (d/dt M(d/dt) + A) u = F.
* ``history_ivp``: initial value problems with history and the semigroup.
* ``dae``: matrix pencils, consistent initial values, the resolvent-power test.
* ``delay_wave``: a 1D wave equation with delays and a time-marching oracle.
* ``acceptance`` and ``cli``: the acceptance checks and the command line.
"""

from .cutoff_ops import DiracAtom, MinusOneElement, cutoff_P, cutoff_Q, embed, jump_atom
from .dae import MatrixPencil, dae_semigroup, hy_condition, iv_space, weierstrass_solve
from .delay_wave import (
    DelayLaw,
    SpatialMesh,
    accretivity_estimate,
    build_block_operator,
    delay_material_law,
    method_of_steps_oracle,
    simulate_delay,
)
from .errors import *  # noqa: F401,F403
from .evo_core import SpatialOperator, solve, solve_integrated
from .fourier_laplace import (
    ConstantLaw,
    FunctionLaw,
    MaterialLaw,
    ShiftLaw,
    antiderivative,
    derivative,
    inverse_laplace,
    laplace,
)
from .history_ivp import (
    HistoryState,
    hy_bound_check,
    post_widder_invert,
    r_function,
    semigroup_step,
    solve_ivp,
)
from .weighted_time import TimeGrid, WeightedSignal

__version__ = "0.1.0"
