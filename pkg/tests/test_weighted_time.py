import math

import numpy as np
import pytest

from evosg.errors import AlignmentError, CompatibilityError, NoLimitError
from evosg.weighted_time import (
    TimeGrid,
    WeightedSignal,
    cweighted_norm,
    heaviside,
    indicator,
    one_sided_limit,
    read_signal_csv,
    translate,
    weighted_inner,
    weighted_norm,
    write_signal_csv,
)

from conftest import gaussian, random_signal


def test_grid_rejects_zero_off_node():
    with pytest.raises(AlignmentError):
        TimeGrid(-0.3, 0.25, 16)


def test_grid_covering_contains_zero():
    g = TimeGrid.covering(-1.3, 5.1, 1000)
    assert abs(g.times[g.zero_index]) < 1e-12


def test_aligned_keeps_unit_multiples():
    g = TimeGrid.aligned(-2.0, 37.0, 4096, unit=0.25)
    for t in (-2.0, -0.25, 0.5, 3.0):
        g.index(t)


def test_inner_of_unit_indicator():
    # [TRIVIAL] Riemann sum of int_0^1 1 dt with rho = 0
    g = TimeGrid(-1.0, 1e-3, 3000)
    f = WeightedSignal(g, 0.0, indicator(g, 0.0, 1.0))
    assert weighted_inner(f, f).real == pytest.approx(1.0, abs=2e-3)


def test_inner_hermitian_and_positive(rng, grid):
    f = random_signal(rng, grid, 0.7, 2)
    h = random_signal(rng, grid, 0.7, 2)
    assert weighted_inner(f, h) == pytest.approx(np.conj(weighted_inner(h, f)), rel=1e-13)
    ff = weighted_inner(f, f)
    assert ff.real > 0 and abs(ff.imag) < 1e-14 * ff.real
    assert math.sqrt(ff.real) == pytest.approx(weighted_norm(f), rel=1e-12)


def test_incompatible_signals_rejected(rng, grid):
    f = random_signal(rng, grid, 0.5, 1)
    with pytest.raises(CompatibilityError):
        weighted_inner(f, f.with_rho(1.0))


def test_translate_identity_and_indicator():
    g = TimeGrid(-4.0, 1 / 64, 512)
    f = WeightedSignal(g, 1.0, indicator(g, 0.0, 1.0))
    np.testing.assert_array_equal(translate(f, 0.0).values, f.values)
    # [TRIVIAL] tau_1 chi_[0,1) = chi_[-1,0)
    np.testing.assert_array_equal(translate(f, 1.0).values[:, 0], indicator(g, -1.0, 0.0))


def test_translate_scales_weighted_norm():
    # [DERIVED] direct weighted sum: a shift by t multiplies the norm by exp(rho t)
    g = TimeGrid(-8.0, 1 / 128, 2048)
    rho, t = 0.8, 0.75
    f = gaussian(g, rho, center=0.5, width=0.3)
    assert translate(f, t).norm() == pytest.approx(math.exp(rho * t) * f.norm(), rel=1e-12)


def test_one_sided_limits_of_step():
    g = TimeGrid(-2.0, 1 / 64, 256)
    x = np.array([2.0, -1.0])
    f = WeightedSignal(g, 1.0, np.outer(heaviside(g, 0.0), x))
    np.testing.assert_allclose(one_sided_limit(f, 0.0, "right"), x)
    np.testing.assert_allclose(one_sided_limit(f, 0.0, "left"), 0.0)


def test_one_sided_limits_of_smooth_signal():
    g = TimeGrid(-4.0, 1 / 256, 2048)
    f = gaussian(g, 0.5, center=0.3)
    exact = math.exp(-0.09)
    for side in ("left", "right"):
        assert one_sided_limit(f, 0.0, side)[0].real == pytest.approx(exact, abs=1e-6)


def test_limit_of_atom_antiderivative():
    # [PAPER] the Dirac atom at 0 has antiderivative exp(2 rho 0) chi_{>=0} = chi_{>=0}
    g = TimeGrid(-2.0, 1 / 64, 512)
    f = WeightedSignal(g, 1.0, np.exp(2.0 * 1.0 * 0.0) * heaviside(g, 0.0))
    assert one_sided_limit(f, 0.0, "right")[0] == pytest.approx(1.0)


def test_oscillation_is_rejected():
    g = TimeGrid(-1.0, 1 / 64, 256)
    vals = np.where(np.arange(256) % 2 == 0, 1.0, -1.0)
    with pytest.raises(NoLimitError):
        one_sided_limit(WeightedSignal(g, 1.0, vals), 0.0, "right")


def test_cweighted_norm_examples():
    g = TimeGrid(-2.0, 1 / 64, 512)
    omega = 0.7
    x = np.array([0.6, 0.8])
    f = WeightedSignal(g, 1.0, np.outer(np.exp(omega * g.times), x))
    assert cweighted_norm(f, omega) == pytest.approx(1.0, rel=1e-14)
    assert cweighted_norm(f.with_values(0 * f.values), omega) == 0.0
    # [DERIVED] max over samples of 2 exp(-t) on [0, 1) is attained at t = 0
    h = WeightedSignal(g, 1.0, np.outer(indicator(g, 0.0, 1.0), [2.0, 0.0]))
    assert cweighted_norm(h, 1.0) == 2.0


def test_csv_round_trip(tmp_path, rng, grid):
    f = random_signal(rng, grid, 1.5, 2)
    path = tmp_path / "f.csv"
    write_signal_csv(f, path)
    back = read_signal_csv(path, 1.5)
    assert back.grid.matches(f.grid)
    np.testing.assert_array_equal(back.values, f.values)
