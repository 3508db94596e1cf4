import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxfilm.errors import NonZeroMean
from proxfilm.grid import (Field, Grid, cosine_field, d2, d2_symbol, d2_values,
                           d4_values, inner, norms, poisson_solve, project_mean,
                           read_snapshot, write_snapshot, zero_field)
from proxfilm.oracles import StationaryParams, stationary_parabola


def random_smooth(grid, seed, k_max=4, amp=1.0):
    rng = np.random.default_rng(seed)
    h = grid.centers()
    vals = np.zeros(grid.n)
    for k in range(1, k_max + 1):
        a, b = rng.standard_normal(2)
        vals += a * np.cos(2 * math.pi * k * h) + b * np.sin(2 * math.pi * k * h)
    return Field(grid, amp * project_mean(vals))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(4)
    with pytest.raises(ValueError):
        Grid(16, "chebyshev")
    g = Grid(16)
    assert g.dh * g.n == 1.0


def test_field_length_mismatch():
    with pytest.raises(ValueError):
        Field(Grid(16), np.zeros(8))


def test_field_values_read_only():
    f = zero_field(Grid(16))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_d2_zero():
    f = zero_field(Grid(32))
    assert np.all(d2(f).values == 0.0)


def test_d2_fd3_cosine_eigenvalue():
    # 3-point stencil acts on cos(2*pi*h) as multiplication by its symbol
    grid = Grid(64, "fd3")
    f = cosine_field(grid, 1)
    lam = -(2.0 / grid.dh**2) * (1.0 - math.cos(2.0 * math.pi * grid.dh))
    assert np.max(np.abs(d2(f).values - lam * f.values)) < 1e-10
    assert d2_symbol(grid, 1) == pytest.approx(lam, rel=1e-14)


def test_d2_spectral_cosine_exact():
    grid = Grid(64, "spectral")
    f = cosine_field(grid, 1)
    expected = -((2.0 * math.pi) ** 2) * f.values
    assert np.max(np.abs(d2(f).values - expected)) < 1e-12 * (2 * math.pi) ** 2


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["fd3", "spectral"]))
def test_d2_symmetry(seed, kind):
    grid = Grid(64, kind)
    a = random_smooth(grid, seed)
    b = random_smooth(grid, seed + 1)
    assert abs(inner(d2(a), b) - inner(a, d2(b))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["fd3", "spectral"]))
def test_d2_mean_annihilation(seed, kind):
    grid = Grid(128, kind)
    out = d2(random_smooth(grid, seed))
    assert out.is_mean_zero()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["fd3", "spectral"]))
def test_poisson_roundtrip(seed, kind):
    grid = Grid(64, kind)
    f = random_smooth(grid, seed)
    rhs = d2(f)
    g = poisson_solve(rhs)
    assert np.max(np.abs(g.values - f.values)) <= 1e-10 * (1 + np.max(np.abs(f.values)))
    back = d2(g)
    assert np.max(np.abs(back.values - rhs.values)) <= 1e-12 * (1 + np.max(np.abs(rhs.values)))


def test_poisson_zero_and_mean_error():
    grid = Grid(32)
    assert np.all(poisson_solve(zero_field(grid)).values == 0.0)
    with pytest.raises(NonZeroMean):
        poisson_solve(Field(grid, np.ones(grid.n)))


def test_norms_zero():
    n = norms(zero_field(Grid(16)))
    assert n.l2 == 0.0 and n.tilde_v == 0.0


def test_norms_cosine_l2():
    eps = 1e-3
    f = cosine_field(Grid(64), 1, eps)
    assert abs(norms(f).l2 - eps / math.sqrt(2)) < 1e-10


def test_norms_stationary_total_variation():
    # |w_hh| mass: a over the smooth part plus a at the kink, 2a in total
    f = stationary_parabola(StationaryParams(a=1.0, c0=2.0), Grid(256))
    assert norms(f).tilde_v == pytest.approx(2.0, rel=0.05)


def test_d4_matches_composition():
    for kind in ("fd3", "spectral"):
        grid = Grid(64, kind)
        f = random_smooth(grid, 7)
        a = d2_values(grid, d2_values(grid, f.values))
        b = d4_values(grid, f.values)
        assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))


def test_snapshot_roundtrip(tmp_path):
    grid = Grid(32)
    f = random_smooth(grid, 3)
    path = tmp_path / "snap.csv"
    write_snapshot(path, f)
    g = read_snapshot(path, grid)
    # 17 significant digits round-trip float64 exactly
    assert np.array_equal(f.values, g.values)
    header = path.read_text().splitlines()[0]
    assert header == "h,w,w_h,w_hh"


def test_snapshot_with_u_column(tmp_path):
    grid = Grid(16)
    f = zero_field(grid)
    path = tmp_path / "snap.csv"
    write_snapshot(path, f, u=np.full(grid.n, 0.5))
    assert path.read_text().splitlines()[0] == "h,w,w_h,w_hh,u"
