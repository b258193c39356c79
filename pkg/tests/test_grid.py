import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbspde.errors import (
    EmptyEnsemble,
    GridMismatch,
    InvalidExponent,
    SymmetryViolation,
)
from fracbspde.grid import (
    Grid1D,
    GridFunction,
    SpectralCoeffs,
    dft,
    ensemble_process_norms,
    grid_header,
    holder_seminorm,
    idft,
    l2_norm,
    read_field_csv,
    sobolev_norm,
    spectral_derivative,
    write_field_csv,
)


def dft_direct(f: GridFunction) -> np.ndarray:
    """O(n^2) oracle for the dx-weighted forward transform."""
    g = f.grid
    return np.array(
        [g.dx * np.sum(f.values * np.exp(1j * xi * g.x)) for xi in g.xi]
    )


def idft_direct(c: SpectralCoeffs) -> np.ndarray:
    """O(n^2) oracle for the inverse transform."""
    g = c.grid
    return np.array(
        [np.real(np.sum(c.coeffs * np.exp(-1j * g.xi * xj))) / g.length for xj in g.x]
    )


@pytest.fixture
def grid():
    return Grid1D(-32.0, 32.0, 256)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 100)  # not a power of two
    with pytest.raises(ValueError):
        Grid1D(1.0, 1.0, 8)
    g = Grid1D(0.0, 1.0, 8)
    assert g.dx == pytest.approx(0.125)
    assert g.xi[1] == pytest.approx(2 * np.pi)


def test_dft_constant_field(grid):
    c = dft(GridFunction(grid, np.full(grid.n, 3.5)))
    # only the zero mode carries mass: value = c * L
    assert c.mode(0) == pytest.approx(3.5 * grid.length)
    rest = np.delete(np.abs(c.coeffs), 0)
    assert rest.max() < 1e-10 * grid.length


def test_dft_single_sine_mode(grid):
    xi1 = 2 * np.pi / grid.length
    f = GridFunction.from_callable(grid, lambda x: np.sin(xi1 * x))
    c = dft(f)
    # sin(xi1 x) = (e^{i xi1 x} - e^{-i xi1 x}) / 2i -> F picks modes -1 and +1
    mags = np.abs(c.coeffs)
    k1, km1 = grid.mode_index(1), grid.mode_index(-1)
    assert mags[k1] == pytest.approx(grid.length / 2, rel=1e-12)
    assert mags[km1] == pytest.approx(grid.length / 2, rel=1e-12)
    assert c.mode(-1) == pytest.approx(np.conj(c.mode(1)))
    other = np.delete(mags, [k1, km1])
    assert other.max() < 1e-9


def test_dft_matches_direct_sum_oracle():
    g = Grid1D(-4.0, 4.0, 64)
    rng = np.random.default_rng(7)
    f = GridFunction(g, rng.standard_normal(g.n))
    assert np.allclose(dft(f).coeffs, dft_direct(f), atol=1e-10)


def test_parseval_identity(grid):
    rng = np.random.default_rng(11)
    f = GridFunction(grid, rng.standard_normal(grid.n))
    c = dft(f)
    direct = np.sum(f.values**2) * grid.dx
    spectral = np.sum(np.abs(c.coeffs) ** 2) / grid.length
    assert abs(direct - spectral) <= 1e-12 * direct


def test_idft_round_trip(grid):
    rng = np.random.default_rng(3)
    f = GridFunction(grid, rng.standard_normal(grid.n))
    back = idft(dft(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-10


def test_idft_zero_coeffs(grid):
    z = idft(SpectralCoeffs(grid, np.zeros(grid.n, dtype=complex)))
    assert np.all(z.values == 0.0)


def test_idft_single_mode_matches_direct_evaluation(grid):
    # conjugate pair at k = +-3 with weight L/2 reproduces cos(xi_3 x)
    coeffs = np.zeros(grid.n, dtype=complex)
    coeffs[grid.mode_index(3)] = grid.length / 2
    coeffs[grid.mode_index(-3)] = grid.length / 2
    c = SpectralCoeffs(grid, coeffs)
    f = idft(c)
    xi3 = 2 * np.pi * 3 / grid.length
    assert np.allclose(f.values, np.cos(xi3 * grid.x), atol=1e-12)
    assert np.allclose(f.values, idft_direct(c), atol=1e-10)


def test_idft_rejects_asymmetric_coeffs(grid):
    coeffs = np.zeros(grid.n, dtype=complex)
    coeffs[grid.mode_index(3)] = 1.0  # no conjugate partner
    with pytest.raises(SymmetryViolation):
        idft(SpectralCoeffs(grid, coeffs))


def test_spectral_derivative_on_sine(grid):
    xi2 = 2 * np.pi * 2 / grid.length
    f = GridFunction.from_callable(grid, lambda x: np.sin(xi2 * x))
    df = spectral_derivative(f)
    assert np.allclose(df.values, xi2 * np.cos(xi2 * grid.x), atol=1e-10)


def test_holder_seminorm_constant_is_zero(grid):
    f = GridFunction(grid, np.full(grid.n, 2.0))
    assert holder_seminorm(f, 0.5) == 0.0


def brute_force_seminorm(vals, dx, beta):
    n = len(vals)
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            best = max(best, abs(vals[j] - vals[i]) / ((j - i) * dx) ** beta)
    return best


def test_holder_seminorm_linear_field():
    g = Grid1D(0.0, 1.0, 128)
    f = GridFunction(g, g.x.copy())
    got = holder_seminorm(f, 0.5)
    oracle = brute_force_seminorm(f.values, g.dx, 0.5)
    assert got == pytest.approx(oracle, rel=1e-12)
    # sup over the continuum is 1, attained at the endpoints; the grid stops
    # one cell short of x = 1
    assert got == pytest.approx((1.0 - g.dx) ** 0.5, rel=1e-12)
    assert abs(got - 1.0) < 2 * g.dx


def test_holder_seminorm_cusp_profile():
    g = Grid1D(-1.0, 1.0, 256)
    beta = 0.5
    f = GridFunction(g, np.abs(g.x) ** beta)
    got = holder_seminorm(f, beta)
    oracle = brute_force_seminorm(f.values, g.dx, beta)
    assert got == pytest.approx(oracle, rel=1e-12)
    assert got == pytest.approx(1.0, abs=0.05)


def test_holder_seminorm_invalid_beta(grid):
    f = GridFunction(grid, np.zeros(grid.n))
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(InvalidExponent):
            holder_seminorm(f, bad)


@given(c=st.floats(min_value=-8, max_value=8, allow_nan=False))
@settings(max_examples=20, deadline=None)
def test_holder_seminorm_absolutely_homogeneous(c):
    g = Grid1D(-2.0, 2.0, 64)
    rng = np.random.default_rng(5)
    vals = rng.standard_normal(g.n)
    base = holder_seminorm(GridFunction(g, vals), 0.4)
    scaled = holder_seminorm(GridFunction(g, c * vals), 0.4)
    assert scaled == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-12)


def test_holder_embedding_monotone():
    # beta2 < beta1 on a bounded grid: [f]_{beta2} <= C [f]_{beta1} with
    # C = max(1, diam^{beta1 - beta2})
    g = Grid1D(-8.0, 8.0, 128)
    rng = np.random.default_rng(9)
    f = GridFunction(g, rng.standard_normal(g.n))
    b1, b2 = 0.8, 0.3
    c = max(1.0, g.length ** (b1 - b2))
    assert holder_seminorm(f, b2) <= c * holder_seminorm(f, b1) + 1e-12


def test_sobolev_norm_gamma_zero_is_l2(grid):
    rng = np.random.default_rng(13)
    f = GridFunction(grid, rng.standard_normal(grid.n))
    assert sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-12)


def test_sobolev_norm_single_mode(grid):
    xi1 = 2 * np.pi / grid.length
    f = GridFunction.from_callable(grid, lambda x: np.sin(xi1 * x))
    expected = (1 + xi1**2) ** 0.5 * l2_norm(f)
    assert sobolev_norm(f, 1.0) == pytest.approx(expected, rel=1e-12)


def test_sobolev_norm_zero_field_and_errors(grid):
    f = GridFunction(grid, np.zeros(grid.n))
    assert sobolev_norm(f, 1.3) == 0.0
    with pytest.raises(InvalidExponent):
        sobolev_norm(f, -0.1)


def test_sobolev_norm_monotone_in_gamma(grid):
    rng = np.random.default_rng(17)
    f = GridFunction(grid, rng.standard_normal(grid.n))
    norms = [sobolev_norm(f, gam) for gam in (0.0, 0.5, 1.0, 1.7)]
    assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))


def test_ensemble_norms_deterministic_replication():
    g = Grid1D(-4.0, 4.0, 64)
    prof = np.cos(2 * np.pi * g.x / g.length)
    times, paths = 5, 7
    vals = np.broadcast_to(prof, (paths, times, g.n)).copy()
    rep = ensemble_process_norms(vals, g, dt=0.1, beta=0.5, kind="s2")
    f = GridFunction(g, prof)
    assert rep.sup_norm == pytest.approx(np.abs(prof).max(), rel=1e-12)
    assert rep.holder_seminorm == pytest.approx(holder_seminorm(f, 0.5), rel=1e-12)


def test_ensemble_norms_brownian_factor():
    # u(t,x,w) = W_t(w) phi(x): the S2 sup norm factorizes into
    # sup|phi| * E[sup_t W_t^2]^(1/2); compare against direct MC on W alone
    g = Grid1D(-4.0, 4.0, 32)
    phi = np.exp(-g.x**2)
    rng = np.random.default_rng(23)
    paths, steps, T = 4000, 32, 1.0
    dt = T / steps
    w = np.cumsum(rng.normal(0, np.sqrt(dt), (paths, steps)), axis=1)
    w = np.concatenate([np.zeros((paths, 1)), w], axis=1)
    vals = w[:, :, None] * phi[None, None, :]
    rep = ensemble_process_norms(vals, g, dt=dt, beta=0.5, kind="s2")
    oracle = np.abs(phi).max() * np.sqrt(np.mean(np.max(w**2, axis=1)))
    assert rep.sup_norm == pytest.approx(oracle, rel=1e-12)


def test_ensemble_norms_single_path_matches_pathwise():
    g = Grid1D(-4.0, 4.0, 64)
    rng = np.random.default_rng(29)
    vals = rng.standard_normal((1, 3, g.n))
    rep = ensemble_process_norms(vals, g, dt=0.5, beta=0.4, kind="s2")
    sup_path = np.sqrt((vals[0] ** 2).max(axis=0)).max()
    assert rep.sup_norm == pytest.approx(sup_path, rel=1e-12)


def test_ensemble_norms_empty_raises():
    g = Grid1D(-4.0, 4.0, 64)
    with pytest.raises(EmptyEnsemble):
        ensemble_process_norms(np.zeros((0, 3, g.n)), g, dt=0.1, beta=0.5)


def test_ensemble_norms_l2_kind():
    g = Grid1D(-4.0, 4.0, 32)
    prof = np.sin(2 * np.pi * g.x / g.length)
    times = 9
    dt = 0.125
    vals = np.broadcast_to(prof, (3, times, g.n)).copy()
    rep = ensemble_process_norms(vals, g, dt=dt, beta=0.5, kind="l2")
    # constant-in-time field: trapezoid time integral = T * phi(x)^2, T = (times-1) dt
    T = (times - 1) * dt
    assert rep.sup_norm == pytest.approx(np.sqrt(T) * np.abs(prof).max(), rel=1e-12)


def test_field_arithmetic_and_grid_mismatch():
    g1 = Grid1D(-1.0, 1.0, 32)
    g2 = Grid1D(-1.0, 1.0, 64)
    f1 = GridFunction(g1, np.ones(32))
    f2 = GridFunction(g2, np.ones(64))
    assert np.all((f1 + f1).values == 2.0)
    assert np.all((2.0 * f1).values == 2.0)
    with pytest.raises(GridMismatch):
        _ = f1 + GridFunction(g2, np.ones(64))
    with pytest.raises(GridMismatch):
        GridFunction(g1, np.ones(64))
    del f2


def test_csv_round_trip(tmp_path):
    g = Grid1D(-2.0, 2.0, 32)
    f = GridFunction.from_callable(g, lambda x: np.sin(x))
    csv_path = tmp_path / "field.csv"
    hdr_path = tmp_path / "field.json"
    write_field_csv(f, str(csv_path), str(hdr_path))
    back = read_field_csv(str(csv_path))
    assert back.grid == g
    assert np.allclose(back.values, f.values, atol=0)
    hdr = grid_header(g)
    assert hdr["n"] == 32 and hdr["dx"] == pytest.approx(0.125)
