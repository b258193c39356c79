import numpy as np
import pytest

from fracbspde.bspde import (
    BSPDEData,
    PathFunctional,
    RandomFieldSpec,
    RandomTerm,
    fbsde_crosscheck,
    solve_bspde_linear_gaussian,
    solve_bspde_regression,
    solve_fourier_deterministic,
    solve_kernel_deterministic,
    solve_pde_variable_coeff,
    space_process_norm,
    verify_holder_estimate,
)
from fracbspde.errors import IllConditioned, StabilityError, UnsupportedSpec
from fracbspde.grid import Grid1D
from fracbspde.kernel import CoefficientA, eval_A
from fracbspde.levy import RngStream

GRID = Grid1D(-32.0, 32.0, 256)
XI1 = 2 * np.pi / GRID.length


def make_data(grid=GRID, alpha=1.5, T=1.0, a=None, **kw):
    return BSPDEData(
        grid=grid, alpha=alpha, T=T, a=a or CoefficientA.constant(1.0), **kw
    )


def random_smooth(grid, rng, modes=6):
    vals = np.zeros(grid.n)
    for k in range(1, modes + 1):
        xi = 2 * np.pi * k / grid.length
        vals += rng.normal() * np.cos(xi * grid.x) + rng.normal() * np.sin(xi * grid.x)
    return vals


def test_fourier_single_mode_decay():
    g_term = np.sin(XI1 * GRID.x)
    data = make_data(g=g_term)
    sol = solve_fourier_deterministic(data, n_steps=64)
    for t in (0.0, 0.5, 1.0):
        expected = np.exp(-(1.0 - t) * XI1**1.5) * g_term
        assert np.max(np.abs(sol.u_at(t) - expected)) < 1e-12


def test_fourier_zero_mode_source():
    c0 = 0.8
    data = make_data(g=np.zeros(GRID.n), f=lambda t: np.full(GRID.n, c0))
    sol = solve_fourier_deterministic(data, n_steps=64)
    for t in (0.0, 0.25, 1.0):
        assert np.max(np.abs(sol.u_at(t) - c0 * (1.0 - t))) < 1e-12


def test_fourier_terminal_condition():
    rng = np.random.default_rng(1)
    g_term = random_smooth(GRID, rng)
    data = make_data(g=g_term)
    sol = solve_fourier_deterministic(data, n_steps=32)
    assert np.max(np.abs(sol.u_at(1.0) - g_term)) < 1e-12


def test_kernel_solver_agrees_with_fourier():
    rng = np.random.default_rng(2)
    a = CoefficientA.from_callable(lambda t: 1.0 + 0.4 * np.sin(2 * t), t_max=1.0)
    prof = random_smooth(GRID, rng)
    data = make_data(
        a=a,
        g=random_smooth(GRID, rng),
        f=lambda t: prof * (1.0 + 0.5 * t),
    )
    sf = solve_fourier_deterministic(data, n_steps=48)
    sk = solve_kernel_deterministic(data, n_steps=48)
    assert np.max(np.abs(sf.u - sk.u)) < 1e-8


def test_kernel_solver_bump_spreads_like_gaussian():
    # alpha = 2: convolving a Gaussian bump with the kernel adds 2 A to the
    # variance, so the solution is the widened Gaussian in closed form
    sigma0 = 1.5
    g_term = np.exp(-GRID.x**2 / (2 * sigma0**2))
    data = make_data(alpha=2.0, g=g_term)
    sol = solve_kernel_deterministic(data, n_steps=32)
    t = 0.25
    var = sigma0**2 + 2 * (1.0 - t)
    expected = sigma0 / np.sqrt(var) * np.exp(-GRID.x**2 / (2 * var))
    assert np.max(np.abs(sol.u_at(t) - expected)) < 1e-9


def test_kernel_solver_terminal_exact():
    g_term = np.exp(-GRID.x**2)
    data = make_data(g=g_term)
    sol = solve_kernel_deterministic(data, n_steps=16)
    assert np.array_equal(sol.u_at(1.0), g_term)


def test_solver_linearity():
    rng = np.random.default_rng(3)
    g1, g2 = random_smooth(GRID, rng), random_smooth(GRID, rng)
    p1, p2 = random_smooth(GRID, rng), random_smooth(GRID, rng)
    d1 = make_data(g=g1, f=lambda t: p1 * (1 + t))
    d2 = make_data(g=g2, f=lambda t: p2 * np.cos(t))
    d12 = make_data(g=2 * g1 - g2, f=lambda t: 2 * (p1 * (1 + t)) - p2 * np.cos(t))
    u1 = solve_fourier_deterministic(d1, n_steps=32).u
    u2 = solve_fourier_deterministic(d2, n_steps=32).u
    u12 = solve_fourier_deterministic(d12, n_steps=32).u
    assert np.max(np.abs(u12 - (2 * u1 - u2))) < 1e-10


def test_mode_decoupling():
    g_term = np.sin(3 * XI1 * GRID.x)
    data = make_data(g=g_term)
    sol = solve_fourier_deterministic(data, n_steps=32)
    spec = np.abs(np.fft.fft(sol.u_at(0.5)))
    k3 = GRID.mode_index(3)
    km3 = GRID.mode_index(-3)
    off = np.delete(spec, [k3, km3])
    assert off.max() < 1e-10 * spec.max()


def test_comparison_principle_diffusion_only():
    g_term = np.exp(-GRID.x**2)  # nonnegative bump
    data = make_data(g=g_term, f=lambda t: 0.1 * np.exp(-GRID.x**2))
    sol = solve_kernel_deterministic(data, n_steps=32)
    assert sol.u.min() > -1e-8


def test_pde_solver_degenerates_to_kernel_solver():
    a = CoefficientA.from_callable(lambda t: 1.0 + 0.3 * np.cos(t), t_max=1.0)
    prof = np.exp(-GRID.x**2 / 4)
    data = make_data(a=a, g=np.sin(XI1 * GRID.x), f=lambda t: prof)
    ref = solve_kernel_deterministic(data, n_steps=256)
    got = solve_pde_variable_coeff(data, n_steps=256)
    assert np.max(np.abs(ref.u_at(0.0) - got.u_at(0.0))) < 1e-6


def test_pde_solver_constant_zero_order_term():
    c0 = 0.5
    g_term = np.sin(2 * XI1 * GRID.x)
    base = make_data(g=g_term)
    with_c = make_data(g=g_term, c=lambda t: np.full(GRID.n, c0))
    u0 = solve_pde_variable_coeff(base, n_steps=64)
    uc = solve_pde_variable_coeff(with_c, n_steps=64)
    for t in (0.0, 0.5):
        expected = np.exp(c0 * (1.0 - t)) * u0.u_at(t)
        assert np.max(np.abs(uc.u_at(t) - expected)) < 1e-6


def test_pde_solver_constant_drift_shifts():
    # backward equation with u_t = a Lap u - b u_x: u(t, x) = u0(t, x + b (T - t))
    b0 = GRID.dx * 16  # shift at t = 0 lands exactly on the grid
    g_term = np.sin(XI1 * GRID.x)
    base = make_data(g=g_term)
    drift = make_data(g=g_term, b=lambda t: np.full(GRID.n, b0))
    u0 = solve_pde_variable_coeff(base, n_steps=64)
    ub = solve_pde_variable_coeff(drift, n_steps=64)
    shifted = np.roll(u0.u_at(0.0), -16)  # u0(x + 16 dx)
    assert np.max(np.abs(ub.u_at(0.0) - shifted)) < 1e-9


def test_pde_solver_first_order_in_time():
    a_xt = lambda t: 1.0 + 0.25 * np.cos(2 * np.pi * GRID.x / GRID.length) * np.cos(t)
    b_xt = lambda t: 0.3 * np.sin(2 * np.pi * GRID.x / GRID.length)
    g_term = np.exp(-GRID.x**2 / 8)
    sols = {}
    for n in (32, 64, 128):
        data = make_data(g=g_term, a_xt=a_xt, b=b_xt)
        sols[n] = solve_pde_variable_coeff(data, n_steps=n).u_at(0.0)
    d1 = np.max(np.abs(sols[32] - sols[64]))
    d2 = np.max(np.abs(sols[64] - sols[128]))
    order = np.log2(d1 / d2)
    assert 0.6 < order < 1.6


def test_pde_solver_stability_guard():
    sharp = lambda t: 1.0 + 0.9 * np.sign(np.sin(8 * np.pi * GRID.x / GRID.length))
    data = make_data(g=np.sin(XI1 * GRID.x), a_xt=sharp)
    with pytest.raises(StabilityError):
        solve_pde_variable_coeff(data, n_steps=4)


def affine_terminal(profile, c0, c1, T):
    return RandomFieldSpec(
        terms=(RandomTerm(profile, PathFunctional.affine_in_w(T, c0, c1)),)
    )


def test_linear_gaussian_reduces_to_deterministic():
    prof = np.exp(-GRID.x**2 / 2)
    spec = affine_terminal(prof, 0.7, 0.0, 1.0)
    data = make_data(g=spec)
    sol, _ = solve_bspde_linear_gaussian(data, n_paths=8, rng=RngStream(5), n_steps=32)
    det = solve_fourier_deterministic(make_data(g=0.7 * prof), n_steps=32)
    for t in (0.0, 0.5, 1.0):
        diff = sol.u_at(t) - det.u_at(t)[None, :]
        assert np.max(np.abs(diff)) < 1e-10
    assert np.max(np.abs(sol.v)) < 1e-12


def test_linear_gaussian_terminal_pathwise():
    prof = np.sin(XI1 * GRID.x)
    c0, c1, T = 0.4, 1.3, 1.0
    data = make_data(g=affine_terminal(prof, c0, c1, T))
    n_steps = 32
    sol, mart = solve_bspde_linear_gaussian(
        data, n_paths=64, rng=RngStream(7), n_steps=n_steps
    )
    w_T = mart.w_at_times[:, -1]
    expected = (c0 + c1 * w_T)[:, None] * prof[None, :]
    assert np.max(np.abs(sol.u_at(T) - expected)) < 1e-10
    # martingale fields: p(T) = g pathwise, q = c1 * profile, Z == 0
    assert np.max(np.abs(mart.p_at(T) - expected)) < 1e-12
    assert np.max(np.abs(mart.q_field() - c1 * prof)) < 1e-12
    assert mart.z_is_zero


def test_linear_gaussian_v_is_propagated_profile():
    prof = np.exp(-GRID.x**2 / 3)
    c1 = 0.9
    data = make_data(g=affine_terminal(prof, 0.2, c1, 1.0))
    sol, _ = solve_bspde_linear_gaussian(data, n_paths=4, rng=RngStream(9), n_steps=32)
    lam = np.abs(GRID.xi) ** 1.5
    for t in (0.0, 0.5):
        A = 1.0 - t
        expected = c1 * np.real(np.fft.ifft(np.exp(-A * lam) * np.fft.fft(prof)))
        assert np.max(np.abs(sol.v_at(t) - expected)) < 1e-10


def test_linear_gaussian_rejects_bad_spec():
    prof = np.ones(GRID.n)
    quad = RandomFieldSpec(
        terms=(RandomTerm(prof, PathFunctional(quadratic=((1.0, 1.0, 1.0),))),)
    )
    data = make_data(g=quad)
    with pytest.raises(UnsupportedSpec):
        solve_bspde_linear_gaussian(data, n_paths=2, rng=RngStream(1))
    data2 = make_data(g=affine_terminal(prof, 0.0, 1.0, 1.0), sigma=0.3)
    with pytest.raises(UnsupportedSpec):
        solve_bspde_linear_gaussian(data2, n_paths=2, rng=RngStream(1))


def euler_multiplier_bias(a: CoefficientA, lam_k: float, n_steps: int, T: float, i: int):
    """|prod_j (1 - a(t_{j+1}) lam dt) - exp(-lam A_{T,t_i})| for the scheme."""
    times = np.linspace(0.0, T, n_steps + 1)
    dt = T / n_steps
    prod = 1.0
    for j in range(i, n_steps):
        prod *= 1.0 - a(np.asarray([times[j + 1]]))[0] * lam_k * dt
    exact = np.exp(-lam_k * eval_A(a, times[i], T)) if i < n_steps else 1.0
    return abs(prod - exact)


def test_regression_collapses_to_deterministic():
    g_term = np.sin(XI1 * GRID.x)
    data = make_data(g=g_term)
    n_steps = 512
    sol = solve_bspde_regression(data, n_paths=64, rng=RngStream(11), n_steps=n_steps)
    det = solve_fourier_deterministic(data, n_steps=64)
    for t in (0.0, 0.5):
        got = sol.u_values(t)
        assert np.max(np.abs(got - det.u_at(t)[None, :])) < 1e-6


def test_regression_matches_linear_gaussian_closed_form():
    # the regression error is a common (across-path) projection shift, so the
    # standard error comes from independent replications, not per-path spread
    prof = np.sin(XI1 * GRID.x)
    c0, c1, T = 0.3, 1.0, 1.0
    data = make_data(g=affine_terminal(prof, c0, c1, T))
    n_paths, n_steps, n_reps = 1500, 64, 8
    lam1 = XI1**1.5
    probes = (0.0, 0.5)
    x_idx = GRID.n // 4  # near the sine crest
    du = {t: [] for t in probes}
    dv = {t: [] for t in probes}
    for rep in range(n_reps):
        stream = RngStream(13, rep)
        closed, _ = solve_bspde_linear_gaussian(
            data, n_paths=n_paths, rng=stream, n_steps=n_steps
        )
        reg = solve_bspde_regression(data, n_paths=n_paths, rng=stream, n_steps=n_steps)
        for t in probes:
            du[t].append(np.mean(reg.u_values(t)[:, x_idx] - closed.u_at(t)[:, x_idx]))
            dv[t].append(np.mean(reg.v_values(t)[:, x_idx] - closed.v_at(t)[x_idx]))
    for t in probes:
        i = int(round(t * n_steps))
        bias = euler_multiplier_bias(data.a, lam1, n_steps, T, i) * (
            abs(c0) + abs(c1) * np.sqrt(T) * 3
        )
        for diffs, extra_bias in ((du[t], bias), (dv[t], bias * abs(c1))):
            arr = np.asarray(diffs)
            se = arr.std(ddof=1) / np.sqrt(n_reps)
            assert abs(arr.mean()) <= 3 * se + extra_bias, (t, arr.mean(), se)


def test_regression_deterministic_v_below_noise_floor():
    g_term = np.sin(XI1 * GRID.x) + 0.5 * np.cos(2 * XI1 * GRID.x)
    data = make_data(g=g_term)
    sol = solve_bspde_regression(data, n_paths=2000, rng=RngStream(17), n_steps=32)
    for t in (0.0, 0.5):
        v = sol.v_values(t)
        rms = float(np.sqrt(np.mean(v**2)))
        assert rms <= 3.0 * sol.v_noise_floor(t)


def test_regression_sigma_invariance_for_deterministic_data():
    # with deterministic data the Girsanov factor integrates out: u must not
    # depend on sigma beyond replication noise
    g_term = np.sin(XI1 * GRID.x)
    base = make_data(g=g_term)
    shifted = make_data(g=g_term, sigma=0.5)
    n_paths, n_steps, n_reps = 1000, 32, 8
    x_idx = GRID.n // 4
    diffs = []
    for rep in range(n_reps):
        u0 = solve_bspde_regression(
            base, n_paths=n_paths, rng=RngStream(19, rep), n_steps=n_steps
        )
        u1 = solve_bspde_regression(
            shifted, n_paths=n_paths, rng=RngStream(19, rep), n_steps=n_steps
        )
        diffs.append(
            np.mean(u1.u_values(0.0)[:, x_idx]) - np.mean(u0.u_values(0.0)[:, x_idx])
        )
    arr = np.asarray(diffs)
    se = arr.std(ddof=1) / np.sqrt(n_reps)
    assert abs(arr.mean()) <= 3 * se + 1e-12


def test_regression_quadratic_terminal_functional():
    # g = phi(x) W_T^2 is outside the affine closed form but inside the
    # degree-2 regression basis; at t = 0 the fitted solution is the sample
    # mean, so E[W_T^2] = T gives u(0) ~= T R_0^T phi up to the scheme bias
    prof = np.sin(XI1 * GRID.x)
    T = 1.0
    spec = RandomFieldSpec(
        terms=(RandomTerm(prof, PathFunctional(quadratic=((T, T, 1.0),))),)
    )
    data = make_data(g=spec, T=T)
    n_paths, n_steps = 3000, 64
    reg = solve_bspde_regression(data, n_paths=n_paths, rng=RngStream(59), n_steps=n_steps)
    lam = np.abs(GRID.xi) ** 1.5
    expected = T * np.real(np.fft.ifft(np.exp(-lam * T) * np.fft.fft(prof)))
    got = reg.u_values(0.0).mean(axis=0)
    bias = euler_multiplier_bias(data.a, XI1**1.5, n_steps, T, 0) * T
    se = np.sqrt(2.0) * T / np.sqrt(n_paths)  # sd of mean(W_T^2)
    assert np.max(np.abs(got - expected)) <= 3.0 * se + bias


def test_regression_ill_conditioned_raises():
    data = make_data(g=np.sin(XI1 * GRID.x))
    with pytest.raises(IllConditioned):
        solve_bspde_regression(
            data, n_paths=200, rng=RngStream(29), n_steps=16, cond_threshold=1.0
        )


def test_regression_stability_guard():
    # retaining a high mode under a coarse step trips the diffusion number
    g_term = np.sin(60 * XI1 * GRID.x)
    data = make_data(g=g_term)
    with pytest.raises(StabilityError):
        solve_bspde_regression(data, n_paths=50, rng=RngStream(31), n_steps=4)


def analytic_single_mode_norms(alpha, beta, T, n_steps, output_stride):
    """Direct norm computation for u(t,x) = e^{-(T-t) xi1^alpha} sin(xi1 x)."""
    times = np.linspace(0.0, T, n_steps + 1)[::output_stride]
    decay = np.exp(-(T - times) * XI1**alpha)
    u = decay[None, :, None] * np.sin(XI1 * GRID.x)[None, None, :]
    dt_out = times[1] - times[0]
    lhs = space_process_norm(u, GRID, dt_out, alpha + beta, kind="l2")
    lhs += space_process_norm(u, GRID, dt_out, beta, kind="s2")
    g_arr = np.sin(XI1 * GRID.x)[None, None, :]
    rhs = space_process_norm(g_arr, GRID, 1.0, alpha / 2 + beta, kind="s2")
    return lhs / rhs


def test_holder_ratio_single_mode_matches_direct():
    alpha, beta = 1.5, 0.6
    data = make_data(alpha=alpha, g=np.sin(XI1 * GRID.x), beta=beta)
    rep = verify_holder_estimate(data, beta=beta, n_steps=64, output_stride=4)
    direct = analytic_single_mode_norms(alpha, beta, 1.0, 64, 4)
    assert rep.ratio == pytest.approx(direct, abs=1e-6)


def test_holder_ratio_scale_invariant():
    rng = np.random.default_rng(37)
    g1 = random_smooth(GRID, rng)
    prof = random_smooth(GRID, rng)
    d1 = make_data(g=g1, f=lambda t: prof * (1 + 0.2 * t))
    d2 = make_data(g=2 * g1, f=lambda t: 2 * prof * (1 + 0.2 * t))
    r1 = verify_holder_estimate(d1, beta=0.6, n_steps=32)
    r2 = verify_holder_estimate(d2, beta=0.6, n_steps=32)
    assert r1.ratio == pytest.approx(r2.ratio, rel=1e-12)


def test_holder_ratio_zero_data_undefined():
    data = make_data(g=np.zeros(GRID.n))
    rep = verify_holder_estimate(data, beta=0.6, n_steps=16)
    assert rep.ratio is None


def test_holder_ratio_linear_gaussian_finite():
    prof = np.exp(-GRID.x**2 / 4)
    data = make_data(g=affine_terminal(prof, 0.5, 1.0, 1.0), beta=0.6)
    rep = verify_holder_estimate(data, beta=0.6, n_steps=32, n_paths=128, rng=RngStream(41))
    assert rep.ratio is not None and np.isfinite(rep.ratio)


FB_GRID = Grid1D(-16 * np.pi, 16 * np.pi, 2048)


def test_fbsde_crosscheck_odd_mode_vanishes_at_origin():
    data = BSPDEData(
        grid=FB_GRID,
        alpha=1.5,
        T=1.0,
        a=CoefficientA.constant(1.0),
        g=np.sin(FB_GRID.x),
    )
    res = fbsde_crosscheck(data, probes=[(0.0, 0.0)], rng=RngStream(43), n_paths=20000)
    (r,) = res
    assert abs(r.pde_value) < 1e-10
    assert r.passed


def test_fbsde_crosscheck_cosine_mode():
    data = BSPDEData(
        grid=FB_GRID,
        alpha=1.5,
        T=1.0,
        a=CoefficientA.constant(1.0),
        g=np.cos(FB_GRID.x),
    )
    res = fbsde_crosscheck(data, probes=[(0.0, 0.0)], rng=RngStream(47), n_paths=40000)
    (r,) = res
    assert r.pde_value == pytest.approx(np.exp(-1.0), abs=1e-6)
    assert r.passed


def test_fbsde_crosscheck_constant_drift():
    data = BSPDEData(
        grid=FB_GRID,
        alpha=1.5,
        T=1.0,
        a=CoefficientA.constant(1.0),
        g=np.cos(FB_GRID.x),
        b=lambda t: np.ones(FB_GRID.n),
    )
    res = fbsde_crosscheck(
        data, probes=[(0.0, 0.0), (0.5, 1.0)], rng=RngStream(53), n_paths=40000
    )
    # u(t, x) = e^{-(T-t)} cos(x + (T-t))
    assert res[0].pde_value == pytest.approx(np.exp(-1.0) * np.cos(1.0), abs=1e-4)
    for r in res:
        assert r.passed
