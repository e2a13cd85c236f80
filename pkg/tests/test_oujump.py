"""Jump-diffusion checks: scaling map, densities, first-passage, inversion."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from ehrenfestcat import ehrenfest as eh
from ehrenfestcat import oujump as ou
from ehrenfestcat.specfun import NonConvergenceError, SeriesControl

D_SYM = ou.DiffusionParams(alpha=1.2, beta=0.0, nu=0.001, xi=0.5)
D_BETA = ou.DiffusionParams(alpha=0.5, beta=0.02, nu=0.001, xi=0.5)


def test_params_validation():
    with pytest.raises(ValueError):
        ou.DiffusionParams(alpha=0.0, beta=0.0, nu=1.0)
    with pytest.raises(ValueError):
        ou.DiffusionParams(alpha=1.0, beta=0.0, nu=-1.0)
    with pytest.raises(ValueError):
        ou.ScalingMap(0.0, eh.ChainParams(N=2, lam=1.0, mu=1.0))


def test_scale_params_symmetric_case():
    p = eh.ChainParams(N=10, lam=0.6, mu=0.6, xi=0.5)
    d = ou.scale_params(ou.ScalingMap(0.01, p))
    assert d.alpha == pytest.approx(1.2)
    assert d.beta == 0.0
    assert d.nu == pytest.approx(0.001)
    assert d.xi == 0.5


def test_scale_params_drifting_case():
    p = eh.ChainParams(N=10, lam=0.3, mu=0.2, xi=0.5)
    m = ou.ScalingMap(0.01, p)
    assert m.gamma_drift == pytest.approx(10.0)
    d = ou.scale_params(m)
    assert d.alpha == pytest.approx(0.5)
    assert d.nu == pytest.approx(0.001)
    assert d.beta == pytest.approx(0.02)


def test_scale_params_beta_antisymmetric():
    a = ou.scale_params(ou.ScalingMap(0.01, eh.ChainParams(N=10, lam=0.3, mu=0.2, xi=0.5)))
    b = ou.scale_params(ou.ScalingMap(0.01, eh.ChainParams(N=10, lam=0.2, mu=0.3, xi=0.5)))
    assert a.beta == pytest.approx(-b.beta)


def test_chain_for_scale_roundtrip():
    p = ou.chain_for_scale(alpha=0.5, gamma=10.0, nu=0.001, xi=0.5, epsilon=0.01)
    assert p == eh.ChainParams(N=10, lam=0.3, mu=0.2, xi=0.5)
    with pytest.raises(ValueError):
        ou.chain_for_scale(alpha=0.5, gamma=0.0, nu=0.001, xi=0.5, epsilon=0.02)


# ----------------------------------------------------------------------
# free process


def test_f_free_is_normalized():
    val, _ = quad(lambda x: ou.f_free(D_BETA, x, 0.02, 0.7), -1.0, 1.0, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_f_free_long_time_is_stationary():
    for x in np.linspace(-0.1, 0.12, 12):
        assert ou.f_free(D_BETA, float(x), 0.05, 60.0) == pytest.approx(
            ou.w_free(D_BETA, float(x)), rel=1e-9, abs=1e-12
        )


def test_f_free_rejects_zero_time():
    with pytest.raises(ValueError):
        ou.f_free(D_SYM, 0.0, 0.0, 0.0)


def test_f_free_laplace_matches_time_quadrature():
    x, y, s = 0.01, 0.02, 0.5
    direct = ou.f_free_laplace(D_SYM, x, y, s)
    qv, _ = quad(lambda t: math.exp(-s * t) * ou.f_free(D_SYM, x, y, t), 0.0, np.inf,
                 limit=400)
    assert direct == pytest.approx(qv, rel=1e-7)


def test_f_free_laplace_min_max_symmetry():
    # the cylinder-function product depends on (x, y) only through min/max
    for s in (0.3, 1.1):
        a = ou.f_free_laplace(D_BETA, 0.01, 0.04, s)
        b = ou.f_free_laplace(D_BETA, 0.04, 0.01, s)
        ea = math.exp(-(0.01 - 0.04) * (0.05 - 2 * D_BETA.beta) / (2 * D_BETA.nu))
        eb = math.exp(-(0.04 - 0.01) * (0.05 - 2 * D_BETA.beta) / (2 * D_BETA.nu))
        assert a / ea == pytest.approx(b / eb, rel=1e-12)


def test_f_free_laplace_even_at_zero_beta():
    for s in (0.4, 2.0):
        assert ou.f_free_laplace(D_SYM, 0.01, 0.03, s) == pytest.approx(
            ou.f_free_laplace(D_SYM, -0.01, -0.03, s), rel=1e-12
        )


# ----------------------------------------------------------------------
# stationary and transient densities with resets


def test_w_cat_normalized():
    for d in (D_SYM, D_BETA):
        sd = math.sqrt(d.nu)
        lo = min(0.0, d.beta) - 12.0 * sd
        hi = max(0.0, d.beta) + 12.0 * sd
        val, _ = quad(lambda x: ou.W_cat(d, x), lo, hi, points=[0.0, d.beta], limit=400)
        assert val == pytest.approx(1.0, abs=1e-7)


def test_w_cat_mirror_symmetry():
    dm = ou.DiffusionParams(alpha=0.5, beta=-0.02, nu=0.001, xi=0.5)
    for x in np.linspace(-0.09, 0.11, 23):
        assert ou.W_cat(D_BETA, float(x)) == pytest.approx(
            ou.W_cat(dm, float(-x)), rel=1e-12, abs=1e-300
        )


def test_w_cat_small_xi_limit():
    d = ou.DiffusionParams(alpha=1.2, beta=0.0, nu=0.001, xi=1e-4)
    xs = np.linspace(-0.12, 0.12, 25)
    peak = ou.w_free(d, 0.0)
    dev = max(abs(ou.W_cat(d, float(x)) - ou.w_free(d, float(x))) for x in xs)
    assert dev / peak < 1e-3  # tolerance relative to the density scale


def test_w_cat_requires_xi():
    with pytest.raises(ValueError):
        ou.W_cat(ou.DiffusionParams(alpha=1.0, beta=0.0, nu=0.01, xi=0.0), 0.1)


def test_f_cat_normalized():
    for d in (D_SYM, D_BETA):
        for t in (0.3, 2.0):
            val, _ = quad(lambda x: ou.f_cat(d, x, 0.05, t), -0.3, 0.3,
                          points=[0.0, 0.05], limit=300)
            assert val == pytest.approx(1.0, abs=1e-6)


def test_f_cat_long_time_is_stationary():
    for d in (D_SYM, D_BETA):
        t = 40.0 / min(d.alpha, d.xi)
        for x in np.linspace(-0.08, 0.1, 10):
            assert ou.f_cat(d, float(x), 0.05, t) == pytest.approx(
                ou.W_cat(d, float(x)), abs=1e-5
            )


def test_f_cat_sym_matches_quadrature_route():
    for x in (0.02, -0.02, 0.05, -0.05):
        for t in (0.5, 2.0):
            assert ou.f_cat_sym(D_SYM, x, 0.06, t) == pytest.approx(
                ou.f_cat(D_SYM, x, 0.06, t), abs=1e-6
            )


def test_f_cat_sym_zero_xi_is_free():
    d = ou.DiffusionParams(alpha=1.2, beta=0.0, nu=0.001, xi=0.0)
    assert ou.f_cat_sym(d, 0.02, 0.06, 0.8) == pytest.approx(
        ou.f_free(d, 0.02, 0.06, 0.8), rel=1e-14
    )


def test_f_cat_sym_even_in_x_from_origin():
    for t in (0.4, 1.5):
        assert ou.f_cat_sym(D_SYM, 0.03, 0.0, t) == pytest.approx(
            ou.f_cat_sym(D_SYM, -0.03, 0.0, t), rel=1e-12
        )


def test_f_cat_sym_domain():
    with pytest.raises(ValueError):
        ou.f_cat_sym(D_BETA, 0.01, 0.0, 1.0)  # beta != 0
    with pytest.raises(ValueError):
        ou.f_cat_sym(D_SYM, 0.0, 0.01, 1.0)  # x = 0
    with pytest.raises(NonConvergenceError):
        ou.f_cat_sym(D_SYM, 0.02, 0.06, 2.0, SeriesControl(rel_tol=1e-12, max_terms=10))


# ----------------------------------------------------------------------
# moments


def test_mean_cat_x_endpoints():
    assert ou.mean_cat_x(D_BETA, 0.07, 0.0) == pytest.approx(0.07)
    lim = D_BETA.alpha * D_BETA.beta / (D_BETA.xi + D_BETA.alpha)
    assert ou.mean_cat_x(D_BETA, 0.07, 1e3) == pytest.approx(lim)
    assert ou.mean_cat_x_limit(D_BETA) == pytest.approx(lim)


def test_m2_cat_x_initial_value():
    for y in (-0.04, 0.0, 0.07):
        assert ou.m2_cat_x(D_BETA, y, 0.0) == pytest.approx(y * y, abs=1e-16)


def test_m2_cat_x_limit():
    t = 200.0
    assert ou.m2_cat_x(D_BETA, 0.07, t) == pytest.approx(ou.m2_cat_x_limit(D_BETA), rel=1e-12)


def test_exact_lattice_mean_identity():
    # eps * chain mean equals the diffusion mean at y = j*eps, exactly in t
    eps = 0.01
    for p in (
        eh.ChainParams(N=10, lam=0.6, mu=0.6, xi=0.5),
        eh.ChainParams(N=10, lam=0.3, mu=0.2, xi=1.5),
        eh.ChainParams(N=5, lam=0.2, mu=0.6, xi=0.25),
    ):
        d = ou.scale_params(ou.ScalingMap(eps, p))
        j = min(p.N, 4)
        y = j * eps
        for t in (0.0, 0.3, 1.7, 8.0):
            assert eps * eh.mean_cat(p, j, t) == pytest.approx(
                ou.mean_cat_x(d, y, t), abs=1e-15
            )


def test_variance_scaling_convergence():
    # eps^2 * chain variance -> diffusion variance as eps shrinks (nu fixed)
    alpha, gamma, nu, xi = 0.8, 20.0, 0.001, 0.5
    j_over = 4  # start at y = 0.004 -> j = y/eps
    y = 0.004
    t = 1.0
    devs = []
    for eps in (0.01, 0.001):
        p = ou.chain_for_scale(alpha, gamma, nu, xi, eps)
        d = ou.scale_params(ou.ScalingMap(eps, p))
        j = round(y / eps)
        devs.append(abs(eps**2 * eh.var_cat(p, j, t) - ou.var_cat_x(d, y, t)))
    assert devs[1] < 0.2 * devs[0]


# ----------------------------------------------------------------------
# first passage


def test_fpt_laplace_free_tends_to_one():
    for d, y in ((D_SYM, 0.03), (D_BETA, 0.03), (D_BETA, -0.05)):
        assert ou.fpt_laplace_free(d, y, 1e-8) == pytest.approx(1.0, abs=1e-6)


def test_fpt_laplace_sym_matches_general():
    for s in (0.2, 0.7, 3.0):
        assert ou.fpt_laplace_free(D_SYM, 0.03, s) == pytest.approx(
            ou.fpt_laplace_free_sym(D_SYM, 0.03, s), rel=1e-10
        )


def test_fpt_laplace_matches_density_quadrature():
    s = 0.8
    qv, _ = quad(lambda t: math.exp(-s * t) * ou.fpt_density_free_sym_x(D_SYM, 0.03, t),
                 0.0, np.inf, limit=300)
    assert ou.fpt_laplace_free(D_SYM, 0.03, s) == pytest.approx(qv, rel=1e-7)


def test_fpt_density_free_sym_x_normalized():
    val, _ = quad(lambda t: ou.fpt_density_free_sym_x(D_SYM, 0.03, t), 0.0, np.inf,
                  limit=300)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_fpt_density_free_sym_x_even_and_vanishing_at_zero():
    for t in (0.2, 1.1):
        assert ou.fpt_density_free_sym_x(D_SYM, 0.04, t) == pytest.approx(
            ou.fpt_density_free_sym_x(D_SYM, -0.04, t), rel=1e-14
        )
    assert ou.fpt_density_free_sym_x(D_SYM, 0.04, 1e-6) == 0.0


def test_fpt_density_cat_sym_at_zero_is_xi():
    assert ou.fpt_density_cat_sym(D_SYM, 0.03, 0.0) == D_SYM.xi


def test_fpt_density_cat_sym_normalized():
    val, _ = quad(lambda t: ou.fpt_density_cat_sym(D_SYM, 0.03, t), 0.0, 80.0, limit=400)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_fpt_density_cat_sym_zero_xi_reduction():
    d = ou.DiffusionParams(alpha=1.2, beta=0.0, nu=0.001, xi=0.0)
    for t in (0.2, 1.0):
        assert ou.fpt_density_cat_sym(d, 0.03, t) == ou.fpt_density_free_sym_x(d, 0.03, t)


def test_mean_fpt_matches_symmetric_display():
    # the beta=0 mean display is (1/xi)[1 - the beta=0 transform at s=xi]
    direct = ou.mean_fpt_cat(D_SYM, 0.03)
    via_sym = (1.0 - ou.fpt_laplace_free_sym(D_SYM, 0.03, D_SYM.xi)) / D_SYM.xi
    assert direct == pytest.approx(via_sym, rel=1e-10)


def test_mean_fpt_matches_density_quadrature():
    mi, _ = quad(lambda t: t * ou.fpt_density_cat_sym(D_SYM, 0.03, t), 0.0, 80.0, limit=400)
    assert ou.mean_fpt_cat(D_SYM, 0.03) == pytest.approx(mi, abs=1e-6)


def test_m2_fpt_matches_density_quadrature():
    m2q, _ = quad(lambda t: t * t * ou.fpt_density_cat_sym(D_SYM, 0.03, t), 0.0, 120.0,
                  limit=400)
    assert ou.m2_fpt_cat(D_SYM, 0.03) == pytest.approx(m2q, abs=1e-6)


def test_mean_fpt_decreasing_in_xi():
    means = [
        ou.mean_fpt_cat(ou.DiffusionParams(alpha=1.2, beta=0.0, nu=0.001, xi=float(xi)), 0.03)
        for xi in np.linspace(0.1, 5.0, 20)
    ]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_fpt_laplace_cat_limit():
    # total mass: g_s -> 1 as s -> 0 (passage is certain under resets)
    for d in (D_SYM, D_BETA):
        assert ou.fpt_laplace_cat(d, 0.03, 1e-8) == pytest.approx(1.0, abs=1e-6)


def test_fpt_domain_errors():
    with pytest.raises(ValueError):
        ou.mean_fpt_cat(D_SYM, 0.0)
    with pytest.raises(ValueError):
        ou.fpt_density_cat_sym(D_BETA, 0.03, 1.0)
    with pytest.raises(ValueError):
        ou.mean_fpt_cat(ou.DiffusionParams(alpha=1.0, beta=0.0, nu=0.01, xi=0.0), 0.1)


# ----------------------------------------------------------------------
# Laplace inversion


def test_talbot_known_pair():
    for a in (1.0, 3.0):
        for t in (0.1, 1.0, 10.0):
            got = ou.talbot_invert(lambda s: 1.0 / (s + a), t)
            assert abs(got - math.exp(-a * t)) < 1e-8


def test_talbot_recovers_fpt_density():
    for t in (0.1, 0.5, 2.0):
        got = ou.talbot_invert(lambda s: ou.fpt_laplace_cat(D_SYM, 0.03, s), t)
        ref = ou.fpt_density_cat_sym(D_SYM, 0.03, t)
        assert got == pytest.approx(ref, rel=1e-5)


def test_talbot_recovers_free_density():
    d = ou.DiffusionParams(alpha=1.2, beta=0.0, nu=0.001, xi=0.0)
    got = ou.talbot_invert(lambda s: ou.f_free_laplace(d, 0.01, 0.02, s), 0.6)
    assert got == pytest.approx(ou.f_free(d, 0.01, 0.02, 0.6), rel=1e-5)


def test_talbot_general_beta_density_integrates_to_one():
    # no closed form off beta = 0; the inverted transform must still be a density
    grid = np.linspace(1e-3, 30.0, 400)
    vals = [ou.talbot_invert(lambda s: ou.fpt_laplace_cat(D_BETA, 0.03, s), float(t))
            for t in grid]
    assert all(v > -1e-8 for v in vals)
    mass = np.trapezoid(vals, grid)
    assert mass == pytest.approx(1.0, abs=5e-3)  # trapezoid + tail truncation error


def test_talbot_flags_precision_exhaustion():
    # node counts past the double-precision sweet spot amplify roundoff;
    # the agreement check must refuse them instead of returning garbage
    with pytest.raises(NonConvergenceError):
        ou.talbot_invert(lambda s: ou.fpt_laplace_cat(D_SYM, 0.03, s), 0.3, n_nodes=48)


def test_talbot_rejects_bad_input():
    with pytest.raises(ValueError):
        ou.talbot_invert(lambda s: 1.0 / s, 0.0)
    with pytest.raises(ValueError):
        ou.talbot_invert(lambda s: 1.0 / s, 1.0, n_nodes=4)
