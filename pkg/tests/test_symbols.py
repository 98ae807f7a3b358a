import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from levysobolev import symbols as S
from levysobolev.errors import EvalOverflow, InvalidParams

# ---------------------------------------------------------------------------
# constructors and validation
# ---------------------------------------------------------------------------


def test_brownian_example():
    sym = S.make_symbol(S.BrownianParams(sigma=1.0, b=0.0))
    assert sym(3.0) == pytest.approx(4.5 + 0.0j, abs=1e-14)


def test_nig_constraint_boundary():
    with pytest.raises(InvalidParams, match="alpha\\^2"):
        S.make_symbol(S.NIGParams(alpha=1.0, beta=(2.0, 0.0), delta=1.0, mu=(0.0, 0.0)))


def test_cgmy_y_range():
    with pytest.raises(InvalidParams, match="Y < 2"):
        S.make_symbol(S.CGMYParams(1.0, 5.0, 5.0, 2.3))
    with pytest.raises(InvalidParams, match="C, G, M"):
        S.make_symbol(S.CGMYParams(-1.0, 5.0, 5.0, 0.5))


def test_sigma_must_be_psd():
    with pytest.raises(InvalidParams, match="semidefinite"):
        S.make_symbol(S.BrownianParams(sigma=((1.0, 0.0), (0.0, -1.0)), b=(0.0, 0.0)))
    with pytest.raises(InvalidParams, match="symmetric"):
        S.make_symbol(S.BrownianParams(sigma=((1.0, 0.5), (0.0, 1.0)), b=(0.0, 0.0)))


def test_stable_skew_requires_alpha_one():
    with pytest.raises(InvalidParams, match="alpha = 1"):
        S.stable_symbol_1d(S.Stable1dParams(alpha=0.7, c=1.0, beta=0.5))


# ---------------------------------------------------------------------------
# closed-form values
# ---------------------------------------------------------------------------


def test_cauchy_value(cauchy):
    assert cauchy(2.0) == pytest.approx(2.0 + 0.0j, abs=1e-14)


def test_nig_value(nig_sym):
    # sqrt(101) - 10, frozen from high-precision arithmetic
    assert nig_sym(1.0).real == pytest.approx(0.04987562112089027, abs=1e-12)
    assert nig_sym(1.0).imag == pytest.approx(0.0, abs=1e-14)


def test_cgmy_matches_quadrature_oracle(cgmy15):
    # independent oracle: adaptive quadrature of the Levy integral
    C, G, M, Y, u = 1.0, 5.0, 5.0, 1.5, 10.0

    def part(f):
        return quad(f, 0.0, np.inf, limit=500, epsabs=1e-13, epsrel=1e-12)[0]

    re = part(lambda x: (1.0 - np.cos(u * x)) * C * np.exp(-M * x) * x ** (-1 - Y)) \
        + part(lambda x: (1.0 - np.cos(u * x)) * C * np.exp(-G * x) * x ** (-1 - Y))
    im = part(lambda x: -(np.sin(u * x) - u * x) * C * np.exp(-M * x) * x ** (-1 - Y)) \
        + part(lambda x: (np.sin(u * x) - u * x) * C * np.exp(-G * x) * x ** (-1 - Y))
    oracle = re + 1j * im
    assert abs(cgmy15(u) - oracle) <= 1e-7 * abs(oracle)


def test_student_t_matches_paper_cf_at_f4(student_t):
    # at f = 4 the paper's characteristic-function display is normalized;
    # A(u) = -log mu_hat(-u) evaluated independently via scipy's K_v
    from scipy.special import kv
    u = 2.3
    mu_hat = 2.0 * kv(1.0, 2.0 * u) / 1.0 * u  # (f/4)^{f/4} 2 K_{f/4}(sqrt f u) u^{f/4}/Gamma(f/2)
    expected = -np.log(mu_hat)
    assert student_t(u).real == pytest.approx(expected, rel=1e-12)
    assert student_t(0.0) == 0.0


def test_student_t_large_u_no_overflow(student_t):
    val = student_t(1e6)
    assert np.isfinite(val.real) and val.real > 0


def test_eval_overflow_reported():
    bad = S.symbol_from_callable(
        lambda pts: np.full(len(pts), np.inf, dtype=complex), d=1)
    with pytest.raises(EvalOverflow):
        bad(1.0)


def test_vg_value(vg_sym):
    # VG symbol is C log((1+iu/M)(1-iu/G)); real and log-growing for G = M
    u = 3.0
    assert vg_sym(u) == pytest.approx(np.log(1 + u**2 / 25.0), abs=1e-12)


def test_cgmy_y1_log_form():
    sym = S.make_symbol(S.CGMYParams(1.0, 5.0, 5.0, 1.0))
    u = 10.0
    expected = -((5 + 1j * u) * np.log((5 + 1j * u) / 5)
                 + (5 - 1j * u) * np.log((5 - 1j * u) / 5))
    assert sym(u) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# stable symbols
# ---------------------------------------------------------------------------


def test_stable_one_strict():
    sym = S.stable_symbol_1d(S.Stable1dParams(alpha=1.0, c=2.0, beta=0.0, tau=0.5))
    assert sym(3.0) == pytest.approx(6.0 + 1.5j, abs=1e-12)


def test_stable_one_skewed_at_e():
    sym = S.stable_symbol_1d(S.Stable1dParams(alpha=1.0, c=1.0, beta=1.0, tau=0.0))
    assert sym(np.e) == pytest.approx(np.e * (1.0 - 2j / np.pi), rel=1e-12)


def test_stable_half():
    sym = S.stable_symbol_1d(S.Stable1dParams(alpha=0.5, c=1.0))
    assert sym(4.0) == pytest.approx(2.0 + 0.0j, abs=1e-12)
    assert sym(0.0) == 0.0


def test_scaling_relation_stable():
    sym = S.stable_symbol_1d(S.Stable1dParams(alpha=0.7, c=1.0))
    grid = np.linspace(-9.0, 9.0, 41)
    res = S.check_semistable_scaling(sym, 2.0, 2.0 ** (1 / 0.7), 0.0, grid)
    assert res <= 1e-12


def test_scaling_relation_brownian_with_drift():
    sym = S.make_symbol(S.BrownianParams(sigma=1.0, b=0.3))
    grid = np.linspace(-9.0, 9.0, 41)
    # a A(u) - A(2u) = i (a - b) drift u, cancelled by c = (4-2)*0.3
    assert S.check_semistable_scaling(sym, 4.0, 2.0, 0.6, grid) <= 1e-12


def test_scaling_relation_cauchy(cauchy):
    grid = np.linspace(-9.0, 9.0, 41)
    assert S.check_semistable_scaling(cauchy, 3.0, 3.0, 0.0, grid) <= 1e-12


# ---------------------------------------------------------------------------
# char_fn and semigroup
# ---------------------------------------------------------------------------


def test_char_fn_cauchy(cauchy):
    assert cauchy.char_fn(2.0, 1.0) == pytest.approx(np.exp(-2.0), rel=1e-12)


def test_char_fn_brownian(brownian):
    assert brownian.char_fn(1.0, 2.0) == pytest.approx(np.exp(-2.0), rel=1e-12)


def test_char_fn_at_zero(cgmy15, nig_sym, cauchy):
    for sym in (cgmy15, nig_sym, cauchy):
        assert sym.char_fn(1.0, 0.0) == pytest.approx(1.0, abs=1e-14)
        assert sym(0.0) == 0.0


def test_semigroup_consistency(cgmy15, nig_skew, student_t):
    xi = np.linspace(-30.0, 30.0, 13)
    for sym in (cgmy15, nig_skew, student_t):
        lhs = sym.char_fn(0.7, xi) * sym.char_fn(0.4, xi)
        rhs = sym.char_fn(1.1, xi)
        assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


# ---------------------------------------------------------------------------
# invariants on random points
# ---------------------------------------------------------------------------

ALL_1D = [
    S.BrownianParams(sigma=1.0, b=0.4),
    S.NIGParams(alpha=10.0, beta=3.0, delta=1.0, mu=0.2),
    S.CauchyParams(c=2.0, gamma=0.5),
    S.StudentTParams(f=4.0, mu=0.1),
    S.CGMYParams(1.0, 2.0, 4.0, 0.5),
    S.CGMYParams(1.0, 5.0, 5.0, 1.5),
    S.CGMYParams(1.0, 5.0, 5.0, 0.0),
    S.Stable1dParams(alpha=1.0, c=1.0, beta=0.7, tau=0.3),
    S.Stable1dParams(alpha=1.6, c=2.0),
]


@pytest.mark.parametrize("params", ALL_1D, ids=lambda p: type(p).__name__ + str(ALL_1D.index(p) if p in ALL_1D else ""))
def test_hermitian_and_real_part(params, rng):
    sym = S.make_symbol(params)
    xi = rng.uniform(-50.0, 50.0, size=1000)
    vals = sym(xi)
    mirror = sym(-xi)
    assert np.all(np.abs(vals - np.conj(mirror)) <= 1e-10 * (1.0 + np.abs(vals)))
    assert np.all(vals.real >= -1e-10 * (1.0 + xi**2))


@pytest.mark.parametrize("params", ALL_1D[:6], ids=lambda p: type(p).__name__)
def test_quadratic_bound_frozen_constant(params, rng):
    sym = S.make_symbol(params)
    c = sym.quadratic_bound_constant
    assert c == sym.quadratic_bound_constant  # frozen
    r = rng.uniform(0.0, 1e6, size=400)
    vals = np.abs(sym(r))
    assert np.all(vals <= c * (1.0 + r) ** 2 * (1.0 + 1e-6))


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(-200.0, 200.0), t=st.floats(0.01, 20.0))
def test_char_fn_modulus_bounded(xi, t):
    sym = S.make_symbol(S.NIGParams(alpha=10.0, beta=3.0, delta=1.0, mu=0.2))
    assert abs(sym.char_fn(t, xi)) <= 1.0 + 1e-12


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(-1e4, 1e4))
def test_hermitian_property_cgmy(xi):
    sym = S.make_symbol(S.CGMYParams(1.0, 2.0, 4.0, 1.2))
    assert abs(sym(xi) - np.conj(sym(-xi))) <= 1e-10 * (1.0 + abs(sym(xi)))


# ---------------------------------------------------------------------------
# drift conventions
# ---------------------------------------------------------------------------


def test_cgmy_natural_drift_kills_linear_term():
    # with b = int x F(dx) the linear term cancels and Im A ~ u^{Y-1} decays
    sym = S.make_symbol(S.CGMYParams(1.0, 2.0, 4.0, 0.5))
    ratio = abs(sym(400.0).imag) / abs(sym(100.0).imag)
    assert ratio == pytest.approx(0.5, abs=0.1)  # ~ 4^{Y-1}


def test_cgmy_zero_drift_keeps_linear_term():
    sym = S.make_symbol(S.CGMYParams(1.0, 2.0, 4.0, 0.5, zero_drift=True))
    ratio = abs(sym(400.0).imag) / abs(sym(100.0).imag)
    assert ratio == pytest.approx(4.0, abs=0.3)


# ---------------------------------------------------------------------------
# multivariate and sums
# ---------------------------------------------------------------------------


def test_nig_multivariate_hermitian(rng):
    sym = S.make_symbol(S.NIGParams(alpha=10.0, beta=(3.0, 1.0), delta=1.0,
                                    mu=(0.1, -0.2)))
    pts = rng.uniform(-50.0, 50.0, size=(500, 2))
    vals, mirror = sym(pts), sym(-pts)
    assert np.all(np.abs(vals - np.conj(mirror)) <= 1e-10 * (1.0 + np.abs(vals)))
    assert np.all(vals.real >= -1e-10 * (1.0 + np.sum(pts**2, axis=1)))


def test_sum_of_symbols(brownian, nig_sym):
    total = brownian + nig_sym
    assert total(2.0) == pytest.approx(brownian(2.0) + nig_sym(2.0), rel=1e-14)
    assert total.family == "sum(brownian,nig)"


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

ROUND_TRIP = [
    S.BrownianParams(sigma=1.0, b=0.4),
    S.BrownianParams(sigma=((2.0, 0.5), (0.5, 1.0)), b=(0.1, -0.2)),
    S.NIGParams(alpha=10.0, beta=(3.0, 0.0), delta=1.0, mu=(0.0, 0.0),
                Delta=((1.0, 0.1), (0.1, 1.0))),
    S.CauchyParams(c=2.0, gamma=0.5),
    S.StudentTParams(f=4.0, mu=0.1),
    S.StudentTParams(f=3.0, delta=0.9, mu=0.0),
    S.CGMYParams(1.0, 2.0, 4.0, 0.5, zero_drift=True),
    S.Stable1dParams(alpha=1.0, c=1.0, beta=0.7, tau=0.3),
]


@pytest.mark.parametrize("params", ROUND_TRIP, ids=lambda p: type(p).__name__)
def test_params_record_round_trip(params):
    rec = S.params_to_record(params)
    assert S.params_from_record(rec) == params
    # records survive string round-trips (the CLI text surface)
    rec_str = {k: str(v) for k, v in rec.items()}
    assert S.params_from_record(rec_str) == params


def test_unknown_family_record():
    with pytest.raises(InvalidParams, match="unknown family"):
        S.params_from_record({"family": "meixner"})


# ---------------------------------------------------------------------------
# triplet
# ---------------------------------------------------------------------------


def test_triplet_validation():
    t = S.LevyTriplet(1, 0.0, 1.0)
    assert t.sigma.shape == (1, 1)
    with pytest.raises(InvalidParams):
        S.LevyTriplet(1, 0.0, -1.0)


def test_triplet_identity_truncation_needs_tail_moment():
    from levysobolev import measures as M
    heavy = M.LevyDensity(f=lambda x: 1.0 / (1.0 + np.abs(np.asarray(x)) ** 1.5),
                          finite_variation=False, cutoff=np.inf, name="heavy")
    with pytest.raises(InvalidParams, match="h\\(x\\)=x"):
        S.LevyTriplet(1, 0.0, 0.0, levy_density=heavy,
                      truncation=S.Truncation.IDENTITY)
    # unit-ball truncation accepts the same tail
    S.LevyTriplet(1, 0.0, 0.0, levy_density=heavy, truncation=S.Truncation.UNIT_BALL)
