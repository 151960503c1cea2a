import math
import sys

import mpmath
import numpy as np
import pytest
from scipy import stats
from scipy.optimize import minimize_scalar

from cellcap.channel import NetworkParams, shadowing_from_sigma_db
from cellcap.errors import DomainError, SweepError
from cellcap.interference import (
    StableParams,
    gaussian_reference,
    heavy_tail_ratio,
    interference_pdf,
    levy_cdf,
    levy_gamma_miso,
    levy_pdf,
    levy_quantile,
    pdf_sweep,
    q_factor,
    stable_cf,
    stable_pdf_numeric,
    stable_scale,
)
from cellcap.montecarlo import (
    SimConfig,
    bin_average,
    histogram_density,
    interference_distribution,
)

if sys.platform == 'win32':
    import io
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')


LAMBDA_BS = 1.0 / (math.pi * 500.0 ** 2)
NETWORK = NetworkParams(lambda_bs=LAMBDA_BS, sigma_r=4.0, n_t=4, n_r=2, m=1.0)
SHADOWING = shadowing_from_sigma_db(6.0)


def _gamma_high_precision(sigma_db=6.0, n_t=4, n_r=2, m=1.0):
    mpmath.mp.dps = 40
    lam = 1 / (mpmath.e ** ((mpmath.mpf(sigma_db) / mpmath.mpf("8.686")) ** 2) - 1)
    omega = mpmath.sqrt((lam + 1) / lam)
    k = n_t * n_r * m
    alpha = mpmath.mpf(1) / 2
    q = mpmath.pi * mpmath.gamma(2 - alpha) * mpmath.cos(mpmath.pi * alpha / 2) / (1 - alpha)
    moment = ((m * lam / omega) ** (-alpha) * mpmath.gamma(lam + alpha) * mpmath.gamma(k + alpha)
              / (mpmath.gamma(lam) * mpmath.gamma(k)))
    return float(1 / (mpmath.pi * 500 ** 2) * q * moment)


def test_q_factor_values():
    assert q_factor(0.5) == pytest.approx(math.pi * math.gamma(1.5) * math.cos(math.pi / 4) / 0.5, rel=1e-14)
    assert q_factor(1.0) == pytest.approx(math.pi ** 2 / 2.0, rel=1e-15)
    assert q_factor(1.0 - 1e-9) == pytest.approx(math.pi ** 2 / 2.0, rel=1e-6)
    with pytest.raises(DomainError):
        q_factor(1.5)


def test_stable_scale_default_golden():
    stp = stable_scale(NETWORK, SHADOWING)
    assert stp.alpha == 0.5
    assert stp.gamma_levy == pytest.approx(_gamma_high_precision(), rel=1e-12)
    assert stp.c == pytest.approx(stp.gamma_levy ** 2, rel=1e-14)


def test_stable_scale_monotone_in_density():
    low = stable_scale(NETWORK.model_copy(update={"lambda_bs": 0.5 * LAMBDA_BS}), SHADOWING)
    high = stable_scale(NETWORK.model_copy(update={"lambda_bs": 2.0 * LAMBDA_BS}), SHADOWING)
    assert high.gamma_levy == pytest.approx(4.0 * low.gamma_levy, rel=1e-12)


def test_stable_scale_rejects_alpha_one():
    with pytest.raises(DomainError):
        stable_scale(NETWORK.model_copy(update={"sigma_r": 2.0}), SHADOWING)


def test_stable_cf_basic():
    stp = StableParams(alpha=0.5, c=2.0)
    assert stable_cf(0.0, stp) == 1.0
    w = np.array([-3.0, -0.5, 0.5, 3.0])
    cf = stable_cf(w, stp)
    assert np.all(np.abs(cf) <= 1.0)
    np.testing.assert_allclose(cf[:2][::-1], np.conj(cf[2:]), rtol=1e-14)
    assert abs(stable_cf(1.0, StableParams(alpha=1.0, c=1.0))) == pytest.approx(math.exp(-1.0))


def test_levy_pdf_matches_scipy():
    gamma = stable_scale(NETWORK, SHADOWING).gamma_levy
    y = np.geomspace(1e-3, 1e3, 25) * gamma ** 2
    np.testing.assert_allclose(levy_pdf(y, gamma), stats.levy.pdf(y, scale=gamma ** 2), rtol=1e-12)
    np.testing.assert_allclose(levy_cdf(y, gamma), stats.levy.cdf(y, scale=gamma ** 2), rtol=1e-12)


def test_levy_peak_location():
    gamma = 0.037
    res = minimize_scalar(lambda y: -levy_pdf(y, gamma), bounds=(1e-6 * gamma ** 2, 10 * gamma ** 2),
                          method="bounded", options={"xatol": 1e-16})
    assert res.x == pytest.approx(gamma ** 2 / 3.0, rel=1e-6)


def test_levy_quantile_inverts_cdf():
    for p in (0.01, 0.25, 0.5, 0.99):
        assert levy_cdf(levy_quantile(p, 2.0), 2.0) == pytest.approx(p, rel=1e-12)
    with pytest.raises(DomainError):
        levy_quantile(1.0, 2.0)


def test_levy_gamma_miso_single_antenna():
    assert levy_gamma_miso(LAMBDA_BS, 1) == pytest.approx(math.pi ** 2 * LAMBDA_BS / 2.0, rel=1e-13)
    assert levy_gamma_miso(LAMBDA_BS, 4) > levy_gamma_miso(LAMBDA_BS, 2)
    with pytest.raises(DomainError):
        levy_gamma_miso(LAMBDA_BS, 0)


def test_numeric_inversion_reproduces_levy():
    gamma = 1.3
    stp = StableParams(alpha=0.5, c=gamma ** 2)
    y = np.geomspace(0.05, 200.0, 40) * gamma ** 2
    exact = levy_pdf(y, gamma)
    numeric = stable_pdf_numeric(y, stp)
    assert np.max(np.abs(numeric - exact)) <= 1e-3 * np.max(exact)


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5, 8.0, 40.0])
def test_numeric_density_matches_scipy_stable(x):
    alpha = 2.0 / 3.0
    stp = StableParams(alpha=alpha, c=1.0)
    expected = stats.levy_stable.pdf(x, alpha, 1.0)
    assert stable_pdf_numeric(x, stp) == pytest.approx(expected, rel=1e-4)


def test_interference_pdf_dispatch():
    stp = StableParams(alpha=0.5, c=4.0)
    assert interference_pdf(3.0, stp) == levy_pdf(3.0, 2.0)


def test_heavy_tail_against_gaussian():
    gamma = stable_scale(NETWORK, SHADOWING).gamma_levy
    mu, sigma = gaussian_reference(gamma)
    assert mu == pytest.approx(levy_quantile(0.5, gamma))
    assert sigma > 0.0
    assert heavy_tail_ratio(gamma) >= 10.0


def test_pdf_sweep_sigma_db():
    grid = np.linspace(1e-12, 1.5e-9, 50)
    curves = pdf_sweep(NETWORK, SHADOWING, "sigma_db", [4.0, 6.0, 9.0], grid)
    assert [c.series for c in curves] == ["sigma_db=4", "sigma_db=6", "sigma_db=9"]
    for c in curves:
        assert len(c.x) == len(c.y) == 50
        assert min(c.y) >= 0.0


def test_fading_shape_has_little_influence():
    grid = np.linspace(1e-12, 1.5e-9, 300)
    curves = pdf_sweep(NETWORK, SHADOWING, "m", [1.0, 2.0, 3.0], grid)
    ys = np.array([c.y for c in curves])
    assert np.max(np.abs(ys - ys[0])) < 0.05 * np.max(ys)


@pytest.mark.parametrize("vary,values", [
    ("lambda_bs", [0.5 * LAMBDA_BS, LAMBDA_BS, 2.0 * LAMBDA_BS]),
    ("sigma_db", [4.0, 6.0, 9.0]),
    ("n_t", [1, 2, 4]),
    ("n_r", [1, 2, 4]),
])
def test_density_sweep_curves_cross_once(vary, values):
    grid = np.linspace(1e-12, 1.5e-9, 300)
    ys = [np.array(c.y) for c in pdf_sweep(NETWORK, SHADOWING, vary, values, grid)]
    for lower, higher in zip(ys[:-1], ys[1:]):
        sign = np.sign(higher - lower)
        sign = sign[sign != 0]
        assert np.count_nonzero(np.diff(sign)) == 1


def test_path_loss_sweep_on_default_grid():
    grid = np.linspace(1e-12, 1.5e-9, 300)
    curves = pdf_sweep(NETWORK, SHADOWING, "sigma_r", [3.0, 4.0, 5.0], grid)
    assert [c.series for c in curves] == ["sigma_r=3", "sigma_r=4", "sigma_r=5"]
    ys = np.array([c.y for c in curves])
    assert np.all(np.isfinite(ys))
    assert np.all(ys >= 0.0)
    gamma = stable_scale(NETWORK, SHADOWING).gamma_levy
    np.testing.assert_allclose(ys[1], levy_pdf(grid, gamma), rtol=1e-14)
    # alpha = 2/3 puts its mass far right of this grid
    assert np.max(ys[0]) < 1e-3 * np.max(ys[1])


@pytest.mark.parametrize("param", ["n_t", "n_r"])
def test_stable_scale_increases_with_antennas(param):
    counts = [1, 2, 4] if param == "n_t" else [1, 2]
    for m in (1.0, 2.0):
        for sigma_db in (4.0, 6.0, 9.0):
            sp = shadowing_from_sigma_db(sigma_db)
            gammas = [stable_scale(NETWORK.model_copy(update={param: n, "m": m}), sp).gamma_levy
                      for n in counts]
            assert np.all(np.diff(gammas) > 0.0)


def test_left_tail_far_below_the_mode():
    value = stable_pdf_numeric(1e-3, StableParams(alpha=0.4, c=1.0))
    assert 0.0 <= value < 1e-12


@pytest.mark.parametrize("x", [0.2, 0.5, 2.0])
def test_left_flank_matches_scipy_stable(x):
    expected = stats.levy_stable.pdf(x, 0.4, 1.0)
    assert stable_pdf_numeric(x, StableParams(alpha=0.4, c=1.0)) == pytest.approx(expected, rel=1e-5)


def test_pdf_sweep_errors():
    grid = [1e-10, 1e-9]
    with pytest.raises(DomainError):
        pdf_sweep(NETWORK, SHADOWING, "r_b", [1.0], grid)
    with pytest.raises(SweepError) as exc:
        pdf_sweep(NETWORK, SHADOWING, "sigma_db", [6.0, 25.0], grid)
    assert exc.value.value == 25.0
    assert isinstance(exc.value.cause, DomainError)


def test_alpha_two_thirds_against_simulated_field():
    network = NETWORK.model_copy(update={"sigma_r": 3.0})
    cfg = SimConfig(network=network, shadowing=SHADOWING, n_samples=100_000, seed=5)
    samples = interference_distribution(cfg).samples
    stp = stable_scale(network, SHADOWING)

    edges = np.linspace(0.0, np.quantile(samples, 0.9), 26)
    hist = histogram_density(samples, edges)
    model = bin_average(lambda y: stable_pdf_numeric(np.maximum(y, 1e-300), stp), edges)
    assert np.max(np.abs(hist - model)) <= 0.03 * np.max(model)


if __name__ == "__main__":
    print("\n" + "=" * 70)
    print("Testing Interference Model")
    print("=" * 70 + "\n")

    stp = stable_scale(NETWORK, SHADOWING)
    print(f"Default network: alpha={stp.alpha}, gamma={stp.gamma_levy:.12e}, c={stp.c:.6e}")
    print(f"High-precision gamma: {_gamma_high_precision():.12e}")
    print(f"Heavy-tail ratio at 99%: {heavy_tail_ratio(stp.gamma_levy):.2f}")
    print(f"Levy gamma (MISO, N_t=2): {levy_gamma_miso(LAMBDA_BS, 2):.6e}")

    print("\n" + "=" * 70)
    print("Test Complete!")
    print("=" * 70)
