import math
import sys

import mpmath
import numpy as np
import pytest
from scipy.special import gammaln, kv

from cellcap.errors import DomainError, GammaOverflowError, UnsupportedMeijerGError
from cellcap.specfun import (
    MeijerGSpec,
    bessel_k,
    bessel_k_half_integer,
    gamma_fn,
    log_gamma_fn,
    meijer_g,
)

if sys.platform == 'win32':
    import io
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')


@pytest.mark.parametrize("x", [0.05, 0.5, 1.0, 1.5, 3.7, 10.0, 27.2, 50.0])
def test_gamma_matches_reference(x):
    assert gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-13)


@pytest.mark.parametrize("x", [57.3, 120.25, 170.5])
def test_gamma_large_arguments(x):
    assert gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-12)


def test_gamma_known_values():
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-15)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)


def test_gamma_domain():
    with pytest.raises(DomainError):
        gamma_fn(0.0)
    with pytest.raises(DomainError):
        gamma_fn(-2.5)
    with pytest.raises(GammaOverflowError):
        gamma_fn(172.0)


def test_log_gamma_stays_finite_past_overflow():
    for x in (0.3, 2.0, 171.0, 500.0, 1e4):
        assert log_gamma_fn(x) == pytest.approx(gammaln(x), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("v", [0.0, 0.3, 1.0, 2.3, 5.7, 12.0, 30.0])
@pytest.mark.parametrize("x", [0.01, 0.5, 1.7, 10.0, 50.0])
def test_bessel_k_matches_scipy(v, x):
    assert bessel_k(v, x) == pytest.approx(kv(v, x), rel=1e-9)


def test_bessel_k_even_in_order():
    for v in (0.7, 3.2, 9.9):
        assert bessel_k(-v, 2.0) == bessel_k(v, 2.0)


def test_half_integer_closed_form():
    # K_{1/2}(x) = sqrt(pi/2x) e^-x
    assert bessel_k_half_integer(0, 2.0) == pytest.approx(math.sqrt(math.pi / 4.0) * math.exp(-2.0), rel=1e-15)
    for n in range(8):
        for x in (0.05, 1.0, 30.0):
            assert bessel_k_half_integer(n, x) == pytest.approx(kv(n + 0.5, x), rel=1e-12)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_k(1.0, 0.0)
    with pytest.raises(DomainError):
        bessel_k_half_integer(-1, 1.0)


@pytest.mark.parametrize("x", np.logspace(-6.0, 6.0, 13))
def test_meijer_g_log_identity(x):
    assert meijer_g(MeijerGSpec.log1p(), x) == pytest.approx(np.log1p(x), rel=1e-10)


@pytest.mark.parametrize("v", [0.5, 1.5, 2.5, 0.3])
def test_meijer_g_bessel_identity(v):
    spec = MeijerGSpec.bessel(v)
    for z in (0.05, 1.0, 8.0):
        assert meijer_g(spec, z * z / 4.0) == pytest.approx(2.0 * kv(v, z), rel=1e-8)


@pytest.mark.parametrize("v", [0.5, 1.5, 3.5])
@pytest.mark.parametrize("x", [0.01, 2.0, 300.0])
def test_meijer_g_capacity_instance_matches_mpmath(v, x):
    spec = MeijerGSpec.miso_capacity(v)
    mpmath.mp.dps = 30
    exact = mpmath.meijerg([[spec.a[0]], [spec.a[1]]], [spec.b, []], x)
    assert meijer_g(spec, x) == pytest.approx(float(exact), rel=1e-8)


def test_unsupported_meijer_instance():
    with pytest.raises(UnsupportedMeijerGError):
        MeijerGSpec(m=1, n=1, p=1, q=1, a=[0.5], b=[0.0])
    with pytest.raises(UnsupportedMeijerGError):
        MeijerGSpec(m=1, n=2, p=2, q=2, a=[1.0], b=[1.0, 0.0])


def test_meijer_g_domain():
    with pytest.raises(DomainError):
        meijer_g(MeijerGSpec.log1p(), 0.0)


if __name__ == "__main__":
    print("\n" + "=" * 70)
    print("Testing Special Functions")
    print("=" * 70 + "\n")

    for x in (0.5, 3.7, 170.5):
        print(f"Gamma({x}) = {gamma_fn(x):.17g}   reference {math.gamma(x):.17g}")
    for v, x in ((0.3, 0.5), (12.0, 1.7), (2.5, 10.0)):
        print(f"K_{v}({x}) = {bessel_k(v, x):.17g}   scipy {kv(v, x):.17g}")
    for x in (1e-3, 1.0, 1e3):
        print(f"G_log({x:g}) = {meijer_g(MeijerGSpec.log1p(), x):.17g}   ln(1+x) {np.log1p(x):.17g}")

    print("\n" + "=" * 70)
    print("Test Complete!")
    print("=" * 70)
