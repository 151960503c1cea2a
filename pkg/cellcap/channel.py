"""Per-link channel statistics: Gamma shadowing, Nakagami-m fading and the
Generalized-K law of one base station's interference power."""
import logging
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gammainc

from .errors import DomainError
from .quadrature import integrate
from .specfun import bessel_k, log_gamma_fn

logger = logging.getLogger("cellcap.channel")

ArrayLike = Union[float, np.ndarray]

# dB-to-neper conversion constant 10/ln(10)
DB_PER_NEPER = 8.686

_CDF_TABLE_POINTS = 512


class ShadowingParams(BaseModel):
    """Gamma approximation of lognormal shadowing."""

    model_config = ConfigDict(frozen=True)

    sigma_db: float = Field(..., gt=0)
    lambda_sh: float = Field(..., gt=0)
    omega: float = Field(..., gt=0)
    p_r: float = Field(1.0, gt=0)


class NetworkParams(BaseModel):
    """Poisson field of interfering base stations."""

    model_config = ConfigDict(frozen=True)

    lambda_bs: float = Field(..., gt=0, description="BS per square metre")
    sigma_r: float = Field(..., ge=2, description="Path-loss exponent")
    n_t: int = Field(..., ge=1)
    n_r: int = Field(..., ge=1)
    m: float = Field(1.0, gt=0, description="Nakagami shape")
    p_ant: float = Field(1.0, gt=0)

    @property
    def alpha(self) -> float:
        return 2.0 / self.sigma_r

    @property
    def k(self) -> float:
        """Shape of the summed fading power over all antenna pairs."""
        return self.n_t * self.n_r * self.m


def shadowing_from_sigma_db(sigma_db: float, p_r: float = 1.0) -> ShadowingParams:
    """
    Map a lognormal spread to the Gamma shadowing parameters.

    Args:
        sigma_db: Shadowing spread in dB, in (0, 20]
        p_r: Received average power anchor

    Returns:
        ShadowingParams with lambda_sh = 1/(exp((sigma/8.686)^2) - 1)
        and omega = p_r * sqrt((lambda_sh + 1)/lambda_sh)
    """
    sigma_db = float(sigma_db)
    p_r = float(p_r)
    if not 0.0 < sigma_db <= 20.0:
        raise DomainError(f"sigma_dB must lie in (0, 20], got {sigma_db}")
    if not p_r > 0.0:
        raise DomainError(f"p_r must be positive, got {p_r}")

    lambda_sh = 1.0 / np.expm1((sigma_db / DB_PER_NEPER) ** 2)
    omega = p_r * np.sqrt((lambda_sh + 1.0) / lambda_sh)
    return ShadowingParams(sigma_db=sigma_db, lambda_sh=float(lambda_sh), omega=float(omega), p_r=p_r)


def _positive_array(name: str, x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size == 0 or np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} requires positive finite arguments")
    return arr


def _scalar_or_array(values: np.ndarray, like: np.ndarray) -> ArrayLike:
    if like.ndim == 0:
        return float(values)
    return values


def gamma_shadow_pdf(x: ArrayLike, sp: ShadowingParams) -> ArrayLike:
    """Gamma shadowing density with shape lambda_sh and mean omega."""
    arr = _positive_array("gamma_shadow_pdf", x)
    lam = sp.lambda_sh
    rate = lam / sp.omega
    log_pdf = lam * np.log(rate) + (lam - 1.0) * np.log(arr) - rate * arr - log_gamma_fn(lam)
    return _scalar_or_array(np.exp(log_pdf), arr)


def generalized_k_pdf(y: ArrayLike, np_: NetworkParams, sp: ShadowingParams) -> ArrayLike:
    """
    Density of one BS's interference power w * sum(g) (Generalized-K law).

    Args:
        y: Power value(s), y > 0
        np_: Network parameters (k = n_t * n_r * m)
        sp: Shadowing parameters

    Returns:
        Density at y, scalar or array matching the input
    """
    arr = _positive_array("generalized_k_pdf", y)
    lam = sp.lambda_sh
    k = np_.k
    b = np_.m * lam / (np_.p_ant * sp.omega)
    order = lam - k
    half = 0.5 * (lam + k)
    log_const = np.log(2.0) + half * np.log(b) - log_gamma_fn(lam) - log_gamma_fn(k)

    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    for i, yi in enumerate(flat):
        kv = bessel_k(order, 2.0 * np.sqrt(b * yi))
        if kv <= 0.0:
            out[i] = 0.0
            continue
        out[i] = np.exp(log_const + (half - 1.0) * np.log(yi) + np.log(kv))
    return _scalar_or_array(out.reshape(arr.shape), arr)


def _generalized_k_cdf_point(y: float, np_: NetworkParams, sp: ShadowingParams) -> float:
    lam = sp.lambda_sh
    scale = np_.p_ant * sp.omega / lam
    mode = max(lam - 1.0, 0.0) * scale

    def integrand(w: float) -> float:
        if w <= 0.0:
            return 0.0
        return float(gamma_shadow_pdf(w, sp)) * gammainc(np_.k, np_.m * y / w)

    low, _ = integrate(integrand, 0.0, max(mode, scale), epsabs=1e-12, epsrel=1e-10,
                       label="generalized_k_cdf")
    high, _ = integrate(integrand, max(mode, scale), np.inf, epsabs=1e-12, epsrel=1e-10,
                        label="generalized_k_cdf")
    return min(max(low + high, 0.0), 1.0)


def generalized_k_cdf(y: ArrayLike, np_: NetworkParams, sp: ShadowingParams) -> ArrayLike:
    """
    CDF of the Generalized-K interference power.

    Conditions on the shadow factor: F(y) = E_w[P(G <= y / w)] with G the
    Gamma(k, 1/m) fading sum. Arrays are served from a log-spaced table with
    linear interpolation in log(y).
    """
    arr = _positive_array("generalized_k_cdf", y)
    if arr.size <= 8:
        values = np.array([_generalized_k_cdf_point(v, np_, sp) for v in arr.reshape(-1)])
        return _scalar_or_array(values.reshape(arr.shape), arr)

    lo = max(float(arr.min()), 1e-300)
    hi = float(arr.max())
    grid = np.geomspace(lo, hi, _CDF_TABLE_POINTS) if hi > lo else np.array([lo])
    table = np.array([_generalized_k_cdf_point(v, np_, sp) for v in grid])
    values = np.interp(np.log(arr), np.log(grid), table)
    return values


def interferer_fractional_moment(alpha: float, np_: NetworkParams, sp: ShadowingParams) -> float:
    """E[I_b^alpha] for the Generalized-K interference power."""
    lam = sp.lambda_sh
    k = np_.k
    log_ratio = (log_gamma_fn(lam + alpha) - log_gamma_fn(lam)
                 + log_gamma_fn(k + alpha) - log_gamma_fn(k))
    base = np_.m * lam / (np_.p_ant * sp.omega)
    return float(base ** (-alpha) * np.exp(log_ratio))


def sample_nakagami_power(m: float, rng: np.random.Generator, size: Optional[int] = None):
    """Nakagami-m fading power: Gamma(shape m, mean 1)."""
    if not m > 0:
        raise DomainError(f"Nakagami shape must be positive, got {m}")
    return rng.gamma(m, 1.0 / m, size=size)


def sample_interferer_power(
    np_: NetworkParams,
    sp: ShadowingParams,
    rng: np.random.Generator,
    size: Optional[int] = None,
):
    """
    One BS's received interference power w * sum_{i,j} g_ij.

    The n_r * n_t i.i.d. Gamma(m, 1/m) powers are drawn as their exact sum,
    Gamma(n_t * n_r * m, 1/m).
    """
    w = rng.gamma(sp.lambda_sh, np_.p_ant * sp.omega / sp.lambda_sh, size=size)
    g = rng.gamma(np_.k, 1.0 / np_.m, size=size)
    return w * g
