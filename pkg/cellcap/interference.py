"""Aggregate co-channel interference: the alpha-stable law of a Poisson field
of interferers, its numerical density, and the Levy case sigma_r = 4."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy.special import erfc, erfcinv
from scipy.stats import norm

from .channel import (
    NetworkParams,
    ShadowingParams,
    interferer_fractional_moment,
    shadowing_from_sigma_db,
)
from .config import workers
from .curves import CurveData
from .errors import DomainError, SweepError
from .quadrature import integrate
from .specfun import gamma_fn, log_gamma_fn

logger = logging.getLogger("cellcap.interference")

ArrayLike = Union[float, np.ndarray]

SWEEP_PARAMETERS = ("sigma_db", "lambda_bs", "sigma_r", "n_t", "n_r", "m")

# Characteristic function is negligible past exp(-u^alpha) < exp(-_CF_CUTOFF)
_CF_CUTOFF = 40.0
# Largest number of kernel oscillations handled without the Fourier routine
_DIRECT_OSCILLATIONS = 64.0
_SERIES_SWITCH = 10.0
_SERIES_TERMS = 200


class StableParams(BaseModel):
    """Totally skewed alpha-stable law of the aggregate interference."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0, le=1)
    c: float = Field(..., gt=0)

    @computed_field
    @property
    def gamma_levy(self) -> float:
        return self.c ** self.alpha


def q_factor(alpha: float) -> float:
    """pi*Gamma(2-alpha)*cos(pi*alpha/2)/(1-alpha), with the pi^2/2 limit at alpha = 1."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return float(np.pi ** 2 / 2.0)
    # cos(pi*alpha/2) written as sin(pi*(1-alpha)/2) keeps precision near alpha = 1
    return float(np.pi * gamma_fn(2.0 - alpha) * np.sin(np.pi * (1.0 - alpha) / 2.0) / (1.0 - alpha))


def stable_scale(np_: NetworkParams, sp: ShadowingParams) -> StableParams:
    """
    Stable-law parameters of the aggregate interference.

    gamma = lambda_bs * q(alpha) * E[I_b^alpha], c = gamma^(1/alpha).

    Raises:
        DomainError: alpha = 2/sigma_r outside (0, 1)
    """
    alpha = np_.alpha
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"stable_scale needs sigma_r > 2 (alpha in (0, 1)), got sigma_r={np_.sigma_r}")
    gamma = np_.lambda_bs * q_factor(alpha) * interferer_fractional_moment(alpha, np_, sp)
    return StableParams(alpha=alpha, c=gamma ** (1.0 / alpha))


def stable_cf(w: ArrayLike, stp: StableParams) -> Union[complex, np.ndarray]:
    """Characteristic function of the interference law at angular frequency w."""
    w_arr = np.asarray(w, dtype=float)
    cw = np.abs(stp.c * w_arr)
    sign = np.sign(w_arr)
    if stp.alpha < 1.0:
        power = cw ** stp.alpha
        out = np.exp(-power * (1.0 - 1j * sign * np.tan(np.pi * stp.alpha / 2.0)))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            log_term = np.where(cw > 0.0, np.log(np.where(cw > 0.0, cw, 1.0)), 0.0)
        out = np.exp(-cw * (1.0 + 1j * sign * (2.0 / np.pi) * log_term))
    if w_arr.ndim == 0:
        return complex(out)
    return out


def _phase(alpha: float):
    if alpha < 1.0:
        slope = np.tan(np.pi * alpha / 2.0)
        return lambda u: slope * u ** alpha
    return lambda u: -(2.0 / np.pi) * u * np.log(u) if u > 0.0 else 0.0


def _series_density(x: float, alpha: float):
    """Convergent large-argument expansion of the standard (c = 1) density."""
    kappa = 1.0 / np.sin(np.pi * (1.0 - alpha) / 2.0)
    log_x = np.log(x)
    total = 0.0
    for k in range(1, _SERIES_TERMS + 1):
        log_mag = (log_gamma_fn(k * alpha + 1.0) - log_gamma_fn(k + 1.0)
                   + k * np.log(kappa) - (k * alpha + 1.0) * log_x)
        mag = np.exp(log_mag)
        total += (-1.0) ** (k + 1) * mag * np.sin(np.pi * k * alpha)
        if k >= 2 and mag < 1e-17 * max(abs(total), 1e-300):
            return total / np.pi
    return None


def _left_tail_rate(alpha: float) -> float:
    """Smallest value of the Zolotarev kernel V on (0, pi) for 0 < alpha < 1."""
    return float((1.0 - alpha) * alpha ** (alpha / (1.0 - alpha))
                 * np.cos(np.pi * alpha / 2.0) ** (-1.0 / (1.0 - alpha)))


def _zolotarev_density(x: float, alpha: float) -> float:
    """
    Standard density left of the mode from Zolotarev's integral form.

    f(x) = alpha x^(1/(alpha-1)) / (pi (1-alpha)) int_0^pi V(phi) exp(-x^(alpha/(alpha-1)) V(phi)) dphi
    with V(phi) = cos(pi alpha/2)^(1/(alpha-1)) (sin phi / sin(alpha phi))^(alpha/(alpha-1))
    sin((1-alpha) phi) / sin phi. The integrand is positive and the exp(-k V_min)
    factor is applied outside the quadrature.
    """
    expo = alpha / (alpha - 1.0)
    k = x ** expo
    v_min = _left_tail_rate(alpha)
    log_pref = np.log(alpha / (np.pi * (1.0 - alpha))) + np.log(x) / (alpha - 1.0) - k * v_min
    if log_pref < -745.0:
        return 0.0
    c0 = np.cos(np.pi * alpha / 2.0) ** (1.0 / (alpha - 1.0))

    def integrand(phi: float) -> float:
        s = np.sin(phi)
        with np.errstate(all="ignore"):
            v = c0 * (s / np.sin(alpha * phi)) ** expo * np.sin((1.0 - alpha) * phi) / s
        if not np.isfinite(v) or k * (v - v_min) > 745.0:
            return 0.0
        return v * np.exp(-k * (v - v_min))

    value, _ = integrate(integrand, 0.0, np.pi, epsabs=0.0, epsrel=1e-10, limit=500,
                         accept_rel=1e-6, label=f"stable left tail at {x:g}")
    return float(value * np.exp(log_pref))


def _standard_density(x: float, alpha: float) -> float:
    if alpha < 1.0:
        if x ** (alpha / (alpha - 1.0)) * _left_tail_rate(alpha) >= 1.0:
            return _zolotarev_density(x, alpha)
        kappa = 1.0 / np.sin(np.pi * (1.0 - alpha) / 2.0)
        if x ** alpha >= _SERIES_SWITCH * kappa:
            series = _series_density(x, alpha)
            if series is not None:
                return max(series, 0.0)

    phase = _phase(alpha)
    u_end = _CF_CUTOFF ** (1.0 / alpha)

    if x * u_end <= 2.0 * np.pi * _DIRECT_OSCILLATIONS:
        def integrand(u: float) -> float:
            return np.exp(-u ** alpha) * np.cos(phase(u) - u * x)

        value, _ = integrate(integrand, 0.0, u_end, epsabs=1e-14, epsrel=1e-11, limit=2000,
                             accept_rel=1e-6, label=f"stable density at {x:g}")
    else:
        def damped_cos(u: float) -> float:
            return np.exp(-u ** alpha) * np.cos(phase(u))

        def damped_sin(u: float) -> float:
            return np.exp(-u ** alpha) * np.sin(phase(u))

        cos_part, _ = integrate(damped_cos, 0.0, np.inf, weight="cos", wvar=x, epsabs=1e-14,
                                limit=2000, limlst=200, accept_rel=1e-6,
                                label=f"stable density (cos) at {x:g}")
        sin_part, _ = integrate(damped_sin, 0.0, np.inf, weight="sin", wvar=x, epsabs=1e-14,
                                limit=2000, limlst=200, accept_rel=1e-6,
                                label=f"stable density (sin) at {x:g}")
        value = cos_part + sin_part
    return max(value / np.pi, 0.0)


def stable_pdf_numeric(y: ArrayLike, stp: StableParams) -> ArrayLike:
    """
    Density of the interference law by characteristic-function inversion.

    f(y) = (1/2pi) int Phi(w) exp(-jwy) dw, folded onto w > 0 and taken in
    units of the scale c. Left of the mode Zolotarev's positive integral is
    used; oscillatory tails go to QUADPACK's Fourier routine and far tails
    use the convergent power series.

    Args:
        y: Interference power(s), y > 0
        stp: Stable-law parameters

    Returns:
        Density, scalar or array matching the input

    Raises:
        NonConvergenceError: quadrature budget exhausted
    """
    arr = np.asarray(y, dtype=float)
    if arr.size == 0 or np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("stable_pdf_numeric requires positive finite arguments")
    flat = arr.reshape(-1)
    out = np.array([_standard_density(v / stp.c, stp.alpha) / stp.c for v in flat])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def levy_pdf(y: ArrayLike, gamma_levy: float) -> ArrayLike:
    """Levy density sqrt(gamma^2/2pi) exp(-gamma^2/2y) / y^(3/2)."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0.0) or not gamma_levy > 0.0:
        raise DomainError("levy_pdf requires y > 0 and gamma_levy > 0")
    g2 = gamma_levy ** 2
    out = np.sqrt(g2 / (2.0 * np.pi)) * np.exp(-g2 / (2.0 * arr)) / arr ** 1.5
    return float(out) if arr.ndim == 0 else out


def levy_cdf(y: ArrayLike, gamma_levy: float) -> ArrayLike:
    arr = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(arr > 0.0, erfc(gamma_levy / np.sqrt(2.0 * np.maximum(arr, 0.0))), 0.0)
    return float(out) if arr.ndim == 0 else out


def levy_quantile(p: ArrayLike, gamma_levy: float) -> ArrayLike:
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise DomainError("levy_quantile requires 0 < p < 1")
    out = gamma_levy ** 2 / (2.0 * erfcinv(p_arr) ** 2)
    return float(out) if p_arr.ndim == 0 else out


def levy_gamma_miso(lambda_bs: float, n_t: int) -> float:
    """Levy parameter of the single-antenna-receiver interference: 2 Gamma(3/2) pi lambda Gamma(N_t+1/2)/(N_t-1)!."""
    if int(n_t) != n_t or n_t < 1:
        raise DomainError(f"n_t must be a positive integer, got {n_t}")
    if not lambda_bs > 0.0:
        raise DomainError(f"lambda_bs must be positive, got {lambda_bs}")
    ratio = np.exp(log_gamma_fn(n_t + 0.5) - log_gamma_fn(float(n_t)))
    return float(2.0 * gamma_fn(1.5) * np.pi * lambda_bs * ratio)


def gaussian_reference(gamma_levy: float) -> Tuple[float, float]:
    """Gaussian (mean, std) matched to the Levy law by median and inter-quartile range."""
    median = levy_quantile(0.5, gamma_levy)
    iqr = levy_quantile(0.75, gamma_levy) - levy_quantile(0.25, gamma_levy)
    sigma = iqr / (norm.ppf(0.75) - norm.ppf(0.25))
    return float(median), float(sigma)


def gaussian_reference_pdf(y: ArrayLike, gamma_levy: float) -> ArrayLike:
    mu, sigma = gaussian_reference(gamma_levy)
    out = norm.pdf(y, loc=mu, scale=sigma)
    return float(out) if np.ndim(out) == 0 else out


def heavy_tail_ratio(gamma_levy: float, level: float = 0.99) -> float:
    """Levy tail mass beyond the matched Gaussian's `level` quantile over the Gaussian's own."""
    mu, sigma = gaussian_reference(gamma_levy)
    cut = mu + sigma * norm.ppf(level)
    return float((1.0 - levy_cdf(cut, gamma_levy)) / (1.0 - level))


def interference_pdf(y: ArrayLike, stp: StableParams) -> ArrayLike:
    """Closed form when alpha = 1/2, numerical inversion otherwise."""
    if abs(stp.alpha - 0.5) < 1e-12:
        return levy_pdf(y, stp.gamma_levy)
    return stable_pdf_numeric(y, stp)


def _vary(np_: NetworkParams, sp: ShadowingParams, vary: str, value) -> Tuple[NetworkParams, ShadowingParams]:
    if vary == "sigma_db":
        return np_, shadowing_from_sigma_db(value, sp.p_r)
    fields = np_.model_dump()
    fields[vary] = value
    return NetworkParams(**fields), sp


def _curve(np_: NetworkParams, sp: ShadowingParams, y_grid: np.ndarray, pool: ThreadPoolExecutor) -> np.ndarray:
    stp = stable_scale(np_, sp)
    if np_.sigma_r == 4.0:
        return np.asarray(levy_pdf(y_grid, stp.gamma_levy))
    values = pool.map(lambda y: stable_pdf_numeric(float(y), stp), y_grid)
    return np.array(list(values))


def pdf_sweep(
    network: NetworkParams,
    shadowing: ShadowingParams,
    vary: str,
    values: Sequence,
    y_grid: Sequence[float],
) -> List[CurveData]:
    """
    Interference density curves with one parameter varied.

    Args:
        network: Base network parameters
        shadowing: Base shadowing parameters
        vary: One of sigma_db, lambda_bs, sigma_r, n_t, n_r, m
        values: Values taken by the varied parameter
        y_grid: Interference powers at which each curve is evaluated

    Returns:
        One CurveData per value, in input order

    Raises:
        SweepError: evaluation failed; carries the offending value
    """
    key = vary.lower()
    if key not in SWEEP_PARAMETERS:
        raise DomainError(f"cannot vary '{vary}'; expected one of {', '.join(SWEEP_PARAMETERS)}")
    if len(values) == 0:
        raise DomainError("pdf_sweep needs at least one value")
    grid = np.asarray(y_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0.0):
        raise DomainError("y_grid must be non-empty and positive")

    curves = []
    with ThreadPoolExecutor(max_workers=workers()) as pool:
        for value in values:
            try:
                np_v, sp_v = _vary(network, shadowing, key, value)
                density = _curve(np_v, sp_v, grid, pool)
            except Exception as e:
                logger.error(f"pdf_sweep failed at {key}={value}: {e}")
                raise SweepError(key, value, e) from e

            label = format(value, "g") if isinstance(value, float) else str(value)
            logger.info(f"pdf_sweep {key}={label}: {grid.size} points")
            curves.append(CurveData(
                x=grid,
                y=density,
                series=f"{key}={label}",
                metadata={key: value, "alpha": np_v.alpha},
            ))
    return curves
