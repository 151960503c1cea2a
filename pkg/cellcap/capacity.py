"""Downlink average capacity of cooperative MISO/MIMO clusters under Levy interference."""
import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .channel import NetworkParams, ShadowingParams
from .config import CAPACITY_DEFAULTS, workers
from .curves import CurveData
from .errors import DimensionError, DomainError, NonConvergenceError, SweepError
from .interference import levy_gamma_miso, stable_scale
from .quadrature import integrate
from .specfun import MeijerGSpec, bessel_k_half_integer, log_gamma_fn, meijer_g

logger = logging.getLogger("cellcap.capacity")

LN2 = float(np.log(2.0))
_SQRT_2_OVER_PI = float(np.sqrt(2.0 / np.pi))
# Tail of a capacity integrand is dropped below this fraction of its peak
_TAIL_FRACTION = 1e-12


class CapacityMethod(str, enum.Enum):
    QUADRATURE = "quadrature"
    MEIJERG = "meijerg"
    MONTECARLO = "montecarlo"


class CoopConfig(BaseModel):
    """Cooperative cluster serving one cell-edge user."""

    model_config = ConfigDict(frozen=True)

    n_b: int = Field(..., ge=1, le=3, description="Cooperating BSs")
    n_t_c: int = Field(..., ge=1, le=4, description="Cooperative antennas per BS")
    r_b: float = Field(..., gt=0, description="BS-user distance in metres")

    @property
    def n_streams(self) -> int:
        return self.n_b * self.n_t_c

    @property
    def v(self) -> float:
        return self.n_streams - 0.5


class CapacityResult(BaseModel):
    """Average capacity in bits/s/Hz."""

    value: float = Field(..., ge=0)
    method: CapacityMethod
    error_estimate: float = Field(0.0, ge=0)


class CapacityScenario(BaseModel):
    """Parameters shared by every point of a capacity sweep."""

    model_config = ConfigDict(frozen=True)

    lambda_bs: float = Field(CAPACITY_DEFAULTS.lambda_bs, gt=0)
    n_t_interferer: int = Field(CAPACITY_DEFAULTS.n_t_interferer, ge=1)
    r_b: float = Field(CAPACITY_DEFAULTS.r_b, gt=0)
    n_t_c: int = Field(CAPACITY_DEFAULTS.n_t_c, ge=1, le=4)


def max_eigen_gain(H) -> float:
    """Largest eigenvalue of H H^H."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if H.size == 0:
        raise DimensionError("max_eigen_gain needs a non-empty matrix")
    gram = H @ H.conj().T
    return float(max(np.linalg.eigvalsh(gram)[-1], 0.0))


def covariance_rxx(cfg: CoopConfig, z: Sequence[float], sigma_r: float) -> float:
    """Desired-signal power sum_b sum_j r_b^(-sigma_r) |z_bj|^2 with unit antenna power."""
    z_arr = np.asarray(z, dtype=float).reshape(-1)
    if z_arr.size != cfg.n_streams:
        raise DimensionError(f"expected {cfg.n_streams} fading powers, got {z_arr.size}")
    if np.any(z_arr < 0.0):
        raise DomainError("fading powers must be non-negative")
    return float(np.sum(z_arr) * cfg.r_b ** (-sigma_r))


def _log_norm(cfg: CoopConfig) -> float:
    """log of 1/((N-1)! 2^N)."""
    n = cfg.n_streams
    return -log_gamma_fn(float(n)) - n * LN2


def desired_pdf_chisq(x, cfg: CoopConfig):
    """Gamma(N, scale 2) density of the combined desired-signal power, N = n_b*n_t_c."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("desired_pdf_chisq requires x > 0")
    n = cfg.n_streams
    out = np.exp(_log_norm(cfg) + (n - 1) * np.log(arr) - arr / 2.0)
    return float(out) if arr.ndim == 0 else out


def ratio_pdf(eta: float, cfg: CoopConfig, gamma_levy: float) -> float:
    """
    Density of eta' = S_d / S_I for chi-squared desired power and Levy interference.

    f(eta') = gamma^(v+1) sqrt(2/pi) / ((N-1)! 2^N) eta'^((v-1)/2) K_v(gamma sqrt(eta'))
    """
    eta = float(eta)
    if not eta > 0.0:
        raise DomainError(f"ratio_pdf requires eta > 0, got {eta}")
    v = cfg.v
    arg = gamma_levy * np.sqrt(eta)
    kv = bessel_k_half_integer(cfg.n_streams - 1, arg)
    if kv == 0.0:
        return 0.0
    log_f = ((v + 1.0) * np.log(gamma_levy) + np.log(_SQRT_2_OVER_PI) + _log_norm(cfg)
             + 0.5 * (v - 1.0) * np.log(eta) + np.log(kv))
    return float(np.exp(log_f))


def _scaled_bessel(n: int, u: float) -> float:
    """u^v K_v(u) for v = n + 1/2, finite at u = 0."""
    total = 0.0
    coef = 1.0
    # coef_k = (n+k)!/(k!(n-k)! 2^k)
    for k in range(n + 1):
        total += coef * u ** (n - k)
        coef *= (n + k + 1) * (n - k) / ((k + 1) * 2.0)
    return float(np.sqrt(np.pi / 2.0) * np.exp(-u) * total)


def avg_capacity_quadrature(cfg: CoopConfig, gamma_levy: float) -> CapacityResult:
    """
    Average capacity as a direct integral over the ratio density.

    Substituting u = gamma*sqrt(eta') gives
    C = 2 sqrt(2/pi)/((N-1)! 2^N) int_0^inf log2(1 + u^2/(gamma^2 r_b^4)) u^v K_v(u) du,
    split at u = 1 (eta' = gamma^-2) and at the knee of the logarithm, and cut
    where the integrand falls below 1e-12 of its peak.

    Args:
        cfg: Cooperative cluster
        gamma_levy: Levy parameter of the interference

    Returns:
        CapacityResult with the summed quadrature error estimate
    """
    if not gamma_levy > 0.0:
        raise DomainError(f"gamma_levy must be positive, got {gamma_levy}")
    n = cfg.n_streams - 1
    knee = gamma_levy * cfg.r_b ** 2
    inv_knee2 = 1.0 / knee ** 2
    prefactor = 2.0 * _SQRT_2_OVER_PI * np.exp(_log_norm(cfg))

    def integrand(u: float) -> float:
        return np.log1p(u * u * inv_knee2) / LN2 * _scaled_bessel(n, u)

    scan = np.geomspace(1e-6, 1e4, 400)
    values = np.array([integrand(u) for u in scan])
    peak = float(values.max())
    if not peak > 0.0:
        raise NonConvergenceError("capacity integrand vanished on the scan grid",
                                  {"gamma_levy": gamma_levy, "r_b": cfg.r_b})
    u_end = float(scan[int(np.argmax(values))])
    while integrand(u_end) > _TAIL_FRACTION * peak:
        u_end *= 1.25

    breaks = sorted({0.0, u_end, *(b for b in (1.0, knee) if 0.0 < b < u_end)})
    total = 0.0
    abserr = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        part, err = integrate(integrand, a, b, epsabs=0.0, epsrel=1e-12, limit=400,
                              accept_rel=1e-9, label="avg_capacity_quadrature")
        total += part
        abserr += err

    value = prefactor * total
    return CapacityResult(value=value, method=CapacityMethod.QUADRATURE,
                          error_estimate=prefactor * abserr)


def avg_capacity_meijerg(cfg: CoopConfig, gamma_levy: float) -> CapacityResult:
    """
    Closed-form average capacity through G^{4,1}_{2,4}.

    C = p/(2 ln 2) r_b^(2(v+1)) G^{4,1}_{2,4}(gamma^2 r_b^4 / 4 | ...), with
    p = gamma^(v+1) sqrt(2/pi)/((N-1)! 2^N).
    """
    if not gamma_levy > 0.0:
        raise DomainError(f"gamma_levy must be positive, got {gamma_levy}")
    v = cfg.v
    spec = MeijerGSpec.miso_capacity(v)
    z = gamma_levy ** 2 * cfg.r_b ** 4 / 4.0
    g = meijer_g(spec, z)
    log_pref = (v + 1.0) * np.log(gamma_levy * cfg.r_b ** 2) + np.log(_SQRT_2_OVER_PI) + _log_norm(cfg)
    value = float(np.exp(log_pref) * g / (2.0 * LN2))
    # meijer_g holds its contour integral to 1e-9 relative
    return CapacityResult(value=max(value, 0.0), method=CapacityMethod.MEIJERG,
                          error_estimate=abs(value) * 1e-9)


def _density_mean(desired_pdf: Callable[[float], float], upper: float) -> float:
    mean = getattr(desired_pdf, "mean", None)
    if mean is not None:
        return float(mean)
    value, _ = integrate(lambda x: x * float(desired_pdf(x)), 0.0, upper, epsabs=1e-12,
                         epsrel=1e-10, label="desired density mean")
    return value


def _adaptive_inner(desired_pdf: Callable[[float], float], mu: float, upper: float) -> Callable[[float], float]:
    """J(w^2) = int_0^upper exp(-w^2/(2x)) x^(-1/2) f_d(x) dx by adaptive quadrature."""

    def inner(w: float) -> float:
        u = w * w

        def f(x: float) -> float:
            if x <= 0.0:
                return 0.0
            return np.exp(-u / (2.0 * x)) / np.sqrt(x) * float(desired_pdf(x))

        cuts = sorted({c for c in (mu, w) if 0.0 < c < upper})
        edges = [0.0, *cuts, upper]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            part, _ = integrate(f, a, b, epsabs=1e-14, epsrel=1e-10, limit=500,
                                accept_rel=1e-6, label="mimo inner integral")
            total += part
        return total

    return inner


def mimo_avg_capacity(
    np_: NetworkParams,
    sp: ShadowingParams,
    r_b: float,
    desired_pdf: Callable[[float], float],
    gamma_levy: Optional[float] = None,
) -> CapacityResult:
    """
    Exact average capacity of the MIMO link with MRT/MRC and Levy interference.

    C = E[log2(1 + X / (r_b^4 Y))] for desired gain X ~ desired_pdf and
    Y ~ Levy(gamma). With u = gamma^2 eta and the desired variable x = eta z,
    C = sqrt(2/pi) int_0^inf log2(1 + w^2/(gamma^2 r_b^4)) J(w^2) dw,
    J(u) = int_0^inf exp(-u/(2x)) x^(-1/2) f_d(x) dx.

    Args:
        np_: Interferer network (sigma_r must be 4)
        sp: Interferer shadowing
        r_b: BS-user distance in metres
        desired_pdf: Density of the desired gain; may expose `mean`,
            `support_max` and a `nodes()` quadrature rule
        gamma_levy: Override for the Levy parameter (defaults to stable_scale)

    Returns:
        CapacityResult computed by quadrature
    """
    if np_.sigma_r != 4.0:
        raise DomainError(f"mimo_avg_capacity requires sigma_r = 4, got {np_.sigma_r}")
    if not r_b > 0.0:
        raise DomainError(f"r_b must be positive, got {r_b}")
    if gamma_levy is None:
        gamma_levy = stable_scale(np_, sp).gamma_levy

    upper = float(getattr(desired_pdf, "support_max", np.inf))
    mu = _density_mean(desired_pdf, upper)
    knee = gamma_levy * r_b ** 2

    tabulated = getattr(desired_pdf, "nodes", None)
    if callable(tabulated):
        # Piecewise-cubic density: a Gauss rule per knot interval
        xs, weights = tabulated()
        inv_sqrt = weights / np.sqrt(xs)
        half_inv = 0.5 / xs

        def inner(w: float) -> float:
            return float(np.dot(inv_sqrt, np.exp(-(w * w) * half_inv)))
    else:
        inner = _adaptive_inner(desired_pdf, mu, upper)

    def outer(w: float) -> float:
        return np.log1p((w / knee) ** 2) / LN2 * inner(w)

    split = sorted({c for c in (np.sqrt(mu), knee) if c > 0.0})
    edges = [0.0, *split]
    total = 0.0
    abserr = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        part, err = integrate(outer, a, b, epsabs=1e-14, epsrel=1e-9, limit=200,
                              accept_rel=1e-6, label="mimo outer integral")
        total += part
        abserr += err
    tail, err = integrate(outer, edges[-1], np.inf, epsabs=1e-14, epsrel=1e-9, limit=200,
                          accept_rel=1e-6, label="mimo outer integral")
    total += tail
    abserr += err

    return CapacityResult(value=_SQRT_2_OVER_PI * total, method=CapacityMethod.QUADRATURE,
                          error_estimate=_SQRT_2_OVER_PI * abserr)


def capacity_point(cfg: CoopConfig, gamma_levy: float) -> CapacityResult:
    """Closed form, falling back to the quadrature if the contour integral fails."""
    try:
        return avg_capacity_meijerg(cfg, gamma_levy)
    except NonConvergenceError as e:
        logger.warning(f"Meijer-G path failed for {cfg}: {e}; using quadrature")
        return avg_capacity_quadrature(cfg, gamma_levy)


AXES = ("coop_antennas", "bs_density")


def capacity_sweep(
    axis: str,
    scenario: CapacityScenario,
    grid: Sequence[float],
    cbs: Sequence[int] = (1, 2, 3),
) -> List[CurveData]:
    """
    Capacity curves over cooperative antennas or interferer density, one per CBS.

    Args:
        axis: coop_antennas (grid of n_t_c) or bs_density (grid of lambda_bs)
        scenario: Fixed parameters
        grid: Values along the axis
        cbs: Numbers of cooperating BSs

    Returns:
        One CurveData per CBS value, in input order
    """
    if axis not in AXES:
        raise DomainError(f"axis must be one of {', '.join(AXES)}, got '{axis}'")
    if len(grid) == 0:
        raise DomainError("capacity_sweep needs a non-empty grid")

    if axis == "coop_antennas":
        for value in grid:
            if int(value) != value or not 1 <= value <= 4:
                raise DomainError(f"n_t_c grid values must be integers in [1, 4], got {value}")
    else:
        for value in grid:
            if not 0.5e-6 <= value <= 3.5e-6:
                raise DomainError(f"lambda_bs grid values must lie in [0.5e-6, 3.5e-6], got {value}")

    def evaluate(job):
        n_b, value = job
        try:
            if axis == "coop_antennas":
                cfg = CoopConfig(n_b=n_b, n_t_c=int(value), r_b=scenario.r_b)
                gamma = levy_gamma_miso(scenario.lambda_bs, scenario.n_t_interferer)
            else:
                cfg = CoopConfig(n_b=n_b, n_t_c=scenario.n_t_c, r_b=scenario.r_b)
                gamma = levy_gamma_miso(value, scenario.n_t_interferer)
            return capacity_point(cfg, gamma).value
        except Exception as e:
            raise SweepError(axis, value, e) from e

    jobs = [(int(n_b), value) for n_b in cbs for value in grid]
    with ThreadPoolExecutor(max_workers=workers()) as pool:
        results = list(pool.map(evaluate, jobs))

    curves = []
    for i, n_b in enumerate(cbs):
        ys = results[i * len(grid):(i + 1) * len(grid)]
        curves.append(CurveData(
            x=[float(v) for v in grid],
            y=ys,
            series=f"CBS={int(n_b)}",
            metadata={"n_b": int(n_b), "axis": axis},
        ))
        logger.info(f"capacity_sweep {axis} CBS={n_b}: {[round(y, 6) for y in ys]}")
    return curves


# Ratios quoted for the cooperative-antenna and interferer-density curves, in percent
QUOTED_PERCENTAGES: List[Dict] = [
    {"id": "ant_gain_cbs1", "quoted": 209.0},
    {"id": "ant_gain_cbs2", "quoted": 173.0},
    {"id": "ant_gain_cbs3", "quoted": 153.0},
    {"id": "cbs2_over_cbs1_ntc1", "quoted": 80.99},
    {"id": "cbs3_over_cbs2_ntc1", "quoted": 37.88},
    {"id": "cbs2_over_cbs1_ntc4", "quoted": 50.9},
    {"id": "cbs3_over_cbs2_ntc4", "quoted": 27.62},
    {"id": "density_loss_cbs1", "quoted": 94.86},
    {"id": "density_loss_cbs2", "quoted": 93.40},
    {"id": "density_loss_cbs3", "quoted": 92.22},
    {"id": "cbs2_over_cbs1_low_density", "quoted": 48.76},
    {"id": "cbs3_over_cbs2_low_density", "quoted": 21.99},
    {"id": "cbs2_over_cbs1_high_density", "quoted": 90.98},
    {"id": "cbs3_over_cbs2_high_density", "quoted": 43.81},
]

LOW_DENSITY = 0.5e-6
HIGH_DENSITY = 3.5e-6


def quoted_ratios(n_t: int, scenario: Optional[CapacityScenario] = None) -> Dict[str, float]:
    """
    Compute the fourteen quoted capacity ratios (in percent) for one interferer antenna count.

    Args:
        n_t: Antennas per interfering BS
        scenario: r_b, default density and n_t_c for the density curves

    Returns:
        Mapping of ratio id to computed percentage
    """
    scenario = scenario or CapacityScenario()
    scenario = scenario.model_copy(update={"n_t_interferer": int(n_t)})

    ant = {c.metadata["n_b"]: c.y for c in capacity_sweep("coop_antennas", scenario, [1, 2, 3, 4])}
    dens = {c.metadata["n_b"]: c.y for c in capacity_sweep("bs_density", scenario, [LOW_DENSITY, HIGH_DENSITY])}

    def gain(a, b):
        return 100.0 * (a / b - 1.0)

    def loss(a, b):
        return 100.0 * (1.0 - a / b)

    return {
        "ant_gain_cbs1": gain(ant[1][3], ant[1][0]),
        "ant_gain_cbs2": gain(ant[2][3], ant[2][0]),
        "ant_gain_cbs3": gain(ant[3][3], ant[3][0]),
        "cbs2_over_cbs1_ntc1": gain(ant[2][0], ant[1][0]),
        "cbs3_over_cbs2_ntc1": gain(ant[3][0], ant[2][0]),
        "cbs2_over_cbs1_ntc4": gain(ant[2][3], ant[1][3]),
        "cbs3_over_cbs2_ntc4": gain(ant[3][3], ant[2][3]),
        "density_loss_cbs1": loss(dens[1][1], dens[1][0]),
        "density_loss_cbs2": loss(dens[2][1], dens[2][0]),
        "density_loss_cbs3": loss(dens[3][1], dens[3][0]),
        "cbs2_over_cbs1_low_density": gain(dens[2][0], dens[1][0]),
        "cbs3_over_cbs2_low_density": gain(dens[3][0], dens[2][0]),
        "cbs2_over_cbs1_high_density": gain(dens[2][1], dens[1][1]),
        "cbs3_over_cbs2_high_density": gain(dens[3][1], dens[2][1]),
    }
