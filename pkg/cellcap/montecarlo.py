"""Monte Carlo oracle: Poisson fields of interferers, Levy draws and capacity estimates.

Every public simulator is seeded. Work is cut into chunks of
settings.chunk_size samples, each with its own child of
SeedSequence(seed, spawn_key=(stream,)), and chunk outputs are concatenated
in chunk order, so results do not depend on the worker count.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.interpolate import PchipInterpolator
from scipy.stats import gaussian_kde, kstest

from .capacity import LN2, CapacityMethod, CapacityResult, CoopConfig
from .channel import NetworkParams, ShadowingParams, sample_interferer_power
from .config import CELL_RADIUS_M, settings, workers
from .errors import DomainError, EmptySampleError

logger = logging.getLogger("cellcap.montecarlo")

# Stream ids keep simulations that share a seed independent
STREAM_INTERFERENCE = 1
STREAM_INTERFERER_POWER = 2
STREAM_LEVY = 3
STREAM_CAPACITY = 4
STREAM_EIGEN = 5
STREAM_MIMO = 6

MIN_CAPACITY_SAMPLES = 10_000


class SimConfig(BaseModel):
    """Poisson field of interferers around a user at the origin."""

    model_config = ConfigDict(frozen=True)

    network: NetworkParams
    shadowing: ShadowingParams
    r_max: float = Field(100.0 * CELL_RADIUS_M, gt=0)
    r_min: float = Field(0.0, ge=0)
    # Opt-in: interferers beyond r_exact are replaced by a moment-matched Gaussian; None keeps the field exact
    r_exact: Optional[float] = Field(None, gt=0)
    n_samples: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def check_radii(self):
        if not self.r_max > self.r_min:
            raise ValueError(f"r_max ({self.r_max}) must exceed r_min ({self.r_min})")
        if self.r_exact is not None and not self.r_exact > self.r_min:
            raise ValueError(f"r_exact ({self.r_exact}) must exceed r_min ({self.r_min})")
        if self.expected_count < 10.0:
            logger.warning(f"Expected interferer count {self.expected_count:.2f} is below 10")
        return self

    @property
    def expected_count(self) -> float:
        return self.network.lambda_bs * np.pi * (self.r_max ** 2 - self.r_min ** 2)


class EmpiricalDistribution(BaseModel):
    """Sorted finite samples with the configuration that produced them."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray
    provenance: Optional[SimConfig] = None

    @field_validator("samples", mode="before")
    @classmethod
    def sort_samples(cls, v):
        arr = np.sort(np.asarray(v, dtype=float).reshape(-1))
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        return arr

    def __len__(self) -> int:
        return int(self.samples.size)


class EmpiricalDensity:
    """Kernel density estimate tabulated on a grid, PCHIP-interpolated, zero off the grid."""

    def __init__(self, grid: np.ndarray, values: np.ndarray):
        area = np.trapezoid(values, grid)
        self.grid = grid
        self.values = values / area
        self.mean = float(np.trapezoid(grid * self.values, grid))
        self.support_max = float(grid[-1])
        self._interp = PchipInterpolator(grid, self.values, extrapolate=False)

    def __call__(self, x):
        out = np.nan_to_num(self._interp(x), nan=0.0)
        return np.maximum(out, 0.0)

    def nodes(self, order: int = 8) -> Tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes on every knot interval, with weights times the density."""
        t, w = np.polynomial.legendre.leggauss(order)
        lo, hi = self.grid[:-1, None], self.grid[1:, None]
        half = 0.5 * (hi - lo)
        x = (lo + half * (1.0 + t)).reshape(-1)
        return x, (half * w).reshape(-1) * self(x)


def stream_seeds(seed: int, n_chunks: int, stream: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(entropy=seed, spawn_key=(stream,)).spawn(n_chunks)


def run_chunked(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    seed: int,
    stream: int,
) -> np.ndarray:
    """
    Run draw(rng, n) over fixed-size chunks on a thread pool.

    Args:
        draw: Produces n samples from the given generator
        n_samples: Total sample count
        seed: Master seed
        stream: Stream id separating independent simulations

    Returns:
        Samples concatenated in chunk order
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be positive, got {n_samples}")
    size = settings.chunk_size
    n_chunks = -(-n_samples // size)
    sizes = [min(size, n_samples - i * size) for i in range(n_chunks)]
    seqs = stream_seeds(seed, n_chunks, stream)

    def job(i: int) -> np.ndarray:
        return np.asarray(draw(np.random.default_rng(seqs[i]), sizes[i]), dtype=float)

    with ThreadPoolExecutor(max_workers=workers()) as pool:
        parts = list(pool.map(job, range(n_chunks)))
    return np.concatenate(parts)


def sample_poisson_field(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Distances of one realised field on [r_min, r_max] (density 2r/(r_max^2 - r_min^2))."""
    count = rng.poisson(cfg.expected_count)
    span = cfg.r_max ** 2 - cfg.r_min ** 2
    return np.sqrt(cfg.r_min ** 2 + (1.0 - rng.random(count)) * span)


def _radial_integral(a: float, b: float, exponent: float) -> float:
    """int_a^b r^(1 - exponent) dr."""
    if exponent == 2.0:
        return float(np.log(b / a))
    return float((b ** (2.0 - exponent) - a ** (2.0 - exponent)) / (2.0 - exponent))


def far_field_moments(cfg: SimConfig, r_inner: float, r_outer: float):
    """Mean and variance of the interference from the ring r_inner < r <= r_outer (Campbell)."""
    np_, sp = cfg.network, cfg.shadowing
    lam = sp.lambda_sh
    w_scale = np_.p_ant * sp.omega / lam
    mean_i = np_.p_ant * sp.omega * np_.n_t * np_.n_r
    second_i = lam * (lam + 1.0) * w_scale ** 2 * np_.k * (np_.k + 1.0) / np_.m ** 2
    sigma = np_.sigma_r
    mean = 2.0 * np.pi * np_.lambda_bs * mean_i * _radial_integral(r_inner, r_outer, sigma)
    var = 2.0 * np.pi * np_.lambda_bs * second_i * _radial_integral(r_inner, r_outer, 2.0 * sigma)
    return mean, var


def simulate_aggregate_interference(
    cfg: SimConfig,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> Union[float, np.ndarray]:
    """
    Draw(s) of the aggregate interference sum_b r_b^(-sigma_r) I_b.

    Args:
        cfg: Field description
        rng: Random generator owned by the caller
        size: Number of independent fields (None for a single float)

    Returns:
        Aggregate interference power(s)
    """
    n = 1 if size is None else int(size)
    np_, sp = cfg.network, cfg.shadowing
    r_hi = cfg.r_max if cfg.r_exact is None else min(cfg.r_exact, cfg.r_max)
    r_min2 = cfg.r_min ** 2
    span = r_hi ** 2 - r_min2
    counts = rng.poisson(np_.lambda_bs * np.pi * span, size=n)
    sums = np.zeros(n)

    cap = settings.max_batch_interferers
    start = 0
    while start < n:
        cum = np.cumsum(counts[start:])
        k = max(int(np.searchsorted(cum, cap, side="right")), 1)
        stop = start + k
        block = counts[start:stop]
        total = int(block.sum())
        if total:
            r2 = r_min2 + (1.0 - rng.random(total)) * span
            power = sample_interferer_power(np_, sp, rng, total)
            contrib = power * r2 ** (-np_.sigma_r / 2.0)
            owner = np.repeat(np.arange(k), block)
            sums[start:stop] = np.bincount(owner, weights=contrib, minlength=k)
        start = stop

    if cfg.r_max > r_hi:
        mean, var = far_field_moments(cfg, r_hi, cfg.r_max)
        sums += np.maximum(rng.normal(mean, np.sqrt(var), size=n), 0.0)

    if size is None:
        return float(sums[0])
    return sums


def interference_distribution(cfg: SimConfig) -> EmpiricalDistribution:
    """cfg.n_samples seeded aggregate-interference draws."""
    samples = run_chunked(
        lambda rng, n: simulate_aggregate_interference(cfg, rng, n),
        cfg.n_samples, cfg.seed, STREAM_INTERFERENCE,
    )
    logger.info(f"Simulated {samples.size} fields (r_max={cfg.r_max:g} m, "
                f"{cfg.expected_count:.0f} interferers expected)")
    return EmpiricalDistribution(samples=samples, provenance=cfg)


def interferer_power_samples(np_: NetworkParams, sp: ShadowingParams, n: int, seed: int) -> np.ndarray:
    return run_chunked(lambda rng, k: sample_interferer_power(np_, sp, rng, k), n, seed,
                       STREAM_INTERFERER_POWER)


def sample_levy(gamma_levy: float, rng: np.random.Generator, size: Optional[int] = None):
    """Levy draws as gamma^2 / Z^2 with Z standard normal."""
    if not gamma_levy > 0.0:
        raise DomainError(f"gamma_levy must be positive, got {gamma_levy}")
    z = rng.standard_normal(size)
    return gamma_levy ** 2 / (z * z)


def levy_samples(gamma_levy: float, n: int, seed: int) -> np.ndarray:
    return run_chunked(lambda rng, k: sample_levy(gamma_levy, rng, k), n, seed, STREAM_LEVY)


def simulate_capacity(
    cfg_coop: CoopConfig,
    gamma_levy: float,
    n_samples: int,
    seed: int,
    noise_power: float = 0.0,
) -> CapacityResult:
    """
    Direct estimate of E[log2(1 + r_b^-4 S_d / (N0 + S_I))].

    S_d ~ Gamma(n_b*n_t_c, scale 2), S_I ~ Levy(gamma). noise_power re-adds
    the AWGN term that the analytical paths neglect.

    Args:
        cfg_coop: Cooperative cluster
        gamma_levy: Levy parameter of the interference
        n_samples: Number of draws, at least 1e4
        seed: Master seed
        noise_power: Noise power N0 (0 for the published setting)

    Returns:
        CapacityResult with the sample standard error
    """
    if n_samples < MIN_CAPACITY_SAMPLES:
        raise DomainError(f"simulate_capacity needs at least {MIN_CAPACITY_SAMPLES} samples")
    if noise_power < 0.0:
        raise DomainError(f"noise_power must be non-negative, got {noise_power}")
    scale = cfg_coop.r_b ** -4.0

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        s_d = rng.gamma(cfg_coop.n_streams, 2.0, size=n)
        s_i = sample_levy(gamma_levy, rng, n)
        return np.log1p(scale * s_d / (noise_power + s_i)) / LN2

    values = run_chunked(draw, n_samples, seed, STREAM_CAPACITY)
    se = float(values.std(ddof=1) / np.sqrt(values.size))
    return CapacityResult(value=float(values.mean()), method=CapacityMethod.MONTECARLO,
                          error_estimate=se)


def sample_max_eigen_gain(n_r: int, n_tx: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Largest eigenvalue of H H^H for i.i.d. CN(0, 1) entries of an n_r x n_tx matrix H."""
    shape = (size, n_r, n_tx)
    H = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    gram = H @ np.conj(np.swapaxes(H, 1, 2))
    return np.linalg.eigvalsh(gram)[:, -1]


def eigen_gain_samples(n_r: int, n_tx: int, n: int, seed: int) -> np.ndarray:
    return run_chunked(lambda rng, k: sample_max_eigen_gain(n_r, n_tx, rng, k), n, seed, STREAM_EIGEN)


def empirical_pdf(samples: np.ndarray, points: int = 512) -> EmpiricalDensity:
    """Gaussian KDE of positive samples, tabulated on [0, max + 3 bandwidths]."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise EmptySampleError("empirical_pdf needs at least 2 samples")
    kde = gaussian_kde(samples)
    bandwidth = float(np.sqrt(kde.covariance[0, 0]))
    grid = np.linspace(0.0, samples.max() + 3.0 * bandwidth, points)
    return EmpiricalDensity(grid, kde(grid))


def simulate_mimo_capacity(
    n_r: int,
    n_tx: int,
    r_b: float,
    gamma_levy: float,
    n_samples: int,
    seed: int,
) -> CapacityResult:
    """E[log2(1 + lambda_max / (r_b^4 S_I))] with S_I ~ Levy(gamma)."""
    if n_samples < MIN_CAPACITY_SAMPLES:
        raise DomainError(f"simulate_mimo_capacity needs at least {MIN_CAPACITY_SAMPLES} samples")
    scale = r_b ** -4.0

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        gain = sample_max_eigen_gain(n_r, n_tx, rng, n)
        s_i = sample_levy(gamma_levy, rng, n)
        return np.log1p(scale * gain / s_i) / LN2

    values = run_chunked(draw, n_samples, seed, STREAM_MIMO)
    se = float(values.std(ddof=1) / np.sqrt(values.size))
    return CapacityResult(value=float(values.mean()), method=CapacityMethod.MONTECARLO,
                          error_estimate=se)


def ks_distance(emp: Union[EmpiricalDistribution, np.ndarray], cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between the samples and a reference CDF."""
    samples = emp.samples if isinstance(emp, EmpiricalDistribution) else np.asarray(emp, dtype=float)
    if samples.size < 2:
        raise EmptySampleError(f"ks_distance needs at least 2 samples, got {samples.size}")
    return float(kstest(samples, cdf).statistic)


def histogram_density(samples: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Histogram normalised by the full sample count, so it estimates the density on each bin."""
    samples = np.asarray(samples, dtype=float)
    counts, _ = np.histogram(samples, bins=edges)
    return counts / (samples.size * np.diff(edges))


def bin_average(pdf: Callable, edges: np.ndarray, order: int = 8) -> np.ndarray:
    """Average of pdf over each bin by Gauss-Legendre quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * np.diff(edges)
    x = mids[:, None] + halves[:, None] * nodes[None, :]
    values = np.asarray(pdf(x.reshape(-1)), dtype=float).reshape(x.shape)
    return 0.5 * (values * weights[None, :]).sum(axis=1)
