import math
import sys

import numpy as np
import pytest
from pydantic import ValidationError

from cellcap.channel import NetworkParams, shadowing_from_sigma_db
from cellcap.config import settings
from cellcap.errors import DomainError, EmptySampleError
from cellcap.interference import levy_cdf, levy_pdf, stable_scale
from cellcap.montecarlo import (
    STREAM_INTERFERENCE,
    STREAM_LEVY,
    EmpiricalDistribution,
    SimConfig,
    bin_average,
    empirical_pdf,
    far_field_moments,
    histogram_density,
    interference_distribution,
    ks_distance,
    levy_samples,
    run_chunked,
    sample_poisson_field,
    simulate_aggregate_interference,
)

if sys.platform == 'win32':
    import io
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')


NETWORK = NetworkParams(lambda_bs=1.0 / (math.pi * 500.0 ** 2), sigma_r=4.0, n_t=4, n_r=2, m=1.0)
SHADOWING = shadowing_from_sigma_db(6.0)


def _uniform_draw(rng, n):
    return rng.random(n)


def test_run_chunked_independent_of_thread_count(monkeypatch):
    monkeypatch.setattr(settings, "chunk_size", 1000)
    monkeypatch.setattr(settings, "threads", 1)
    single = run_chunked(_uniform_draw, 10_500, seed=3, stream=STREAM_LEVY)
    monkeypatch.setattr(settings, "threads", 4)
    pooled = run_chunked(_uniform_draw, 10_500, seed=3, stream=STREAM_LEVY)
    assert single.size == 10_500
    np.testing.assert_array_equal(single, pooled)


def test_streams_and_seeds_are_distinct():
    a = run_chunked(_uniform_draw, 100, seed=3, stream=STREAM_LEVY)
    b = run_chunked(_uniform_draw, 100, seed=3, stream=STREAM_INTERFERENCE)
    c = run_chunked(_uniform_draw, 100, seed=4, stream=STREAM_LEVY)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(DomainError):
        run_chunked(_uniform_draw, 0, seed=3, stream=STREAM_LEVY)


def test_sim_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(network=NETWORK, shadowing=SHADOWING, r_max=100.0, r_min=200.0, n_samples=10, seed=0)
    with pytest.raises(ValidationError):
        SimConfig(network=NETWORK, shadowing=SHADOWING, n_samples=10, seed=-1)


def test_poisson_field_count_and_range():
    cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, r_max=5000.0, r_min=100.0, n_samples=1, seed=0)
    rng = np.random.default_rng(0)
    counts = []
    for _ in range(400):
        r = sample_poisson_field(cfg, rng)
        assert np.all((r >= 100.0) & (r <= 5000.0))
        counts.append(r.size)
    assert np.mean(counts) == pytest.approx(cfg.expected_count, rel=0.02)


def test_degenerate_annulus_does_not_crash():
    cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, r_min=1000.0, r_max=1000.001,
                    n_samples=100, seed=1)
    values = simulate_aggregate_interference(cfg, np.random.default_rng(1), 100)
    assert values.shape == (100,)
    assert np.all(values >= 0.0)
    assert isinstance(simulate_aggregate_interference(cfg, np.random.default_rng(1)), float)


def test_far_field_mean_matches_campbell():
    cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, n_samples=1, seed=0)
    mean, var = far_field_moments(cfg, 10_000.0, 50_000.0)
    mean_i = NETWORK.n_t * NETWORK.n_r * SHADOWING.omega
    expected = 2.0 * math.pi * NETWORK.lambda_bs * mean_i * (10_000.0 ** -2 - 50_000.0 ** -2) / 2.0
    assert mean == pytest.approx(expected, rel=1e-12)
    assert var > 0.0


def test_field_is_exact_unless_r_exact_is_set():
    cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, r_max=5000.0, n_samples=1, seed=0)
    assert cfg.r_exact is None
    explicit = cfg.model_copy(update={"r_exact": 5000.0})
    a = simulate_aggregate_interference(cfg, np.random.default_rng(4), 2000)
    b = simulate_aggregate_interference(explicit, np.random.default_rng(4), 2000)
    np.testing.assert_array_equal(a, b)


def test_exact_field_mean_matches_campbell():
    cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, r_min=100.0, r_max=2000.0,
                    n_samples=100_000, seed=11)
    mean, _ = far_field_moments(cfg, 100.0, 2000.0)
    samples = interference_distribution(cfg).samples
    assert np.mean(samples) == pytest.approx(mean, rel=0.05)


def test_levy_samples_fit():
    gamma = 2.5e-5
    samples = levy_samples(gamma, 100_000, seed=42)
    assert ks_distance(samples, lambda y: levy_cdf(y, gamma)) < 0.01


def test_aggregate_interference_is_levy():
    cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, r_max=50_000.0, n_samples=100_000, seed=42)
    emp = interference_distribution(cfg)
    assert isinstance(emp, EmpiricalDistribution)
    assert len(emp) == 100_000
    assert np.all(np.diff(emp.samples) >= 0.0)
    gamma = stable_scale(NETWORK, SHADOWING).gamma_levy
    assert ks_distance(emp, lambda y: levy_cdf(y, gamma)) < 0.015


def test_ks_distance_reference_cases():
    rng = np.random.default_rng(8)
    u = rng.random(100_000)
    uniform_cdf = lambda x: np.clip(x, 0.0, 1.0)
    assert ks_distance(u, uniform_cdf) < 0.01
    assert ks_distance(u, lambda x: np.clip(x - 0.1, 0.0, 1.0)) == pytest.approx(0.1, abs=0.01)
    assert ks_distance(np.full(10, 0.3), uniform_cdf) == pytest.approx(0.7)
    with pytest.raises(EmptySampleError):
        ks_distance(np.array([0.5]), uniform_cdf)


def test_histogram_against_bin_average():
    gamma = 1.0
    samples = levy_samples(gamma, 200_000, seed=9)
    edges = np.linspace(0.05, 3.0, 21)
    hist = histogram_density(samples, edges)
    model = bin_average(lambda y: levy_pdf(y, gamma), edges)
    assert np.max(np.abs(hist - model)) <= 0.04 * np.max(model)


def test_empirical_pdf_moments():
    rng = np.random.default_rng(4)
    samples = rng.gamma(4.0, 1.0, 50_000)
    density = empirical_pdf(samples)
    assert density.mean == pytest.approx(samples.mean(), rel=1e-2)
    assert density(-1.0) == 0.0
    assert density(density.support_max + 1.0) == 0.0
    assert density(4.0) > 0.0
    with pytest.raises(EmptySampleError):
        empirical_pdf(np.array([1.0]))


if __name__ == "__main__":
    print("\n" + "=" * 70)
    print("Testing Monte Carlo Oracle")
    print("=" * 70 + "\n")

    gamma = stable_scale(NETWORK, SHADOWING).gamma_levy
    for r_max in (10_000.0, 25_000.0, 50_000.0):
        cfg = SimConfig(network=NETWORK, shadowing=SHADOWING, r_max=r_max, n_samples=20_000, seed=42)
        ks = ks_distance(interference_distribution(cfg), lambda y: levy_cdf(y, gamma))
        print(f"r_max={r_max / 1000:>4.0f} km: KS vs Levy = {ks:.5f}")

    print("\n" + "=" * 70)
    print("Test Complete!")
    print("=" * 70)
