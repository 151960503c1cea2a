"""Interference-law oracle checks.

Checks:
1. Levy sampler against the Levy CDF
2. Simulated aggregate interference against the Levy CDF
3. Truncation convergence of the simulated field
4. Fractional moment of the interferer power
5. Interferer power against the Generalized-K CDF
6. Numerical inversion against the Levy closed form
7. Heavy tail relative to the matched Gaussian
8. Histogram of the alpha = 2/3 field against the numerical density
"""
import logging
from typing import Any, Dict, List, Optional

import numpy as np

from ..channel import NetworkParams, ShadowingParams, generalized_k_cdf, interferer_fractional_moment, shadowing_from_sigma_db
from ..config import INTERFERENCE_DEFAULTS
from ..errors import DomainError
from ..interference import heavy_tail_ratio, levy_cdf, levy_pdf, stable_pdf_numeric, stable_scale
from ..montecarlo import (
    SimConfig,
    bin_average,
    histogram_density,
    interference_distribution,
    interferer_power_samples,
    ks_distance,
    levy_samples,
)

logger = logging.getLogger("cellcap.evals.interference")


def _check(name: str, statistic: float, threshold: float, passed: bool, **extra) -> Dict[str, Any]:
    result = {"check": name, "passed": bool(passed), "statistic": float(statistic),
              "threshold": float(threshold), "issues": []}
    if not passed:
        result["issues"].append(f"statistic {statistic:.6g} outside threshold {threshold:.6g}")
    result.update(extra)
    return result


class InterferenceEval:
    """Evaluates the interference model against the Poisson-field simulator."""

    LEVY_KS = 0.01
    FIELD_KS = 0.015
    TRUNCATION_SLACK = 0.003
    MOMENT_TOL = 0.01
    POWER_KS = 0.01
    INVERSION_TOL = 1e-3
    HEAVY_TAIL_FACTOR = 10.0
    HISTOGRAM_TOL = 0.03

    R_MAX_M = 50_000.0
    # Truncation radii as fractions of r_max
    FIELD_FRACTIONS = [0.2, 0.5, 1.0]

    def __init__(
        self,
        seed: int = 42,
        n_samples: int = 100_000,
        network: Optional[NetworkParams] = None,
        shadowing: Optional[ShadowingParams] = None,
        r_max: Optional[float] = None,
    ):
        self.seed = seed
        self.n_samples = n_samples
        d = INTERFERENCE_DEFAULTS
        self.network = network or NetworkParams(lambda_bs=d.lambda_bs, sigma_r=d.sigma_r, n_t=d.n_t,
                                                n_r=d.n_r, m=d.m)
        if self.network.sigma_r != 4.0:
            raise DomainError(f"the Levy oracle needs sigma_r = 4, got {self.network.sigma_r}")
        self.shadowing = shadowing or shadowing_from_sigma_db(d.sigma_db, d.p_r)
        self.r_max = r_max or self.R_MAX_M
        self.field_radii = [f * self.r_max for f in self.FIELD_FRACTIONS]
        self.stable = stable_scale(self.network, self.shadowing)

    def check_levy_sampler(self) -> Dict[str, Any]:
        gamma = self.stable.gamma_levy
        samples = levy_samples(gamma, self.n_samples, self.seed)
        ks = ks_distance(samples, lambda y: levy_cdf(y, gamma))
        return _check("levy_sampler_ks", ks, self.LEVY_KS, ks < self.LEVY_KS)

    def _field_ks(self, r_max: float) -> float:
        cfg = SimConfig(network=self.network, shadowing=self.shadowing, r_max=r_max,
                        n_samples=self.n_samples, seed=self.seed)
        emp = interference_distribution(cfg)
        gamma = self.stable.gamma_levy
        return ks_distance(emp, lambda y: levy_cdf(y, gamma))

    def check_field(self) -> List[Dict[str, Any]]:
        ks = [self._field_ks(r) for r in self.field_radii]
        monotone = all(b <= a + self.TRUNCATION_SLACK for a, b in zip(ks[:-1], ks[1:]))
        worst_increase = max(b - a for a, b in zip(ks[:-1], ks[1:]))
        return [
            _check("aggregate_interference_ks", ks[-1], self.FIELD_KS, ks[-1] < self.FIELD_KS,
                   r_max_m=self.field_radii[-1]),
            _check("truncation_convergence", worst_increase, self.TRUNCATION_SLACK, monotone,
                   ks_by_radius={f"{r:g}": k for r, k in zip(self.field_radii, ks)}),
        ]

    def check_fractional_moment(self) -> Dict[str, Any]:
        samples = interferer_power_samples(self.network, self.shadowing, self.n_samples, self.seed)
        empirical = float(np.mean(np.sqrt(samples)))
        exact = interferer_fractional_moment(0.5, self.network, self.shadowing)
        rel = abs(empirical - exact) / exact
        return _check("fractional_moment", rel, self.MOMENT_TOL, rel <= self.MOMENT_TOL)

    def check_interferer_power(self) -> Dict[str, Any]:
        samples = interferer_power_samples(self.network, self.shadowing, self.n_samples, self.seed + 1)
        ks = ks_distance(samples, lambda y: generalized_k_cdf(np.maximum(y, 1e-300), self.network, self.shadowing))
        return _check("interferer_power_ks", ks, self.POWER_KS, ks < self.POWER_KS)

    def check_inversion(self) -> Dict[str, Any]:
        gamma = self.stable.gamma_levy
        grid = np.geomspace(0.05, 200.0, 100) * gamma ** 2
        exact = levy_pdf(grid, gamma)
        numeric = stable_pdf_numeric(grid, self.stable)
        err = float(np.max(np.abs(numeric - exact)) / np.max(exact))
        return _check("inversion_convention", err, self.INVERSION_TOL, err <= self.INVERSION_TOL)

    def check_heavy_tail(self) -> Dict[str, Any]:
        ratio = heavy_tail_ratio(self.stable.gamma_levy)
        return _check("heavy_tail", ratio, self.HEAVY_TAIL_FACTOR, ratio >= self.HEAVY_TAIL_FACTOR)

    def check_alpha_two_thirds(self) -> Dict[str, Any]:
        """Compare the sigma_r = 3 field histogram with the bin-averaged numerical density."""
        network = self.network.model_copy(update={"sigma_r": 3.0})
        cfg = SimConfig(network=network, shadowing=self.shadowing, r_max=self.r_max,
                        n_samples=self.n_samples, seed=self.seed + 2)
        samples = interference_distribution(cfg).samples
        stp = stable_scale(network, self.shadowing)

        edges = np.linspace(0.0, np.quantile(samples, 0.9), 26)
        hist = histogram_density(samples, edges)
        model = bin_average(lambda y: stable_pdf_numeric(np.maximum(y, 1e-300), stp), edges)
        err = float(np.max(np.abs(hist - model)) / np.max(model))
        return _check("alpha_two_thirds_histogram", err, self.HISTOGRAM_TOL, err <= self.HISTOGRAM_TOL,
                      alpha=stp.alpha)

    def evaluate(self) -> Dict[str, Any]:
        """
        Run all interference checks.

        Returns:
            Evaluation result with per-check statistics
        """
        results = [self.check_levy_sampler()]
        results.extend(self.check_field())
        results.append(self.check_fractional_moment())
        results.append(self.check_interferer_power())
        results.append(self.check_inversion())
        results.append(self.check_heavy_tail())
        results.append(self.check_alpha_two_thirds())

        passed = sum(1 for r in results if r["passed"])
        return {
            "eval_type": "interference",
            "passed": passed == len(results),
            "results": results,
            "summary": {"total_checks": len(results), "passed_checks": passed,
                        "gamma_levy": self.stable.gamma_levy},
            "issues": [f"{r['check']}: {i}" for r in results for i in r["issues"]],
        }
