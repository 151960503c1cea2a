"""Capacity path-equivalence checks.

Checks:
1. Closed form against the direct quadrature on the full cluster grid
2. Analytical capacity against the Monte Carlo estimate
3. Normalisation of the ratio density
"""
import logging
from typing import Any, Dict, List, Tuple

import numpy as np

from ..capacity import CoopConfig, avg_capacity_meijerg, avg_capacity_quadrature, ratio_pdf
from ..config import CAPACITY_DEFAULTS
from ..interference import levy_gamma_miso
from ..montecarlo import simulate_capacity
from ..quadrature import integrate

logger = logging.getLogger("cellcap.evals.capacity")


class CapacityEval:
    """Evaluates the capacity formulas against each other and against simulation."""

    PATH_TOL = 1e-4
    MC_REL_TOL = 0.01
    MC_SIGMAS = 3.0
    NORM_TOL = 1e-4

    MC_CONFIGS: List[Tuple[int, int]] = [(1, 1), (1, 4), (2, 2), (2, 3), (3, 1), (3, 4)]

    def __init__(self, seed: int = 42, n_samples: int = 100_000):
        self.seed = seed
        self.n_samples = max(int(n_samples), 10_000)
        self.r_b = CAPACITY_DEFAULTS.r_b
        self.gamma = levy_gamma_miso(CAPACITY_DEFAULTS.lambda_bs, CAPACITY_DEFAULTS.n_t_interferer)

    def check_closed_form(self) -> Dict[str, Any]:
        worst = 0.0
        issues = []
        for n_b in (1, 2, 3):
            for n_t_c in (1, 2, 3, 4):
                cfg = CoopConfig(n_b=n_b, n_t_c=n_t_c, r_b=self.r_b)
                closed = avg_capacity_meijerg(cfg, self.gamma).value
                quad = avg_capacity_quadrature(cfg, self.gamma).value
                rel = abs(closed - quad) / quad
                worst = max(worst, rel)
                if rel > self.PATH_TOL:
                    issues.append(f"n_b={n_b}, n_t_c={n_t_c}: relative gap {rel:.3e}")
        return {"check": "closed_form_vs_quadrature", "passed": not issues, "statistic": worst,
                "threshold": self.PATH_TOL, "issues": issues}

    def check_monte_carlo(self) -> Dict[str, Any]:
        worst = 0.0
        issues = []
        per_config = {}
        for i, (n_b, n_t_c) in enumerate(self.MC_CONFIGS):
            cfg = CoopConfig(n_b=n_b, n_t_c=n_t_c, r_b=self.r_b)
            analytic = avg_capacity_meijerg(cfg, self.gamma).value
            mc = simulate_capacity(cfg, self.gamma, self.n_samples, self.seed + i)
            allowed = max(self.MC_REL_TOL * analytic, self.MC_SIGMAS * mc.error_estimate)
            gap = abs(mc.value - analytic)
            worst = max(worst, gap / allowed)
            per_config[f"{n_b}x{n_t_c}"] = {"analytic": analytic, "montecarlo": mc.value,
                                            "standard_error": mc.error_estimate}
            if gap > allowed:
                issues.append(f"n_b={n_b}, n_t_c={n_t_c}: analytic {analytic:.6g} vs Monte Carlo "
                              f"{mc.value:.6g} (allowed gap {allowed:.3g})")
        return {"check": "analytic_vs_montecarlo", "passed": not issues, "statistic": worst,
                "threshold": 1.0, "issues": issues, "configs": per_config}

    def check_ratio_normalisation(self) -> Dict[str, Any]:
        worst = 0.0
        for n_b, n_t_c in ((1, 1), (2, 2), (3, 4)):
            cfg = CoopConfig(n_b=n_b, n_t_c=n_t_c, r_b=self.r_b)
            # u = gamma*sqrt(eta) keeps the heavy tail integrable on a finite range
            total = 0.0
            for a, b in ((0.0, 1.0), (1.0, 10.0), (10.0, np.inf)):
                part, _ = integrate(
                    lambda u: ratio_pdf((u / self.gamma) ** 2, cfg, self.gamma) * 2.0 * u / self.gamma ** 2
                    if u > 0.0 else 0.0,
                    a, b, epsabs=1e-13, epsrel=1e-10, label="ratio_pdf normalisation",
                )
                total += part
            worst = max(worst, abs(total - 1.0))
        return {"check": "ratio_pdf_normalisation", "passed": worst <= self.NORM_TOL, "statistic": worst,
                "threshold": self.NORM_TOL,
                "issues": [] if worst <= self.NORM_TOL else [f"normalisation error {worst:.3e}"]}

    def evaluate(self) -> Dict[str, Any]:
        """
        Run all capacity checks.

        Returns:
            Evaluation result with per-check statistics
        """
        results = [
            self.check_closed_form(),
            self.check_monte_carlo(),
            self.check_ratio_normalisation(),
        ]
        for r in results:
            r["passed"] = bool(r["passed"])
            r["statistic"] = float(r["statistic"])
        passed = sum(1 for r in results if r["passed"])
        return {
            "eval_type": "capacity",
            "passed": passed == len(results),
            "results": results,
            "summary": {"total_checks": len(results), "passed_checks": passed, "gamma_levy": self.gamma},
            "issues": [f"{r['check']}: {i}" for r in results for i in r["issues"]],
        }
