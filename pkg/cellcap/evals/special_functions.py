"""Special-function identity checks.

Checks:
1. Gamma recurrence Gamma(x+1) = x Gamma(x)
2. K_v = K_-v and agreement of the two Bessel paths
3. Meijer-G logarithm identity
4. Meijer-G Bessel identity
"""
import logging
from typing import Any, Dict, List

import numpy as np

from ..specfun import MeijerGSpec, bessel_k, bessel_k_half_integer, gamma_fn, meijer_g

logger = logging.getLogger("cellcap.evals.special_functions")


class SpecialFunctionEval:
    """Evaluates the special-function kernel against exact identities."""

    GAMMA_TOL = 1e-12
    BESSEL_TOL = 1e-10
    LOG_TOL = 1e-10
    MEIJER_BESSEL_TOL = 1e-8

    BESSEL_ORDERS = [0.0, 0.3, 1.0, 2.3, 5.7, 12.0, 30.0]
    BESSEL_ARGS = [0.01, 0.5, 1.7, 10.0, 50.0]

    def __init__(self, seed: int = 0):
        self.seed = seed

    def check_gamma_recurrence(self) -> Dict[str, Any]:
        rng = np.random.default_rng(self.seed)
        xs = rng.uniform(0.0, 30.0, 200)
        xs = xs[xs > 0.0]
        worst = max(abs(gamma_fn(x + 1.0) - x * gamma_fn(x)) / gamma_fn(x + 1.0) for x in xs)
        return {
            "check": "gamma_recurrence",
            "passed": worst <= self.GAMMA_TOL,
            "statistic": worst,
            "threshold": self.GAMMA_TOL,
            "issues": [] if worst <= self.GAMMA_TOL else [f"max relative error {worst:.3e}"],
        }

    def check_bessel_symmetry(self) -> Dict[str, Any]:
        worst = 0.0
        for v in self.BESSEL_ORDERS:
            for x in self.BESSEL_ARGS:
                pos, neg = bessel_k(v, x), bessel_k(-v, x)
                worst = max(worst, abs(pos - neg) / pos)
        for n in range(8):
            for x in self.BESSEL_ARGS:
                closed = bessel_k_half_integer(n, x)
                worst = max(worst, abs(bessel_k(n + 0.5, x) - closed) / closed)
        return {
            "check": "bessel_symmetry",
            "passed": worst <= self.BESSEL_TOL,
            "statistic": worst,
            "threshold": self.BESSEL_TOL,
            "issues": [] if worst <= self.BESSEL_TOL else [f"max relative error {worst:.3e}"],
        }

    def check_meijer_log(self) -> Dict[str, Any]:
        spec = MeijerGSpec.log1p()
        worst = 0.0
        for x in np.logspace(-6.0, 6.0, 25):
            exact = np.log1p(x)
            worst = max(worst, abs(meijer_g(spec, x) - exact) / exact)
        return {
            "check": "meijer_g_log",
            "passed": worst <= self.LOG_TOL,
            "statistic": worst,
            "threshold": self.LOG_TOL,
            "issues": [] if worst <= self.LOG_TOL else [f"max relative error {worst:.3e}"],
        }

    def check_meijer_bessel(self) -> Dict[str, Any]:
        worst = 0.0
        for v in np.arange(0.5, 8.0, 1.0):
            spec = MeijerGSpec.bessel(v)
            for x in np.geomspace(0.01, 20.0, 7):
                exact = 2.0 * bessel_k(v, x)
                worst = max(worst, abs(meijer_g(spec, x * x / 4.0) - exact) / exact)
        return {
            "check": "meijer_g_bessel",
            "passed": worst <= self.MEIJER_BESSEL_TOL,
            "statistic": worst,
            "threshold": self.MEIJER_BESSEL_TOL,
            "issues": [] if worst <= self.MEIJER_BESSEL_TOL else [f"max relative error {worst:.3e}"],
        }

    def evaluate(self) -> Dict[str, Any]:
        """
        Run all special-function checks.

        Returns:
            Evaluation result with per-check statistics
        """
        results: List[Dict[str, Any]] = [
            self.check_gamma_recurrence(),
            self.check_bessel_symmetry(),
            self.check_meijer_log(),
            self.check_meijer_bessel(),
        ]
        for r in results:
            r["passed"] = bool(r["passed"])
            r["statistic"] = float(r["statistic"])
        passed = sum(1 for r in results if r["passed"])
        return {
            "eval_type": "special_functions",
            "passed": passed == len(results),
            "results": results,
            "summary": {"total_checks": len(results), "passed_checks": passed},
            "issues": [f"{r['check']}: {i}" for r in results for i in r["issues"]],
        }
