"""Validation runner coordinating all oracle checks."""
import json
import logging
from typing import Any, Dict, Optional

from .. import __version__
from ..channel import NetworkParams, ShadowingParams
from .capacity import CapacityEval
from .interference import InterferenceEval
from .special_functions import SpecialFunctionEval

logger = logging.getLogger("cellcap.evals.runner")


class ValidationRunner:
    """Coordinates and runs all validation checks."""

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
        self.special_function_eval = SpecialFunctionEval(seed=seed)
        self.interference_eval = InterferenceEval(seed=seed, n_samples=n_samples, network=network,
                                                  shadowing=shadowing, r_max=r_max)
        self.capacity_eval = CapacityEval(seed=seed, n_samples=n_samples)

    def run_all_evals(self) -> Dict[str, Any]:
        """
        Run every evaluation family.

        Returns:
            Complete evaluation results
        """
        logger.info("=" * 60)
        logger.info(f"Starting validation (seed={self.seed}, samples={self.n_samples})")
        logger.info("=" * 60)

        steps = [
            ("special_functions", "Special Functions", self.special_function_eval),
            ("interference", "Interference", self.interference_eval),
            ("capacity", "Capacity", self.capacity_eval),
        ]
        results = {}
        for i, (key, title, evaluator) in enumerate(steps, start=1):
            logger.info(f"[{i}/{len(steps)}] Running {title} Evaluation...")
            result = evaluator.evaluate()
            results[key] = result
            self._log_eval_result(title, result)

        overall = self._calculate_overall_results(results)

        logger.info("=" * 60)
        logger.info("Validation Complete")
        logger.info(f"Overall Status: {'✓ PASSED' if overall['all_passed'] else '✗ FAILED'}")
        logger.info(f"Passed: {overall['passed_checks']}/{overall['total_checks']} checks")
        logger.info("=" * 60)

        return {
            "overall": overall,
            "evaluations": results,
            "config": {
                "seed": self.seed,
                "n_samples": self.n_samples,
                "r_max_m": self.interference_eval.r_max,
                "network": self.interference_eval.network.model_dump(),
                "sigma_db": self.interference_eval.shadowing.sigma_db,
                "version": __version__,
            },
        }

    def _calculate_overall_results(self, results: Dict[str, Any]) -> Dict[str, Any]:
        """Calculate overall evaluation metrics."""
        total_evals = len(results)
        passed_evals = sum(1 for r in results.values() if r.get("passed", False))
        checks = [c for r in results.values() for c in r.get("results", [])]
        passed_checks = sum(1 for c in checks if c["passed"])

        all_issues = []
        for eval_name, eval_result in results.items():
            for issue in eval_result.get("issues", []):
                all_issues.append(f"[{eval_name}] {issue}")

        return {
            "all_passed": passed_evals == total_evals,
            "total_evals": total_evals,
            "passed_evals": passed_evals,
            "failed_evals": total_evals - passed_evals,
            "total_checks": len(checks),
            "passed_checks": passed_checks,
            "all_issues": all_issues,
            "total_issues": len(all_issues),
        }

    def _log_eval_result(self, eval_name: str, result: Dict[str, Any]):
        """Log evaluation result summary."""
        status = "✓ PASSED" if result.get("passed") else "✗ FAILED"
        logger.info(f"  {eval_name}: {status}")
        for check in result.get("results", []):
            mark = "✓" if check["passed"] else "✗"
            logger.info(f"    {mark} {check['check']}: {check['statistic']:.6g} "
                        f"(threshold {check['threshold']:.6g})")
        if not result.get("passed"):
            logger.warning("  Issues found:")
            for issue in result.get("issues", []):
                logger.warning(f"    - {issue}")

    def save_results(self, results: Dict[str, Any], output_path: str) -> None:
        """
        Save evaluation results to a JSON file.

        Args:
            results: Evaluation results
            output_path: Path to save results
        """
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(results, f, indent=2, ensure_ascii=False, sort_keys=True)
            f.write("\n")
        logger.info(f"Results saved to: {output_path}")

    def generate_report(self, results: Dict[str, Any]) -> str:
        """
        Generate a human-readable validation report.

        Args:
            results: Evaluation results

        Returns:
            Formatted report string
        """
        report = []
        report.append("=" * 70)
        report.append("CELLCAP VALIDATION REPORT")
        report.append("=" * 70)
        config = results.get("config", {})
        report.append(f"Version: {config.get('version', 'N/A')}")
        report.append(f"Seed: {config.get('seed')}")
        report.append(f"Samples: {config.get('n_samples')}")
        report.append(f"Field radius: {config.get('r_max_m')} m")
        report.append("")

        overall = results.get("overall", {})
        report.append("OVERALL RESULTS")
        report.append("-" * 70)
        report.append(f"Status: {'✓ PASSED' if overall.get('all_passed') else '✗ FAILED'}")
        report.append(f"Checks Passed: {overall.get('passed_checks', 0)}/{overall.get('total_checks', 0)}")
        report.append(f"Total Issues: {overall.get('total_issues', 0)}")
        report.append("")

        for i, (name, evaluation) in enumerate(results.get("evaluations", {}).items(), start=1):
            report.append(f"{i}. {name.replace('_', ' ').upper()} EVALUATION")
            report.append("-" * 70)
            report.append(f"Status: {'✓ PASSED' if evaluation.get('passed') else '✗ FAILED'}")
            for check in evaluation.get("results", []):
                mark = "✓" if check["passed"] else "✗"
                report.append(f"  {mark} {check['check']:<28} {check['statistic']:>14.6g}"
                              f"   threshold {check['threshold']:.6g}")
                for issue in check.get("issues", []):
                    report.append(f"      - {issue}")
            report.append("")

        report.append("=" * 70)
        report.append("END OF REPORT")
        report.append("=" * 70)
        return "\n".join(report) + "\n"
