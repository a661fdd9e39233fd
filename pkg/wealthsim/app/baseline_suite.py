import os
import time
import logging
from dataclasses import dataclass
from typing import *
from concurrent.futures import ThreadPoolExecutor, as_completed

from baseline_check import BaselineCheck
from baseline_checks import default_checks
from ensemble import derive_run_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineResult:
    name: str
    passed: bool
    value: Optional[float]
    threshold: float
    latency_ms: int
    error: Optional[str] = None


class BaselineSuite:
    """
    Runs every baseline check in parallel and reports pass/fail per check.
    Check i is seeded with derive_run_seed(seed, i), so results do not depend
    on which thread ran it.
    """

    def __init__(self, checks: Optional[List[BaselineCheck]] = None, scale: float = 1.0) -> None:
        self.checks: List[BaselineCheck] = checks if checks is not None else default_checks(scale)

    def run_all(self, seed: int, threads: Optional[int] = None) -> Dict[str, Any]:
        """
        Run all checks and return the per-check results in check order plus
        the overall verdict and total latency.
        """
        start_time = time.time()
        results = self._run_checks_parallel(seed, threads)
        ordered = [results[check.name] for check in self.checks]
        return {
            "checks": ordered,
            "passed": all(r.passed for r in ordered),
            "latency_ms": int((time.time() - start_time) * 1000),
        }

    def _run_checks_parallel(self, seed: int, threads: Optional[int]) -> Dict[str, BaselineResult]:
        results: Dict[str, BaselineResult] = {}
        if not self.checks:
            return results

        max_workers: int = min(len(self.checks), threads or os.cpu_count() or 4)
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_check = {
                executor.submit(self._safe_run_check, check, derive_run_seed(seed, index)): check
                for index, check in enumerate(self.checks)
            }
            for future in as_completed(future_to_check):
                check = future_to_check[future]
                results[check.name] = future.result()
                logger.info("Baseline %s: %s (value=%s, %d ms)", check.name,
                            "PASS" if results[check.name].passed else "FAIL",
                            results[check.name].value, results[check.name].latency_ms)
        return results

    def _safe_run_check(self, check: BaselineCheck, seed: int) -> BaselineResult:
        """Run one check; any exception becomes a failed result carrying the message"""
        try:
            value = check.measure(seed)
            return BaselineResult(
                name=check.name,
                passed=bool(check.passes(value)),
                value=float(value),
                threshold=check.threshold,
                latency_ms=check.calculate_latency(),
            )
        except Exception as e:
            logger.error("Baseline %s raised: %s", check.name, e)
            return BaselineResult(
                name=check.name,
                passed=False,
                value=None,
                threshold=check.threshold,
                latency_ms=check.calculate_latency(),
                error=str(e),
            )
