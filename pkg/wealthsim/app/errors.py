"""
Exception hierarchy shared by the simulator, the analysis code and the CLI.
Every error carries a stable `code` so summaries can record it in place of a result.
"""

from typing import Optional


class WealthSimError(Exception):
    """Base class for all wealthsim failures"""
    code: str = "wealthsim_error"


class ContractViolation(WealthSimError, ValueError):
    """Caller passed arguments outside an operation's preconditions"""
    code = "contract_violation"


class ConfigError(WealthSimError):
    """Config document could not be parsed or failed validation"""
    code = "config_error"

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None) -> None:
        self.message = message
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)


class FitInfeasibleError(WealthSimError):
    code = "fit_infeasible"


class MetricUndefinedError(WealthSimError):
    code = "metric_undefined"


class CollapseUndefinedError(WealthSimError):
    code = "collapse_undefined"


class BinningMismatchError(WealthSimError):
    code = "binning_mismatch"


class EnsembleRunError(WealthSimError):
    """A single ensemble member failed; keeps the stream index for reproduction"""
    code = "ensemble_run_failed"

    def __init__(self, run_index: int, cause: BaseException) -> None:
        self.run_index = run_index
        self.cause = cause
        super().__init__(f"run {run_index} failed: {cause}")


class OutputError(WealthSimError):
    code = "output_error"

    def __init__(self, path: str, cause: BaseException) -> None:
        self.path = path
        super().__init__(f"could not write {path}: {cause}")
