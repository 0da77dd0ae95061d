"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and the process exit
status the CLI maps it to.
"""

from __future__ import annotations


class SynthBoundError(Exception):
    code = "error"
    exit_status = 1

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ConfigError(SynthBoundError):
    code = "config_error"
    exit_status = 2


class DataError(SynthBoundError):
    code = "data_error"
    exit_status = 3


class PanelError(DataError):
    code = "invalid_panel"


class NumericalError(SynthBoundError):
    code = "numerical_error"
    exit_status = 4


class UnderdeterminedError(NumericalError):
    code = "underdetermined"


class RankDeficientError(NumericalError):
    code = "rank_deficient"

    def __init__(self, message: str, collinear: list[str]):
        super().__init__(message)
        self.collinear = collinear


class ConvergenceError(NumericalError):
    code = "no_convergence"
