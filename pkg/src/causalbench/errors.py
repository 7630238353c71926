class CausalBenchError(Exception):
    pass


class ValidationError(CausalBenchError, ValueError):
    """Invalid configuration or input value."""


class ContractError(CausalBenchError, ValueError):
    """An operation was called outside its precondition."""


class BudgetExceeded(CausalBenchError, RuntimeError):
    """A combinatorial search would exceed its configured cap."""


class RecordFormatError(CausalBenchError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
