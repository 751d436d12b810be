from risknet import status


class RiskNetException(Exception):
    detail: str | dict | list = 'Internal Error'
    exit_code: int = status.EXIT_CONFIG_ERROR

    def __init__(self, detail=None, exit_code=None):
        self.detail = detail or self.detail
        self.exit_code = exit_code or self.exit_code
        super().__init__(self.detail)


class ConfigException(RiskNetException):
    detail = 'Invalid Config'
    exit_code = status.EXIT_CONFIG_ERROR


class DataException(RiskNetException):
    detail = 'Invalid Data'
    exit_code = status.EXIT_DATA_ERROR


class InvalidPriceException(DataException):
    def __init__(self, row: int, column: str, value):
        super().__init__(detail=f"Price must be > 0 (row {row}, column '{column}' -> {value!r})")
        self.row = row
        self.column = column


class MissingValueException(DataException):
    def __init__(self, row: int, column: str):
        super().__init__(detail=f"Missing value (row {row}, column '{column}')")
        self.row = row
        self.column = column


class RaggedRowException(DataException):
    def __init__(self, row: int, expected: int, found: int):
        super().__init__(detail=f'Row {row} has {found} fields, header has {expected}')
        self.row = row


class NonMonotonePeriodsException(DataException):
    def __init__(self, row: int, previous: str, current: str):
        super().__init__(detail=f"Period labels must be strictly increasing (row {row}: '{previous}' -> '{current}')")
        self.row = row


class DomainException(RiskNetException, ValueError):
    detail = 'Argument Out Of Domain'
    exit_code = status.EXIT_CONFIG_ERROR


class EstimationException(RiskNetException):
    detail = 'Estimation Failed'
    exit_code = status.EXIT_ESTIMATION_FAILURES


class FilterException(EstimationException):
    detail = 'Filter produced a non-finite value'


class DegenerateSeriesException(EstimationException):
    detail = 'Series has no variation'


class ConvergenceException(EstimationException):
    """Carries the best point the optimizer reached, so callers can still report it."""

    detail = 'Optimizer did not converge'

    def __init__(self, detail=None, *, best=None, diagnostics: dict | None = None):
        super().__init__(detail=detail)
        self.best = best
        self.diagnostics = diagnostics or {}


class AssemblyException(EstimationException):
    def __init__(self, missing: list[tuple[str, str]]):
        pairs = ', '.join(f'({a}, {b})' for a, b in missing)
        super().__init__(detail=f'Missing pair fits: {pairs}')
        self.missing = missing


class ExportException(RiskNetException):
    detail = 'Export Failed'
    exit_code = status.EXIT_CONFIG_ERROR
