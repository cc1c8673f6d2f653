"""Exception hierarchy.

``InputError`` covers anything wrong with the files or their join (CLI exit 2);
``MetricError`` covers metrics that cannot be computed on valid input (exit 3).
"""


class ChurnEvalError(Exception):
    pass


class InputError(ChurnEvalError, ValueError):
    pass


class MissingColumn(InputError):
    def __init__(self, column, path=None):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class ParseError(InputError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class ScoreOutOfRange(ParseError):
    pass


class DuplicateCustomerId(InputError):
    def __init__(self, customer_id, row=None):
        self.customer_id = customer_id
        at = f" (row {row})" if row is not None else ""
        super().__init__(f"duplicate customer id {customer_id!r}{at}")


class EmptyDataset(InputError):
    pass


class KeyMismatch(InputError):
    def __init__(self, missing, extra):
        self.missing = list(missing)
        self.extra = list(extra)
        parts = []
        if self.missing:
            parts.append(f"missing={self.missing}")
        if self.extra:
            parts.append(f"extra={self.extra}")
        super().__init__("prediction ids do not match dataset ids: " + ", ".join(parts))


class LengthMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


class MetricError(ChurnEvalError):
    pass


class SingleClass(MetricError):
    pass


class ScoresRequired(MetricError):
    pass


class UnfittedCurve(MetricError):
    pass


class UnavailableMetric(MetricError):
    pass


class NoModels(InputError):
    pass
