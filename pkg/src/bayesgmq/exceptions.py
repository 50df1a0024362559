"""Exception hierarchy shared by all modules."""


class BayesGMQError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BayesGMQError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientDataError(BayesGMQError, ValueError):
    """Too few observations for the requested statistic."""


class DegenerateDataError(BayesGMQError, ValueError):
    """A scale matrix is singular or not positive definite."""


class UndefinedRiskError(BayesGMQError, ValueError):
    """A moment or risk coefficient does not exist for the given degrees of freedom."""


class UsageError(BayesGMQError, TypeError):
    """Incompatible combination of inputs (e.g. estimator/parameter mismatch)."""


class ExistenceError(BayesGMQError):
    """The global minimum quantile portfolio does not exist.

    Attributes
    ----------
    q_squared : float
        Squared risk coefficient.
    threshold : float
        The quantity ``q_squared`` must strictly exceed (``s / r`` in Bayesian
        mode, ``s`` in population/conventional mode).
    """

    def __init__(self, q_squared: float, threshold: float, message: str | None = None):
        self.q_squared = float(q_squared)
        self.threshold = float(threshold)
        if message is None:
            message = (
                f"global minimum quantile portfolio does not exist: "
                f"q^2={self.q_squared!r} <= {self.threshold!r}"
            )
        super().__init__(message)


class EmptyResultError(BayesGMQError):
    """No simulation run or portfolio survived the existence filter."""


class ParseError(BayesGMQError, ValueError):
    """Malformed input file.

    Attributes
    ----------
    line : int
        1-based line number of the offending row.
    column : str or None
        Column name, when the problem is tied to a single cell.
    """

    def __init__(self, message: str, line: int, column: str | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column!r}"
        super().__init__(f"{where}: {message}")
