import numpy as np
from scipy import linalg

from .exceptions import DegenerateDataError


def cholesky_lower(matrix: np.ndarray, what: str = "scale matrix") -> np.ndarray:
    """Lower Cholesky factor, raising DegenerateDataError on non-PD input."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise DegenerateDataError(f"{what} has non-finite entries")
    try:
        low = linalg.cholesky(matrix, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise DegenerateDataError(f"{what} is not positive definite") from exc
    diag = np.diag(low)
    # numerically rank-deficient matrices can slip through LAPACK
    if diag.min() <= np.finfo(float).eps * max(diag.max(), np.finfo(float).tiny) * matrix.shape[0]:
        raise DegenerateDataError(f"{what} is numerically singular")
    return low


def pd_solve(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return linalg.cho_solve((low, True), rhs, check_finite=False)
