import hashlib
from functools import wraps
from time import perf_counter

import numpy as np
import orjson as json
from statsmodels.tools.numdiff import approx_fprime, approx_hess

from risknet.configs import config
from risknet.logger import estimation_logger

JSON_OPTIONS = json.OPT_SORT_KEYS | json.OPT_INDENT_2 | json.OPT_SERIALIZE_NUMPY


def dumps(data, /) -> bytes:
    return json.dumps(data, option=JSON_OPTIONS)


def loads(data: bytes | str, /):
    return json.loads(data)


def sha256(*parts: bytes | str) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(part.encode() if isinstance(part, str) else part)
        digest.update(b'\x00')
    return digest.hexdigest()


def array_bytes(values: np.ndarray, /) -> bytes:
    return np.ascontiguousarray(values, dtype='<f8').tobytes()


def file_sha256(path, /) -> str:
    with open(path, 'rb') as file:
        return hashlib.sha256(file.read()).hexdigest()


def log_fit(func):
    """Time a fit and write one line to the estimation logger when config['log_fits'] is on."""
    @wraps(func)
    def log(*args, **kwargs):
        if config['log_fits'] is False:
            return func(*args, **kwargs)
        start = perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            estimation_logger.info(f'{func.__name__}() --> failed after {perf_counter() - start:.3f} s: {e}')
            raise
        converged = getattr(result, 'converged', None)
        loglik = getattr(result, 'loglik', float('nan'))
        estimation_logger.info(
            f'{func.__name__}() --> {perf_counter() - start:.3f} s | converged={converged} | loglik={loglik:.6f}'
        )
        return result
    return log


def numerical_gradient(func, x, /) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    return np.ravel(approx_fprime(np.asarray(x, dtype=float), func, centered=True))


def standard_errors(loglik, x, /) -> np.ndarray:
    """Square roots of the diagonal of the inverse observed information; NaN where it is not positive."""
    x = np.asarray(x, dtype=float)
    information = -np.atleast_2d(approx_hess(x, loglik))
    if not np.all(np.isfinite(information)):
        return np.full(x.size, np.nan)
    try:
        covariance = np.linalg.inv(information)
    except np.linalg.LinAlgError:
        covariance = np.linalg.pinv(information)
    diagonal = np.diag(covariance)
    with np.errstate(invalid='ignore'):
        return np.where(diagonal > 0, np.sqrt(np.abs(diagonal)), np.nan)
