import logging
from functools import partial, wraps

from ..core.errors import SingularSystemError
from ..core.trajectory import LqApprox

logger = logging.getLogger(__name__)


def regularize_and_retry(f=None, retries=3, increment=1e-6):
    """
    Retry an LQ solve `f(lq, *args, **kwargs)` whose stacked system is
    singular, adding increment * 10**attempt * I to every control Hessian.
    The last failure propagates.
    """
    if f is None:
        return partial(regularize_and_retry, retries=retries, increment=increment)

    @wraps(f)
    def wrapper(lq: LqApprox, *args, **kwargs):
        attempt = 0
        while True:
            try:
                if attempt == 0:
                    return f(lq, *args, **kwargs)
                return f(lq.with_control_regularization(increment * 10 ** (attempt - 1)), *args, **kwargs)
            except SingularSystemError as err:
                if attempt >= retries:
                    raise
                attempt += 1
                logger.warning(f"Singular LQ system at t={err.time_index}; retrying with regularization "
                               f"{increment * 10 ** (attempt - 1):.1e}")

    return wrapper
