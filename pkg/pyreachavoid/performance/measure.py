from functools import wraps
import timeit


def Measure(f):
    """Time each call of f; the duration of the latest call is in `.elapsed`."""
    @wraps(f)
    def time(*args, **kwargs):
        start_time = timeit.default_timer()
        try:
            return f(*args, **kwargs)
        finally:
            time.elapsed = timeit.default_timer() - start_time

    time.elapsed = 0.0
    return time
