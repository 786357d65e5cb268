"""Working-precision control for mpmath's interval context."""

import os
import threading
from contextlib import contextmanager

from mpmath import iv

_lock = threading.RLock()

DEFAULT_CEILING = 1 << 16


def precision_ceiling() -> int:
    """Upper bound on working precision in bits (``CLINGER_PRECISION_CEILING``)."""
    raw = os.environ.get("CLINGER_PRECISION_CEILING")
    return int(raw) if raw else DEFAULT_CEILING


@contextmanager
def ivprec(bits: int):
    # iv.prec is global state; serialize users
    with _lock:
        saved = iv.prec
        iv.prec = bits
        try:
            yield iv
        finally:
            iv.prec = saved
