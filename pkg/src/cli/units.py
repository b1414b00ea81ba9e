import math
from typing import Union

import numpy as np

PERFECT = "perfect"


def db_to_linear(db):
    """10^(db / 10); accepts scalars and arrays."""
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0) if isinstance(db, np.ndarray) else 10.0 ** (float(db) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x) if isinstance(x, np.ndarray) else 10.0 * math.log10(x)


def beta_from_cancellation_db(cancellation: Union[float, str]) -> float:
    """
    SIPR from a cancellation depth in dB (beta = 10^(-dB / 10)); "perfect" gives 0.
    """
    if isinstance(cancellation, str):
        if cancellation.strip().lower() == PERFECT:
            return 0.0
        cancellation = float(cancellation)
    return 10.0 ** (-float(cancellation) / 10.0)


def cancellation_db(beta: float) -> float:
    """Cancellation depth -10 log10(beta); inf for perfect cancellation."""
    return math.inf if beta == 0 else -10.0 * math.log10(beta)
