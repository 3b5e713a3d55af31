"""Small numeric helpers."""

import math


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    Used for every percentage-based instance target so that counts are
    reproducible across platforms (built-in round() is banker's rounding).
    """
    if x >= 0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)
