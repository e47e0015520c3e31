"""Runtime limits.

Everything in this package computes with exact integers, so the only way to
die is to let a tower of exponentials actually materialize.  The magnitude
cap bounds both string lengths and the bit-length of integers produced by
the growth hierarchy; operations that would cross it raise ResourceError
instead of allocating.
"""

from __future__ import annotations

import os

from .errors import ResourceError

DEFAULT_MAGNITUDE_CAP = 2 ** 20
ENV_VAR = "CANTORBET_MAGNITUDE_CAP"

_cap = None  # resolved lazily so the env var is honored at first use


def magnitude_cap() -> int:
    global _cap
    if _cap is None:
        raw = os.environ.get(ENV_VAR)
        _cap = int(raw) if raw else DEFAULT_MAGNITUDE_CAP
    return _cap


def set_magnitude_cap(value: int | None) -> None:
    """Override the cap (None resets to env/default).  Mainly for tests."""
    global _cap
    if value is not None and value <= 0:
        raise ValueError("magnitude cap must be positive")
    _cap = value


def check_magnitude(size: int, what: str = "value") -> None:
    """Raise ResourceError if `size` (a length / bit-length) exceeds the cap."""
    if size > magnitude_cap():
        raise ResourceError(
            f"{what} of size {size} exceeds magnitude cap {magnitude_cap()}"
        )
