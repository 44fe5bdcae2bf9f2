"""Elementary functions of the stake tug-of-war solution theory.

Everything here is built from the square-root change of variable
``w = sqrt(8x + 1)``.  The three basic maps ``c``, ``d``, ``s`` (and their
reciprocals ``gamma``, ``delta``) drive every explicit construction in the
package: ``c`` and ``d`` generate payoff-increment ratios, while the orbit of
``s`` walks the central ratio from one vertex to the next.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Elementary",
    "elementary",
    "omega",
    "c_fn",
    "d_fn",
    "c_minus_1",
    "d_minus_1",
    "s_fn",
    "s_inverse",
    "s_orbit",
    "orbit_to_band",
    "BAND_LO",
    "BAND_HI",
    "ORBIT_OVERFLOW",
]

# Values above this are treated as escaped to +infinity by backward orbits;
# the forward image of anything this large is already beyond float precision.
ORBIT_OVERFLOW = 1e100

# The half-open band [1/3, 3) tiles (0, inf) under the s-orbit.
BAND_LO = 1.0 / 3.0
BAND_HI = 3.0


def _check_positive(x: float) -> None:
    if not x > 0:
        raise ValueError(f"argument must be positive, got {x!r}")


def omega(x: float) -> float:
    _check_positive(x)
    if x > 1e306:  # 8x would overflow; sqrt(8x+1) ~ 2*sqrt(2x)
        return 2.0 * math.sqrt(2.0) * math.sqrt(x)
    return math.sqrt(8.0 * x + 1.0)


def c_fn(x: float) -> float:
    """Forward payoff-ratio generator; c(x) - 1 is the m-increment ratio."""
    w = omega(x)
    return (w + 3.0) * (w + 3.0) / 16.0


def d_fn(x: float) -> float:
    """Forward payoff-ratio generator for the n-side."""
    w = omega(x)
    return (w + 3.0) * (w + 3.0) / (8.0 * (w + 1.0))


def c_minus_1(x: float) -> float:
    """c(x) - 1 in the rationalized form x*(w+7) / (2*(w+1)).

    Retains full relative precision for small x, where the direct difference
    loses everything to cancellation.
    """
    w = omega(x)
    return (x / (w + 1.0)) * (w + 7.0) / 2.0


def d_minus_1(x: float) -> float:
    """d(x) - 1 in the rationalized form 8*x**2 / (w+1)**3."""
    w = omega(x)
    wp = w + 1.0
    t = x / wp
    return 8.0 * t * (t / wp)


def s_fn(x: float) -> float:
    """One forward step of the central-ratio orbit; s(x) < x always.

    Uses the rationalized form 16*x**2 / ((w+1)**2 * (w+7)), which avoids the
    catastrophic cancellation in (w - 1)**2 for small x and stays accurate
    down to the underflow threshold.  Factors are grouped so intermediates
    stay near sqrt(x) and nothing overflows before the result does.
    """
    w = omega(x)
    t = x / (w + 1.0)
    return 16.0 * t * (t / (w + 7.0))


@dataclass(frozen=True)
class Elementary:
    omega: float
    c: float
    d: float
    s: float
    beta: float
    gamma: float
    delta: float


def elementary(x: float) -> Elementary:
    """Evaluate all elementary maps at once.

    Raises ValueError for non-positive ``x``.
    """
    w = omega(x)
    c = (w + 3.0) * (w + 3.0) / 16.0
    d = (w + 3.0) * (w + 3.0) / (8.0 * (w + 1.0))
    return Elementary(
        omega=w,
        c=c,
        d=d,
        s=s_fn(x),
        beta=2.0 * x / (w + 1.0),
        gamma=1.0 / c,
        delta=1.0 / d,
    )


def s_inverse(y: float) -> float:
    """Inverse orbit step, 1 / s(1/y).

    Rationalized to y**2 * (w+1)**2 * (w+7) / 16 with w = omega(1/y), exact
    to full precision for all y.  Grows roughly like 2*y**2 for large y and
    returns ``inf`` once the result leaves the representable range (callers
    treat that as an escaped orbit).
    """
    _check_positive(y)
    w = omega(1.0 / y)
    t = y * (w + 1.0) / 4.0
    return t * t * (w + 7.0)


def s_orbit(x: float, k: int) -> float:
    """k-fold orbit of the central ratio: s_0 = id, s_k = s o s_{k-1}.

    Negative ``k`` applies the inverse map.  The backward orbit grows doubly
    exponentially; a RangeError-style OverflowError is raised once it can no
    longer be represented.
    """
    _check_positive(x)
    y = x
    if k >= 0:
        for _ in range(k):
            y = s_fn(y)
            if y == 0.0:
                # Doubly exponential underflow: the true value is positive
                # but below the smallest subnormal.
                return 0.0
    else:
        for _ in range(-k):
            y = s_inverse(y)
            if math.isinf(y):
                raise OverflowError(
                    f"backward orbit of {x!r} overflows after at most {-k} steps"
                )
    return y


def orbit_to_band(x: float, lo: float = BAND_LO, hi: float = BAND_HI) -> tuple[float, int]:
    """Walk x along the orbit into the band [lo, hi) and report the step count.

    Returns ``(y, k)`` with ``y = s_k(x)`` in the band.  The default band
    [1/3, 3) tiles (0, inf) disjointly, so ``k`` is unique.
    """
    _check_positive(x)
    y = x
    k = 0
    while y >= hi:
        y = s_fn(y)
        k += 1
    while y < lo:
        y = s_inverse(y)
        k -= 1
        if math.isinf(y):
            raise OverflowError(f"orbit of {x!r} cannot be brought into band")
    return y, k
