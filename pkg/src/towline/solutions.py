"""Windowed quadruple solutions of the four coupled stake/payoff equations.

A solution assigns each trail vertex its stakes (a, b) and mean payoffs
(m, n).  The whole two-parameter solution family is generated from explicit
products of the elementary maps; this module constructs the two normalized
representatives of each equivalence class (default: unit central m-increment;
standard: unit total m-spread), applies the symmetry transforms, and checks
residuals of the defining equations.

Payoff sequences are kept both as values and as increments.  The increments
decay doubly exponentially away from the battlefield, far below the
resolution of value differences near a plateau, and every ratio-sensitive
quantity (phi, stakes) is computed from increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import c_minus_1, d_minus_1, s_fn, s_inverse, s_orbit

__all__ = [
    "BoundaryData",
    "Quadruple",
    "PhiView",
    "Z",
    "n_spread",
    "default_solution",
    "standard_solution",
    "finite_standard_solution",
    "dilate",
    "translate",
    "shift",
    "role_reverse",
    "transform",
    "phi_view",
    "residuals",
    "PHI_CLAMP",
    "TailError",
]

# Reported phi values are clamped here; below this the increments have left
# the range of double precision and the ratio is no longer meaningful.
PHI_CLAMP = 1e-300

_MAX_TAIL_STEPS = 400


class TailError(RuntimeError):
    """A two-sided product series failed to converge at the requested tolerance."""


@dataclass(frozen=True)
class BoundaryData:
    """Terminal receipts of a trail game.

    For games on the whole integer line these are the payoff limits; for a
    finite trail they are the endpoint values.  ``m_star``/``n_star`` are the
    non-escape receipts, capped by the losing receipts.
    """

    m_minus_inf: float
    m_plus_inf: float
    n_minus_inf: float
    n_plus_inf: float
    m_star: float
    n_star: float

    def __post_init__(self) -> None:
        if not self.m_minus_inf < self.m_plus_inf:
            raise ValueError("boundary requires m_minus_inf < m_plus_inf")
        if not self.n_plus_inf < self.n_minus_inf:
            raise ValueError("boundary requires n_plus_inf < n_minus_inf")
        if self.m_star > self.m_minus_inf + 1e-15:
            raise ValueError("m_star may not exceed m_minus_inf")
        if self.n_star > self.n_plus_inf + 1e-15:
            raise ValueError("n_star may not exceed n_plus_inf")

    @property
    def mina_margin(self) -> float:
        return (self.n_minus_inf - self.n_plus_inf) / (self.m_plus_inf - self.m_minus_inf)


@dataclass(frozen=True)
class Quadruple:
    """One windowed solution: stakes on [lo, hi], payoffs on [lo-1, hi+1].

    ``dm[j]`` stores m(lo+j) - m(lo+j-1) and ``dn[j]`` stores
    n(lo+j-1) - n(lo+j), for j = 0..hi-lo+1; both are non-negative and carry
    the full dynamic range that the value arrays cannot.
    """

    lo: int
    hi: int
    a: np.ndarray
    b: np.ndarray
    m: np.ndarray
    n: np.ndarray
    dm: np.ndarray
    dn: np.ndarray
    boundary: BoundaryData
    cen_ratio: float | None

    def __post_init__(self) -> None:
        width = self.hi - self.lo + 1
        if width < 3:
            raise ValueError("window must contain at least 3 open-play indices")
        if len(self.a) != width or len(self.b) != width:
            raise ValueError("stake arrays must match the window")
        if len(self.m) != width + 2 or len(self.n) != width + 2:
            raise ValueError("payoff arrays must cover [lo-1, hi+1]")
        if len(self.dm) != width + 1 or len(self.dn) != width + 1:
            raise ValueError("increment arrays must cover steps lo..hi+1")

    def index(self, i: int) -> int:
        """Array offset of open-play vertex i."""
        if not self.lo <= i <= self.hi:
            raise IndexError(f"vertex {i} outside window [{self.lo}, {self.hi}]")
        return i - self.lo

    def stake_tables(self) -> tuple[dict[int, float], dict[int, float]]:
        """(maxine, mina) stake maps keyed by vertex."""
        idx = range(self.lo, self.hi + 1)
        return (
            {i: float(self.a[i - self.lo]) for i in idx},
            {i: float(self.b[i - self.lo]) for i in idx},
        )

    @property
    def mina_margin(self) -> float:
        return self.boundary.mina_margin


@dataclass(frozen=True)
class PhiView:
    """Payoff-increment ratios phi over the window and the battlefield index.

    Entries that fell below the reporting clamp are flagged in ``clamped``.
    """

    phi: np.ndarray
    battlefield: int
    clamped: np.ndarray


def _stakes_from_gaps(M: np.ndarray, N: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tot = M + N
    with np.errstate(invalid="ignore", divide="ignore"):
        a = M * M * (N / tot) / tot
        b = M * N * (N / tot) / tot
    a = np.where(tot > 0, a, 0.0)
    b = np.where(tot > 0, b, 0.0)
    return a, b


def _tail_sum(first_ratio_arg: float, backward: bool, fn1, tol: float) -> float:
    """Sum of prod-of-(fn-1) tail terms, starting from term value 1.

    Forward: terms t_{j+1} = t_j * (fn(y_j) - 1) with y advancing under s.
    Backward: t_{j+1} = t_j / (fn(y_j) - 1) with y receding under 1/s(1/.).
    Returns the sum of all terms after (not including) the starting term of
    value 1; the caller scales.  Stops once a geometric bound certifies the
    remainder below ``tol`` relative to the partial sum.
    """
    total = 0.0
    term = 1.0
    y = first_ratio_arg
    for _ in range(_MAX_TAIL_STEPS):
        if backward:
            y = s_inverse(y)
            if math.isinf(y):
                return total  # remaining factors are below 1/overflow
            factor = 1.0 / fn1(y)
        else:
            factor = fn1(y)
            y = s_fn(y)
        term *= factor
        total += term
        if term == 0.0 or (not backward and y == 0.0):
            return total
        if factor < 0.5:
            # Factors shrink monotonically along the orbit, so the remainder
            # is dominated by the geometric series with the current factor.
            bound = term * factor / (1.0 - factor)
            if bound <= tol * max(total, 1.0) / 4.0:
                return total
    raise TailError(
        f"tail sum did not converge to tol={tol!r} within {_MAX_TAIL_STEPS} steps"
    )


def Z(x: float, tol: float = 1e-14) -> float:
    """Total m-spread of the solution with unit central m-increment.

    Two-sided series of signed products of (c - 1) along the orbit of x;
    both tails are cut only once a geometric bound certifies the remainder
    below ``tol`` (relative).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not x > 0:
        raise ValueError("x must be positive")
    return 1.0 + _tail_sum(x, False, c_minus_1, tol) + _tail_sum(x, True, c_minus_1, tol)


def n_spread(x: float, tol: float = 1e-14) -> float:
    """Total n-spread of the same solution: x times the (d - 1) series."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not x > 0:
        raise ValueError("x must be positive")
    return x * (1.0 + _tail_sum(x, False, d_minus_1, tol) + _tail_sum(x, True, d_minus_1, tol))


def _increments(x: float, lo: int, hi: int, fn1) -> np.ndarray:
    """Signed-product increments for steps lo..hi (inclusive), step 0 = 1.

    Step k carries prod_{i=0}^{k-1} fn1(s_i(x)), with the reciprocal
    convention for negative k.  Doubly exponential decay at both ends is
    allowed to underflow to exact zero.
    """
    out = np.empty(hi - lo + 1)
    # forward from step 0
    if hi >= 0:
        term = 1.0
        y = x
        for k in range(0, hi + 1):
            if k >= lo:
                out[k - lo] = term
            if k == hi:
                break
            if y == 0.0:
                # orbit underflow: all further factors evaluate at 0+
                out[max(k + 1, lo) - lo : hi + 1 - lo] = 0.0
                break
            term *= fn1(y)
            y = s_fn(y)
    # backward from step -1
    if lo <= -1:
        term = 1.0
        y = x
        overflowed = False
        for k in range(-1, lo - 1, -1):
            if overflowed:
                out[k - lo] = 0.0
                continue
            y = s_inverse(y)
            if math.isinf(y):
                out[: k + 1 - lo] = 0.0
                overflowed = True
                continue
            term /= fn1(y)
            if k <= hi:
                out[k - lo] = term
    return out


def default_solution(x: float, window: tuple[int, int], tol: float = 1e-10) -> Quadruple:
    """The representative solution with m-increment 1 across the central edge.

    ``window`` is the closed interval of open-play indices and must contain 0.
    Payoffs are anchored by zero limits (m to the left, n to the right) via
    certified tail sums.
    """
    lo, hi = window
    if hi - lo + 1 < 3:
        raise ValueError("window must contain at least 3 open-play indices")
    if not lo <= 0 <= hi:
        raise ValueError("window must contain index 0")
    if not x > 0:
        raise ValueError("x must be positive")

    # m-increment for step k is the step-k product of (c-1); n for (d-1), times x.
    dm = _increments(x, lo, hi + 1, c_minus_1)
    dn = x * _increments(x, lo, hi + 1, d_minus_1)

    # anchor m at -inf: m(lo-1) is the sum of all increments at steps <= lo-1
    m_lo = _partial_sum_below(x, lo - 1, c_minus_1, tol)
    # anchor n at +inf: n(hi+1) is the sum of all decrements at steps >= hi+2
    n_hi = x * _partial_sum_above(x, hi + 2, d_minus_1, tol)

    m = np.concatenate([[m_lo], m_lo + np.cumsum(dm)])
    n_rev = np.concatenate([[n_hi], n_hi + np.cumsum(dn[::-1])])
    n = n_rev[::-1].copy()

    zx = Z(x, min(tol, 1e-13))
    nspread = n_spread(x, min(tol, 1e-13))
    boundary = BoundaryData(
        m_minus_inf=0.0,
        m_plus_inf=zx,
        n_minus_inf=nspread,
        n_plus_inf=0.0,
        m_star=0.0,
        n_star=0.0,
    )

    M = dm[:-1] + dm[1:]
    N = dn[:-1] + dn[1:]
    a, b = _stakes_from_gaps(M, N)
    return Quadruple(
        lo=lo, hi=hi, a=a, b=b, m=m, n=n, dm=dm, dn=dn,
        boundary=boundary, cen_ratio=x,
    )


def _partial_sum_below(x: float, k_top: int, fn1, tol: float) -> float:
    """Sum of step increments for steps <= k_top < 0 (left anchor value)."""
    if k_top >= 0:
        raise ValueError("left anchor expects a negative top step")
    total = 0.0
    y = x
    term = 1.0
    for k in range(-1, k_top - 1, -1):
        y = s_inverse(y)
        if math.isinf(y):
            return total
        term /= fn1(y)
        if k <= k_top:
            total += term
    # tail below k_top via geometric certification
    for _ in range(_MAX_TAIL_STEPS):
        y = s_inverse(y)
        if math.isinf(y):
            return total
        factor = 1.0 / fn1(y)
        term *= factor
        total += term
        if term == 0.0:
            return total
        if factor < 0.5:
            if term * factor / (1.0 - factor) <= tol * max(total, 1.0) / 4.0:
                return total
    raise TailError(f"anchor tail below step {k_top} did not converge at tol={tol!r}")


def _partial_sum_above(x: float, k_bot: int, fn1, tol: float) -> float:
    """Sum of step increments for steps >= k_bot > 0 (right anchor value)."""
    if k_bot <= 0:
        raise ValueError("right anchor expects a positive bottom step")
    total = 0.0
    y = x
    term = 1.0
    for t in range(k_bot):
        term *= fn1(y)
        y = s_fn(y)
        if y == 0.0:
            # orbit died at step t+1: every step beyond carries a vanishing
            # factor, so only an exactly-completed advance contributes
            return term if t + 1 == k_bot else 0.0
    total += term
    for _ in range(_MAX_TAIL_STEPS):
        factor = fn1(y)
        y = s_fn(y)
        term *= factor
        total += term
        if term == 0.0 or y == 0.0:
            return total
        if factor < 0.5:
            if term * factor / (1.0 - factor) <= tol * max(total, 1.0) / 4.0:
                return total
    raise TailError(f"anchor tail above step {k_bot} did not converge at tol={tol!r}")


def standard_solution(x: float, window: tuple[int, int], tol: float = 1e-10) -> Quadruple:
    """The representative with zero left m-limit, zero right n-limit, unit m-spread."""
    q = default_solution(x, window, tol)
    return dilate(q, 1.0 / q.boundary.m_plus_inf)


def finite_standard_solution(x: float, trail: tuple[int, int], tol: float = 1e-10) -> Quadruple:
    """Standard-normalized solution on a finite trail.

    ``trail`` gives the absorbing endpoints; open play is the interior.  The
    endpoint payoffs are normalized to m(left) = n(right) = 0, m(right) = 1,
    so the boundary's Mina margin equals the finite-trail margin map at x.
    """
    t_lo, t_hi = trail
    lo, hi = t_lo + 1, t_hi - 1
    q = default_solution(x, (lo, hi), tol)
    m_left = q.m[0]
    n_right = q.n[-1]
    m_spread = q.m[-1] - q.m[0]
    n_left = q.n[0]
    u = 1.0 / m_spread
    m = (q.m - m_left) * u
    n = (q.n - n_right) * u
    boundary = BoundaryData(
        m_minus_inf=0.0,
        m_plus_inf=1.0,
        n_minus_inf=(n_left - n_right) * u,
        n_plus_inf=0.0,
        m_star=0.0,
        n_star=0.0,
    )
    return Quadruple(
        lo=lo, hi=hi,
        a=q.a * u, b=q.b * u, m=m, n=n, dm=q.dm * u, dn=q.dn * u,
        boundary=boundary, cen_ratio=x,
    )


def dilate(q: Quadruple, u: float) -> Quadruple:
    """Scale every stake and payoff by u > 0 (currency revaluation)."""
    if not u > 0:
        raise ValueError("dilation factor must be positive")
    boundary = BoundaryData(
        m_minus_inf=q.boundary.m_minus_inf * u,
        m_plus_inf=q.boundary.m_plus_inf * u,
        n_minus_inf=q.boundary.n_minus_inf * u,
        n_plus_inf=q.boundary.n_plus_inf * u,
        m_star=q.boundary.m_star * u,
        n_star=q.boundary.n_star * u,
    )
    return replace(
        q, a=q.a * u, b=q.b * u, m=q.m * u, n=q.n * u, dm=q.dm * u, dn=q.dn * u,
        boundary=boundary,
    )


def translate(q: Quadruple, v1: float, v2: float) -> Quadruple:
    """Add v1 to every m-value and v2 to every n-value (pre-game side payments)."""
    boundary = BoundaryData(
        m_minus_inf=q.boundary.m_minus_inf + v1,
        m_plus_inf=q.boundary.m_plus_inf + v1,
        n_minus_inf=q.boundary.n_minus_inf + v2,
        n_plus_inf=q.boundary.n_plus_inf + v2,
        m_star=q.boundary.m_star + v1,
        n_star=q.boundary.n_star + v2,
    )
    return replace(q, m=q.m + v1, n=q.n + v2, boundary=boundary)


def shift(q: Quadruple, k: int) -> Quadruple:
    """Left shift by k places: the new vertex i carries the old vertex i+k."""
    lo, hi = q.lo - k, q.hi - k
    cen = None
    if lo <= 0 <= hi:
        j = -lo  # offset of vertex 0 in the shifted window
        cen = float(q.dn[j] / q.dm[j]) if q.dm[j] > 0 else None
    return replace(q, lo=lo, hi=hi, cen_ratio=cen)


def role_reverse(q: Quadruple) -> Quadruple:
    """Swap the players and reflect the trail through the origin."""
    lo, hi = -q.hi, -q.lo
    a = q.b[::-1].copy()
    b = q.a[::-1].copy()
    m = q.n[::-1].copy()
    n = q.m[::-1].copy()
    dm = q.dn[::-1].copy()
    dn = q.dm[::-1].copy()
    boundary = BoundaryData(
        m_minus_inf=q.boundary.n_plus_inf,
        m_plus_inf=q.boundary.n_minus_inf,
        n_minus_inf=q.boundary.m_plus_inf,
        n_plus_inf=q.boundary.m_minus_inf,
        m_star=q.boundary.n_star,
        n_star=q.boundary.m_star,
    )
    cen = None
    if lo <= 0 <= hi and dm[-lo] > 0:
        cen = float(dn[-lo] / dm[-lo])
    return Quadruple(
        lo=lo, hi=hi, a=a, b=b, m=m, n=n, dm=dm, dn=dn,
        boundary=boundary, cen_ratio=cen,
    )


def transform(q: Quadruple, kind: str, *args) -> Quadruple:
    """Dispatch by name: dilate(u) | translate(v1, v2) | shift(k) | role_reverse."""
    if kind == "dilate":
        return dilate(q, *args)
    if kind == "translate":
        return translate(q, *args)
    if kind == "shift":
        return shift(q, *args)
    if kind == "role_reverse":
        return role_reverse(q)
    raise ValueError(f"unknown transform {kind!r}")


def phi_view(q: Quadruple) -> PhiView:
    """Increment ratios phi_i = dn_i / dm_i over the window, plus battlefield.

    The battlefield is the unique window index whose phi lies in (1/3, 3].
    Ratios that cannot be resolved in double precision are clamped to
    PHI_CLAMP and flagged.
    """
    width = q.hi - q.lo + 1
    phi = np.empty(width)
    clamped = np.zeros(width, dtype=bool)
    for j in range(width):
        dm_j = q.dm[j]
        dn_j = q.dn[j]
        if dm_j > 0 and dn_j > 0:
            v = dn_j / dm_j
            if v < PHI_CLAMP:
                phi[j] = PHI_CLAMP
                clamped[j] = True
            else:
                phi[j] = v
        else:
            phi[j] = PHI_CLAMP
            clamped[j] = True
    hits = [
        q.lo + j
        for j in range(width)
        if not clamped[j] and 1.0 / 3.0 < phi[j] <= 3.0
    ]
    if not hits:
        raise ValueError(
            f"battlefield outside window [{q.lo}, {q.hi}]: no phi in (1/3, 3]"
        )
    return PhiView(phi=phi, battlefield=hits[0], clamped=clamped)


def residuals(q: Quadruple) -> np.ndarray:
    """Max absolute residual of the four defining equations at each window index."""
    a, b = q.a, q.b
    m_prev, m_here, m_next = q.m[:-2], q.m[1:-1], q.m[2:]
    n_prev, n_here, n_next = q.n[:-2], q.n[1:-1], q.n[2:]
    ab = a + b
    r1 = np.abs(ab * (m_here + a) - (a * m_next + b * m_prev))
    r2 = np.abs(ab * (n_here + b) - (a * n_next + b * n_prev))
    r3 = np.abs(ab * ab - b * (m_next - m_prev))
    r4 = np.abs(ab * ab - a * (n_prev - n_next))
    return np.max(np.stack([r1, r2, r3, r4]), axis=0)
