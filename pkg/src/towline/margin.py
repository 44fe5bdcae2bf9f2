"""Margin maps: the victory-reward ratio as a function of the central ratio.

The finite-trail map is an explicit rational expression in four product
series (P, Q, S, T).  The infinite map is its limit; a Cauchy bound with
fully explicit constants turns any tolerance into concrete truncation
orders, so the infinite map comes with a certified error bar.  Domain
changes (theta and the doubly-exponential surrogate) flatten the orbit
action into unit translations, and a scan-and-bisect root finder
enumerates equilibria on level sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BAND_HI,
    BAND_LO,
    c_minus_1,
    d_minus_1,
    orbit_to_band,
    s_fn,
    s_inverse,
    s_orbit,
)
from .solutions import Quadruple, Z, standard_solution

__all__ = [
    "SeriesPQST",
    "pqst",
    "margin_finite",
    "rkrell_bound",
    "MarginEstimate",
    "margin_infinite",
    "margin_infinite_series",
    "theta",
    "theta_inverse",
    "big_theta",
    "big_theta_inverse",
    "psi",
    "RootSet",
    "find_level_set",
    "EquilibriumFamily",
    "enumerate_equilibria",
]


@dataclass(frozen=True)
class SeriesPQST:
    """Partial sums of the four increment-product series at one argument."""

    x: float
    k: int
    ell: int
    P: float
    Q: float
    S: float
    T: float


def pqst(x: float, k: int, ell: int) -> SeriesPQST:
    """P_k, Q_ell, S_k, T_ell: normalized payoff spreads of the finite trail.

    P and S accumulate forward products of (c-1) and (d-1) along the orbit
    of x; Q and T accumulate reciprocal backward products.  P_0 = S_0 = 1 and
    Q_1 = T_1 = 0.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    if k < 0:
        raise ValueError("forward order k must be >= 0")
    if ell < 1:
        raise ValueError("backward order ell must be >= 1")
    P = S = 1.0
    pterm = sterm = 1.0
    y = x
    for _ in range(k):
        pterm *= c_minus_1(y)
        sterm *= d_minus_1(y)
        P += pterm
        S += sterm
        y = s_fn(y)
        if y == 0.0:
            break
    Q = T = 0.0
    qterm = tterm = 1.0
    y = x
    for _ in range(ell - 1):
        y = s_inverse(y)
        if math.isinf(y):
            break
        qterm /= c_minus_1(y)
        tterm /= d_minus_1(y)
        Q += qterm
        T += tterm
    return SeriesPQST(x=x, k=k, ell=ell, P=P, Q=Q, S=S, T=T)


def margin_finite(x: float, ell: int, k: int) -> float:
    """Mina margin of the standard solution on the trail with depths (ell, k).

    The trail runs from -ell to k with open play strictly inside; the value
    is x * (S_k + T_ell) / (P_k + Q_ell).
    """
    s = pqst(x, k, ell)
    return x * (s.S + s.T) / (s.P + s.Q)


def rkrell_bound(k: int, ell: int) -> float:
    """Explicit Cauchy bound on |margin_finite(., ell, k) - limit| over the band.

    Valid for k >= 0, ell >= 2 and band arguments; decays doubly
    exponentially in both orders.
    """
    if k < 0 or ell < 2:
        raise ValueError("bound requires k >= 0 and ell >= 2")
    t1 = 3.0**5 * 2.0 ** (2 * k - 2) * 6.0 ** (1 - 2.0**k)
    t2 = 3.0**3 * 2.0 ** (ell - 2) * 6.0 ** (ell - 2.0 ** (ell - 1))
    return t1 + t2


def _orders_for_tol(tol: float) -> tuple[int, int]:
    if tol < 1e-15:
        # below double-precision resolution the certified bound is fiction
        raise ValueError(f"tolerance {tol!r} finer than double precision permits")
    for k in range(2, 60):
        if 3.0**5 * 2.0 ** (2 * k - 2) * 6.0 ** (1 - 2.0**k) <= tol / 2.0:
            break
    else:
        raise ValueError(f"tolerance {tol!r} unreachable by the truncation bound")
    for ell in range(2, 60):
        if 3.0**3 * 2.0 ** (ell - 2) * 6.0 ** (ell - 2.0 ** (ell - 1)) <= tol / 2.0:
            break
    else:
        raise ValueError(f"tolerance {tol!r} unreachable by the truncation bound")
    return k, ell


@dataclass(frozen=True)
class MarginEstimate:
    """Infinite-trail margin value with a certified truncation error bound."""

    value: float
    bound: float
    k: int
    ell: int
    band_x: float
    orbit_steps: int

    def __float__(self) -> float:
        return self.value


def margin_infinite(x: float, tol: float = 1e-9) -> MarginEstimate:
    """Infinite-trail Mina margin at x, certified within ``tol``.

    Arguments outside the band [1/3, 3) are first walked along the orbit
    (the map is orbit-invariant), keeping the series well conditioned; the
    truncation orders are then read off the explicit Cauchy bound.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    y, j = orbit_to_band(x)
    k, ell = _orders_for_tol(tol)
    value = margin_finite(y, ell, k)
    return MarginEstimate(
        value=value, bound=rkrell_bound(k, ell), k=k, ell=ell, band_x=y, orbit_steps=j
    )


def margin_infinite_series(x: float, rel_tol: float = 1e-12) -> float:
    """Independent route to the infinite margin: sum of s_i(x)/Z(s_i(x)).

    Cross-checks margin_infinite through entirely different intermediate
    quantities (the total-spread function Z along the orbit).
    """
    y, _ = orbit_to_band(x)
    total = y / Z(y)
    # forward terms
    t = y
    for _ in range(40):
        t = s_fn(t)
        if t == 0.0:
            break
        term = t / Z(t)
        total += term
        if term < rel_tol * total:
            break
    # backward terms
    t = y
    for _ in range(40):
        t = s_inverse(t)
        if math.isinf(t):
            break
        term = t / Z(t)
        total += term
        if term < rel_tol * total:
            break
    return total


def _q_map(y: float) -> float:
    return 3.0 * (y - 1.0 / 3.0) / 8.0


def _q_inv(r: float) -> float:
    return 1.0 / 3.0 + 8.0 * r / 3.0


def theta(x: float) -> float:
    """Orbit-counting coordinate: integer part = steps into [1/3, 3), plus
    an increasing fractional ramp within the band."""
    y, k = orbit_to_band(x)
    return k + _q_map(y)


def theta_inverse(z: float) -> float:
    """Inverse of theta, exact by construction: s_{-k}(q^{-1}(frac))."""
    k = math.floor(z)
    y = _q_inv(z - k)
    if y >= BAND_HI:  # frac rounding can land exactly on the band edge
        y = math.nextafter(BAND_HI, 0.0)
    return s_orbit(y, -k)


def big_theta(z: float) -> float:
    """Doubly exponential surrogate 2**(sign(z) * (2**|z| - 1)); Theta(0) = 1."""
    e = 2.0 ** abs(z) - 1.0
    if e > 1023.0:
        raise OverflowError(f"surrogate coordinate {z!r} outside the representable range")
    sign = 1.0 if z >= 0 else -1.0
    return 2.0 ** (sign * e)


def big_theta_inverse(y: float) -> float:
    """Inverse surrogate coordinate (log-log form)."""
    if not y > 0:
        raise ValueError("argument must be positive")
    if y >= 1.0:
        return math.log2(math.log2(y) + 1.0)
    return -math.log2(-math.log2(y) + 1.0)


def psi(z: float, tol: float = 1e-9) -> float:
    """The infinite margin read in theta coordinates; periodic with period 1."""
    return margin_infinite(theta_inverse(z), tol).value


@dataclass(frozen=True)
class RootSet:
    """Result of a level-set scan: certified sign-change roots plus suspects.

    ``suspected`` holds mesh points where the map grazes the target without a
    sign change (tangential roots are reported, never dropped).
    """

    target: float
    interval: tuple[float, float]
    mesh: float
    roots: list[float]
    residuals: list[float]
    suspected: list[float] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.roots)


def find_level_set(
    fn,
    target: float,
    interval: tuple[float, float],
    mesh: float,
    xtol: float = 1e-9,
) -> RootSet:
    """Scan fn - target for sign changes on a mesh and bisect each bracket.

    ``fn`` must be continuous on the interval.  Roots closer than one mesh
    step merge; near-misses at local extrema are reported as suspected roots.
    """
    if not mesh > 0:
        raise ValueError("mesh must be positive")
    lo, hi = interval
    if not lo < hi:
        raise ValueError("empty interval")
    n = int(math.ceil((hi - lo) / mesh))
    xs = np.linspace(lo, hi, n + 1)
    gs = np.array([fn(float(t)) - target for t in xs])

    roots: list[float] = []
    residuals: list[float] = []
    for i in range(n):
        g0, g1 = gs[i], gs[i + 1]
        if g0 == 0.0:
            root = float(xs[i])
        elif g0 * g1 < 0.0:
            a, b = float(xs[i]), float(xs[i + 1])
            fa = g0
            while b - a > xtol:
                m = 0.5 * (a + b)
                fm = fn(m) - target
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            root = 0.5 * (a + b)
        else:
            continue
        if roots and abs(root - roots[-1]) <= mesh:
            continue
        roots.append(root)
        residuals.append(abs(fn(root) - target))
    if gs[-1] == 0.0 and (not roots or abs(float(xs[-1]) - roots[-1]) > mesh):
        roots.append(float(xs[-1]))
        residuals.append(0.0)

    suspected: list[float] = []
    for i in range(1, n):
        if gs[i - 1] * gs[i] < 0.0 or gs[i] * gs[i + 1] < 0.0 or gs[i] == 0.0:
            continue
        local_scale = max(abs(gs[i] - gs[i - 1]), abs(gs[i + 1] - gs[i]))
        is_extremum = abs(gs[i]) <= abs(gs[i - 1]) and abs(gs[i]) <= abs(gs[i + 1])
        if is_extremum and abs(gs[i]) < local_scale:
            x_sus = float(xs[i])
            if all(abs(x_sus - r) > mesh for r in roots):
                suspected.append(x_sus)
    return RootSet(
        target=target,
        interval=(lo, hi),
        mesh=mesh,
        roots=roots,
        residuals=residuals,
        suspected=suspected,
    )


@dataclass(frozen=True)
class EquilibriumFamily:
    """All equilibria at one margin level: band roots plus their shift orbits.

    Each band root z yields the standard solution with central ratio z; every
    integer shift of it is an equilibrium too (shift by k moves the central
    ratio to s_k(z)), so the full family is countable.
    """

    mina_margin: float
    band_roots: list[float]
    solutions: list[Quadruple]
    shift_note: str = (
        "each solution generates a countable family under integer shifts; "
        "the shift by k has central ratio s_k(root)"
    )

    @property
    def empty(self) -> bool:
        return not self.band_roots


def enumerate_equilibria(
    mina_margin: float,
    window: tuple[int, int],
    mesh: float = 1e-4,
    tol: float = 1e-12,
) -> EquilibriumFamily:
    """Solve margin = target over the band (1/3, 3] and build each solution.

    An empty root set (margin outside the attainable range) is a result, not
    an error.
    """
    if not mina_margin > 0:
        raise ValueError("margin must be positive")
    k, ell = _orders_for_tol(tol)

    def f(z: float) -> float:
        return margin_finite(z, ell, k)

    # pad the band so roots displaced across an edge by truncation noise are
    # still caught, then canonicalize every root into (1/3, 3] along the orbit
    pad = 1e-6
    scan = find_level_set(f, mina_margin, (BAND_LO * (1 - pad), BAND_HI * (1 + pad)), mesh)
    roots: list[float] = []
    for r in scan.roots:
        if r <= BAND_LO:
            r = s_inverse(r)
        elif r > BAND_HI:
            r = s_fn(r)
        if all(abs(r - seen) > mesh for seen in roots):
            roots.append(r)
    roots = sorted(roots)
    sols = [standard_solution(z, window) for z in roots]
    return EquilibriumFamily(mina_margin=mina_margin, band_roots=roots, solutions=sols)
