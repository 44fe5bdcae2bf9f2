"""Backward induction for time-dependent play and the symmetric recursion.

The time-dependent system couples each turn's stakes to the next turn's
payoff rows through the one-step equilibrium; iterating it backward from a
terminal payoff profile explores whether non-constant solutions survive.
Rows are evolved in increment space: payoff increments decay doubly
exponentially away from active battlefields and would otherwise vanish into
the spacing of floats near the boundary values long before they stop
mattering.  Increments are clamped at a tiny positive floor, documented and
far below every reported quantity.

The second half solves the single-sequence symmetric-game recursion
A(-i-1) * (2A(i) + A(-i)) = A(i+1)^2 on the integer and half-offset
lattices and cross-checks it against the explicit solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solutions import Quadruple, standard_solution

__all__ = [
    "INCREMENT_FLOOR",
    "DynamicSheet",
    "dabmn_step",
    "dabmn_evolve",
    "plateau_terminal",
    "static_terminal",
    "penny_terminal",
    "terminal_preset",
    "count_local_maxima",
    "ASystemSolution",
    "a_system_solve",
    "a_system_residuals",
    "SymmetricReport",
    "symmetric_crosscheck",
]

# payoff increments are clamped here; everything below has left the range
# where double precision can represent the dynamics (reported values that
# sit at the floor are effectively zero)
INCREMENT_FLOOR = 1e-280


def dabmn_step(
    m_next: np.ndarray, n_next: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One backward step of the time-dependent system, in value space.

    Input rows cover the full trail including endpoints; the two-gap payoff
    spreads must be positive at every interior vertex (the step names the
    first offender otherwise).  Returns (a, b, m, n) at the earlier time,
    endpoints copied unchanged.
    """
    m_next = np.asarray(m_next, dtype=float)
    n_next = np.asarray(n_next, dtype=float)
    if m_next.shape != n_next.shape or m_next.ndim != 1 or len(m_next) < 3:
        raise ValueError("payoff rows must be equal-length 1-d arrays over the trail")
    M = m_next[2:] - m_next[:-2]
    N = n_next[:-2] - n_next[2:]
    half = (len(m_next) - 1) // 2
    if np.any(M <= 0) or np.any(N <= 0):
        bad = int(np.argmax((M <= 0) | (N <= 0)))
        raise ValueError(f"payoff spread not positive at vertex {bad + 1 - half}")
    tot = M + N
    a = M * M * (N / tot) / tot
    b = M * N * (N / tot) / tot
    ab = a + b
    m = m_next.copy()
    n = n_next.copy()
    m[1:-1] = (a * m_next[2:] + b * m_next[:-2]) / ab - a
    n[1:-1] = (a * n_next[2:] + b * n_next[:-2]) / ab - b
    return a, b, m, n


@dataclass(frozen=True)
class DynamicSheet:
    """Recorded rows of a backward evolution, youngest time first.

    ``times`` lists the recorded turn indices in decreasing order; row k of
    each array belongs to ``times[k]``.  Stake rows cover open play, payoff
    rows the full trail.  ``maxima_counts`` pairs each recorded time with
    the number of local maxima of the a-row above a relative threshold, and
    ``convergence`` holds the sup-norm m-row movement at each recorded step.
    """

    K: int
    horizon: int
    times: list[int]
    a_rows: np.ndarray
    b_rows: np.ndarray
    m_rows: np.ndarray
    n_rows: np.ndarray
    maxima_counts: list[tuple[int, int]]
    convergence: list[float]

    @property
    def collapse_time(self) -> int | None:
        """Start of the final recorded stretch with a single a-profile peak."""
        start: int | None = None
        for j, count in self.maxima_counts:  # recorded in decreasing time
            if count == 1:
                if start is None:
                    start = j
            else:
                start = None
        return start


def count_local_maxima(row: np.ndarray, rel_threshold: float = 1e-6) -> int:
    """Strict local maxima above ``rel_threshold`` times the row maximum."""
    row = np.asarray(row)
    if row.size == 0:
        return 0
    thr = row.max() * rel_threshold
    count = 0
    for i in range(len(row)):
        if row[i] <= thr:
            continue
        left = row[i - 1] if i > 0 else -math.inf
        right = row[i + 1] if i < len(row) - 1 else -math.inf
        if row[i] > left and row[i] > right:
            count += 1
    return count


def dabmn_evolve(
    K: int,
    horizon: int,
    m_ter: np.ndarray,
    n_ter: np.ndarray,
    stride: int = 140,
    floor: float = INCREMENT_FLOOR,
) -> DynamicSheet:
    """Iterate the backward step from the terminal rows down to time zero.

    The trail is [-K-1, K+1] with open play [-K, K]; terminal rows cover the
    full trail and must be strictly monotone (m up, n down).  Rows are
    recorded at multiples of ``stride`` and at time zero.
    """
    m_ter = np.asarray(m_ter, dtype=float)
    n_ter = np.asarray(n_ter, dtype=float)
    width = 2 * K + 3
    if len(m_ter) != width or len(n_ter) != width:
        raise ValueError(f"terminal rows must have length {width}")
    if horizon <= 0 or stride <= 0:
        raise ValueError("horizon and stride must be positive")
    dm = np.diff(m_ter)
    dn = -np.diff(n_ter)
    if np.any(dm <= 0) or np.any(dn <= 0):
        bad = int(np.argmax((dm <= 0) | (dn <= 0)))
        raise ValueError(f"terminal rows not strictly monotone at step {bad - K - 1}")
    dm = np.maximum(dm, floor)
    dn = np.maximum(dn, floor)
    m_lo = float(m_ter[0])
    n_lo = float(n_ter[0])

    times: list[int] = []
    rows_a: list[np.ndarray] = []
    rows_b: list[np.ndarray] = []
    rows_m: list[np.ndarray] = []
    rows_n: list[np.ndarray] = []
    counts: list[tuple[int, int]] = []
    convergence: list[float] = []
    prev_m = m_lo + np.concatenate([[0.0], np.cumsum(dm)])

    for j in range(horizon - 1, -1, -1):
        M = dm[:-1] + dm[1:]
        N = dn[:-1] + dn[1:]
        if np.any(M <= 0) or np.any(N <= 0):
            bad = int(np.argmax((M <= 0) | (N <= 0)))
            raise ValueError(f"payoff spread vanished at vertex {bad - K} (time {j})")
        tot = M + N
        a = M * M * (N / tot) / tot
        b = M * N * (N / tot) / tot
        g = M * M * (M / tot) / tot
        h = N * N * (N / tot) / tot
        dm_new = np.empty_like(dm)
        dn_new = np.empty_like(dn)
        dm_new[0] = g[0]
        dm_new[1:-1] = dm[:-2] + g[1:] - g[:-1]
        dm_new[-1] = M[-1] * (N[-1] / tot[-1]) * ((N[-1] + 2.0 * M[-1]) / tot[-1])
        dn_new[-1] = h[-1]
        dn_new[1:-1] = dn[2:] + h[:-1] - h[1:]
        dn_new[0] = N[0] * (M[0] / tot[0]) * ((M[0] + 2.0 * N[0]) / tot[0])
        dm = np.maximum(dm_new, floor)
        dn = np.maximum(dn_new, floor)
        if j % stride == 0 or j == 0:
            m_row = m_lo + np.concatenate([[0.0], np.cumsum(dm)])
            n_row = n_lo - np.concatenate([[0.0], np.cumsum(dn)])
            times.append(j)
            rows_a.append(a)
            rows_b.append(b)
            rows_m.append(m_row)
            rows_n.append(n_row)
            counts.append((j, count_local_maxima(a)))
            convergence.append(float(np.abs(m_row - prev_m).max()))
            prev_m = m_row
    return DynamicSheet(
        K=K,
        horizon=horizon,
        times=times,
        a_rows=np.array(rows_a),
        b_rows=np.array(rows_b),
        m_rows=np.array(rows_m),
        n_rows=np.array(rows_n),
        maxima_counts=counts,
        convergence=convergence,
    )


def plateau_terminal(K: int, edge: float = 0.4, ratio: float = 0.35, tilt: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Two-battlefield terminal: sharp rises at both ends of a gentle plateau.

    The m-row climbs steeply from zero near the left end, crosses a slightly
    tilted plateau at one half, and climbs steeply to one at the right end;
    the n-row is its mirror image.  Normalized to boundary values (0, 1).
    """
    width = 2 * K + 2
    inc = np.empty(width)
    for t in range(width):
        dist = min(t, width - 1 - t)
        inc[t] = max(edge * ratio**dist, tilt)
    m = np.concatenate([[0.0], np.cumsum(inc)])
    m /= m[-1]
    return m, m[::-1].copy()


def static_terminal(x: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Terminal rows copied from the standard explicit solution at x."""
    q = standard_solution(x, (-K, K))
    return q.m.copy(), q.n.copy()


def penny_terminal(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Linear ramp terminal (the one-turn game's payoff profile, widened)."""
    v = np.linspace(0.0, 1.0, 2 * K + 3)
    return v, v[::-1].copy()


def terminal_preset(name: str, K: int, x: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    if name == "plateau":
        return plateau_terminal(K)
    if name == "static":
        return static_terminal(x, K)
    if name == "penny":
        return penny_terminal(K)
    raise ValueError(f"unknown terminal preset {name!r}")


@dataclass(frozen=True)
class ASystemSolution:
    """Positive solution of the symmetric recursion on a window.

    ``indices`` are integers or half-integers depending on the lattice;
    ``values`` scale linearly in the seed.
    """

    lattice: str
    lam: float
    indices: np.ndarray
    values: np.ndarray

    def value_at(self, i: float) -> float:
        hits = np.nonzero(np.isclose(self.indices, i))[0]
        if not hits.size:
            raise KeyError(f"index {i} outside the solved window")
        return float(self.values[hits[0]])


def _outward_pair(i_minus: float, i_plus: float) -> tuple[float, float]:
    """Unique positive next pair of the symmetric recursion.

    Substituting the first equation into the second leaves one quadratic in
    the outward plus-value; the stable root form avoids cancellation when
    the inputs have decayed to the doubly exponential tail.
    """
    if i_minus == 0.0 or i_plus == 0.0:
        return 0.0, 0.0
    s = 2.0 * i_plus + i_minus
    a = 2.0 * i_plus
    b = i_plus * s
    qq = i_minus * i_minus * s
    disc = b * b + 4.0 * a * qq
    o_plus = 2.0 * qq / (b + math.sqrt(disc))
    o_minus = o_plus * o_plus / s
    return o_minus, o_plus


def a_system_solve(lattice: str, lam: float, half_width: int) -> ASystemSolution:
    """Solve the symmetric recursion outward from its seed equations.

    On the integer lattice the seed is value lam at index 0; on the
    half-offset lattice, lam at index -1/2.  Each outward step takes the
    unique positive root, so the whole solution is determined by the seed.
    """
    if lam <= 0:
        raise ValueError("seed value must be positive")
    if half_width < 1:
        raise ValueError("half_width must be at least 1")
    vals: dict[float, float] = {}
    if lattice == "int":
        vals[0] = lam
        a1 = lam * (-3.0 + math.sqrt(33.0)) / 4.0
        vals[1] = a1
        vals[-1] = (lam - a1) / 2.0
        k = 1
        while k < half_width:
            o_minus, o_plus = _outward_pair(vals[-k], vals[k])
            vals[-k - 1] = o_minus
            vals[k + 1] = o_plus
            k += 1
        indices = np.arange(-half_width, half_width + 1, dtype=float)
    elif lattice == "half":
        vals[-0.5] = lam
        vals[0.5] = 2.0 * lam
        k = 1
        while k < half_width:
            o_minus, o_plus = _outward_pair(vals[-k + 0.5], vals[k - 0.5])
            vals[-k - 0.5] = o_minus
            vals[k + 0.5] = o_plus
            k += 1
        indices = np.arange(-half_width + 0.5, half_width - 0.5 + 1, dtype=float)
    else:
        raise ValueError("lattice must be 'int' or 'half'")
    values = np.array([vals[i] for i in indices])
    if np.any(values < 0):
        raise RuntimeError("outward recursion produced a negative value")
    return ASystemSolution(lattice=lattice, lam=lam, indices=indices, values=values)


def a_system_residuals(sol: ASystemSolution) -> np.ndarray:
    """Residual of every recursion equation whose four indices are in window."""
    idx = {float(i): float(v) for i, v in zip(sol.indices, sol.values)}
    out = []
    for i in sol.indices:
        needed = (-i - 1.0, i, -i, i + 1.0)
        if all(j in idx for j in needed):
            lhs = idx[-i - 1.0] * (2.0 * idx[i] + idx[-i])
            rhs = idx[i + 1.0] ** 2
            out.append(abs(lhs - rhs))
    return np.array(out)


@dataclass(frozen=True)
class SymmetricReport:
    """Discrepancy summary between explicit solutions and the recursion."""

    reflection_gap_3: float
    reflection_gap_1: float
    residual_int: float
    residual_half: float
    match_int: float
    match_half: float
    increment_identity_3: float
    increment_identity_1: float

    def max_gap(self) -> float:
        return max(
            self.reflection_gap_3,
            self.reflection_gap_1,
            self.residual_int,
            self.residual_half,
            self.match_int,
            self.match_half,
        )


def symmetric_crosscheck(window: tuple[int, int] = (-10, 10)) -> SymmetricReport:
    """Verify the symmetric-game identities on explicit solutions.

    At central ratio 3 the solution is its own role reversal (a_i = b_{-i})
    and its a-sequence solves the recursion on the integers; at ratio 1 the
    reversal is offset by one (a_i = b_{-1-i}) and the a-sequence solves the
    half-lattice recursion.  Both are matched against the outward solver
    after reading off the scale from the central stake.
    """
    lo, hi = window
    q3 = standard_solution(3.0, window)
    q1 = standard_solution(1.0, window)

    gap3 = 0.0
    gap1 = 0.0
    for i in range(lo, hi + 1):
        if lo <= -i <= hi:
            gap3 = max(gap3, abs(q3.a[i - lo] - q3.b[-i - lo]))
            gap3 = max(gap3, abs(q3.m[i - lo + 1] - q3.n[-i - lo + 1]))
        if lo <= -1 - i <= hi:
            gap1 = max(gap1, abs(q1.a[i - lo] - q1.b[-1 - i - lo]))
            gap1 = max(gap1, abs(q1.m[i - lo + 1] - q1.n[-1 - i - lo + 1]))

    def residual_int_seq(seq_by_index: dict[float, float]) -> float:
        worst = 0.0
        for i in seq_by_index:
            needed = (-i - 1.0, i, -i, i + 1.0)
            if all(j in seq_by_index for j in needed):
                lhs = seq_by_index[-i - 1.0] * (2.0 * seq_by_index[i] + seq_by_index[-i])
                rhs = seq_by_index[i + 1.0] ** 2
                worst = max(worst, abs(lhs - rhs))
        return worst

    seq3 = {float(i): float(q3.a[i - lo]) for i in range(lo, hi + 1)}
    seq1 = {i + 0.5: float(q1.a[int(i)  - lo]) for i in np.arange(lo, hi + 1.0)}
    res3 = residual_int_seq(seq3)
    res1 = residual_int_seq(seq1)

    width = min(-lo, hi)
    sol_int = a_system_solve("int", float(q3.a[-lo]), width)
    match3 = 0.0
    for i, v in zip(sol_int.indices, sol_int.values):
        j = int(i)
        if lo <= j <= hi:
            match3 = max(match3, abs(v - float(q3.a[j - lo])))
    sol_half = a_system_solve("half", float(q1.a[-1 - lo]), width)
    match1 = 0.0
    for i, v in zip(sol_half.indices, sol_half.values):
        j = int(i - 0.5)
        if lo <= j <= hi:
            match1 = max(match1, abs(v - float(q1.a[j - lo])))

    # increment identity: the m-step equals the squared stake over the
    # reflected stake (reflection offset by the lattice parity)
    inc3 = 0.0
    for i in range(lo, hi + 1):
        if lo <= -i <= hi and q3.a[-i - lo] > 1e-200:
            pred = q3.a[i - lo] ** 2 / q3.a[-i - lo]
            inc3 = max(inc3, abs(pred - q3.dm[i - lo]))
    inc1 = 0.0
    for i in range(lo, hi + 1):
        if lo <= -1 - i <= hi and q1.a[-1 - i - lo] > 1e-200:
            pred = q1.a[i - lo] ** 2 / q1.a[-1 - i - lo]
            inc1 = max(inc1, abs(pred - q1.dm[i - lo]))

    return SymmetricReport(
        reflection_gap_3=gap3,
        reflection_gap_1=gap1,
        residual_int=res3,
        residual_half=res1,
        match_int=match3,
        match_half=match1,
        increment_identity_3=inc3,
        increment_identity_1=inc1,
    )
