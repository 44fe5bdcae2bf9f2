"""Gameplay: strategies, turn resolution, simulation and exact payoffs.

The game is simultaneous-stake: each turn both players commit a stake, a
biased coin proportional to the stakes picks the mover, stakes are sunk,
and the counter steps left (toward the minimizer's target) or right.  Play
ends at an absorbing trail end, by escape classification on the unbounded
trail, or at the turn cutoff.

Mean payoffs of time-invariant stake tables satisfy a linear one-step
relation, solved here by direct tridiagonal elimination; the Monte-Carlo
paths and that solver cross-check each other throughout the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .solutions import BoundaryData, Quadruple

__all__ = [
    "Strategy",
    "TableStrategy",
    "ZeroStrategy",
    "NashStrategy",
    "BullyStrategy",
    "TitForTatStrategy",
    "strategy_catalogue",
    "GameConfig",
    "GameRecord",
    "BatchStats",
    "UnanimityStats",
    "penny_forfeit",
    "resolve_turn",
    "simulate",
    "simulate_batch",
    "exact_payoffs",
    "finite_boundary",
    "deviation_check",
    "unanimity_stats",
    "wilson_interval",
]

MAXINE = "maxine"
MINA = "mina"


def penny_forfeit(M: float, N: float) -> tuple[float, float]:
    """Equilibrium stakes of the one-turn game with payoff gaps M and N.

    Maxine stakes M^2 N / (M+N)^2, Mina M N^2 / (M+N)^2; both positive.
    """
    if not (M > 0 and N > 0):
        raise ValueError("payoff gaps must be positive")
    tot = M + N
    return M * M * (N / tot) / tot, M * N * (N / tot) / tot


def resolve_turn(a: float, b: float, rng: np.random.Generator) -> str:
    """Sample the turn winner; stakes (0, 0) resolve by a fair coin.

    Consumes exactly one draw from ``rng``.
    """
    if a < 0 or b < 0:
        raise ValueError("stakes must be non-negative")
    p = 0.5 if a + b == 0 else a / (a + b)
    return MAXINE if rng.random() < p else MINA


class Strategy:
    """Stake rule.  Subclasses override ``stake``.

    ``opp_last`` is the opponent's stake at the previous turn (None at the
    first); reactive strategies may use it, which keeps the simultaneous-move
    structure intact.  ``notify_game_end`` feeds iterated-play memory.
    """

    kind = "abstract"
    time_invariant = False

    def stake(self, vertex: int, turn: int, opp_last: float | None = None) -> float:
        raise NotImplementedError

    def reset(self) -> None:
        """Called at the start of every game."""

    def notify_game_end(self, opp_total: float) -> None:
        """Called after a game with the opponent's total expenditure."""

    def describe(self) -> dict:
        return {"kind": self.kind}


class TableStrategy(Strategy):
    """Time-invariant stakes read from a vertex table (zero off-table)."""

    kind = "table"
    time_invariant = True

    def __init__(self, table: dict[int, float]):
        bad = {v: s for v, s in table.items() if s < 0}
        if bad:
            raise ValueError(f"negative stakes in table: {bad}")
        self.table = dict(table)

    def stake(self, vertex, turn, opp_last=None):
        return self.table.get(vertex, 0.0)

    def describe(self):
        return {"kind": self.kind, "vertices": sorted(self.table)}


class ZeroStrategy(Strategy):
    """Always stake nothing (the cooperative baseline)."""

    kind = "zero"
    time_invariant = True

    def stake(self, vertex, turn, opp_last=None):
        return 0.0


class NashStrategy(TableStrategy):
    """Equilibrium stakes taken from a solution quadruple.

    ``side`` picks the player: the right-mover plays the a-sequence, the
    left-mover the b-sequence.  ``shift`` relabels vertices before lookup.
    """

    kind = "nash"

    def __init__(self, solution: Quadruple, side: str, shift: int = 0):
        if side not in (MAXINE, MINA):
            raise ValueError("side must be 'maxine' or 'mina'")
        seq = solution.a if side == MAXINE else solution.b
        table = {
            i - shift: float(seq[i - solution.lo])
            for i in range(solution.lo, solution.hi + 1)
        }
        super().__init__(table)
        self.side = side
        self.shift = shift
        self.cen_ratio = solution.cen_ratio

    def describe(self):
        return {
            "kind": self.kind,
            "side": self.side,
            "shift": self.shift,
            "cen_ratio": self.cen_ratio,
        }


class BullyStrategy(Strategy):
    """Loads-of-money intimidation: trickle epsilon, double any real stake.

    Reacts to the opponent's previous stake; if it exceeded epsilon, restake
    it times ``multiplier``, otherwise fall back to epsilon.
    """

    kind = "bully"
    time_invariant = False

    def __init__(self, epsilon: float = 1e-3, multiplier: float = 2.0):
        if epsilon < 0 or multiplier <= 0:
            raise ValueError("epsilon must be >= 0 and multiplier > 0")
        self.epsilon = epsilon
        self.multiplier = multiplier

    def stake(self, vertex, turn, opp_last=None):
        if opp_last is not None and opp_last > self.epsilon:
            return self.multiplier * opp_last
        return self.epsilon

    def describe(self):
        return {"kind": self.kind, "epsilon": self.epsilon, "multiplier": self.multiplier}


class TitForTatStrategy(Strategy):
    """Iterated-play reciprocity across a series of games.

    Stake zero while the opponent behaved in the previous game (total below
    ``threshold``); play the aggression table for one full game after a
    transgression, then revert.
    """

    kind = "tit_for_tat"
    time_invariant = False

    def __init__(self, threshold: float = 1e-6, table: dict[int, float] | None = None):
        self.threshold = threshold
        self.table = dict(table or {})
        self.aggressive = False
        self._next_aggressive = False

    def reset(self):
        self.aggressive = self._next_aggressive
        self._next_aggressive = False

    def stake(self, vertex, turn, opp_last=None):
        if self.aggressive:
            return self.table.get(vertex, 0.0)
        return 0.0

    def notify_game_end(self, opp_total):
        if not self.aggressive and opp_total > self.threshold:
            self._next_aggressive = True

    def describe(self):
        return {"kind": self.kind, "threshold": self.threshold}


def strategy_catalogue() -> dict[str, str]:
    """Names and one-line blurbs of the built-in opponent strategies."""
    return {
        "nash": "equilibrium stakes for the session's trail and boundary",
        "zero": "always stakes nothing",
        "tit_for_tat": "stakes zero until provoked in a previous game",
        "bully": "stakes a trickle, doubles any positive stake it sees",
    }


@dataclass(frozen=True)
class GameConfig:
    """One game's parameters.

    ``trail`` gives the absorbing endpoints, or None for the unbounded trail
    with escape classification: the game is called once the counter leaves
    ``escape_center +/- escape_window`` heading outward, and cut off with the
    non-escape receipts after ``max_turns``.
    """

    boundary: BoundaryData
    start: int
    seed: int
    trail: tuple[int, int] | None = None
    max_turns: int = 10_000
    escape_window: int = 12
    escape_center: int = 0

    def __post_init__(self) -> None:
        if self.max_turns <= 0:
            raise ValueError("max_turns must be positive")
        if self.trail is not None:
            lo, hi = self.trail
            if not lo < self.start < hi:
                raise ValueError("start must lie strictly inside the trail")


@dataclass(frozen=True)
class GameRecord:
    """One play-through: path, per-turn stakes, costs and final payoffs."""

    path: list[int]
    stakes: list[tuple[float, float]]
    cost_plus: float
    cost_minus: float
    terminal: str
    payoff_plus: float
    payoff_minus: float
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "path": self.path,
                "stakes": [[a, b] for a, b in self.stakes],
                "costs": [self.cost_plus, self.cost_minus],
                "terminal": self.terminal,
                "payoffs": [self.payoff_plus, self.payoff_minus],
                "seed": self.seed,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "GameRecord":
        d = json.loads(text)
        return cls(
            path=[int(v) for v in d["path"]],
            stakes=[(float(a), float(b)) for a, b in d["stakes"]],
            cost_plus=float(d["costs"][0]),
            cost_minus=float(d["costs"][1]),
            terminal=str(d["terminal"]),
            payoff_plus=float(d["payoffs"][0]),
            payoff_minus=float(d["payoffs"][1]),
            seed=int(d["seed"]),
        )

    def csv_row(self) -> str:
        return ",".join(
            [
                repr(self.seed),
                repr(self.path[0]),
                repr(self.path[-1]),
                repr(len(self.path) - 1),
                self.terminal,
                repr(self.cost_plus),
                repr(self.cost_minus),
                repr(self.payoff_plus),
                repr(self.payoff_minus),
            ]
        )

    CSV_HEADER = "seed,start,end,turns,terminal,cost_plus,cost_minus,payoff_plus,payoff_minus"


def _receipts(config: GameConfig, terminal: str) -> tuple[float, float]:
    b = config.boundary
    if terminal == "mina_win":
        return b.m_minus_inf, b.n_minus_inf
    if terminal == "maxine_win":
        return b.m_plus_inf, b.n_plus_inf
    return b.m_star, b.n_star


def simulate(config: GameConfig, s_minus: Strategy, s_plus: Strategy) -> GameRecord:
    """Play one game; byte-identical output for identical inputs and seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    s_minus.reset()
    s_plus.reset()
    v = config.start
    path = [v]
    stakes: list[tuple[float, float]] = []
    cost_p = cost_m = 0.0
    last_a: float | None = None
    last_b: float | None = None
    terminal = "cutoff"
    for turn in range(1, config.max_turns + 1):
        a = float(s_plus.stake(v, turn, last_b))
        b = float(s_minus.stake(v, turn, last_a))
        if a < 0 or b < 0:
            raise ValueError("strategies must return non-negative stakes")
        winner = resolve_turn(a, b, rng)
        cost_p += a
        cost_m += b
        stakes.append((a, b))
        last_a, last_b = a, b
        v += 1 if winner == MAXINE else -1
        path.append(v)
        if config.trail is not None:
            lo, hi = config.trail
            if v == lo:
                terminal = "mina_win"
                break
            if v == hi:
                terminal = "maxine_win"
                break
        else:
            if v < config.escape_center - config.escape_window:
                terminal = "mina_win"
                break
            if v > config.escape_center + config.escape_window:
                terminal = "maxine_win"
                break
    t_plus, t_minus = _receipts(config, terminal)
    s_minus.notify_game_end(cost_p)
    s_plus.notify_game_end(cost_m)
    return GameRecord(
        path=path,
        stakes=stakes,
        cost_plus=cost_p,
        cost_minus=cost_m,
        terminal=terminal,
        payoff_plus=t_plus - cost_p,
        payoff_minus=t_minus - cost_m,
        seed=config.seed,
    )


@dataclass(frozen=True)
class BatchStats:
    """Aggregates over a simulated batch (lockstep, one stream per batch)."""

    runs: int
    p_maxine_win: float
    p_mina_win: float
    p_cutoff: float
    mean_payoff_plus: float
    mean_payoff_minus: float
    std_payoff_plus: float
    std_payoff_minus: float
    mean_turns: float
    p_unanimous_tail: float
    returns_to_center: float
    terminals: np.ndarray = field(repr=False)
    payoffs_plus: np.ndarray = field(repr=False)
    payoffs_minus: np.ndarray = field(repr=False)
    turns: np.ndarray = field(repr=False)


def simulate_batch(
    config: GameConfig,
    s_minus: Strategy,
    s_plus: Strategy,
    runs: int,
    center: int | None = None,
) -> BatchStats:
    """Vectorized lockstep batch for time-invariant strategy pairs.

    All games share turn indices and advance together under one seeded
    stream, which makes the batch reproducible as a unit.  The unanimity
    proxy marks games whose final increments (at least half of max_turns,
    truncated to the game length) all point the same way;
    ``returns_to_center`` counts per-game revisits of ``center``.
    """
    if runs <= 0:
        raise ValueError("runs must be positive")
    if not (s_minus.time_invariant and s_plus.time_invariant):
        raise ValueError("vectorized batches need time-invariant strategies")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    if config.trail is not None:
        lo, hi = config.trail
    else:
        lo = config.escape_center - config.escape_window - 1
        hi = config.escape_center + config.escape_window + 1
    width = hi - lo + 1
    a_tab = np.array([s_plus.stake(v, 1) for v in range(lo, hi + 1)])
    b_tab = np.array([s_minus.stake(v, 1) for v in range(lo, hi + 1)])
    if np.any(a_tab < 0) or np.any(b_tab < 0):
        raise ValueError("strategies must return non-negative stakes")
    tot = a_tab + b_tab
    p_tab = np.where(tot > 0, np.divide(a_tab, tot, out=np.full(width, 0.5), where=tot > 0), 0.5)

    pos = np.full(runs, config.start, dtype=np.int64)
    alive = np.ones(runs, dtype=bool)
    cost_p = np.zeros(runs)
    cost_m = np.zeros(runs)
    turns = np.zeros(runs, dtype=np.int64)
    streak = np.zeros(runs, dtype=np.int64)
    last_dir = np.zeros(runs, dtype=np.int8)
    center_v = config.escape_center if center is None else center
    revisits = np.zeros(runs, dtype=np.int64)
    terminals = np.zeros(runs, dtype=np.int8)  # 0 cutoff, 1 mina, 2 maxine

    for _ in range(config.max_turns):
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        off = pos[idx] - lo
        u = rng.random(idx.size)
        win = u < p_tab[off]
        step = np.where(win, 1, -1).astype(np.int64)
        cost_p[idx] += a_tab[off]
        cost_m[idx] += b_tab[off]
        pos[idx] += step
        turns[idx] += 1
        same = step.astype(np.int8) == last_dir[idx]
        streak[idx] = np.where(same, streak[idx] + 1, 1)
        last_dir[idx] = step.astype(np.int8)
        revisits[idx] += pos[idx] == center_v
        arrived = pos[idx]
        terminals[idx[arrived == lo]] = 1
        terminals[idx[arrived == hi]] = 2
        alive[idx] = (arrived != lo) & (arrived != hi)

    receipts = {
        0: _receipts(config, "cutoff"),
        1: _receipts(config, "mina_win"),
        2: _receipts(config, "maxine_win"),
    }
    t_plus = np.choose(terminals, [receipts[0][0], receipts[1][0], receipts[2][0]])
    t_minus = np.choose(terminals, [receipts[0][1], receipts[1][1], receipts[2][1]])
    pay_p = t_plus - cost_p
    pay_m = t_minus - cost_m
    tail = np.minimum(np.maximum(config.max_turns // 2, 1), np.maximum(turns, 1))
    unanimous = streak >= tail
    return BatchStats(
        runs=runs,
        p_maxine_win=float(np.mean(terminals == 2)),
        p_mina_win=float(np.mean(terminals == 1)),
        p_cutoff=float(np.mean(terminals == 0)),
        mean_payoff_plus=float(pay_p.mean()),
        mean_payoff_minus=float(pay_m.mean()),
        std_payoff_plus=float(pay_p.std(ddof=1)) if runs > 1 else 0.0,
        std_payoff_minus=float(pay_m.std(ddof=1)) if runs > 1 else 0.0,
        mean_turns=float(turns.mean()),
        p_unanimous_tail=float(np.mean(unanimous)),
        returns_to_center=float(revisits.mean()),
        terminals=terminals,
        payoffs_plus=pay_p,
        payoffs_minus=pay_m,
        turns=turns,
    )


def exact_payoffs(
    trail: tuple[int, int],
    a_table: dict[int, float],
    b_table: dict[int, float],
    boundary: BoundaryData,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean payoffs of a time-invariant stake pair on a finite trail.

    Solves the pair of one-step linear systems by tridiagonal elimination;
    returns (m, n) on the full trail including endpoints.  Requires a
    positive total stake at every open-play vertex.
    """
    lo, hi = trail
    n_open = hi - lo - 1
    if n_open < 1:
        raise ValueError("trail has no open play")
    a = np.array([a_table.get(v, 0.0) for v in range(lo + 1, hi)])
    b = np.array([b_table.get(v, 0.0) for v in range(lo + 1, hi)])
    tot = a + b
    if np.any(tot <= 0):
        v = lo + 1 + int(np.argmax(tot <= 0))
        raise ValueError(f"total stake must be positive at vertex {v}")
    p = a / tot
    q = b / tot

    def solve(left: float, right: float, rhs: np.ndarray) -> np.ndarray:
        # rows: x_i - p_i x_{i+1} - q_i x_{i-1} = rhs_i, Dirichlet ends
        diag = np.ones(n_open)
        lower = -q.copy()
        upper = -p.copy()
        d = rhs.copy()
        d[0] += q[0] * left
        d[-1] += p[-1] * right
        # forward elimination
        for i in range(1, n_open):
            if diag[i - 1] == 0.0:
                raise ValueError("singular one-step system")
            w = lower[i] / diag[i - 1]
            diag[i] -= w * upper[i - 1]
            d[i] -= w * d[i - 1]
        x = np.empty(n_open)
        if diag[-1] == 0.0:
            raise ValueError("singular one-step system")
        x[-1] = d[-1] / diag[-1]
        for i in range(n_open - 2, -1, -1):
            x[i] = (d[i] - upper[i] * x[i + 1]) / diag[i]
        return x

    m_open = solve(boundary.m_minus_inf, boundary.m_plus_inf, -a)
    n_open_v = solve(boundary.n_minus_inf, boundary.n_plus_inf, -b)
    m = np.concatenate([[boundary.m_minus_inf], m_open, [boundary.m_plus_inf]])
    n = np.concatenate([[boundary.n_minus_inf], n_open_v, [boundary.n_plus_inf]])
    return m, n


def finite_boundary(q: Quadruple) -> BoundaryData:
    """Endpoint values of a windowed solution, read as finite-trail receipts."""
    return BoundaryData(
        m_minus_inf=float(q.m[0]),
        m_plus_inf=float(q.m[-1]),
        n_minus_inf=float(q.n[0]),
        n_plus_inf=float(q.n[-1]),
        m_star=float(q.m[0]),
        n_star=float(q.n[-1]),
    )


# retained alias for early importers
_finite_boundary = finite_boundary


def deviation_check(
    base: Quadruple,
    vertex: int,
    player: str,
    factors: list[float],
) -> list[np.ndarray]:
    """Exact payoff change when one player rescales one stake.

    For each factor, the deviator's stake at ``vertex`` is multiplied and the
    one-step system re-solved; returned arrays hold the deviator's payoff
    delta at every open-play start vertex.  At an equilibrium every delta is
    non-positive, strictly negative at the deviation vertex for factors
    other than one.
    """
    if player not in (MAXINE, MINA):
        raise ValueError("player must be 'maxine' or 'mina'")
    for f in factors:
        if f <= 0:
            raise ValueError("rescale factors must be positive")
    trail = (base.lo - 1, base.hi + 1)
    boundary = finite_boundary(base)
    a_tab, b_tab = base.stake_tables()
    m0, n0 = exact_payoffs(trail, a_tab, b_tab, boundary)
    base_vec = m0 if player == MAXINE else n0
    out = []
    for f in factors:
        a_mod = dict(a_tab)
        b_mod = dict(b_tab)
        if player == MAXINE:
            a_mod[vertex] = a_mod[vertex] * f
        else:
            b_mod[vertex] = b_mod[vertex] * f
        m1, n1 = exact_payoffs(trail, a_mod, b_mod, boundary)
        new_vec = m1 if player == MAXINE else n1
        out.append((new_vec - base_vec)[1:-1])
    return out


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class UnanimityStats:
    """Monte-Carlo unanimity summary with Wilson confidence intervals."""

    runs: int
    p_unanimous: float
    unanimous_ci: tuple[float, float]
    p_wrong_side: float
    wrong_side_ci: tuple[float, float]
    mean_returns_to_battlefield: float
    p_maxine_win: float


def unanimity_stats(
    config: GameConfig,
    s_minus: Strategy,
    s_plus: Strategy,
    runs: int,
    battlefield: int,
) -> UnanimityStats:
    """Estimate eventual-unanimity behaviour under the given strategy pair.

    ``wrong side`` means the game resolves against the side of the
    battlefield the counter started on; exactly at the battlefield no side
    is wrong and the proportion refers to the losing-for-Maxine event.
    """
    if runs <= 0:
        raise ValueError("runs must be positive")
    stats = simulate_batch(config, s_minus, s_plus, runs, center=battlefield)
    if config.start > battlefield:
        wrong = stats.p_mina_win
    elif config.start < battlefield:
        wrong = stats.p_maxine_win
    else:
        wrong = stats.p_mina_win
    n_wrong = int(round(wrong * runs))
    n_unan = int(round(stats.p_unanimous_tail * runs))
    return UnanimityStats(
        runs=runs,
        p_unanimous=stats.p_unanimous_tail,
        unanimous_ci=wilson_interval(n_unan, runs),
        p_wrong_side=wrong,
        wrong_side_ci=wilson_interval(n_wrong, runs),
        mean_returns_to_battlefield=stats.returns_to_center,
        p_maxine_win=stats.p_maxine_win,
    )
