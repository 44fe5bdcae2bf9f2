"""HTTP session service for live play against the engine's strategies.

Small stdlib server, JSON in and out.  A session owns one finite-trail game
between a human and a bot; the bot's stake for each turn is pre-committed
before the human's stake for that turn is read, which enforces the
simultaneous-move rule observable-by-construction: forking a session and
submitting different stakes yields identical bot stakes for that turn.

Sessions live in memory, are individually locked, and can optionally be
mirrored to JSON files so a restarted server picks them up again.
"""

from __future__ import annotations

import json
import re
import secrets
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .engine import (
    MAXINE,
    MINA,
    BullyStrategy,
    NashStrategy,
    Strategy,
    TitForTatStrategy,
    ZeroStrategy,
    strategy_catalogue,
)
from .core import orbit_to_band
from .margin import big_theta, find_level_set, margin_finite
from .solutions import BoundaryData, dilate, finite_standard_solution, translate

__all__ = [
    "ApiError",
    "Session",
    "SessionStore",
    "create_app_store",
    "serve",
    "DEFAULT_STAKE_CAP",
]

DEFAULT_STAKE_CAP = 1e6


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _boundary_from_payload(payload) -> BoundaryData:
    if payload == "standard_symmetric" or payload is None:
        return BoundaryData(0.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    try:
        b = BoundaryData(
            m_minus_inf=float(payload["m_left"]),
            m_plus_inf=float(payload["m_right"]),
            n_minus_inf=float(payload["n_left"]),
            n_plus_inf=float(payload["n_right"]),
            m_star=float(payload.get("m_star", payload["m_left"])),
            n_star=float(payload.get("n_star", payload["n_right"])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(422, f"invalid boundary: {exc}") from exc
    return b


def _resolve_nash_solution(trail: tuple[int, int], boundary: BoundaryData):
    """Equilibrium solution for the session's finite trail and boundary.

    Finds central ratios whose finite-trail margin matches the session's,
    picks the one with the most central battlefield, and rescales the
    standard solution onto the session boundary.
    """
    t_lo, t_hi = trail
    ell = -t_lo
    k = t_hi
    target = boundary.mina_margin

    def f(t: float) -> float:
        return margin_finite(big_theta(t), ell, k)

    scan = find_level_set(f, target, (-6.0, 6.0), 2e-3)
    if not scan.roots:
        raise ApiError(
            422,
            "no equilibrium exists for this margin on this trail; "
            "adjust the boundary payoffs",
        )
    centre = (t_lo + t_hi) / 2.0
    best = None
    for t in scan.roots:
        x = big_theta(t)
        # battlefield index = orbit steps from the central ratio into the band
        _, bf = orbit_to_band(x)
        key = abs(bf - centre)
        if best is None or key < best[0]:
            best = (key, x)
    q = finite_standard_solution(best[1], trail)
    u = boundary.m_plus_inf - boundary.m_minus_inf
    return translate(dilate(q, u), boundary.m_minus_inf, boundary.n_plus_inf)


def _build_opponent(spec, trail, boundary, bot_side) -> tuple[Strategy, dict]:
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "zero":
        return ZeroStrategy(), {"kind": "zero"}
    if kind == "bully":
        eps = float(spec.get("epsilon", 1e-3))
        mult = float(spec.get("multiplier", 2.0))
        return BullyStrategy(eps, mult), {"kind": "bully", "epsilon": eps, "multiplier": mult}
    if kind == "nash":
        q = _resolve_nash_solution(trail, boundary)
        return NashStrategy(q, bot_side), {"kind": "nash", "side": bot_side}
    if kind == "tit_for_tat":
        thr = float(spec.get("threshold", 1e-6))
        table = NashStrategy(_resolve_nash_solution(trail, boundary), bot_side).table
        return (
            TitForTatStrategy(threshold=thr, table=table),
            {"kind": "tit_for_tat", "threshold": thr},
        )
    raise ApiError(422, f"unknown opponent kind {kind!r}")


@dataclass
class Session:
    id: str
    trail: tuple[int, int]
    boundary: BoundaryData
    start: int
    human_side: str
    opponent_desc: dict
    seed: int
    stake_cap: float
    series: str | None
    vertex: int
    turn: int
    status: str  # awaiting_stake | finished
    terminal: str | None
    history: list[dict]
    cost_human: float
    cost_bot: float
    payoffs: dict | None
    bot: Strategy = field(repr=False, compare=False)
    pending_bot_stake: float = 0.0
    rng: np.random.Generator = field(repr=False, compare=False, default=None)
    lock: threading.Lock = field(repr=False, compare=False, default_factory=threading.Lock)
    hint_table: dict | None = field(repr=False, compare=False, default=None)

    def bot_side(self) -> str:
        return MAXINE if self.human_side == MINA else MINA

    def equilibrium_hint(self) -> float | None:
        """Equilibrium stake for the human side at the current vertex.

        Derived from the session boundary alone (public knowledge); the
        bot's pending stake stays hidden.  None when the game is over or no
        equilibrium exists.
        """
        if self.status == "finished":
            return None
        if self.hint_table is None:
            try:
                q = _resolve_nash_solution(self.trail, self.boundary)
            except ApiError:
                self.hint_table = {}
            else:
                self.hint_table = NashStrategy(q, self.human_side).table
        return self.hint_table.get(self.vertex)

    def public_state(self) -> dict:
        return {
            "id": self.id,
            "trail": list(self.trail),
            "boundary": {
                "m_left": self.boundary.m_minus_inf,
                "m_right": self.boundary.m_plus_inf,
                "n_left": self.boundary.n_minus_inf,
                "n_right": self.boundary.n_plus_inf,
            },
            "start": self.start,
            "human_side": self.human_side,
            "opponent": self.opponent_desc,
            "seed": self.seed,
            "stake_cap": self.stake_cap,
            "series": self.series,
            "vertex": self.vertex,
            "turn": self.turn,
            "status": self.status,
            "terminal": self.terminal,
            "history": list(self.history),
            "costs": {"human": self.cost_human, "bot": self.cost_bot},
            "payoffs": self.payoffs,
        }


def _session_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


class SessionStore:
    """In-memory session registry with optional JSON file persistence."""

    def __init__(self, persist_dir: str | None = None, stake_cap: float = DEFAULT_STAKE_CAP):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.stake_cap = stake_cap
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._load_persisted()

    # -- lifecycle ---------------------------------------------------------

    def create(self, payload: dict) -> Session:
        trail = payload.get("trail")
        if trail is None or len(trail) != 2:
            raise ApiError(422, "interactive play needs a finite trail [left, right]")
        t_lo, t_hi = int(trail[0]), int(trail[1])
        if t_hi - t_lo > 200:
            raise ApiError(422, "trail too long for interactive play")
        if t_hi - t_lo < 2:
            raise ApiError(422, "trail must contain at least one open vertex")
        boundary = _boundary_from_payload(payload.get("boundary"))
        start = int(payload.get("start", (t_lo + t_hi) // 2))
        if not t_lo < start < t_hi:
            raise ApiError(422, "start must lie strictly inside the trail")
        human_side = payload.get("human_side", MINA)
        if human_side not in (MINA, MAXINE):
            raise ApiError(422, "human_side must be 'mina' or 'maxine'")
        seed = int(payload.get("seed", secrets.randbits(32)))
        bot_side = MAXINE if human_side == MINA else MINA
        bot, desc = _build_opponent(
            payload.get("opponent", "nash"), (t_lo, t_hi), boundary, bot_side
        )
        session = Session(
            id=secrets.token_hex(8),
            trail=(t_lo, t_hi),
            boundary=boundary,
            start=start,
            human_side=human_side,
            opponent_desc=desc,
            seed=seed,
            stake_cap=float(payload.get("stake_cap", self.stake_cap)),
            series=payload.get("series"),
            vertex=start,
            turn=1,
            status="awaiting_stake",
            terminal=None,
            history=[],
            cost_human=0.0,
            cost_bot=0.0,
            payoffs=None,
            bot=bot,
            rng=_session_rng(seed),
        )
        bot.reset()
        session.pending_bot_stake = float(bot.stake(session.vertex, 1, None))
        with self._lock:
            self._sessions[session.id] = session
        self._persist(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return session

    # -- gameplay ----------------------------------------------------------

    def submit_stake(self, session_id: str, amount) -> dict:
        session = self.get(session_id)
        try:
            stake = float(amount)
        except (TypeError, ValueError):
            raise ApiError(400, "stake must be a number") from None
        if not stake >= 0:
            raise ApiError(400, "stake must be non-negative")
        if stake > session.stake_cap:
            raise ApiError(400, f"stake exceeds the session cap {session.stake_cap}")
        with session.lock:
            if session.status == "finished":
                raise ApiError(409, "session already finished")
            bot_stake = session.pending_bot_stake
            if session.human_side == MAXINE:
                a, b = stake, bot_stake
            else:
                a, b = bot_stake, stake
            p = 0.5 if a + b == 0 else a / (a + b)
            winner = MAXINE if session.rng.random() < p else MINA
            session.cost_human += stake
            session.cost_bot += bot_stake
            session.vertex += 1 if winner == MAXINE else -1
            session.history.append(
                {
                    "turn": session.turn,
                    "human_stake": stake,
                    "bot_stake": bot_stake,
                    "winner": winner,
                    "vertex": session.vertex,
                }
            )
            session.turn += 1
            t_lo, t_hi = session.trail
            if session.vertex in (t_lo, t_hi):
                session.status = "finished"
                session.terminal = "mina_win" if session.vertex == t_lo else "maxine_win"
                b_data = session.boundary
                if session.terminal == "mina_win":
                    receipt_plus, receipt_minus = b_data.m_minus_inf, b_data.n_minus_inf
                else:
                    receipt_plus, receipt_minus = b_data.m_plus_inf, b_data.n_plus_inf
                if session.human_side == MAXINE:
                    human_receipt, bot_receipt = receipt_plus, receipt_minus
                else:
                    human_receipt, bot_receipt = receipt_minus, receipt_plus
                session.payoffs = {
                    "human": human_receipt - session.cost_human,
                    "bot": bot_receipt - session.cost_bot,
                    "human_receipt": human_receipt,
                    "bot_receipt": bot_receipt,
                }
                session.bot.notify_game_end(session.cost_human)
            else:
                # pre-commit the bot's next stake from history only
                session.pending_bot_stake = float(
                    session.bot.stake(session.vertex, session.turn, stake)
                )
            state = session.public_state()
            self._persist(session)
        return state

    # -- persistence -------------------------------------------------------

    def _persist(self, session: Session) -> None:
        if not self.persist_dir:
            return
        doc = session.public_state()
        doc["rng_state"] = session.rng.bit_generator.state
        doc["pending_bot_stake"] = session.pending_bot_stake
        path = self.persist_dir / f"{session.id}.json"
        path.write_text(json.dumps(doc))

    def _load_persisted(self) -> None:
        for path in sorted(self.persist_dir.glob("*.json")):
            try:
                doc = json.loads(path.read_text())
                boundary = _boundary_from_payload(doc["boundary"])
                trail = (int(doc["trail"][0]), int(doc["trail"][1]))
                bot_side = MAXINE if doc["human_side"] == MINA else MINA
                bot, desc = _build_opponent(doc["opponent"], trail, boundary, bot_side)
                session = Session(
                    id=doc["id"],
                    trail=trail,
                    boundary=boundary,
                    start=int(doc["start"]),
                    human_side=doc["human_side"],
                    opponent_desc=desc,
                    seed=int(doc["seed"]),
                    stake_cap=float(doc["stake_cap"]),
                    series=doc.get("series"),
                    vertex=int(doc["vertex"]),
                    turn=int(doc["turn"]),
                    status=doc["status"],
                    terminal=doc.get("terminal"),
                    history=list(doc["history"]),
                    cost_human=float(doc["costs"]["human"]),
                    cost_bot=float(doc["costs"]["bot"]),
                    payoffs=doc.get("payoffs"),
                    bot=bot,
                    rng=_session_rng(int(doc["seed"])),
                )
                session.rng.bit_generator.state = doc["rng_state"]
                session.pending_bot_stake = float(doc["pending_bot_stake"])
                self._sessions[session.id] = session
            except Exception:
                continue  # a corrupt session file should not block startup


def create_app_store(persist_dir: str | None = None) -> SessionStore:
    return SessionStore(persist_dir=persist_dir)


_SESSION_PATH = re.compile(r"^/sessions/([0-9a-f]+)$")
_STAKE_PATH = re.compile(r"^/sessions/([0-9a-f]+)/stake$")


class _Handler(BaseHTTPRequestHandler):
    store: SessionStore = None  # set by serve()

    # quiet the default stderr chatter
    def log_message(self, fmt, *args):  # noqa: A003
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length).decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ApiError(400, f"invalid JSON body: {exc}") from exc

    def do_OPTIONS(self):  # noqa: N802
        self._send(204, {})

    def do_GET(self):  # noqa: N802
        try:
            path, _, query = self.path.partition("?")
            if path == "/opponents":
                self._send(200, {"opponents": strategy_catalogue()})
                return
            m = _SESSION_PATH.match(path)
            if m:
                session = self.store.get(m.group(1))
                state = session.public_state()
                if "hint=1" in query.split("&"):
                    state["hint"] = session.equilibrium_hint()
                self._send(200, state)
                return
            raise ApiError(404, f"no route for GET {path}")
        except ApiError as exc:
            self._send(exc.status, {"error": exc.message})

    def do_POST(self):  # noqa: N802
        try:
            if self.path == "/sessions":
                session = self.store.create(self._read_json())
                self._send(201, session.public_state())
                return
            m = _STAKE_PATH.match(self.path)
            if m:
                body = self._read_json()
                if "amount" not in body:
                    raise ApiError(400, "body must carry 'amount'")
                state = self.store.submit_stake(m.group(1), body["amount"])
                self._send(200, state)
                return
            raise ApiError(404, f"no route for POST {self.path}")
        except ApiError as exc:
            self._send(exc.status, {"error": exc.message})


def serve(
    port: int = 8080,
    host: str = "127.0.0.1",
    persist_dir: str | None = None,
    store: SessionStore | None = None,
) -> ThreadingHTTPServer:
    """Start the session server (returns it; call serve_forever to block)."""
    handler = type("BoundHandler", (_Handler,), {"store": store or SessionStore(persist_dir)})
    server = ThreadingHTTPServer((host, port), handler)
    return server
