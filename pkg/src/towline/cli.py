"""Command-line surface: every capability as a subcommand with file output.

Numeric output uses round-trip decimal formatting, runs are described by a
manifest carrying a digest of every file written, and identical invocations
reproduce outputs byte for byte.  Exit codes: 0 success, 1 golden-value
mismatch, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certified import CertificationError, certify_all, TABLE_INDICES
from .dynamics import dabmn_evolve, terminal_preset
from .engine import (
    BullyStrategy,
    GameConfig,
    NashStrategy,
    TitForTatStrategy,
    ZeroStrategy,
    simulate,
    simulate_batch,
    wilson_interval,
)
from .margin import (
    big_theta,
    find_level_set,
    margin_finite,
    margin_infinite,
    psi,
)
from .solutions import (
    BoundaryData,
    TailError,
    default_solution,
    dilate,
    finite_standard_solution,
    phi_view,
    residuals,
    standard_solution,
    translate,
)

__all__ = ["main"]


def _fmt(value: float) -> str:
    return repr(float(value))


def _parse_span(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError as exc:
        raise ValueError(f"expected LO:HI, got {text!r}") from exc


def _parse_boundary(text: str) -> BoundaryData:
    try:
        m_lo, m_hi, n_lo, n_hi = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise ValueError(f"expected four comma-separated payoffs, got {text!r}") from exc
    return BoundaryData(m_lo, m_hi, n_lo, n_hi, m_star=m_lo, n_star=n_hi)


def _out_dir(args) -> Path:
    base = args.out or os.environ.get("TOWLINE_OUT") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _write_json(path: Path, obj) -> Path:
    return _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out: Path, subcommand: str, params: dict, files: list[Path], seed=None) -> Path:
    digests = {}
    for f in files:
        digests[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
    doc = {
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "version": __version__,
        "outputs": digests,
    }
    return _write_json(out / "manifest.json", doc)


# -- solve -----------------------------------------------------------------


def cmd_solve(args) -> int:
    out = _out_dir(args)
    if args.trail:
        trail = _parse_span(args.trail)
        q = finite_standard_solution(args.x, trail, tol=args.tol)
        domain = {"trail": list(trail)}
    else:
        window = _parse_span(args.window)
        build = standard_solution if args.form == "standard" else default_solution
        q = build(args.x, window, tol=args.tol)
        domain = {"window": list(window)}
    try:
        view = phi_view(q)
        battlefield = view.battlefield
        phi = {q.lo + j: view.phi[j] for j in range(len(view.phi))}
    except ValueError:
        battlefield = None
        phi = {i: None for i in range(q.lo, q.hi + 1)}
    lines = ["i,a,b,m,n,phi"]
    for i in range(q.lo, q.hi + 1):
        j = i - q.lo
        phi_txt = _fmt(phi[i]) if phi[i] is not None else ""
        lines.append(
            f"{i},{_fmt(q.a[j])},{_fmt(q.b[j])},{_fmt(q.m[j + 1])},{_fmt(q.n[j + 1])},{phi_txt}"
        )
    csv_path = _write_text(out / "solution.csv", "\n".join(lines) + "\n")
    header = {
        "x": args.x,
        "form": "standard" if args.trail else args.form,
        **domain,
        "cen_ratio": q.cen_ratio,
        "battlefield": battlefield,
        "residual_max": float(residuals(q).max()),
        "mina_margin": q.mina_margin,
        "boundary": {
            "m_left": q.boundary.m_minus_inf,
            "m_right": q.boundary.m_plus_inf,
            "n_left": q.boundary.n_minus_inf,
            "n_right": q.boundary.n_plus_inf,
        },
    }
    json_path = _write_json(out / "solution.json", header)
    _write_manifest(out, "solve", vars_of(args), [csv_path, json_path])
    print(f"wrote {csv_path} and {json_path}")
    return 0


def vars_of(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "out") and v is not None}


# -- margin ----------------------------------------------------------------


def _margin_callable(args):
    if args.finite:
        ell, k = (int(t) for t in args.finite.split(","))

        def base(x: float) -> float:
            return margin_finite(x, ell, k)

        label = f"finite({ell},{k})"
    elif args.psi:

        def base(z: float) -> float:
            return psi(z, args.tol)

        label = "psi"
    else:

        def base(x: float) -> float:
            return margin_infinite(x, args.tol).value

        label = "infinite"
    if args.transform == "theta" and not args.psi:
        inner = base

        def transformed(t: float) -> float:
            return inner(big_theta(t))

        return transformed, label + " o Theta"
    return base, label


def cmd_margin(args) -> int:
    out = _out_dir(args)
    fn, label = _margin_callable(args)
    lo, hi = (float(t) for t in args.range.split(":"))
    mesh = args.mesh
    xs = np.linspace(lo, hi, int(np.ceil((hi - lo) / mesh)) + 1)
    lines = ["x,value"]
    for x in xs:
        lines.append(f"{_fmt(float(x))},{_fmt(fn(float(x)))}")
    files = [_write_text(out / "curve.csv", "\n".join(lines) + "\n")]
    summary = {"map": label, "range": [lo, hi], "mesh": mesh}
    if args.roots is not None:
        rs = find_level_set(fn, args.roots, (lo, hi), mesh)
        summary["roots"] = {
            "target": rs.target,
            "count": rs.count,
            "roots": rs.roots,
            "residuals": rs.residuals,
            "suspected": rs.suspected,
        }
        files.append(_write_json(out / "roots.json", summary["roots"]))
    files.append(_write_json(out / "margin.json", summary))
    _write_manifest(out, "margin", vars_of(args), files)
    print(f"wrote {', '.join(str(f) for f in files)}")
    return 0


# -- certify -----------------------------------------------------------------


def cmd_certify(args) -> int:
    try:
        report = certify_all()
    except CertificationError as exc:
        print(f"CERTIFICATION FAILED: {exc}", file=sys.stderr)
        return 1
    tables = report["tables"]
    cert = report["certificate"]
    doc = {
        "tables": {
            "s_up": {i: str(tables.s_up[i]) for i in TABLE_INDICES},
            "s_down": {i: str(tables.s_down[i]) for i in TABLE_INDICES},
            "c_up": {i: str(tables.c_up[i]) for i in TABLE_INDICES},
            "c_down": {i: str(tables.c_down[i]) for i in TABLE_INDICES},
            "d_up": {i: str(tables.d_up[i]) for i in TABLE_INDICES},
            "d_down": {i: str(tables.d_down[i]) for i in TABLE_INDICES},
        },
        "series": {
            key: {"lo": str(iv.lo), "hi": str(iv.hi)} for key, iv in report["pqst"].items()
        },
        "margin_interval": {
            "lo": str(report["margin54"].lo),
            "hi": str(report["margin54"].hi),
        },
        "strict_interval": {
            "lo": str(cert["strict_interval"].lo),
            "hi": str(cert["strict_interval"].hi),
        },
        "margin_bound": str(cert["margin_bound"]),
        "lambda_bound": cert["lambda_bound"],
    }
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print("orbit tables (up / down), all entries exact lattice points:")
        print(f"{'i':>3} {'s_up':>24} {'s_down':>24}")
        for i in TABLE_INDICES:
            print(f"{i:>3} {str(tables.s_up[i]):>24} {str(tables.s_down[i]):>24}")
        print(f"{'i':>3} {'c_up':>24} {'c_down':>24} {'d_up':>20} {'d_down':>20}")
        for i in TABLE_INDICES:
            print(
                f"{i:>3} {str(tables.c_up[i]):>24} {str(tables.c_down[i]):>24}"
                f" {str(tables.d_up[i]):>20} {str(tables.d_down[i]):>20}"
            )
        print("series enclosures:")
        for key, iv in report["pqst"].items():
            print(f"  {key}: [{iv.lo}, {iv.hi}]")
        print(f"margin enclosure: [{report['margin54'].lo}, {report['margin54'].hi}]")
        print(
            f"strict enclosure: [{cert['strict_interval'].lo}, {cert['strict_interval'].hi}]"
        )
        print(f"margin bound: {cert['margin_bound']}  threshold bound: {cert['lambda_bound']}")
        print("all golden values reproduced")
    if args.out:
        out = _out_dir(args)
        path = _write_json(out / "certificate.json", doc)
        _write_manifest(out, "certify", vars_of(args), [path])
    return 0


# -- play-batch ---------------------------------------------------------------


def _build_strategy(name: str, side: str, args, boundary: BoundaryData, trail) -> object:
    if name == "zero":
        return ZeroStrategy()
    if name == "bully":
        return BullyStrategy(args.bully_epsilon, args.bully_multiplier)
    if name in ("nash", "tit_for_tat", "tft"):
        q = finite_standard_solution(args.x, trail)
        u = boundary.m_plus_inf - boundary.m_minus_inf
        q = translate(dilate(q, u), boundary.m_minus_inf, boundary.n_plus_inf)
        nash = NashStrategy(q, side)
        if name == "nash":
            return nash
        return TitForTatStrategy(threshold=args.tft_threshold, table=nash.table)
    raise ValueError(f"unknown strategy {name!r} (pick zero, nash, bully, tit_for_tat)")


def cmd_play_batch(args) -> int:
    out = _out_dir(args)
    trail = _parse_span(args.trail)
    boundary = _parse_boundary(args.boundary)
    minus_name, plus_name = args.strategies.split(":")
    s_minus = _build_strategy(minus_name, "mina", args, boundary, trail)
    s_plus = _build_strategy(plus_name, "maxine", args, boundary, trail)
    config = GameConfig(
        boundary=boundary,
        start=args.start,
        seed=args.seed,
        trail=trail,
        max_turns=args.max_turns,
    )
    files = []
    lines = ["run,start,terminal,turns,cost_plus,cost_minus,payoff_plus,payoff_minus"]
    if s_minus.time_invariant and s_plus.time_invariant:
        stats = simulate_batch(config, s_minus, s_plus, args.runs)
        receipts = {
            0: (boundary.m_star, boundary.n_star),
            1: (boundary.m_minus_inf, boundary.n_minus_inf),
            2: (boundary.m_plus_inf, boundary.n_plus_inf),
        }
        names = {0: "cutoff", 1: "mina_win", 2: "maxine_win"}
        for i in range(stats.runs):
            code = int(stats.terminals[i])
            cost_p = receipts[code][0] - stats.payoffs_plus[i]
            cost_m = receipts[code][1] - stats.payoffs_minus[i]
            lines.append(
                f"{i},{args.start},{names[code]},{int(stats.turns[i])},"
                f"{_fmt(cost_p)},{_fmt(cost_m)},"
                f"{_fmt(stats.payoffs_plus[i])},{_fmt(stats.payoffs_minus[i])}"
            )
        wins = int(round(stats.p_maxine_win * stats.runs))
        summary = {
            "runs": stats.runs,
            "p_maxine_win": stats.p_maxine_win,
            "p_mina_win": stats.p_mina_win,
            "p_cutoff": stats.p_cutoff,
            "maxine_win_ci95": list(wilson_interval(wins, stats.runs)),
            "mean_payoff_plus": stats.mean_payoff_plus,
            "mean_payoff_minus": stats.mean_payoff_minus,
            "stderr_payoff_plus": stats.std_payoff_plus / max(stats.runs, 1) ** 0.5,
            "stderr_payoff_minus": stats.std_payoff_minus / max(stats.runs, 1) ** 0.5,
            "mean_turns": stats.mean_turns,
        }
    else:
        records = []
        payoff_p = []
        payoff_m = []
        for i in range(args.runs):
            cfg = GameConfig(
                boundary=boundary,
                start=args.start,
                seed=args.seed + i,
                trail=trail,
                max_turns=args.max_turns,
            )
            rec = simulate(cfg, s_minus, s_plus)
            records.append(rec)
            payoff_p.append(rec.payoff_plus)
            payoff_m.append(rec.payoff_minus)
            lines.append(
                f"{i},{args.start},{rec.terminal},{len(rec.path) - 1},"
                f"{_fmt(rec.cost_plus)},{_fmt(rec.cost_minus)},"
                f"{_fmt(rec.payoff_plus)},{_fmt(rec.payoff_minus)}"
            )
        summary = {
            "runs": args.runs,
            "mean_payoff_plus": float(np.mean(payoff_p)),
            "mean_payoff_minus": float(np.mean(payoff_m)),
        }
    files.append(_write_text(out / "batch.csv", "\n".join(lines) + "\n"))
    files.append(_write_json(out / "summary.json", summary))
    if args.records:
        count = min(args.records, args.runs)
        rows = []
        for i in range(count):
            cfg = GameConfig(
                boundary=boundary,
                start=args.start,
                seed=args.seed + 7_777_777 + i,
                trail=trail,
                max_turns=args.max_turns,
            )
            rows.append(simulate(cfg, s_minus, s_plus).to_json())
        files.append(_write_text(out / "records.jsonl", "\n".join(rows) + "\n"))
    _write_manifest(out, "play-batch", vars_of(args), files, seed=args.seed)
    print(f"wrote {', '.join(str(f) for f in files)}")
    return 0


# -- dabmn ---------------------------------------------------------------------


def cmd_dabmn(args) -> int:
    out = _out_dir(args)
    m_ter, n_ter = terminal_preset(args.preset, args.K, args.x)
    sheet = dabmn_evolve(args.K, args.T, m_ter, n_ter, stride=args.stride)
    lines = ["time,vertex,a,b,m,n"]
    for r, j in enumerate(sheet.times):
        for col, vertex in enumerate(range(-args.K - 1, args.K + 2)):
            inner = 0 <= col - 1 <= 2 * args.K
            a_txt = _fmt(sheet.a_rows[r][col - 1]) if inner else ""
            b_txt = _fmt(sheet.b_rows[r][col - 1]) if inner else ""
            lines.append(
                f"{j},{vertex},{a_txt},{b_txt},"
                f"{_fmt(sheet.m_rows[r][col])},{_fmt(sheet.n_rows[r][col])}"
            )
    files = [_write_text(out / "sheet.csv", "\n".join(lines) + "\n")]
    summary = {
        "K": args.K,
        "T": args.T,
        "stride": args.stride,
        "preset": args.preset,
        "maxima_counts": [[j, c] for j, c in sheet.maxima_counts],
        "collapse_time": sheet.collapse_time,
        "convergence": sheet.convergence,
    }
    files.append(_write_json(out / "sheet_summary.json", summary))
    _write_manifest(out, "dabmn", vars_of(args), files)
    print(f"wrote {', '.join(str(f) for f in files)}")
    return 0


# -- serve -----------------------------------------------------------------------


def cmd_serve(args) -> int:
    from .service import serve

    server = serve(port=args.port, host=args.host, persist_dir=args.persist)
    host, port = server.server_address[:2]
    print(f"session service listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# -- report ------------------------------------------------------------------------


def cmd_report(args) -> int:
    from .report import margin_figure, sheet_figure, solution_figure

    out = _out_dir(args)
    files = []
    if args.kind == "solution":
        rc = cmd_solve(args)
        if rc != 0:
            return rc
        if args.trail:
            q = finite_standard_solution(args.x, _parse_span(args.trail), tol=args.tol)
        else:
            build = standard_solution if args.form == "standard" else default_solution
            q = build(args.x, _parse_span(args.window), tol=args.tol)
        files.append(solution_figure(q, out / "solution.png"))
    elif args.kind == "margin":
        rc = cmd_margin(args)
        if rc != 0:
            return rc
        fn, label = _margin_callable(args)
        lo, hi = (float(t) for t in args.range.split(":"))
        xs = np.linspace(lo, hi, int(np.ceil((hi - lo) / args.mesh)) + 1)
        ys = np.array([fn(float(t)) for t in xs])
        roots = None
        if args.roots is not None:
            roots = find_level_set(fn, args.roots, (lo, hi), args.mesh).roots
        files.append(
            margin_figure({label: (xs, ys)}, out / "margin.png", target=args.roots, roots=roots)
        )
    elif args.kind == "dabmn":
        rc = cmd_dabmn(args)
        if rc != 0:
            return rc
        m_ter, n_ter = terminal_preset(args.preset, args.K, args.x)
        sheet = dabmn_evolve(args.K, args.T, m_ter, n_ter, stride=args.stride)
        files.append(sheet_figure(sheet, out / "sheet.png"))
    else:
        raise ValueError(f"unknown report kind {args.kind!r}")
    _write_manifest(out, f"report-{args.kind}", vars_of(args), files)
    print(f"wrote {', '.join(str(f) for f in files)}")
    return 0


# -- parser -----------------------------------------------------------------


def _add_solve_flags(p, require_x=True):
    if require_x:
        p.add_argument("--x", type=float, required=True, help="central ratio")
    p.add_argument("--window", default="-8:8", help="open-play window LO:HI")
    p.add_argument("--trail", help="finite trail LO:HI (overrides --window)")
    p.add_argument("--form", choices=("default", "standard"), default="standard")


def _add_margin_flags(p):
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--finite", help="series orders L,K of the finite-trail map")
    mode.add_argument("--infinite", action="store_true")
    mode.add_argument("--psi", action="store_true", help="unit-periodic coordinates")
    p.add_argument("--range", default="0.34:3", help="scan range A:B")
    p.add_argument("--mesh", type=float, default=1e-3)
    p.add_argument("--transform", choices=("theta",), help="evaluate at Theta(t)")
    p.add_argument("--roots", type=float, help="also solve map = TARGET on the range")


def _add_dabmn_flags(p, with_x=True):
    p.add_argument("--preset", choices=("plateau", "static", "penny"), default="plateau")
    if with_x:
        p.add_argument("--x", type=float, default=3.0, help="ratio for the static preset")
    p.add_argument("--K", type=int, default=8, help="open-play half-width")
    p.add_argument("--T", type=int, default=4200, help="backward horizon")
    p.add_argument("--stride", type=int, default=140)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="towline",
        description="stake tug-of-war on integer trails: solutions, margins, "
        "certified bounds, simulation, play",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="construct an explicit solution")
    _add_solve_flags(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("margin", help="sample margin maps and find level sets")
    _add_margin_flags(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("certify", help="exact lattice certification run")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("play-batch", help="simulate a batch of games")
    p.add_argument("--trail", default="-4:4")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--boundary", default="0,1,1,0", help="m_left,m_right,n_left,n_right")
    p.add_argument("--strategies", default="zero:zero", help="MINUS:PLUS")
    p.add_argument("--x", type=float, default=3.0, help="ratio for nash tables")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--records", type=int, default=0, help="full game records to keep")
    p.add_argument("--max-turns", type=int, default=100_000)
    p.add_argument("--bully-epsilon", type=float, default=1e-3)
    p.add_argument("--bully-multiplier", type=float, default=2.0)
    p.add_argument("--tft-threshold", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_play_batch)

    p = sub.add_parser("dabmn", help="backward induction on a finite trail")
    _add_dabmn_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dabmn)

    p = sub.add_parser("serve", help="run the interactive play service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--persist", help="directory for session persistence")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render figures next to the data files")
    p.add_argument("--kind", choices=("solution", "margin", "dabmn"), required=True)
    p.add_argument("--x", type=float, default=3.0, help="central ratio")
    _add_solve_flags(p, require_x=False)
    _add_margin_flags(p)
    _add_dabmn_flags(p, with_x=False)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TailError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
