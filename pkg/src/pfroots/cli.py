"""Command-line front end: bounds, solve, analyze, treewidth."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .algebra import algebraize, to_bertini
from .counting import classical_pf_bound, theorem1_bound
from .graphprops import SimpleGraph, treewidth
from .homotopy import TrackerConfig, track_all, verify_count
from .netmodel import CaseError, MultipleSlackError, load_case
from .steady import TABLE_COLUMNS, filter_real, format_row, involution_check, summarize

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_MULTI_SLACK = 3
EXIT_UNCERTIFIED = 4


@dataclass
class RunManifest:
    command: str
    case: str | None
    seed: int
    tolerances: dict = field(default_factory=dict)
    version: str = __version__
    timestamp: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PFROOTS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise SystemExit(f"PFROOTS_SEED must be an integer, got {env!r}")


def _table(header, rows) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)] if rows else \
        [len(h) for h in header]
    lines = ["  ".join(str(h).rjust(w) for h, w in zip(header, widths))]
    for r in rows:
        lines.append("  ".join(str(x).rjust(w) for x, w in zip(r, widths)))
    return "\n".join(lines)


def _write(path, text: str) -> None:
    Path(path).write_text(text)


def _manifest_path(json_path: str) -> Path:
    p = Path(json_path)
    return p.with_name(p.stem + ".manifest.json")


def _load(path):
    try:
        return load_case(path), None
    except MultipleSlackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_MULTI_SLACK
    except (CaseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read case {path}: {exc}", file=sys.stderr)
        return None, EXIT_PARSE


def _tracker(args) -> TrackerConfig:
    return TrackerConfig(seed=_seed(args), cluster_tol=args.cluster_tol, threads=args.threads)


def cmd_bounds(args) -> int:
    lo, hi = args.n_min, args.n_max
    if lo < 2 or hi < lo:
        print(f"error: bad range {lo}..{hi} (need 2 <= min <= max)", file=sys.stderr)
        return EXIT_PARSE
    ns = list(range(lo, hi + 1))
    rows = {
        "bezout": [classical_pf_bound(n) for n in ns],
        "theorem1": [theorem1_bound(n) for n in ns],
    }
    if args.json:
        _write(args.json, json.dumps({"n": ns, **rows}, indent=2) + "\n")
    header = ["n"] + [str(n) for n in ns]
    body = [["Bezout"] + rows["bezout"], ["C(2n-2,n-1)"] + rows["theorem1"]]
    print(_table(header, body))
    return EXIT_OK


def _solve(args, net):
    cfg = _tracker(args)
    psys = algebraize(net)
    sol = track_all(psys, cfg)
    report = verify_count(sol, theorem1_bound(net.n_buses))
    states = filter_real(net, sol, args.real_tol)
    return cfg, sol, report, states


def _manifest(args, cfg: TrackerConfig) -> RunManifest:
    return RunManifest(
        command=args.command,
        case=str(args.case),
        seed=cfg.seed,
        tolerances={"real_tol": args.real_tol, "cluster_tol": cfg.cluster_tol,
                    "endpoint_tol": cfg.endpoint_tol,
                    "infinity_threshold": cfg.infinity_threshold},
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )


def cmd_solve(args) -> int:
    net, code = _load(args.case)
    if net is None:
        return code
    cfg, sol, report, states = _solve(args, net)
    inv = involution_check(sol)
    if args.json:
        doc = sol.to_dict()
        doc["completeness"] = report.to_dict()
        doc["real_states"] = [
            {"voltage_re": [v.real for v in st.voltages],
             "voltage_im": [v.imag for v in st.voltages],
             "cost": st.cost, "loss": st.loss_l1}
            for st in states
        ]
        _write(args.json, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        _write(_manifest_path(args.json), _manifest(args, cfg).to_json())
    print(f"case {net.name}: {net.n_buses} buses, {net.n_branches} branches, seed {cfg.seed}")
    acc = sol.accounting
    print(f"paths {acc['paths']}  finite {acc['finite']}  at_infinity {acc['at_infinity']}  "
          f"failed {acc['failed']}  distinct {acc['distinct']}")
    print(report.summary())
    print(f"involution: {inv.summary()}")
    print(f"real steady states: {len(states)}")
    for i, st in enumerate(states):
        p0 = st.injections[0]
        print(f"  [{i}] P0={p0[0]:.4f} Q0={p0[1]:.4f} cost={st.cost:.4f} loss={st.loss_l1:.4f}")
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_analyze(args) -> int:
    net, code = _load(args.case)
    if net is None:
        return code
    cfg, sol, report, states = _solve(args, net)
    tw = treewidth(SimpleGraph.from_network(net))
    summary = summarize(net, states, norm=args.norm, treewidth=tw.width)
    if args.json:
        doc = summary.to_dict()
        doc["certified"] = report.certified
        _write(args.json, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        _write(_manifest_path(args.json), _manifest(args, cfg).to_json())
    print(_table(TABLE_COLUMNS, [format_row(summary)]))
    if not report.certified:
        print(report.summary())
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_treewidth(args) -> int:
    net, code = _load(args.case)
    if net is None:
        return code
    res = treewidth(SimpleGraph.from_network(net))
    if args.json:
        _write(args.json, json.dumps({"treewidth": res.width, "order": list(res.order),
                                      "exact": res.exact}, indent=2) + "\n")
    note = "" if res.exact else " (upper bound, min-fill)"
    print(f"{net.name}: |N|={net.n_buses} |E|={net.n_branches} tw={res.width}{note}")
    print("elimination order: " + " ".join(map(str, res.order)))
    return EXIT_OK


def cmd_dump(args) -> int:
    net, code = _load(args.case)
    if net is None:
        return code
    text = to_bertini(algebraize(net))
    if args.json:
        _write(args.json, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfroots", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solver=False):
        p.add_argument("--json", metavar="PATH", help="write machine-readable output here")
        if solver:
            p.add_argument("--seed", type=int, default=None,
                           help="random seed (default: $PFROOTS_SEED or 0)")
            p.add_argument("--real-tol", type=float, default=1e-6)
            p.add_argument("--cluster-tol", type=float, default=1e-6)
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--norm", type=float, default=1.0, help="loss norm order p >= 1")

    p = sub.add_parser("bounds", help="classical and multi-homogeneous root-count bounds")
    p.add_argument("n_min", type=int, nargs="?", default=3)
    p.add_argument("n_max", type=int, nargs="?", default=14)
    common(p)
    p.set_defaults(func=cmd_bounds)

    for name, func, text in (("solve", cmd_solve, "enumerate all power-flow solutions"),
                             ("analyze", cmd_analyze, "instance row: counts, cost, loss")):
        p = sub.add_parser(name, help=text)
        p.add_argument("case")
        common(p, solver=True)
        p.set_defaults(func=func)

    p = sub.add_parser("treewidth", help="exact treewidth of the network graph")
    p.add_argument("case")
    common(p)
    p.set_defaults(func=cmd_treewidth)

    p = sub.add_parser("dump-bertini", help="print the algebraized system as Bertini input")
    p.add_argument("case")
    common(p)
    p.set_defaults(func=cmd_dump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "norm", 1.0) < 1:
        print("error: --norm must be >= 1", file=sys.stderr)
        return EXIT_PARSE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
