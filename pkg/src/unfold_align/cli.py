"""Command-line interface: ``unfold-align {align,diagnose,bench,convert}``."""
from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import bench
from .aligner import alignment_report, diagnostic_rows
from .engines import ENGINES, UNFOLD_HEURISTIC, align_log
from .errors import AlignError, InputError, ModelNotEasySound
from .petri import load_net, write_json
from .product import CostModel
from .ptrace import load_log, load_ptraces_json, write_csv
from .unfolder import Budget
from .viz import SvgOptions, order_to_dot, render_svg

EXIT_OK, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2


def _positive(kind):
    def parse(s):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return parse


def _cost_model(ns) -> CostModel:
    try:
        return CostModel(Fraction(ns.log_cost), Fraction(ns.model_cost), Fraction(ns.tau_cost))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad cost model: {exc}") from None


def _safe_name(case: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", case) or "case"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def cmd_align(ns) -> int:
    model = load_net(ns.model, ns.final_marking.split(",") if ns.final_marking else None)
    traces = load_log(ns.log)
    cm = _cost_model(ns)
    budget = Budget(max_events=ns.max_events, timeout=ns.timeout)
    results = align_log(model, traces, cm, ns.engine, budget, ns.workers)
    out = Path(ns.out) if ns.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    costs, timeouts = [], 0
    for r in results:
        if r.timed_out:
            timeouts += 1
            print(f"timeout: {r.case} ({len(r.cases)} case(s)): {r.error}", file=sys.stderr)
            continue
        o = r.outcome
        costs.append(o.cost)
        rep = alignment_report(r.case, o.ualignment, r.cases, o.stats if ns.stats else None)
        if out is None:
            sys.stdout.write(json.dumps(rep, ensure_ascii=False) + "\n")
            continue
        stem = _safe_name(r.case)
        (out / f"{stem}.json").write_text(_dump(rep))
        if ns.svg:
            (out / f"{stem}.svg").write_text(render_svg(o.ualignment, SvgOptions(title=r.case)))
        if ns.dot:
            (out / f"{stem}.dot").write_text(order_to_dot(o.order, r.case))
    mean = float(sum(costs, Fraction(0)) / len(costs)) if costs else 0.0
    print(f"aligned {len(results) - timeouts} variants, mean cost {mean:.4f}, timeouts {timeouts}")
    return EXIT_TIMEOUT if timeouts else EXIT_OK


def cmd_diagnose(ns) -> int:
    path = Path(ns.report)
    try:
        rep = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(rep, dict) or "diagnostics" not in rep:
        raise InputError(f"{path}: not an alignment report")
    events, deps = diagnostic_rows(rep, ns.include_tau)
    print(f"case {rep.get('case')} (cost {rep.get('cost_exact', rep.get('cost'))})")
    if not events and not deps:
        print("conforming")
        return EXIT_OK
    for row in events + deps:
        print(row)
    return EXIT_OK


def cmd_bench(ns) -> int:
    engines = list(ENGINES) if ns.engines == ["all"] else ns.engines
    for e in engines:
        if e not in ENGINES:
            raise InputError(f"unknown engine {e!r}; choose from {ENGINES} or 'all'")
    if ns.preset == "smoke":
        pars, noises, n_traces = [0, 70], [0, 25], 10
    else:
        pars, noises, n_traces = ns.parallelism, ns.noise, ns.traces
    corpora = [bench.desk_corpus(p, n, n_traces, ns.activities, ns.seed) for p in pars for n in noises]
    records = bench.run_bench(corpora, engines, Budget(timeout=ns.timeout))
    summary = bench.summarize(records)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(bench.records_csv(records))
    (out / "summary.csv").write_text(bench.rows_csv(summary))
    (out / "regression.csv").write_text(bench.rows_csv(bench.regression_rows(summary)))
    for row in summary:
        print(f"parallelism {row['parallelism']:>3} noise {row['noise']:>3} {row['engine']:<16} "
              f"mean {row['mean_ms']:9.2f} ms  median {row['median_ms']:9.2f} ms  aligned {row['aligned_pct']:5.1f}%")
    return EXIT_OK


def cmd_convert(ns) -> int:
    src, dst = Path(ns.input), Path(ns.output)
    s_ext, d_ext = src.suffix.lower(), dst.suffix.lower()
    if s_ext == ".pnml":
        net = load_net(src, ns.final_marking.split(",") if ns.final_marking else None)
        write_json(net, dst)
    elif s_ext == ".csv" and d_ext == ".json":
        traces = load_log(src)
        dst.write_text(_dump({"traces": [t.to_dict() for t in traces]}))
    elif s_ext == ".json" and d_ext == ".csv":
        traces = sorted(load_ptraces_json(src.read_text(), str(src)), key=lambda t: t.case_id)
        dst.write_text(write_csv(traces))
    else:
        raise InputError(f"cannot convert {s_ext or 'no extension'} to {d_ext or 'no extension'}; "
                         "supported: .csv→.json, .json→.csv, .pnml→.json")
    print(f"wrote {dst}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unfold-align", description="Unfolding-based alignments for partially ordered traces.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("align", help="align every trace variant of a log against a model")
    a.add_argument("model", help="net JSON or PNML")
    a.add_argument("log", help="p-trace JSON or interval CSV")
    a.add_argument("--engine", choices=ENGINES, default=UNFOLD_HEURISTIC)
    a.add_argument("--out", help="directory for per-variant reports (default: JSON lines on stdout)")
    a.add_argument("--svg", action="store_true", help="also write chevron SVGs")
    a.add_argument("--dot", action="store_true", help="also write alignment-order DOT files")
    a.add_argument("--timeout", type=_positive(float), default=3.0, help="seconds per variant")
    a.add_argument("--max-events", type=_positive(int), default=None)
    a.add_argument("--workers", type=_positive(int), default=1)
    a.add_argument("--final-marking", help="comma-separated place ids (overrides the model's)")
    a.add_argument("--log-cost", default="1")
    a.add_argument("--model-cost", default="1")
    a.add_argument("--tau-cost", default="1/10000")
    a.add_argument("--stats", action="store_true", help="include search statistics (not byte-stable)")
    a.set_defaults(func=cmd_align)

    d = sub.add_parser("diagnose", help="print the deviations recorded in an alignment report")
    d.add_argument("report")
    d.add_argument("--include-tau", action="store_true", help="list undesired silent moves too")
    d.set_defaults(func=cmd_diagnose)

    b = sub.add_parser("bench", help="desk-scale benchmark on generated models and logs")
    b.add_argument("--engines", nargs="+", default=["all"])
    b.add_argument("--parallelism", type=float, nargs="+", default=[0, 30, 50, 70])
    b.add_argument("--noise", type=float, nargs="+", default=[0, 10, 25, 50])
    b.add_argument("--traces", type=_positive(int), default=50)
    b.add_argument("--activities", type=_positive(int), default=6)
    b.add_argument("--timeout", type=_positive(float), default=3.0)
    b.add_argument("--preset", choices=["smoke"], default=None)
    b.add_argument("--out", default="bench_out")
    b.add_argument("--seed", type=int, default=0, help="single source of randomness")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("convert", help="CSV↔p-trace JSON, PNML→net JSON")
    c.add_argument("input")
    c.add_argument("output")
    c.add_argument("--final-marking", help="comma-separated place ids for PNML input")
    c.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelNotEasySound as exc:
        print(f"error: model cannot reach its final marking: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AlignError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
