"""
cstarkit command line.

Usage:
    cstarkit analyze graphs/fourex-1.graph
    cstarkit ktheory --matrix "4,2;0,4" --ideal w --json
    cstarkit ideals graph.txt
    cstarkit classify --matrix "4,1;0,0" --matrix "4,2;0,0"
    cstarkit classify --manifest graphs/pairs.yaml --json
    cstarkit stability --matrix "0,inf;0,3"
    cstarkit schema

Exit codes:
    0  decision computed (Yes or No both count)
    1  usage or parse error
    2  input outside the decidable scope
    3  at least one verdict is Unknown
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Tuple

import yaml
from dotenv import load_dotenv

from . import __version__, config
from .classify import TwoVertexParams, classify_many, decide_pair
from .errors import CstarError, GraphParseError, PreconditionError, ScopeError
from .graph import Graph, classify_vertices, parse_graph, parse_matrix, vertex_matrix
from .ktheory import assemble_k_six, k_groups
from .report import InputDigest, Report, VerdictModel, report_schema
from .stability import graph_trace_feasibility, stability_of_unique_ideal
from .structure import (
    breaking_vertices,
    case_tag,
    condition_K,
    hasse_diagram,
    ideal_lattice,
    largest_proper_ideal,
    saturated_hereditary_sets,
    unique_ideal_structure,
)
from .tracing import RunTrace
from .verdict import Answer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCOPE = 2
EXIT_UNKNOWN = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; usage errors here exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# ── Input loading ─────────────────────────────────────────────────────────────

def _looks_like_matrix(source: str) -> bool:
    return not os.path.exists(source) and ("," in source or ";" in source)


def load_graph(source: str, is_matrix: bool = False, base_dir: Optional[str] = None) -> Graph:
    if is_matrix or _looks_like_matrix(source):
        return parse_matrix(source)
    path = source if base_dir is None or os.path.isabs(source) else os.path.join(base_dir, source)
    with open(path, "r", encoding="utf-8") as f:
        return parse_graph(f.read())


def _single_input(args) -> Tuple[str, Graph]:
    sources = [(m, True) for m in (args.matrix or [])] + [(p, False) for p in (args.graphs or [])]
    if len(sources) != 1:
        raise PreconditionError(f"expected exactly one graph, got {len(sources)}")
    src, is_matrix = sources[0]
    return src, load_graph(src, is_matrix)


def _parse_ideal(g: Graph, text: str):
    names = [t.strip() for t in text.split(",") if t.strip()]
    return g.check_subset(names)


# ── Commands ──────────────────────────────────────────────────────────────────

def cmd_analyze(args, trace: RunTrace) -> Tuple[Report, int]:
    with trace.step("parse"):
        src, g = _single_input(args)
    results = {
        "vertices": list(g.vertices),
        "matrix": vertex_matrix(g).to_json(),
        "classification": classify_vertices(g).to_dict(g),
    }
    with trace.step("lattice") as rec:
        sh = saturated_hereditary_sets(g)
        lattice = ideal_lattice(g)
        rec.summary = f"{len(sh)} saturated hereditary sets, {lattice.size} admissible pairs"
    results["saturated_hereditary_sets"] = [g.ordered(H) for H in sh]
    results["lattice"] = lattice.to_dict(g)

    with trace.step("structure"):
        K = condition_K(g)
        results["condition_K"] = {"holds": K.holds, "simple_cycle_counts": dict(K.counts)}
        results["simple"] = bool(K) and lattice.size == 2
        u = unique_ideal_structure(g)
        results["unique_ideal"] = u.to_dict(g) if u else None
        top = largest_proper_ideal(g) if K else None
        results["largest_proper_ideal"] = top.to_dict(g) if top else None
        tag_H = u.H if u else (top.H if top and top.H and not top.S else None)
        results["case_tag"] = case_tag(g, tag_H).value if tag_H else None
    return Report(command="analyze", inputs=[InputDigest.of(src, g)], results=results), EXIT_OK


def cmd_ideals(args, trace: RunTrace) -> Tuple[Report, int]:
    with trace.step("parse"):
        src, g = _single_input(args)
    with trace.step("lattice") as rec:
        lattice = ideal_lattice(g)
        rec.summary = f"{lattice.size} admissible pairs"
    results = {
        "lattice": lattice.to_dict(g),
        "covers": [list(c) for c in hasse_diagram(lattice)],
        "breaking_vertices": {
            ",".join(g.ordered(H)): g.ordered(breaking_vertices(g, H))
            for H in saturated_hereditary_sets(g)
        },
    }
    return Report(command="ideals", inputs=[InputDigest.of(src, g)], results=results), EXIT_OK


def cmd_ktheory(args, trace: RunTrace) -> Tuple[Report, int]:
    with trace.step("parse"):
        src, g = _single_input(args)
    with trace.step("k-groups") as rec:
        K0, K1 = k_groups(g)
        rec.summary = f"K0={K0} K1={K1}"
    results = {"k0": K0.to_dict(), "k1": K1.to_dict()}
    if args.ideal is not None:
        with trace.step("six-term") as rec:
            H = _parse_ideal(g, args.ideal)
            ks = assemble_k_six(g, H)
            results["ideal"] = g.ordered(H)
            results["k_six"] = ks.to_dict()
            results["case_tag"] = case_tag(g, H).value
            rec.summary = f"{ks.k0_ideal} → {ks.k0_alg} → {ks.k0_quot}"
    return Report(command="ktheory", inputs=[InputDigest.of(src, g)], results=results), EXIT_OK


def _manifest_pairs(path: str) -> List[Tuple[Tuple[str, Graph], Tuple[str, Graph]]]:
    with open(path, "r", encoding="utf-8") as f:
        entries = yaml.safe_load(f) or []
    if not isinstance(entries, list):
        raise GraphParseError("manifest must be a YAML list of {a, b} entries")
    base = os.path.dirname(os.path.abspath(path))
    pairs = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict) or "a" not in entry or "b" not in entry:
            raise GraphParseError(f"manifest entry {k} needs keys a and b")
        a, b = str(entry["a"]), str(entry["b"])
        pairs.append(((a, load_graph(a, base_dir=base)), (b, load_graph(b, base_dir=base))))
    return pairs


def cmd_classify(args, trace: RunTrace) -> Tuple[Report, int]:
    with trace.step("parse") as rec:
        if args.manifest:
            pairs = _manifest_pairs(args.manifest)
        else:
            sources = [(m, True) for m in (args.matrix or [])] + [(p, False) for p in (args.graphs or [])]
            if len(sources) != 2:
                raise PreconditionError(f"classify needs two graphs, got {len(sources)}")
            pairs = [tuple((s, load_graph(s, m)) for s, m in sources)]
        rec.summary = f"{len(pairs)} pair(s)"

    with trace.step("decide") as rec:
        if len(pairs) == 1:
            verdicts = [decide_pair(pairs[0][0][1], pairs[0][1][1])]
        else:
            verdicts = classify_many([(a[1], b[1]) for a, b in pairs], progress=not args.json)
        rec.summary = ", ".join(v.answer.value for v in verdicts)

    inputs, reordered = [], []
    for (sa, ga), (sb, gb) in pairs:
        inputs.extend([InputDigest.of(sa, ga), InputDigest.of(sb, gb)])
        reordered.append([g.n == 2 and TwoVertexParams.from_graph(g).swapped for g in (ga, gb)])
    code = EXIT_UNKNOWN if any(v.answer == Answer.UNKNOWN for v in verdicts) else EXIT_OK
    report = Report(
        command="classify",
        inputs=inputs,
        results={"vertex_reordering": reordered},
        verdicts=[VerdictModel.of(v) for v in verdicts],
        exit_code=code,
    )
    return report, code


def cmd_stability(args, trace: RunTrace) -> Tuple[Report, int]:
    with trace.step("parse"):
        src, g = _single_input(args)
    results = {}
    code = EXIT_OK
    with trace.step("ideal stability") as rec:
        try:
            results["ideal"] = stability_of_unique_ideal(g).to_dict()
            rec.summary = results["ideal"]["witness_kind"]
        except ScopeError as exc:
            results["ideal"] = {"error": str(exc)}
            rec.summary = str(exc)
            code = EXIT_SCOPE
    with trace.step("graph trace") as rec:
        gt = graph_trace_feasibility(g)
        results["graph_trace"] = gt.to_dict()
        rec.summary = "exists" if gt.exists else "none"
    return Report(command="stability", inputs=[InputDigest.of(src, g)], results=results, exit_code=code), code


COMMANDS = {
    "analyze": cmd_analyze,
    "ideals": cmd_ideals,
    "ktheory": cmd_ktheory,
    "classify": cmd_classify,
    "stability": cmd_stability,
}


# ── Text rendering ────────────────────────────────────────────────────────────

def _print_text(report: Report) -> None:
    r = report.results
    for inp in report.inputs:
        print(f"📄 {inp.source}  ({len(inp.vertices)} vertices, sha256 {inp.sha256[:12]})")
    if report.command == "analyze":
        print(f"  Lattice size:      {r['lattice']['size']}")
        print(f"  Condition (K):     {r['condition_K']['holds']}")
        print(f"  Simple:            {r['simple']}")
        if r["unique_ideal"]:
            print(f"  Unique ideal H:    {{{', '.join(r['unique_ideal']['H'])}}}")
        if r["largest_proper_ideal"]:
            print(f"  Largest ideal H:   {{{', '.join(r['largest_proper_ideal']['H'])}}}")
        if r["case_tag"]:
            print(f"  Case:              {r['case_tag']}")
    elif report.command == "ideals":
        for k, p in enumerate(r["lattice"]["pairs"]):
            print(f"  [{k}] H={{{', '.join(p['H'])}}} S={{{', '.join(p['S'])}}}")
        for lo, hi in r["covers"]:
            print(f"  [{lo}] ⋖ [{hi}]")
    elif report.command == "ktheory":
        print(f"  K0 = {_fmt_group(r['k0'])}")
        print(f"  K1 = {_fmt_group(r['k1'])}")
        if "k_six" in r:
            k0, k1 = r["k_six"]["k0"], r["k_six"]["k1"]
            print(f"  Ideal H = {{{', '.join(r['ideal'])}}}  case {r['case_tag']}")
            print(f"  K0 row: {_fmt_group(k0['ideal'])} → {_fmt_group(k0['algebra'])} → {_fmt_group(k0['quotient'])}")
            print(f"  K1 row: {_fmt_group(k1['ideal'])} → {_fmt_group(k1['algebra'])} → {_fmt_group(k1['quotient'])}")
            print(f"  Index map: {r['k_six']['index_map']}")
    elif report.command == "stability":
        ideal = r["ideal"]
        if "error" in ideal:
            print(f"  ⚠ Ideal stability: {ideal['error']}")
        else:
            print(f"  ✅ Ideal {{{', '.join(ideal['H'])}}} is stable ({ideal['witness_kind']})")
        gt = r["graph_trace"]
        if gt["exists"]:
            print(f"  Graph trace: {gt['trace']}")
        else:
            print(f"  Graph trace: none (certificate {gt['certificate']})")
    for v in report.verdicts:
        icon = {"Yes": "✅", "No": "❌", "Unknown": "❓"}[v.answer]
        print(f"  {icon} {v.answer}  [{v.route}]")


def _fmt_group(d: dict) -> str:
    parts = []
    if d["rank"]:
        parts.append("Z" if d["rank"] == 1 else f"Z^{d['rank']}")
    parts.extend(f"Z_{t}" for t in d["factors"])
    return " ⊕ ".join(parts) if parts else "0"


# ── Entry point ───────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Emit the machine-readable report")
    common.add_argument("--config", type=str, default=None, help="Path to a YAML config")
    common.add_argument("--verbose", action="store_true", help="Log at INFO level and print the run trace")
    common.add_argument(
        "--trace", nargs="?", const="", default=None, metavar="PATH",
        help="Save the run trace as JSON (default: inside traces.dir)",
    )

    parser = _Parser(prog="cstarkit", description="Invariants and stable-isomorphism decisions for graph C*-algebras")
    parser.add_argument("--version", action="version", version=f"cstarkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (
        ("analyze", "Vertex classes, ideal lattice, Condition (K), unique/largest ideal"),
        ("ideals", "Admissible-pair lattice with its covering relation"),
        ("ktheory", "K0/K1, and the six-term invariant of an ideal with --ideal"),
        ("stability", "Stability of the unique ideal and graph-trace feasibility"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("graphs", nargs="*", help="Graph file")
        p.add_argument("--matrix", action="append", help='Vertex-matrix shorthand, e.g. "4,1;0,0"')
        if name == "ktheory":
            p.add_argument("--ideal", type=str, default=None, help="Comma-separated vertices of H")

    p = sub.add_parser("classify", parents=[common], help="Decide stable isomorphism of two graph algebras")
    p.add_argument("graphs", nargs="*", help="Two graph files")
    p.add_argument("--matrix", action="append", help="Vertex-matrix shorthand; repeat or mix with a file")
    p.add_argument("--manifest", type=str, default=None, help="YAML list of {a, b} pairs")

    sub.add_parser("schema", parents=[common], help="Print the JSON schema of --json reports")
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    load_dotenv()
    args = build_parser().parse_args(argv)

    config.load_config(args.config)
    level = logging.INFO if args.verbose else getattr(logging, config.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "schema":
        print(json.dumps(report_schema(), sort_keys=True, indent=2))
        sys.exit(EXIT_OK)

    trace = RunTrace(command=args.command, inputs=list(args.matrix or []) + list(args.graphs or []))
    try:
        report, code = COMMANDS[args.command](args, trace)
    except GraphParseError as exc:
        print(f"❌ Parse error: {exc}", file=sys.stderr)
        code, report = EXIT_USAGE, None
    except (PreconditionError, OSError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
        code, report = EXIT_USAGE, None
    except ScopeError as exc:
        print(f"⚠ Out of scope: {exc}", file=sys.stderr)
        code, report = EXIT_SCOPE, None
    except CstarError as exc:
        logger.error("Internal check failed: %s", exc)
        raise

    trace.finish(outcome=report.command if report else "error", exit_code=code)
    if report is not None:
        if args.json:
            print(report.to_json())
        else:
            _print_text(report)
    if args.verbose and not args.json:
        trace.pretty_print()
    if args.trace is not None:
        saved = trace.save(args.trace or None)
        print(f"💾 Trace saved to {saved}", file=sys.stderr)
    sys.exit(code)


if __name__ == "__main__":
    main()
