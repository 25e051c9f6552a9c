"""Command-line front end (installed as ``bk``).

Subcommands: analyze, telescope, measures, stationary, ue, count, sub,
orbit, word.  Reports are JSON by default; ``--format csv`` switches the
series-producing commands to CSV.  Exit codes: 0 success, 1 input error,
2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import errors
from .blocks import BlockPartition, chain_analysis
from .catalog import catalog
from .criteria import CRITERIA, exact_count_determinant, unique_ergodicity
from .diagram import BratteliDiagram
from .io import (diagram_to_json, load_diagram, load_measure,
                 load_subdiagram_spec, measure_to_json)
from .measures import (TowerMeasure, check_invariance, count_measures,
                       cylinder_measure, decompose, diameter_series,
                       odometer_measure)
from .reporting import (input_digest, jsonable, render_csv, render_json,
                        report_document)
from .stationary import stationary_measures
from .subdiagram import extend_measure, extension_test, restrict, thinness_test
from .vershik import (EdgeOrder, enumerate_cylinders, extremal_path_to,
                      order_diagnostics, orbit_frequencies)
from .words import (SubstitutionRule, Word, complexity_profile, generate,
                    measure_bounds, return_words)

_INPUT_ERRORS = (errors.SchemaError, errors.StructureError,
                 errors.ArgumentError, errors.ParamError, errors.DepthError,
                 errors.RankError, errors.PartitionError,
                 errors.InvarianceError, errors.SingularError,
                 errors.PrimitivityError, errors.InfiniteExtensionError,
                 errors.InconclusiveError, errors.WindowError,
                 errors.RarityError, errors.NotProlongableError,
                 errors.MaximalPathError, FileNotFoundError)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.handler(args)
    except _INPUT_ERRORS as exc:
        _emit_error(exc)
        return 1
    except errors.ConvergenceError as exc:
        _emit_error(exc)
        return 2
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _emit_error(exc):
    sys.stderr.write(json.dumps(
        {"error": type(exc).__name__, "message": str(exc)},
        sort_keys=True) + "\n")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bk",
        description="Invariant-measure analysis for Bratteli diagrams")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, diagram=True):
        if diagram:
            p.add_argument("diagram", help="diagram JSON file")
        p.add_argument("--depth", type=int, default=16)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved for randomized diagnostics")

    p = sub.add_parser("analyze", help="validate and summarize a diagram")
    common(p)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("telescope", help="telescope to selected levels")
    common(p)
    p.add_argument("--levels", required=True,
                   help="comma-separated levels starting at 0")
    p.set_defaults(handler=_cmd_telescope)

    p = sub.add_parser("measures", help="check a tower measure")
    common(p)
    p.add_argument("--measure", required=True, help="measure JSON file")
    p.set_defaults(handler=_cmd_measures)

    p = sub.add_parser("stationary", help="classes, radii and measures")
    common(p)
    p.add_argument("--width", default="1/1000000000000",
                   help="bracket width for spectral radii")
    p.set_defaults(handler=_cmd_stationary)

    p = sub.add_parser("ue", help="unique-ergodicity criteria")
    common(p)
    p.add_argument("--criterion", choices=CRITERIA, default="min_sum")
    p.add_argument("--stages", type=int, default=8)
    p.set_defaults(handler=_cmd_ue)

    p = sub.add_parser("count", help="cluster candidate ergodic measures")
    common(p)
    p.add_argument("--eps", default="1/1000", help="clustering radius")
    p.add_argument("--base", type=int, default=1)
    p.add_argument("--chains", action="store_true",
                   help="also run the growing-partition chain analysis")
    p.add_argument("--partition", default=None,
                   help="partition file for the block-condition analysis")
    p.set_defaults(handler=_cmd_count)

    p = sub.add_parser("sub", help="subdiagram thinness and extension")
    common(p)
    p.add_argument("--spec", required=True, help="subdiagram spec JSON file")
    p.add_argument("--measure", default=None,
                   help="measure file on the subdiagram (default: the "
                        "unique odometer measure when applicable)")
    p.add_argument("--extend", default=None,
                   help="write the extended measure to this path")
    p.set_defaults(handler=_cmd_sub)

    p = sub.add_parser("orbit", help="successor-orbit cylinder frequencies")
    common(p)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--level", type=int, default=1,
                   help="track all cylinders of this level")
    p.add_argument("--window", type=int, default=0,
                   help="emit running frequencies every this many steps")
    p.set_defaults(handler=_cmd_orbit)

    p = sub.add_parser("word", help="complexity profile and bounds")
    common(p, diagram=False)
    p.add_argument("--substitution", default=None, help="e.g. 'a:ab,b:a'")
    p.add_argument("--word", dest="word_file", default=None,
                   help="file with an explicit word")
    p.add_argument("--periodic", default=None, help="repeat this block")
    p.add_argument("--length", type=int, default=4096)
    p.add_argument("--complexity", type=int, default=50)
    p.add_argument("--bounds", action="store_true")
    p.add_argument("--returns", default=None,
                   help="report return words of this factor")
    p.set_defaults(handler=_cmd_word)

    p = sub.add_parser("family", help="write a catalog family to a file")
    p.add_argument("name", help="odometer|two_vertex|ers|stationary|pascal|"
                                "countable_chain")
    p.add_argument("--params", default="{}", help="JSON parameters")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(handler=_cmd_family)
    return parser


def _load(args) -> BratteliDiagram:
    return load_diagram(args.diagram)


def _finish(args, command, sections, extra_warnings=()):
    doc = report_document(command, _flags(args), sections,
                          digest=_digest(args), extra_warnings=extra_warnings)
    return render_json(doc)


def _digest(args):
    path = getattr(args, "diagram", None)
    return input_digest(path) if path else None


def _flags(args):
    skip = {"handler", "command", "out"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None}


def _cmd_analyze(args):
    d = _load(args)
    depth = args.depth
    top = depth if d.max_level is None else min(depth, d.max_level)
    sizes = {n: d.num_vertices(n) for n in range(1, top + 1)}
    heights = {n: list(d.heights(n)) for n in range(1, top + 1)}
    sections = {
        "name": d.name,
        "levels_shown": top,
        "has_rule": d.rule is not None,
        "vertex_counts": sizes,
        "heights": heights,
        "equal_row_sums": d.ers_row_sums(min(top, 8)),
        "stationary": d.is_stationary(),
        "simple_to_depth": d.is_simple_to_depth(min(top, 8)),
        "connectivity_checked_depth": d.connectivity_checked_depth,
    }
    return _finish(args, "analyze", sections)


def _cmd_telescope(args):
    d = _load(args)
    levels = [int(x) for x in args.levels.split(",")]
    out = d.telescope(levels)
    return json.dumps(diagram_to_json(out), indent=2, sort_keys=True) + "\n"


def _cmd_measures(args):
    d = _load(args)
    _, vectors = load_measure(args.measure, d)
    tm = TowerMeasure.from_vectors(d, vectors)
    depth = min(args.depth, len(vectors))
    report = check_invariance(tm, depth)
    sections = {
        "invariant": report.ok,
        "checked_to": report.checked_to,
        "first_failure": report.first_failure,
        "reason": report.reason,
    }
    if report.ok:
        sections["cylinder_values"] = {
            n: [cylinder_measure(tm, n, w)
                for w in range(d.num_vertices(n))]
            for n in range(1, min(depth, 6) + 1)}
        if depth >= 3:
            coeffs = decompose(tm, 1, depth - 2)
            sections["decomposition_coefficients"] = list(coeffs)
    return _finish(args, "measures", sections)


def _cmd_stationary(args):
    d = _load(args)
    ms, dec, radii, rep = stationary_measures(d, Fraction(args.width))
    measures = []
    for m in ms:
        measures.append({
            "class": list(dec.classes[m.class_id]),
            "kind": m.kind,
            "rho": [m.rho.lower, m.rho.upper],
            "rho_exact": m.rho.exact,
            "eigenvector": list(m.vector),
            "residual": m.residual,
            "support": list(m.support),
            "values": {n: ["inf" if v == float("inf") else v
                           for v in m.values(n)]
                       for n in range(1, args.depth + 1)},
        })
    sections = {
        "classes": [list(c) for c in dec.classes],
        "reachability": [list(p) for p in dec.reaches],
        "frobenius_permutation": list(dec.permutation),
        "intervals": {i.class_id: [i.lower, i.upper] for i in radii},
        "distinguished": list(rep.distinguished),
        "comparisons": {f"{a}>{b}": v
                        for (a, b), v in sorted(rep.comparisons.items())},
        "finite_measures": sum(1 for m in ms if m.kind == "finite"),
        "measures": measures,
    }
    return _finish(args, "stationary", sections)


def _cmd_ue(args):
    d = _load(args)
    verdict = unique_ergodicity(d, args.criterion, args.depth,
                                stages=args.stages)
    try:
        det = exact_count_determinant(d, args.depth)
    except (errors.RankError, errors.SingularError) as exc:
        det = {"unavailable": str(exc)}
    trace = verdict.payload.get("trace") or \
        verdict.payload.get("partial_sums") or []
    sections = {"criterion": args.criterion,
                "status": verdict.status.value,
                "depth": verdict.depth,
                "trace": [float(t) for t in trace],
                "witness": verdict.payload.get("witness"),
                "verdict": verdict,
                "determinant_count": det}
    return _finish(args, "ue", sections)


def _cmd_count(args):
    d = _load(args)
    eps = Fraction(args.eps)
    if args.format == "csv":
        series = diameter_series(d, args.base, args.depth)
        return render_csv(("depth", "diameter"),
                          list(enumerate(series)))
    try:
        report = count_measures(d, args.depth, radius=eps, base=args.base)
        sections = {
            "base": report.base,
            "depth": report.depth,
            "radius": report.radius,
            "clusters": [list(c) for c in report.clusters],
            "cluster_count": len(report.clusters),
            "representatives": [list(r) for r in report.representatives],
            "min_separation": report.min_separation,
            "affine_dimension": report.affine_dimension,
            "singular_values": list(report.singular_values),
            "supports": [{n: list(ws) for n, ws in s.items()}
                         for s in report.supports],
            "exact_finite_rank": report.exact_finite_rank,
        }
    except errors.RankError as exc:
        if not (args.chains or args.partition):
            raise
        sections = {"count_unavailable": str(exc)}
    if args.chains:
        chain = chain_analysis(d, BlockPartition.singletons(), args.depth)
        sections["chains"] = {
            "start_level": chain.start_level,
            "prefixes": [list(p) for p in chain.prefixes],
            "degenerate": [list(p) for p in chain.degenerate],
            "count_claim": chain.count_claim,
            "growing_family": chain.growing_family,
            "conditions": chain.conditions,
        }
    if args.partition:
        from .blocks import blocks_analysis
        from .io import load_partition

        partition = load_partition(args.partition)
        blocks = blocks_analysis(d, partition, max(args.depth, 3))
        sections["blocks"] = {
            "conditions": blocks.conditions,
            "vanishing_blocks": [list(u) for u in blocks.vanishing_blocks],
            "regularity": {str(list(k)): v
                           for k, v in sorted(blocks.regularity.items())},
        }
    return _finish(args, "count", sections)


def _cmd_sub(args):
    d = _load(args)
    spec = load_subdiagram_spec(args.spec)
    sub = restrict(d, spec, depth=args.depth + 2)
    if args.measure:
        _, vectors = load_measure(args.measure, sub)
        tm = TowerMeasure.from_vectors(sub, vectors)
    elif len(sub.root_edges) == 1:
        tm = odometer_measure(sub)
    else:
        raise errors.ArgumentError(
            "subdiagram is not an odometer; pass --measure")
    report = extension_test(d, spec, tm, args.depth)
    sections = {
        "sub_vertex_counts": {n: sub.num_vertices(n)
                              for n in range(1, min(args.depth, 8) + 1)},
        "thinness": report.verdicts["thinness"],
        "equivalent_series": report.verdicts["equivalent_series"],
        "sufficient": report.verdicts["sufficient"],
        "extension": report.extension,
        "series_entering": list(report.series_entering),
        "series_tower": list(report.series_tower),
        "series_increment": list(report.series_increment),
        "sufficient_series": list(report.sufficient_series),
    }
    if args.extend:
        ext = extend_measure(d, spec, tm, args.depth)
        vectors = [ext.q(n) for n in range(1, args.depth + 2)]
        Path(args.extend).write_text(
            json.dumps(measure_to_json(vectors, args.diagram), indent=2,
                       sort_keys=True) + "\n", encoding="utf-8")
        sections["extended_measure"] = args.extend
    return _finish(args, "sub", sections)


def _cmd_orbit(args):
    d = _load(args)
    order = EdgeOrder.from_spec(d)
    start = extremal_path_to(d, order, args.depth, 0, minimal=True)
    cylinders = enumerate_cylinders(d, args.level)
    stats = orbit_frequencies(d, order, start, args.steps, cylinders,
                              window=args.window)
    if args.format == "csv":
        header = ["step"] + [f"cyl{i}" for i in range(len(cylinders))]
        rows = [(step,) + tuple(float(f) for f in freqs)
                for step, freqs in stats.window_rows]
        rows.append((stats.steps,) + tuple(float(f)
                                           for f in stats.frequencies))
        return render_csv(header, rows)
    sections = {
        "depth": args.depth,
        "steps": stats.steps,
        "wraps": stats.wraps,
        "cylinders": [{"vertices": list(c.vertices),
                       "slots": list(c.slots)} for c in stats.cylinders],
        "counts": list(stats.counts),
        "frequencies": list(stats.frequencies),
        "diagnostics": order_diagnostics(d, order,
                                         min(args.depth, 8)),
    }
    return _finish(args, "orbit", sections)


def _cmd_word(args):
    sources = [s for s in (args.substitution, args.word_file, args.periodic)
               if s is not None]
    if len(sources) != 1:
        raise errors.ArgumentError(
            "give exactly one of --substitution, --word, --periodic")
    if args.substitution:
        word = generate(SubstitutionRule.parse(args.substitution),
                        args.length)
    elif args.periodic:
        word = generate(args.periodic, args.length)
    else:
        text = Path(args.word_file).read_text(encoding="utf-8").strip()
        word = Word(text[:args.length])
    profile = complexity_profile(word, args.complexity)
    if args.format == "csv":
        rows = [(n + 1, p, (p - profile.values[n - 1]) if n else p - 1)
                for n, p in enumerate(profile.values)]
        return render_csv(("n", "p", "dp"), rows)
    sections = {
        "alphabet": list(word.alphabet),
        "window_length": len(word),
        "complexity": list(profile.values),
        "first_differences": list(profile.first_differences),
        "entropy_estimate": profile.entropy_estimate,
        "flags": {
            "ultimately_periodic": profile.ultimately_periodic,
            "sturmian_like": profile.sturmian_like,
            "constant_growth": profile.constant_growth,
        },
    }
    if args.returns:
        words_found, ratio = return_words(word, args.returns)
        sections["return_words"] = {"factor": args.returns,
                                    "words": sorted(words_found),
                                    "max_ratio": ratio}
    if args.bounds:
        rep = measure_bounds(profile)
        sections["bounds"] = {
            "entries": list(rep.entries),
            "best_bound": rep.best_bound,
            "unique_ergodicity": rep.unique_ergodicity,
            "slope": rep.slope,
            "ratio_range": list(rep.ratio_range),
        }
    doc = report_document("word", _flags(args), sections, digest=None)
    return render_json(doc)


def _cmd_family(args):
    params = json.loads(args.params)
    d = catalog(args.name, **params)
    return json.dumps(diagram_to_json(d), indent=2, sort_keys=True) + "\n"


if __name__ == "__main__":
    sys.exit(main())
