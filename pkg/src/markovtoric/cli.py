"""Command-line surface.

One verb per capability: validate, paths, relations, verify, mle,
recover, birch, ingest, report.  Text output is human-readable (and for
ingest, directly re-readable as data files); --format structured emits a
single JSON document per run.

Exit codes: 0 success; 1 validation failure; 2 verification-style
failure (a relation does not vanish, recovery is inconsistent, a Birch
residual is nonzero); 3 I/O or parse failure.
"""

import argparse
import sys
from fractions import Fraction

from . import iofiles
from .errors import ModelError, ParseError
from .estimate import (
    TrajectorySet,
    birch_residual,
    counts_from_trajectories,
    fitted_path_probabilities,
    loglikelihood,
    mle_homogeneous,
    mle_nonhomogeneous,
    recover_parameters,
)
from .iofiles import DEFAULT_DECIMALS, decimal_string, fraction_string
from .model import format_symbol, validate_model
from .paths import build_design_matrix, enumerate_paths
from .relations import generators_for
from .verify import DEFAULT_TRIALS, verify_relation_set

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 means something else here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit_(EXIT_IO, f"{self.prog}: error: {message}")


class SystemExit_(Exception):
    def __init__(self, code, message=None):
        super().__init__(message)
        self.code = code
        self.message = message


def build_parser():
    top = _Parser(prog="markovtoric",
                  description="Multistate Markov chains as toric models: "
                              "paths, relations, verification, estimation.")
    common = _Parser(add_help=False)
    common.add_argument("--spec", required=True, help="model spec file (YAML)")
    common.add_argument("--seed", default="0", help="random seed (default 0)")
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS,
                        help=f"sampled points per relation (default {DEFAULT_TRIALS})")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("text", "structured"),
                        default="text", help="output format (default text)")
    common.add_argument("--decimals", type=int, default=DEFAULT_DECIMALS,
                        help=f"decimal places in rounded views (default {DEFAULT_DECIMALS})")

    sub = top.add_subparsers(dest="verb", required=True)

    sub.add_parser("validate", parents=[common],
                   help="check a model spec for structural problems")
    sub.add_parser("paths", parents=[common],
                   help="enumerate admissible paths")

    sub.add_parser("relations", parents=[common],
                   help="generate the relation families for a spec")

    p = sub.add_parser("verify", parents=[common],
                       help="check relations by sampling and kernel membership")
    p.add_argument("--relations", help="relation file (default: generate)")

    p = sub.add_parser("mle", parents=[common],
                       help="closed-form maximum likelihood estimate")
    _data_flags(p)
    p.add_argument("--n", type=int, help="analysis horizon (default: spec n)")
    p.add_argument("--window", choices=("prefix", "slide"), default="prefix",
                   help="homogeneous pooling window (default prefix)")

    p = sub.add_parser("recover", parents=[common],
                       help="recover parameters from path probabilities")
    p.add_argument("--probabilities", required=True,
                   help="path probability file")

    p = sub.add_parser("birch", parents=[common],
                       help="residual of the moment-matching equations")
    p.add_argument("--probabilities", required=True,
                   help="candidate path probability file")
    p.add_argument("--counts", required=True, help="observed counts file")

    p = sub.add_parser("ingest", parents=[common],
                       help="normalize trajectories or a text corpus")
    _data_flags(p)
    p.add_argument("--corpus", help="raw text file")
    p.add_argument("--corpus-config", dest="corpus_config",
                   help="corpus spec file (YAML); required with --corpus")
    p.add_argument("--collapse", help="state collapse map file (YAML)")
    p.add_argument("--fine-spec", dest="fine_spec",
                   help="spec of the pre-collapse chain, to validate --collapse")
    p.add_argument("--n", type=int, help="horizon for --emit counts")
    p.add_argument("--emit", choices=("trajectories", "counts"),
                   default="trajectories", help="output kind (default trajectories)")

    p = sub.add_parser("report", parents=[common],
                       help="combined validation/relations/verification/estimate report")
    _data_flags(p)
    p.add_argument("--relations", help="relation file (default: generate)")
    p.add_argument("--n", type=int, help="analysis horizon (default: spec n)")
    p.add_argument("--window", choices=("prefix", "slide"), default="prefix")
    return top


def _data_flags(p):
    p.add_argument("--trajectories", help="trajectory file")
    p.add_argument("--counts", help="counts file")


def _emit(args, lines, jsonable):
    text = ("\n".join(lines) + "\n") if args.format == "text" else None
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            if text is None:
                iofiles.dump_json(jsonable, fh)
            else:
                fh.write(text)
    else:
        if text is None:
            iofiles.dump_json(jsonable, sys.stdout)
        else:
            sys.stdout.write(text)


def _load_spec(args):
    return iofiles.parse_model_spec(args.spec)


def _seed(args):
    # accept plain integers but keep arbitrary strings usable as seeds
    try:
        return int(args.seed)
    except ValueError:
        return args.seed


def _pp(value, decimals):
    return f"{fraction_string(value)} ~ {decimal_string(value, decimals)}"


# ---------------------------------------------------------------------------
# verbs


def cmd_validate(args):
    spec = _load_spec(args)
    findings = validate_model(spec)
    errors = [m for s, m in findings if s == "error"]
    lines = [f"{severity}: {message}" for severity, message in findings]
    lines.append("model is valid" if not errors
                 else f"model is invalid ({len(errors)} error(s))")
    jsonable = {
        "ok": not errors,
        "findings": [{"severity": s, "message": m} for s, m in findings],
    }
    _emit(args, lines, jsonable)
    return EXIT_OK if not errors else EXIT_VALIDATION


def cmd_paths(args):
    spec = _load_spec(args)
    table = enumerate_paths(spec)
    lines = [f"{len(table)} admissible paths"]
    lines += [",".join(p) for p in table]
    _emit(args, lines, {"count": len(table),
                        "paths": [list(p) for p in table]})
    return EXIT_OK


def _relations_for(args, spec, table):
    if getattr(args, "relations", None):
        return iofiles.read_relations(args.relations, table)
    return generators_for(spec, table)


def cmd_relations(args):
    spec = _load_spec(args)
    table = enumerate_paths(spec)
    relset = generators_for(spec, table)
    lines = [f"{len(relset)} relations, {len(relset.slice_paths)} slice variables"]
    lines += relset.text_lines()
    _emit(args, lines, iofiles.relations_to_jsonable(relset))
    return EXIT_OK


def cmd_verify(args):
    spec = _load_spec(args)
    table = enumerate_paths(spec)
    relset = _relations_for(args, spec, table)
    report = verify_relation_set(relset, spec, trials=args.trials,
                                 seed=_seed(args))
    lines = []
    for entry in report.entries:
        mark = "ok  " if entry.ok else "FAIL"
        binomial = relset.binomials[entry.index]
        lines.append(f"[{entry.index:3d}] {mark} {entry.provenance:16s}"
                     f" {binomial.text(table)}")
        if entry.vanish.witness is not None:
            w = entry.vanish.witness
            lines.append(f"      nonzero at trial {w.trial}: "
                         f"residual {fraction_string(w.residual)}")
    lines.append(report.summary())
    if not report.agreement:
        lines.append("warning: sampling and kernel routes disagree")
    _emit(args, lines, iofiles.verification_to_jsonable(report, relset))
    return EXIT_OK if report.all_pass else EXIT_VERIFICATION


def _load_trajectories(args, spec):
    if bool(args.trajectories) == bool(args.counts):
        raise SystemExit_(EXIT_IO,
                          "exactly one of --trajectories or --counts is required")
    if args.trajectories:
        return iofiles.ingest_trajectories(args.trajectories, spec)
    counts = iofiles.read_counts(args.counts, enumerate_paths(spec))
    records = tuple((p, c) for p, c in zip(counts.table, counts.counts) if c)
    if not records:
        raise SystemExit_(EXIT_VALIDATION, "counts file is all zero")
    return TrajectorySet(records).check(spec)


def _estimate_lines(report, decimals):
    lines = [f"kind: {report.kind}  order: {report.order}"
             f"  horizon: {report.horizon}  window: {report.window}"
             f"  total: {report.total}"]
    for block, value in sorted(report.pi.items()):
        sym = format_symbol(("pi", block))
        lines.append(f"{sym} = {_pp(value, decimals)}")
    for (level, h, s), value in sorted(
            report.trans.items(),
            key=lambda kv: (kv[0][0] or 0, kv[0][1], kv[0][2])):
        sym = format_symbol(("a", level, h, s))
        lines.append(f"{sym} = {_pp(value, decimals)}")
    for level, h in sorted(report.undefined, key=lambda x: (x[0] or 0, x[1])):
        where = "" if level is None else f" at level {level}"
        lines.append(f"history {','.join(h)}{where}: undefined (never occupied)")
    return lines


def cmd_mle(args):
    spec = _load_spec(args)
    trajs = _load_trajectories(args, spec)
    n = args.n if args.n is not None else min(spec.horizon, trajs.length)
    if spec.homogeneous:
        report = mle_homogeneous(trajs, spec, n=n, window=args.window)
    else:
        report = mle_nonhomogeneous(trajs, spec, n=n)
    lines = _estimate_lines(report, args.decimals)
    jsonable = {"estimate": iofiles.estimate_to_jsonable(report, args.decimals)}
    fit_spec = spec if n == spec.horizon else spec.with_horizon(n)
    table = enumerate_paths(fit_spec)
    try:
        fitted = fitted_path_probabilities(report, fit_spec, table)
    except ModelError as exc:
        lines.append(f"fitted path probabilities unavailable: {exc}")
        jsonable["fitted"] = None
        jsonable["note"] = str(exc)
    else:
        u = counts_from_trajectories(trajs, spec, n=n, table=table)
        ll = loglikelihood(fitted, u)
        lines.append("fitted path probabilities:")
        lines += [f"  {','.join(p)} = {_pp(fitted[j], args.decimals)}"
                  for j, p in enumerate(table)]
        lines.append(f"log-likelihood: {ll:.6f}")
        jsonable["fitted"] = iofiles.assignment_to_jsonable(
            fitted, table, args.decimals)
        jsonable["loglikelihood"] = ll
    _emit(args, lines, jsonable)
    return EXIT_OK


def cmd_recover(args):
    spec = _load_spec(args)
    table = enumerate_paths(spec)
    assignment = iofiles.read_probabilities(args.probabilities, table)
    rec = recover_parameters(assignment, spec, table)
    lines = []
    for block, value in sorted(rec.params.pi.items()):
        lines.append(f"{format_symbol(('pi', block))} = {_pp(value, args.decimals)}")
    for (level, h, s), value in sorted(
            rec.params.trans.items(),
            key=lambda kv: (kv[0][0] or 0, kv[0][1], kv[0][2])):
        lines.append(f"{format_symbol(('a', level, h, s))} = "
                     f"{_pp(value, args.decimals)}")
    for level, h in sorted(rec.undefined, key=lambda x: (x[0] or 0, x[1])):
        where = "" if level is None else f" at level {level}"
        lines.append(f"history {','.join(h)}{where}: undetermined")
    for c in rec.inconsistencies:
        lines.append(
            f"inconsistent ratios for {','.join(c.history)} -> {c.next_state}: "
            f"level {c.level_a} gives {fraction_string(c.ratio_a)}, "
            f"level {c.level_b} gives {fraction_string(c.ratio_b)}")
    lines.append("consistent" if rec.consistent else "inconsistent")
    _emit(args, lines, iofiles.recovery_to_jsonable(rec, args.decimals))
    return EXIT_OK if rec.consistent else EXIT_VERIFICATION


def cmd_birch(args):
    spec = _load_spec(args)
    table = enumerate_paths(spec)
    assignment = iofiles.read_probabilities(args.probabilities, table)
    u = iofiles.read_counts(args.counts, table)
    design = build_design_matrix(spec, table)
    residual = birch_residual(assignment, u, design)
    lines = [f"{format_symbol(sym)}: {_pp(r, args.decimals)}"
             for sym, r in zip(design.row_symbols, residual)]
    worst = max((abs(r) for r in residual), default=Fraction(0))
    lines.append(f"max |residual| = {_pp(worst, args.decimals)}")
    _emit(args, lines, iofiles.birch_to_jsonable(residual, design, args.decimals))
    return EXIT_OK if worst == 0 else EXIT_VERIFICATION


def cmd_ingest(args):
    spec = _load_spec(args)
    if args.corpus:
        if not args.corpus_config:
            raise SystemExit_(EXIT_IO, "--corpus requires --corpus-config")
        cs = iofiles.read_corpus_spec(args.corpus_config)
        try:
            with open(args.corpus, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(str(exc), filename=args.corpus)
        target = None if args.collapse else spec
        trajs = iofiles.corpus_to_trajectories(text, cs, target)
    else:
        if not args.trajectories:
            raise SystemExit_(EXIT_IO,
                              "ingest needs --trajectories or --corpus")
        source_spec = (iofiles.parse_model_spec(args.fine_spec)
                       if args.collapse and args.fine_spec else spec)
        trajs = iofiles.ingest_trajectories(args.trajectories, source_spec)
    if args.collapse:
        cm = iofiles.read_collapse_map(args.collapse)
        fine = (iofiles.parse_model_spec(args.fine_spec)
                if args.fine_spec else None)
        trajs = iofiles.collapse_states(trajs, cm, spec, fine)
    if args.emit == "counts":
        n = args.n if args.n is not None else min(spec.horizon, trajs.length)
        counts = counts_from_trajectories(trajs, spec, n=n)
        lines = [",".join(p) + f" {c}"
                 for p, c in zip(counts.table, counts.counts)]
        jsonable = {"total": counts.total, "horizon": n,
                    "counts": [{"path": list(p), "count": c}
                               for p, c in zip(counts.table, counts.counts)]}
    else:
        lines = [",".join(t) + f" {m}" for t, m in trajs.records]
        jsonable = {"length": trajs.length, "total": trajs.total,
                    "records": [{"trajectory": list(t), "multiplicity": m}
                                for t, m in trajs.records]}
    _emit(args, lines, jsonable)
    return EXIT_OK


def cmd_report(args):
    spec = _load_spec(args)
    findings = validate_model(spec)
    errors = [m for s, m in findings if s == "error"]
    table = enumerate_paths(spec)
    relset = _relations_for(args, spec, table)
    verification = verify_relation_set(relset, spec, trials=args.trials,
                                       seed=_seed(args))
    by_tag = {}
    for _, tag in relset:
        by_tag[tag] = by_tag.get(tag, 0) + 1
    lines = [f"spec: {args.spec}",
             f"states: {len(spec.states)}  order: {spec.order}"
             f"  horizon: {spec.horizon}"
             f"  {'homogeneous' if spec.homogeneous else 'nonhomogeneous'}"]
    lines += [f"{s}: {m}" for s, m in findings]
    lines.append(f"paths: {len(table)}")
    lines.append("relations: " + (", ".join(
        f"{v} {k}" for k, v in sorted(by_tag.items())) or "none"))
    if relset.slice_paths:
        lines.append(f"slice variables: {len(relset.slice_paths)}")
    lines.append(verification.summary())
    jsonable = {
        "spec": args.spec,
        "validation": {"ok": not errors,
                       "findings": [{"severity": s, "message": m}
                                    for s, m in findings]},
        "paths": {"count": len(table)},
        "relations": {"by_provenance": by_tag,
                      "slice": len(relset.slice_paths)},
        "verification": iofiles.verification_to_jsonable(verification, relset),
    }
    if args.trajectories or args.counts:
        trajs = _load_trajectories(args, spec)
        n = args.n if args.n is not None else min(spec.horizon, trajs.length)
        if spec.homogeneous:
            est = mle_homogeneous(trajs, spec, n=n, window=args.window)
        else:
            est = mle_nonhomogeneous(trajs, spec, n=n)
        lines += _estimate_lines(est, args.decimals)
        jsonable["estimate"] = iofiles.estimate_to_jsonable(est, args.decimals)
    _emit(args, lines, jsonable)
    if errors:
        return EXIT_VALIDATION
    if not verification.all_pass:
        return EXIT_VERIFICATION
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "paths": cmd_paths,
    "relations": cmd_relations,
    "verify": cmd_verify,
    "mle": cmd_mle,
    "recover": cmd_recover,
    "birch": cmd_birch,
    "ingest": cmd_ingest,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.verb](args)
    except SystemExit_ as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
