"""Command-line entry point: ``impact-series {analytic,scan,simulate,discriminate,selfcheck}``.

Exit status: 0 on success, 1 on usage or I/O errors, 2 when a self-check fails.
``IMPACT_SERIES_OUTDIR`` sets the default directory for simulation outputs.
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
from pathlib import Path

import numpy as np

from .core_model import ArmLengths, PhaseSettings
from .discrimination import FIVE_SIGMA, decide, required_sample_size
from .io import header_meta, read_events, write_events, write_json
from .montecarlo import coincidence_filter, estimate, generate_events
from .probability import (
    SpecialSettings,
    correlation_E,
    marginal_side1,
    marginal_side2,
    mc_joint,
    parse_model_spec,
    qm_joint,
    singles_visibility,
    special_settings,
)
from .selfcheck import run_checks

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2
OUTDIR_ENV = "IMPACT_SERIES_OUTDIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(text: str) -> float:
    """Float or small arithmetic expression in ``pi``, e.g. ``-pi/4``, ``2*pi``, ``0.7``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError

    try:
        value = ev(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite: {text!r}")
    return value


def parse_range(text: str) -> tuple[float, float, float] | float:
    """``start:stop:step`` (inclusive stop) or a single angle."""
    parts = text.split(":")
    if len(parts) == 1:
        return parse_angle(text)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
    return tuple(parse_angle(p) for p in parts)  # type: ignore[return-value]


def grid(spec: tuple[float, float, float] | float) -> np.ndarray:
    if isinstance(spec, float):
        return np.array([spec])
    start, stop, step = spec
    if step == 0:
        raise UsageError("range step must be nonzero")
    span = (stop - start) / step
    if span < -1e-9:
        raise UsageError(f"empty range {start}:{stop}:{step}")
    count = int(math.floor(span + 1e-9)) + 1
    return start + step * np.arange(count)


def _add_phase_args(p: argparse.ArgumentParser, ranges: bool = False) -> None:
    kind = parse_range if ranges else parse_angle
    suffix = " (value or start:stop:step)" if ranges else ""
    p.add_argument("--alpha", type=kind, help="photon-1 interferometer phase" + suffix)
    p.add_argument("--beta", type=kind, help="first photon-2 interferometer phase" + suffix)
    p.add_argument("--gamma", type=kind, help="second photon-2 interferometer phase" + suffix)
    if not ranges:
        p.add_argument("--special-n", type=int, help="use alpha = n*pi - beta, gamma = beta - m*pi")
        p.add_argument("--special-m", type=int, help="defaults to --special-n")
    p.add_argument("--degrees", action="store_true", help="angles are given in degrees")


def _angle(args, value):
    if isinstance(value, tuple):
        return tuple(_angle(args, v) for v in value)
    return math.radians(value) if args.degrees else value


def phases_from_args(args) -> PhaseSettings:
    special = getattr(args, "special_n", None) is not None
    if special:
        if args.alpha is not None or args.gamma is not None:
            raise UsageError("give either --alpha/--beta/--gamma or --special-n/--beta, not both")
        if getattr(args, "special_m", None) is not None and args.special_n is None:
            raise UsageError("--special-m needs --special-n")
        beta = 0.0 if args.beta is None else _angle(args, args.beta)
        return special_settings(SpecialSettings(args.special_n, args.special_m), beta)
    if getattr(args, "special_m", None) is not None:
        raise UsageError("--special-m needs --special-n")
    missing = [n for n in ("alpha", "beta", "gamma") if getattr(args, n) is None]
    if missing:
        raise UsageError("missing phase flags: " + ", ".join("--" + m for m in missing))
    return PhaseSettings(*(_angle(args, getattr(args, n)) for n in ("alpha", "beta", "gamma")))


def _model(args):
    if getattr(args, "model_file", None):
        path = Path(args.model_file)
        try:
            return parse_model_spec(path.read_text(), name=path.stem)
        except OSError as exc:
            raise UsageError(f"cannot read model file: {exc}") from None
        except ValueError as exc:
            raise UsageError(f"invalid model file {path}: {exc}") from None
    return args.model


def _arms(args) -> ArmLengths:
    try:
        return ArmLengths(*args.arms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _open_out(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _outdir(args) -> Path:
    return Path(args.output_dir or os.environ.get(OUTDIR_ENV) or ".")


def cmd_analytic(args, argv) -> int:
    ph = phases_from_args(args)
    rows = {}
    for name, table in (("QM", qm_joint(ph)), ("MC", mc_joint(ph))):
        rows[name] = {
            **{f"P{k}": v for k, v in table.as_dict().items()},
            "P+|any": marginal_side1(table)[0],
            "P-|any": marginal_side1(table)[1],
            "Pany|+": marginal_side2(table)[0],
            "Pany|-": marginal_side2(table)[1],
            "visibility_side1": singles_visibility(table, 1),
            "visibility_side2": singles_visibility(table, 2),
            "E": correlation_E(table),
        }
    if args.json:
        write_json(
            {"meta": header_meta(argv), "phases": [ph.alpha, ph.beta, ph.gamma], **rows}, sys.stdout
        )
        return EXIT_OK
    print(f"# phases: alpha={ph.alpha!r} beta={ph.beta!r} gamma={ph.gamma!r}")
    print(f"{'quantity':<18s}{'QM':>22s}{'MC':>22s}")
    for key in rows["QM"]:
        print(f"{key:<18s}{rows['QM'][key]:>22.16g}{rows['MC'][key]:>22.16g}")
    print(f"E_QM = {rows['QM']['E']!r}")
    print(f"E_MC = {rows['MC']['E']!r}")
    return EXIT_OK


SCAN_COLUMNS = (
    "alpha", "beta", "gamma",
    "P++_QM", "P+-_QM", "P-+_QM", "P--_QM",
    "P++_MC", "P+-_MC", "P-+_MC", "P--_MC",
    "E_QM", "E_MC",
)  # fmt: skip


def cmd_scan(args, argv) -> int:
    axes = []
    for name in ("alpha", "beta", "gamma"):
        value = getattr(args, name)
        if value is None:
            raise UsageError(f"missing --{name}")
        axes.append(grid(_angle(args, value)))
    out = _open_out(Path(args.output)) if args.output else sys.stdout
    try:
        out.write("".join(f"# {k}: {v}\n" for k, v in header_meta(argv).items()))
        out.write(",".join(SCAN_COLUMNS) + "\n")
        for a in axes[0]:
            for b in axes[1]:
                for g in axes[2]:
                    ph = PhaseSettings(float(a), float(b), float(g))
                    qm, mc = qm_joint(ph), mc_joint(ph)
                    vals = (ph.alpha, ph.beta, ph.gamma, *qm, *mc, correlation_E(qm), correlation_E(mc))
                    out.write(",".join(repr(float(v)) for v in vals) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _simulate(args, ph, model, arms):
    try:
        return generate_events(
            model,
            ph,
            args.n_pairs,
            args.seed,
            arms=arms,
            mc_sampling=args.mc_sampling,
            class_l_interference=args.class_l_interference,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args, argv) -> int:
    ph = phases_from_args(args)
    model, arms = _model(args), _arms(args)
    batch = _simulate(args, ph, model, arms)
    outdir = _outdir(args)
    events_path = Path(args.events_out) if args.events_out else outdir / f"events.{args.format}"
    summary_path = Path(args.summary_out) if args.summary_out else outdir / "summary.json"
    meta = header_meta(argv, args.seed, **{k: v for k, v in batch.meta.items() if k != "seed"})
    meta["blinded"] = args.blinded

    with _open_out(events_path) as fh:
        write_events(batch, fh, args.format, blinded=args.blinded, meta=meta)
    class_l = coincidence_filter(batch, arms)
    summary = {"meta": meta}
    if len(class_l):
        summary["summary"] = estimate(class_l, n_total=len(batch)).to_dict()
    else:
        summary["summary"] = None
    summary["predictions"] = {"E_QM": correlation_E(qm_joint(ph)), "E_MC": correlation_E(mc_joint(ph))}
    with _open_out(summary_path) as fh:
        write_json(summary, fh)
    print(f"wrote {events_path} ({len(batch)} events) and {summary_path}")
    return EXIT_OK


def cmd_discriminate(args, argv) -> int:
    ph = phases_from_args(args)
    arms = _arms(args)
    alpha_level = args.alpha_level
    if args.sigmas is not None:
        alpha_level = float(2 * _norm_sf(args.sigmas))
    sources = []
    if args.events:
        try:
            batch, _ = read_events(args.events)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read events from {args.events}: {exc}") from None
        sources.append((str(args.events), batch))
    else:
        if args.seed is None:
            raise UsageError("--seed is required when simulating")
        models = ["qm", "mc"] if args.model == "both" else [args.model]
        for m in models:
            sources.append((m, _simulate(args, ph, m, arms)))

    reports = []
    for label, batch in sources:
        class_l = coincidence_filter(batch, arms)
        try:
            summary = estimate(class_l, n_total=len(batch))
            report = decide(summary, ph, alpha_level)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        reports.append({"source": label, "summary": summary.to_dict(), "report": report.to_dict()})
        print(f"{label}: E_hat={report.E_hat:.6f} +/- {report.std_err:.6f}  "
              f"LLR={report.log_likelihood_ratio:.3f}  verdict={report.verdict.value}")
    doc = {
        "meta": header_meta(argv, args.seed),
        "phases": [ph.alpha, ph.beta, ph.gamma],
        "required_sample_size_5sigma": required_sample_size(5.0),
        "reports": reports,
    }
    if args.output:
        with _open_out(Path(args.output)) as fh:
            write_json(doc, fh)
    else:
        write_json(doc, sys.stdout)
    return EXIT_OK


def _norm_sf(x: float) -> float:
    from scipy.stats import norm

    return float(norm.sf(x))


def cmd_selfcheck(args, argv) -> int:
    results = run_checks(n_samples=args.samples, seed=args.seed)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("selfcheck: " + ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="impact-series", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analytic", help="exact tables, marginals and E for both models")
    _add_phase_args(p)
    p.add_argument("--json", action="store_true", help="emit JSON instead of a text table")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("scan", help="CSV of closed-form predictions over a phase grid")
    _add_phase_args(p, ranges=True)
    p.add_argument("--output", "-o", help="file to write (default stdout)")
    p.set_defaults(func=cmd_scan)

    def sim_args(p, seed_required):
        _add_phase_args(p)
        p.add_argument("--n-pairs", type=int, default=100_000)
        p.add_argument("--seed", type=int, required=seed_required)
        p.add_argument("--arms", type=float, nargs=2, default=(1.0, 2.0), metavar=("l", "L"))
        p.add_argument("--mc-sampling", choices=("rules", "table"), default="rules")
        p.add_argument("--class-l-interference", action="store_true")

    p = sub.add_parser("simulate", help="generate an event stream and its summary")
    sim_args(p, seed_required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--model", choices=("qm", "mc"), default="qm")
    group.add_argument("--model-file", help="custom mixture file (see parse_model_spec)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--blinded", action="store_true", help="omit hidden path/partner fields")
    p.add_argument("--output-dir", help=f"default ${OUTDIR_ENV} or current directory")
    p.add_argument("--events-out")
    p.add_argument("--summary-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("discriminate", help="decide QM vs MC from simulated or recorded data")
    sim_args(p, seed_required=False)
    p.add_argument("--model", choices=("qm", "mc", "both"), default="both")
    p.add_argument("--events", help="ingest this exported stream instead of simulating")
    level = p.add_mutually_exclusive_group()
    level.add_argument("--alpha-level", type=float, default=FIVE_SIGMA)
    level.add_argument("--sigmas", type=float, help="two-sided threshold in standard deviations")
    p.add_argument("--output", "-o", help="report file (default stdout)")
    p.set_defaults(func=cmd_discriminate)

    p = sub.add_parser("selfcheck", help="verify analytic identities against the amplitude oracle")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"impact-series {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
