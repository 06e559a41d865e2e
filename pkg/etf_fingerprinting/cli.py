"""Command-line front end for ETF fingerprinting.

Subcommands:
    design      Build a fingerprint design and write it to a design file
    analyze     Key-value report of every bound for a design and K
    attack      Forge one copy from an attack spec (YAML)
    detect      Test statistics and accused users for a forgery
    experiment  Monte Carlo P_d-vs-K sweep to CSV (optional SVG)
    plot        Render a results CSV as SVG
    presets     List bundled experiment configs

Every file written gets a ``<file>.manifest.yaml`` alongside it recording
how to reproduce it. Exit status is 0 on success, 1 on failure (one-line
``error:`` message on stderr) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from etf_fingerprinting import __version__
from etf_fingerprinting.analysis.bounds import optimal_threshold
from etf_fingerprinting.analysis.bruteforce import MAX_ENUMERATION
from etf_fingerprinting.analysis.report import analysis_report, format_report
from etf_fingerprinting.core.channel import AttackSpec, EmbeddingParams, extract, forge, wnr
from etf_fingerprinting.core.designs import (
    design_summary,
    etf_from_incidence,
    orthogonal_design,
    simplex_design,
    steiner_etf,
    steiner_pairs_incidence,
)
from etf_fingerprinting.core.detection import focused_detect, test_statistics
from etf_fingerprinting.core.errors import DomainError, FingerprintError
from etf_fingerprinting.core.formats import (
    atomic_write_text,
    load_attack_spec,
    load_design,
    load_hadamard,
    load_steiner_incidence,
    load_vector,
    save_design,
    save_vector,
)
from etf_fingerprinting.experiment.config import (
    list_presets,
    load_config,
    parse_design_source,
    preset_path,
    source_inputs,
)
from etf_fingerprinting.experiment.results import (
    read_results_csv,
    write_manifest,
    write_results_csv,
)
from etf_fingerprinting.experiment.sweep import run_experiment
from etf_fingerprinting.visualization.ascii_charts import draw_experiment_summary

logger = logging.getLogger(__name__)

PROG = "etf-fingerprinting"


def _seed(value: str) -> int:
    try:
        return int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer (decimal or 0x hex), got {value!r}")


def _fmt(value) -> str:
    return "undefined" if value is None else f"{value:.12g}"


def _host(path, N):
    return np.zeros(N) if path is None else load_vector(path)


# =============================================================================
# Commands
# =============================================================================

def cmd_design(args) -> int:
    inputs = []
    if args.kind == "etf":
        if args.steiner_pairs is not None:
            incidence = steiner_pairs_incidence(args.steiner_pairs)
        elif args.incidence is not None:
            incidence = load_steiner_incidence(args.incidence)
            inputs.append(args.incidence)
        else:
            raise DomainError("--kind etf needs --steiner-pairs V or --incidence PATH")
        if args.hadamard is not None:
            F = steiner_etf(incidence, load_hadamard(args.hadamard))
            inputs.append(args.hadamard)
        else:
            F = etf_from_incidence(incidence)
    else:
        if args.n is None:
            raise DomainError(f"--kind {args.kind} needs --n N")
        F = simplex_design(args.n) if args.kind == "simplex" else orthogonal_design(args.n)

    save_design(F, args.output)
    write_manifest(args.output, args.command_line, {
        "kind": args.kind,
        "steiner_pairs": args.steiner_pairs,
        "incidence": None if args.incidence is None else str(args.incidence),
        "hadamard": None if args.hadamard is None else str(args.hadamard),
        "n": args.n,
    }, inputs=inputs)

    summary = design_summary(F)
    print(f"N = {F.N}")
    print(f"M = {F.M}")
    print(f"mu = {_fmt(summary['coherence'])}")
    print(f"welch_bound = {_fmt(summary['welch_bound'])}")
    return 0


def cmd_analyze(args) -> int:
    F = load_design(args.design)
    entries = analysis_report(F, args.k, args.per_dim_energy, args.sigma2,
                              max_enumeration=args.max_enumeration)
    text = format_report(entries)
    if args.output is not None:
        atomic_write_text(args.output, text)
        write_manifest(args.output, args.command_line, {
            "design": str(args.design),
            "K": args.k,
            "per_dim_energy": args.per_dim_energy,
            "sigma2": args.sigma2,
            "max_enumeration": args.max_enumeration,
        }, inputs=[args.design])
    sys.stdout.write(text)
    return 0


def cmd_attack(args) -> int:
    F = load_design(args.design)
    spec = load_attack_spec(args.attack)
    if args.seed is not None:
        spec = AttackSpec(coalition=spec.coalition, weights=spec.weights,
                          sigma2=spec.sigma2, seed=args.seed)
    p = EmbeddingParams.for_design(F, args.per_dim_energy)
    s = _host(args.host, F.N)
    forgery = forge(s, F, p, spec)

    save_vector(forgery.y, args.output)
    inputs = [args.design, args.attack] + ([] if args.host is None else [args.host])
    write_manifest(args.output, args.command_line, {
        "design": str(args.design),
        "attack": str(args.attack),
        "host": None if args.host is None else str(args.host),
        "per_dim_energy": args.per_dim_energy,
        "coalition": list(spec.coalition),
        "sigma2": spec.sigma2,
    }, inputs=inputs, master_seed=spec.seed)

    print(f"coalition = {' '.join(str(k) for k in spec.coalition)}")
    print(f"sigma2 = {spec.sigma2:.12g}")
    print(f"seed = {spec.seed}")
    if spec.sigma2 > 0:
        print(f"wnr_db = {wnr(args.per_dim_energy, spec.sigma2):.12g}")
    return 0


def cmd_detect(args) -> int:
    F = load_design(args.design)
    p = EmbeddingParams.for_design(F, args.per_dim_energy)
    z = extract(load_vector(args.forgery), _host(args.host, F.N))
    tau = args.tau if args.tau is not None else optimal_threshold(F.coherence, args.k)
    T = test_statistics(z, F, p)
    outcome = focused_detect(T, tau)

    if args.output is not None:
        save_vector(T.values, args.output)
        inputs = [args.design, args.forgery] + ([] if args.host is None else [args.host])
        write_manifest(args.output, args.command_line, {
            "design": str(args.design),
            "forgery": str(args.forgery),
            "host": None if args.host is None else str(args.host),
            "per_dim_energy": args.per_dim_energy,
            "tau": tau,
        }, inputs=inputs)

    accused = sorted(outcome.accused)
    print(f"tau = {tau:.12g}")
    print(f"max_statistic = {float(T.values.max()):.12g}")
    print(f"accused = {' '.join(str(m) for m in accused) if accused else '(none)'}")
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.trials is not None:
        changes["trials"] = args.trials
    if changes:
        cfg = cfg.replace(**changes)
    if args.svg is not None:
        # --svg needs matplotlib; check before the sweep
        import matplotlib  # noqa: F401

    curves, master_seed = run_experiment(cfg)
    write_results_csv(curves, args.output)

    config_file = Path(args.config)
    inputs = [config_file if config_file.is_file() else preset_path(args.config)]
    for text in cfg.designs:
        inputs.extend(source_inputs(parse_design_source(text), cfg.base_dir))
    resolved = cfg.replace(master_seed=master_seed).to_dict()
    write_manifest(args.output, args.command_line, resolved, inputs=inputs, master_seed=master_seed)

    if args.svg is not None:
        from etf_fingerprinting.visualization.svg_plot import write_curves_svg
        write_curves_svg(read_results_csv(args.output), args.svg)
        write_manifest(args.svg, args.command_line, resolved, inputs=[args.output],
                       master_seed=master_seed)

    if not args.quiet:
        print(draw_experiment_summary(curves))
    print(f"master_seed = {master_seed}")
    return 0


def cmd_plot(args) -> int:
    from etf_fingerprinting.visualization.svg_plot import write_curves_svg

    rows = read_results_csv(args.results)
    write_curves_svg(rows, args.output, title=args.title)
    write_manifest(args.output, args.command_line, {"results": str(args.results), "title": args.title},
                   inputs=[args.results])
    return 0


def cmd_presets(args) -> int:
    for name in list_presets():
        print(name)
    return 0


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Construct, analyze and simulate collusion-resistant fingerprint designs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="Log progress to stderr (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="Build a design matrix file")
    p.add_argument("--kind", choices=("etf", "simplex", "orthogonal"), required=True)
    p.add_argument("--steiner-pairs", type=int, metavar="V",
                   help="etf: use the (2,2,V) Steiner system of all point pairs")
    p.add_argument("--incidence", type=Path, help="etf: Steiner incidence file")
    p.add_argument("--hadamard", type=Path,
                   help="etf: Hadamard matrix file (default: Sylvester of order r+1)")
    p.add_argument("--n", type=int, metavar="N", help="simplex/orthogonal: signal dimension")
    p.add_argument("-o", "--output", type=Path, required=True, help="Design file to write")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("analyze", help="Report every bound for a design and K")
    p.add_argument("--design", type=Path, required=True)
    p.add_argument("-K", "--k", type=int, required=True, help="Coalition size bound K")
    p.add_argument("--per-dim-energy", type=float, default=1.0, help="D_f (default 1)")
    p.add_argument("--sigma2", type=float, default=1.0, help="Noise power per dimension (default 1)")
    p.add_argument("--max-enumeration", type=int, default=MAX_ENUMERATION,
                   help="Brute-force enumeration guard")
    p.add_argument("-o", "--output", type=Path, help="Also write the report to this file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("attack", help="Forge a copy from an attack spec")
    p.add_argument("--design", type=Path, required=True)
    p.add_argument("--attack", type=Path, required=True, help="Attack spec YAML")
    p.add_argument("--host", type=Path, help="Host vector file (default: zero host)")
    p.add_argument("--per-dim-energy", type=float, default=1.0)
    p.add_argument("--seed", type=_seed, help="Override the attack spec's noise seed")
    p.add_argument("-o", "--output", type=Path, required=True, help="Forgery vector file to write")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("detect", help="Compute statistics and accuse users")
    p.add_argument("--design", type=Path, required=True)
    p.add_argument("--forgery", type=Path, required=True)
    p.add_argument("--host", type=Path, help="Host vector file (default: zero host)")
    p.add_argument("--per-dim-energy", type=float, default=1.0)
    threshold = p.add_mutually_exclusive_group(required=True)
    threshold.add_argument("--tau", type=float, help="Detection threshold")
    threshold.add_argument("-K", "--k", type=int, help="Use tau* = (1 + mu) / (2K)")
    p.add_argument("-o", "--output", type=Path, help="Write the statistics vector here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("experiment", help="Run a Monte Carlo P_d-vs-K experiment")
    p.add_argument("--config", required=True, help="Config YAML path or preset name")
    p.add_argument("--seed", type=_seed, help="Master seed (default: config value or entropy)")
    p.add_argument("--workers", type=int, help="Worker processes")
    p.add_argument("--trials", type=int, help="Override trials per K")
    p.add_argument("-o", "--output", type=Path, required=True, help="Results CSV to write")
    p.add_argument("--svg", type=Path, help="Also render the curves to this SVG file")
    p.add_argument("-q", "--quiet", action="store_true", help="Skip the ASCII summary")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="Render a results CSV as SVG")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--title", help="Plot title")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("presets", help="List bundled experiment configs")
    p.set_defaults(func=cmd_presets)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv=None) -> int:
    """Run the command-line tool; returns the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command_line = shlex.join([PROG] + argv)
    _configure_logging(args.verbose)

    try:
        return args.func(args)
    except ImportError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc.name or 'matplotlib'} is required here "
              f"(install with: pip install etf-fingerprinting[plot])", file=sys.stderr)
        return 1
    except (FingerprintError, ValueError, TypeError, OSError) as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
