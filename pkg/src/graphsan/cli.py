"""Command-line interface.

Exit codes: 0 success, 2 validation failure (bad inputs, bad flags, failed
audit check), 3 stage failure (a pipeline stage raised on valid inputs).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import audit as audit_mod
from . import fileio
from .graph import RngStream
from .pipeline import PipelineConfig, PipelineStageError, run_pipeline
from .scoring import allocate_budgets, build_scores, floor_scores

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STAGE = 3


def _add_seed(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=0, help="root seed for all randomness")


def _add_feature_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--eps-f", type=float, default=1.0, help="total feature budget")
    sp.add_argument("--bins", type=int, default=10, help="discretization bin count k")
    sp.add_argument("--gamma", type=float, default=0.5,
                    help="importance vs sensitivity blend in [0,1]")


def _add_edge_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--eps-e1", type=float, default=0.5, help="dendrogram-fit budget")
    sp.add_argument("--eps-e2", type=float, default=0.5, help="probability-release budget")
    sp.add_argument("--mcmc-steps", type=int, default=10_000, help="max outer MCMC steps")
    sp.add_argument("--chains", type=int, default=1, help="independent chains (best kept)")
    sp.add_argument("--tau1", type=float, default=1.0, help="collapse threshold (split mass)")
    sp.add_argument("--taue", type=float, default=1.0, help="collapse threshold (subtree mass)")
    sp.add_argument("--trace", type=Path, default=None,
                    help="write per-step likelihood trace of chain 0 here")
    sp.add_argument("--strip-labels", action="store_true",
                    help="drop pub/pri labels in the released graph")


def _add_sanitize_io(sp: argparse.ArgumentParser, features: bool) -> None:
    sp.add_argument("--graph", type=Path, required=True, help="input edge-list file")
    if features:
        sp.add_argument("--features", type=Path, required=True, help="input feature CSV")
        sp.add_argument("--scores", type=Path, required=True,
                        help="scores file with [z], [z_masked], [shap] sections")
    else:
        sp.add_argument("--features", type=Path, default=None,
                        help="feature CSV to copy through untouched")
    sp.add_argument("--out", type=Path, required=True, help="output path prefix")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="graphsan",
        description="Differentially private sanitization of attributed graphs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sanitize", help="sanitize features and edges")
    _add_sanitize_io(sp, features=True)
    _add_feature_flags(sp)
    _add_edge_flags(sp)
    _add_seed(sp)

    sp = sub.add_parser("sanitize-features", help="sanitize features only (edges untouched)")
    _add_sanitize_io(sp, features=True)
    _add_feature_flags(sp)
    _add_seed(sp)

    sp = sub.add_parser("sanitize-edges", help="sanitize edges only (features untouched)")
    _add_sanitize_io(sp, features=False)
    _add_edge_flags(sp)
    _add_seed(sp)

    sp = sub.add_parser("scores", help="report per-feature scores and budgets")
    sp.add_argument("--scores", type=Path, required=True)
    sp.add_argument("--out", type=Path, default=None, help="write CSV here (default stdout)")
    _add_feature_flags(sp)

    sp = sub.add_parser("audit", help="run a privacy or utility check")
    check = sp.add_subparsers(dest="check", required=True)

    ldp = check.add_parser("ldp", help="verify per-feature LDP ratios by enumeration")
    ldp.add_argument("--bins", type=int, required=True)
    ldp.add_argument("--eps-f", type=float, required=True)
    ldp.add_argument("--dims", type=int, default=None,
                     help="feature count for a uniform score split")
    ldp.add_argument("--scores", type=Path, default=None, help="scores file for real splits")
    ldp.add_argument("--gamma", type=float, default=0.5)

    util = check.add_parser("utility", help="compare a released graph to its original")
    util.add_argument("--original", type=Path, required=True)
    util.add_argument("--released", type=Path, required=True)

    atk = check.add_parser("attack", help="edge-inference attack AUC on a released graph")
    atk.add_argument("--original", type=Path, required=True)
    atk.add_argument("--released", type=Path, required=True)
    atk.add_argument("--features", type=Path, default=None,
                     help="released features for the similarity term")
    atk.add_argument("--cn-weight", type=float, default=0.5)
    atk.add_argument("--negatives-per-positive", type=int, default=1)
    _add_seed(atk)
    return p


def _warn_on_seed_reuse(meta_path: Path, digest: str, seed: int) -> None:
    if not meta_path.exists():
        return
    try:
        old = fileio.load_metadata(meta_path)
    except Exception:
        return
    if old.get("input_digest") == digest and old.get("seed") != seed:
        print(
            f"warning: these inputs were already released with seed {old.get('seed')}; "
            f"re-releasing with seed {seed} consumes additional privacy budget",
            file=sys.stderr,
        )


def _cmd_sanitize(args: argparse.Namespace, features_on: bool, edges_on: bool) -> int:
    graph = fileio.load_graph(args.graph)
    features = score_rows = None
    inputs = [args.graph]
    if features_on:
        features = fileio.load_features(args.features, expected_rows=graph.n)
        score_rows = fileio.load_scores(args.scores)
        inputs += [args.features, args.scores]
    elif args.features is not None:
        features = fileio.load_features(args.features, expected_rows=graph.n)
        inputs.append(args.features)
    config = PipelineConfig(
        eps_f=getattr(args, "eps_f", 1.0),
        eps_e1=getattr(args, "eps_e1", 0.5),
        eps_e2=getattr(args, "eps_e2", 0.5),
        k=getattr(args, "bins", 10),
        gamma=getattr(args, "gamma", 0.5),
        seed=args.seed,
        chains=getattr(args, "chains", 1),
        mcmc_steps=getattr(args, "mcmc_steps", 10_000),
        tau1=getattr(args, "tau1", 1.0),
        tau_e=getattr(args, "taue", 1.0),
        sanitize_features=features_on,
        sanitize_edges=edges_on,
    )
    digest = fileio.input_digest(*inputs)
    meta_path = Path(f"{args.out}.meta.json")
    _warn_on_seed_reuse(meta_path, digest, args.seed)

    trace_path = getattr(args, "trace", None)
    trace = open(trace_path, "w") if trace_path else None
    try:
        result = run_pipeline(config, graph, features, score_rows, trace=trace)
    finally:
        if trace:
            trace.close()

    out_graph = result.graph.release_view() if getattr(args, "strip_labels", False) \
        else result.graph.graph
    fileio.save_graph(out_graph, f"{args.out}.graph.tsv")
    if result.features is not None:
        fileio.save_features(result.features, f"{args.out}.features.csv")
    meta = dict(result.metadata)
    meta["input_digest"] = digest
    fileio.save_metadata(meta, meta_path)
    print(f"wrote {args.out}.graph.tsv and {meta_path}")
    return EXIT_OK


def _cmd_scores(args: argparse.Namespace) -> int:
    z, z_masked, shap = fileio.load_scores(args.scores)
    scores = build_scores(z, z_masked, shap, args.gamma)
    budgets = allocate_budgets(floor_scores(scores.theta), args.eps_f, args.bins)
    lines = ["feature,alpha,beta,theta,eps,sigma"]
    for i in range(scores.theta.size):
        lines.append(
            f"{i},{scores.alpha[i]:.10g},{scores.beta[i]:.10g},{scores.theta[i]:.10g},"
            f"{budgets.eps[i]:.10g},{budgets.sigma[i]:.10g}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    if args.check == "ldp":
        if (args.dims is None) == (args.scores is None):
            raise ValueError("give exactly one of --dims or --scores")
        if args.dims is not None:
            theta = np.full(args.dims, 1.0 / args.dims)
        else:
            z, z_masked, shap = fileio.load_scores(args.scores)
            theta = build_scores(z, z_masked, shap, args.gamma).theta
        budgets = allocate_budgets(floor_scores(theta), args.eps_f, args.bins)
        report = audit_mod.audit_feature_ldp(args.bins, budgets)
        for line in report.lines():
            print(line)
        return EXIT_OK if report.passed else EXIT_VALIDATION
    if args.check == "utility":
        original = fileio.load_graph(args.original)
        released = fileio.load_graph(args.released)
        for line in audit_mod.utility_metrics(original, released).lines():
            print(line)
        return EXIT_OK
    if args.check == "attack":
        original = fileio.load_graph(args.original)
        released = fileio.load_graph(args.released)
        features = fileio.load_features(args.features) if args.features else None
        pairs, labels = audit_mod.candidate_pairs(
            original,
            RngStream(args.seed).child(audit_mod.STREAM_AUDIT),
            negatives_per_positive=args.negatives_per_positive,
        )
        report = audit_mod.edge_inference_attack(
            released, pairs, labels, features=features, cn_weight=args.cn_weight
        )
        print(f"attack_candidates\t{len(pairs)}")
        print(f"attack_auc\t{report.auc:.6f}")
        return EXIT_OK
    raise ValueError(f"unknown audit check {args.check!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sanitize":
            return _cmd_sanitize(args, features_on=True, edges_on=True)
        if args.command == "sanitize-features":
            return _cmd_sanitize(args, features_on=True, edges_on=False)
        if args.command == "sanitize-edges":
            return _cmd_sanitize(args, features_on=False, edges_on=True)
        if args.command == "scores":
            return _cmd_scores(args)
        if args.command == "audit":
            return _cmd_audit(args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
