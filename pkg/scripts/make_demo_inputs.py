#!/usr/bin/env python3
"""Generate a small attributed demo graph plus score files.

Writes ``demo.graph.tsv``, ``demo.features.csv`` and ``demo.scores.txt``
into --out-dir, sized so a full sanitize run finishes in seconds:

    python3 scripts/make_demo_inputs.py --out-dir demo
    graphsan sanitize --graph demo/demo.graph.tsv \\
        --features demo/demo.features.csv --scores demo/demo.scores.txt \\
        --out demo/released
"""

import argparse
from pathlib import Path

import numpy as np

from graphsan.audit import intra_rate_for_fraction, planted_partition_graph
from graphsan.fileio import save_features, save_graph, save_scores
from graphsan.graph import FeatureMatrix, RngStream


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("demo"))
    ap.add_argument("--nodes", type=int, default=60)
    ap.add_argument("--groups", type=int, default=2)
    ap.add_argument("--group-size", type=int, default=12)
    ap.add_argument("--p-inter", type=float, default=0.08)
    ap.add_argument("--private-fraction", type=float, default=0.2,
                    help="expected fraction of edges that are private")
    ap.add_argument("--features", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p_intra = intra_rate_for_fraction(
        args.nodes, args.groups, args.group_size, args.p_inter, args.private_fraction
    )
    g = planted_partition_graph(
        args.nodes, args.groups, args.group_size, p_intra, args.p_inter,
        RngStream(args.seed).child(0),
    )
    gen = np.random.default_rng(args.seed)
    feats = FeatureMatrix(gen.random((args.nodes, args.features)))

    # Plausible model scores: a clean prediction, a degraded one with all
    # features masked, and signed per-feature attributions.
    z = gen.uniform(0.4, 1.0, args.features)
    z_masked = np.clip(z - gen.uniform(0.05, 0.5, args.features), 0.0, 1.0)
    shap = gen.normal(0.0, 0.4, args.features)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_graph(g, args.out_dir / "demo.graph.tsv")
    save_features(feats, args.out_dir / "demo.features.csv")
    save_scores(z, z_masked, shap, args.out_dir / "demo.scores.txt")
    print(
        f"wrote {args.out_dir}/demo.* "
        f"({g.n} nodes, {len(g.pub_edges)} public / {len(g.pri_edges)} private edges)"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
