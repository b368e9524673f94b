"""On-disk formats: edge lists, feature CSVs, score sections, metadata JSON.

The graph format is deliberately rigid so that saving is canonical and a
load/save round trip is byte-identical: one ``#nodes <n>`` header, then one
``u<TAB>v<TAB>pub|pri`` line per edge with ``u < v``, sorted by ``(u, v)``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .graph import FeatureMatrix, PrivacyGraph


def save_graph(g: PrivacyGraph, path: str | Path) -> None:
    """Write the canonical edge-list form (sorted, u < v, labelled)."""
    labelled = [(u, v, "pub") for u, v in g.pub_edges]
    labelled += [(u, v, "pri") for u, v in g.pri_edges]
    lines = [f"#nodes {g.n}"]
    lines += [f"{u}\t{v}\t{label}" for u, v, label in sorted(labelled)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path: str | Path) -> PrivacyGraph:
    """Parse an edge-list file, rejecting malformed or duplicate lines by number."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#nodes "):
        raise ValueError(f"{path}: line 1: missing '#nodes <n>' header")
    try:
        n = int(lines[0][len("#nodes ") :])
    except ValueError:
        raise ValueError(f"{path}: line 1: node count is not an integer") from None
    if n < 0:
        raise ValueError(f"{path}: line 1: negative node count {n}")
    pub: set[tuple[int, int]] = set()
    pri: set[tuple[int, int]] = set()
    seen: dict[tuple[int, int], int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 'u<TAB>v<TAB>pub|pri'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: endpoints must be integers") from None
        label = parts[2]
        if label not in ("pub", "pri"):
            raise ValueError(f"{path}: line {lineno}: unknown edge class {label!r}")
        if not u < v:
            raise ValueError(f"{path}: line {lineno}: endpoints must satisfy u < v")
        if v >= n or u < 0:
            raise ValueError(f"{path}: line {lineno}: endpoint outside 0..{n - 1}")
        if (u, v) in seen:
            raise ValueError(
                f"{path}: line {lineno}: duplicate edge ({u},{v}), first seen on line {seen[u, v]}"
            )
        seen[(u, v)] = lineno
        (pub if label == "pub" else pri).add((u, v))
    return PrivacyGraph(n, pub_edges=frozenset(pub), pri_edges=frozenset(pri))


def save_features(features: FeatureMatrix, path: str | Path) -> None:
    """Comma-separated rows, one node per row; float repr round-trips exactly."""
    rows = [",".join(repr(float(x)) for x in row) for row in features.values]
    Path(path).write_text("\n".join(rows) + "\n")


def load_features(path: str | Path, expected_rows: int | None = None) -> FeatureMatrix:
    """Parse a feature CSV; every row must have the same width."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty feature file")
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric feature value") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(
                f"{path}: line {lineno}: expected {width} values, got {len(row)}"
            )
        rows.append(row)
    if expected_rows is not None and len(rows) != expected_rows:
        raise ValueError(f"{path}: expected {expected_rows} rows, got {len(rows)}")
    return FeatureMatrix(np.array(rows, dtype=np.float64))


_SCORE_SECTIONS = ("z", "z_masked", "shap")


def save_scores(z: np.ndarray, z_masked: np.ndarray, shap: np.ndarray, path: str | Path) -> None:
    chunks = []
    for name, row in zip(_SCORE_SECTIONS, (z, z_masked, shap)):
        chunks.append(f"[{name}]")
        chunks.append(",".join(repr(float(x)) for x in np.asarray(row)))
    Path(path).write_text("\n".join(chunks) + "\n")


def load_scores(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse the three named score sections: [z], [z_masked], [shap].

    Each section holds one comma-separated row; all three must be present,
    unique and of equal length.  Blank lines and '#' comments are ignored.
    """
    found: dict[str, np.ndarray] = {}
    current: str | None = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in _SCORE_SECTIONS:
                raise ValueError(f"{path}: line {lineno}: unknown section [{current}]")
            if current in found:
                raise ValueError(f"{path}: line {lineno}: duplicate section [{current}]")
            found[current] = np.empty(0)
            continue
        if current is None:
            raise ValueError(f"{path}: line {lineno}: data before any section header")
        if found[current].size:
            raise ValueError(f"{path}: line {lineno}: section [{current}] has multiple rows")
        try:
            found[current] = np.array([float(tok) for tok in line.split(",")])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric score value") from None
    missing = [s for s in _SCORE_SECTIONS if s not in found or not found[s].size]
    if missing:
        raise ValueError(f"{path}: missing or empty sections: {', '.join(missing)}")
    sizes = {found[s].size for s in _SCORE_SECTIONS}
    if len(sizes) != 1:
        raise ValueError(f"{path}: score sections have different lengths")
    return found["z"], found["z_masked"], found["shap"]


def save_metadata(meta: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_metadata(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def input_digest(*paths: str | Path) -> str:
    """Stable hex digest over the raw bytes of the given input files."""
    h = hashlib.sha256()
    for p in paths:
        h.update(hashlib.sha256(Path(p).read_bytes()).digest())
    return h.hexdigest()
