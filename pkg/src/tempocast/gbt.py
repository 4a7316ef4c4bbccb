"""Gradient boosted regression trees with squared-error loss.

The model is base_score + shrinkage * sum of shallow regression trees,
where tree m is fit to the residuals of the ensemble so far on a fresh
random subsample.  The split search is exact greedy over all distinct
feature values (no binning), with deterministic tie-breaking, so a fixed
seed reproduces the model bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterator, Union

import numpy as np

FORMAT_TAG = "tempocast-gbt-v1"


@dataclass(frozen=True)
class GbtParams:
    weak_count: int = 1000
    shrinkage: float = 0.1
    subsample_fraction: float = 0.8
    max_depth: int = 5
    min_samples_leaf: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.weak_count < 1:
            raise ValueError(f"weak_count must be >= 1, got {self.weak_count}")
        if not 0 < self.shrinkage <= 1:
            raise ValueError(f"shrinkage must be in (0, 1], got {self.shrinkage}")
        if not 0 < self.subsample_fraction <= 1:
            raise ValueError(
                f"subsample_fraction must be in (0, 1], got {self.subsample_fraction}"
            )
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValueError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )


@dataclass(frozen=True)
class Leaf:
    value: float


@dataclass(frozen=True)
class SplitNode:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[SplitNode, Leaf]


def best_split(
    values: np.ndarray, residuals: np.ndarray, min_samples_leaf: int
) -> tuple[float, float] | None:
    """Best threshold for one feature column, or None if no split is feasible.

    Returns (threshold, gain) where gain is the squared-error reduction and
    the threshold is the midpoint between the adjacent distinct values.
    Rows route left when value < threshold.  Among equal gains the lowest
    threshold wins (candidates are scanned in ascending value order).
    """
    n = values.shape[0]
    if n < 2 * min_samples_leaf:
        return None
    order = np.argsort(values)
    v = values[order]
    prefix = np.cumsum(residuals[order])
    total = float(prefix[-1])
    left_sizes = np.arange(min_samples_leaf, n - min_samples_leaf + 1)
    at_boundary = v[left_sizes - 1] < v[left_sizes]
    if not at_boundary.any():
        return None
    sizes = left_sizes[at_boundary]
    left_sum = prefix[sizes - 1]
    mean_gap = left_sum / sizes - (total - left_sum) / (n - sizes)
    # reduction = n_L * n_R / n * (mean_L - mean_R)^2, never negative
    gain = mean_gap * mean_gap * (sizes * (n - sizes)) / n
    best = int(np.argmax(gain))
    i = int(sizes[best])
    lo = float(v[i - 1])
    hi = float(v[i])
    threshold = lo + (hi - lo) / 2.0
    if not lo < threshold:  # adjacent floats: fall back to the upper value
        threshold = hi
    return threshold, float(gain[best])


def _grow(
    X: np.ndarray, residuals: np.ndarray, idx: np.ndarray, depth: int, params: GbtParams
) -> TreeNode:
    node_residuals = residuals[idx]
    if depth >= params.max_depth or idx.size < 2 * params.min_samples_leaf:
        return Leaf(float(node_residuals.mean()))
    Xnode = X[idx]
    best_gain = 0.0
    best_feature = -1
    best_threshold = 0.0
    for j in range(X.shape[1]):
        found = best_split(Xnode[:, j], node_residuals, params.min_samples_leaf)
        if found is None:
            continue
        threshold, gain = found
        if gain > best_gain:  # ties keep the lowest feature index
            best_gain = gain
            best_feature = j
            best_threshold = threshold
    if best_feature < 0:  # includes zero-gain candidates: splitting is a no-op
        return Leaf(float(node_residuals.mean()))
    mask = Xnode[:, best_feature] < best_threshold
    return SplitNode(
        best_feature,
        best_threshold,
        _grow(X, residuals, idx[mask], depth + 1, params),
        _grow(X, residuals, idx[~mask], depth + 1, params),
    )


def _apply_tree(node: TreeNode, X: np.ndarray, out: np.ndarray, idx: np.ndarray) -> None:
    if isinstance(node, Leaf):
        out[idx] = node.value
        return
    mask = X[idx, node.feature_index] < node.threshold
    _apply_tree(node.left, X, out, idx[mask])
    _apply_tree(node.right, X, out, idx[~mask])


def _tree_predict(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.float64)
    _apply_tree(node, X, out, np.arange(X.shape[0]))
    return out


@dataclass(frozen=True)
class GbtModel:
    """Fitted ensemble; immutable, safe for concurrent prediction.

    train_risk[0] is the mean squared error of the base score alone and
    train_risk[m] the full-training-set risk after iteration m.
    """

    base_score: float
    trees: tuple[TreeNode, ...]
    shrinkage: float
    n_features: int
    params: GbtParams
    train_risk: tuple[float, ...] = ()

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected shape (*, {self.n_features}), got {X.shape}"
            )
        out = np.full(X.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            out += self.shrinkage * _tree_predict(tree, X)
        return out

    def predict_one(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise ValueError(f"expected shape ({self.n_features},), got {x.shape}")
        score = self.base_score
        for tree in self.trees:
            node = tree
            while isinstance(node, SplitNode):
                node = node.left if x[node.feature_index] < node.threshold else node.right
            score += self.shrinkage * node.value
        return score


def fit(X: np.ndarray, y: np.ndarray, params: GbtParams) -> GbtModel:
    """Train an ensemble on rows X (n, d) with targets y (n,).

    Each iteration draws ceil(subsample_fraction * n) rows without
    replacement from the seeded generator, fits one tree to the current
    full-set residuals restricted to those rows, and records the empirical
    risk over the full set.  Iterations whose root cannot split (constant
    features, or residuals already flat) contribute no tree.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-d, got shape {X.shape}")
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 examples, got {n}")
    if y.shape != (n,):
        raise ValueError(f"y must have shape ({n},), got {y.shape}")

    base_score = float(y.mean())
    pred = np.full(n, base_score, dtype=np.float64)
    rng = np.random.default_rng(params.seed)
    subsample_size = min(n, math.ceil(params.subsample_fraction * n - 1e-9))
    all_rows = np.arange(n)

    trees: list[TreeNode] = []
    risks = [float(np.mean((pred - y) ** 2))]
    for _ in range(params.weak_count):
        if subsample_size < n:
            idx = np.sort(rng.permutation(n)[:subsample_size])
        else:
            idx = all_rows
        residuals = y - pred
        root = _grow(X, residuals, idx, 0, params)
        if isinstance(root, SplitNode):
            trees.append(root)
            pred = pred + params.shrinkage * _tree_predict(root, X)
        risks.append(float(np.mean((pred - y) ** 2)))
    return GbtModel(
        base_score=base_score,
        trees=tuple(trees),
        shrinkage=params.shrinkage,
        n_features=X.shape[1],
        params=params,
        train_risk=tuple(risks),
    )


# ---------------------------------------------------------------------------
# Model file format (see docs/model_format.md)
# ---------------------------------------------------------------------------


def _count_nodes(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + _count_nodes(node.left) + _count_nodes(node.right)


def _write_node(node: TreeNode, dest: IO[str]) -> None:
    if isinstance(node, Leaf):
        dest.write(f"leaf {node.value!r}\n")
        return
    dest.write(f"split {node.feature_index} {node.threshold!r}\n")
    _write_node(node.left, dest)
    _write_node(node.right, dest)


def save_model(model: GbtModel, dest: IO[str]) -> None:
    """Write the model in the versioned flat text format."""
    p = model.params
    dest.write(FORMAT_TAG + "\n")
    dest.write(f"n_features={model.n_features}\n")
    dest.write(f"base_score={model.base_score!r}\n")
    dest.write(f"shrinkage={model.shrinkage!r}\n")
    dest.write(
        f"params weak_count={p.weak_count} shrinkage={p.shrinkage!r}"
        f" subsample_fraction={p.subsample_fraction!r} max_depth={p.max_depth}"
        f" min_samples_leaf={p.min_samples_leaf} seed={p.seed}\n"
    )
    dest.write(f"trees={len(model.trees)}\n")
    for i, tree in enumerate(model.trees):
        dest.write(f"tree {i} nodes={_count_nodes(tree)}\n")
        _write_node(tree, dest)
    dest.write("end\n")


def _read_node(lines: Iterator[str]) -> TreeNode:
    parts = next(lines).split()
    if parts[0] == "leaf":
        return Leaf(float(parts[1]))
    if parts[0] == "split":
        feature_index = int(parts[1])
        threshold = float(parts[2])
        left = _read_node(lines)
        right = _read_node(lines)
        return SplitNode(feature_index, threshold, left, right)
    raise ValueError(f"unexpected node line: {' '.join(parts)!r}")


def _header_value(line: str, key: str) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise ValueError(f"expected '{key}=...', got {line!r}")
    return line[len(prefix):]


def load_model(source: IO[str]) -> GbtModel:
    """Read a model written by save_model; floats round-trip exactly."""
    lines = (line.rstrip("\n") for line in source)
    tag = next(lines)
    if tag != FORMAT_TAG:
        raise ValueError(f"unsupported model format tag {tag!r}")
    n_features = int(_header_value(next(lines), "n_features"))
    base_score = float(_header_value(next(lines), "base_score"))
    shrinkage = float(_header_value(next(lines), "shrinkage"))
    params_line = next(lines)
    if not params_line.startswith("params "):
        raise ValueError(f"expected params line, got {params_line!r}")
    fields = dict(item.split("=", 1) for item in params_line[len("params "):].split())
    params = GbtParams(
        weak_count=int(fields["weak_count"]),
        shrinkage=float(fields["shrinkage"]),
        subsample_fraction=float(fields["subsample_fraction"]),
        max_depth=int(fields["max_depth"]),
        min_samples_leaf=int(fields["min_samples_leaf"]),
        seed=int(fields["seed"]),
    )
    tree_count = int(_header_value(next(lines), "trees"))
    trees = []
    for i in range(tree_count):
        header = next(lines).split()
        if header[:2] != ["tree", str(i)]:
            raise ValueError(f"expected 'tree {i} ...', got {' '.join(header)!r}")
        declared = int(header[2].split("=", 1)[1])
        root = _read_node(lines)
        actual = _count_nodes(root)
        if actual != declared:
            raise ValueError(f"tree {i}: declared {declared} nodes, read {actual}")
        trees.append(root)
    if next(lines) != "end":
        raise ValueError("missing 'end' marker")
    return GbtModel(
        base_score=base_score,
        trees=tuple(trees),
        shrinkage=shrinkage,
        n_features=n_features,
        params=params,
    )
