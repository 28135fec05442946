"""Gradient-boosted regression trees, built from scratch.

Squared-error boosting with CART base learners: start from the constant that
minimizes the loss (the target mean), then per iteration fit a binary
regression tree to the residuals, set each leaf to the loss-minimizing step
for its members (the mean residual, the closed-form line search for squared
error), shrink by the learning rate, and add the tree to the ensemble. The
training curve records the training MSE after every iteration and is
non-increasing by construction.

Fitting is deterministic: split thresholds are midpoints between consecutive
distinct sorted feature values, candidate ties break toward the lower
(feature index, threshold), and there is no row or feature subsampling. Two
fits of the same data with the same hyperparameters serialize byte-identically.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import AquagaugeError, LengthMismatch, NonFinite

MODEL_MAGIC = "AQUAGAUGE-GBM"
MODEL_VERSION = 1
SQUARED_ERROR = "squared_error"

# Candidates whose scanned score lands this close (relative to the node SSE)
# to the scanned optimum are re-scored exactly before the final choice.
_NEAR_TIE_RELATIVE_MARGIN = 1e-8


class GbmError(AquagaugeError):
    pass


class EmptyTargets(GbmError):
    def __init__(self):
        super().__init__("targets are empty")


class EmptyLeaf(GbmError):
    def __init__(self):
        super().__init__("leaf has no members")


class ArityMismatch(GbmError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"row has {got} features, model expects {expected}")
        self.expected = expected
        self.got = got


class ModelFormatError(GbmError):
    pass


class BadMagic(ModelFormatError):
    def __init__(self):
        super().__init__(f"model text does not start with {MODEL_MAGIC!r}")


class UnsupportedVersion(ModelFormatError):
    def __init__(self, version: str):
        super().__init__(f"unsupported model format version: {version!r}")
        self.version = version


class CorruptHeader(ModelFormatError):
    def __init__(self, detail: str):
        super().__init__(f"corrupt model header: {detail}")


class CorruptNode(ModelFormatError):
    def __init__(self, index: int, detail: str):
        super().__init__(f"corrupt node {index}: {detail}")
        self.index = index


@dataclass(frozen=True)
class Hyperparams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 8
    min_samples_split: int = 200
    min_samples_leaf: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class FeatureMatrix:
    """Row-major feature matrix with named columns; all values finite."""

    values: np.ndarray
    feature_names: list[str]

    def __post_init__(self):
        self.values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if not np.all(np.isfinite(self.values)):
            raise NonFinite(None, context="feature matrix")
        self.feature_names = list(self.feature_names)
        if len(self.feature_names) != self.values.shape[1]:
            raise LengthMismatch(self.values.shape[1], len(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Leaf:
    value: float
    train_count: int


@dataclass(frozen=True)
class Internal:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass
class RegressionTree:
    """Binary CART tree stored as a node array; node 0 is the root."""

    nodes: list[Internal | Leaf]


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    sse: float


@dataclass
class GbmModel:
    f0: float
    trees: list[RegressionTree]
    hyperparams: Hyperparams
    loss: str = SQUARED_ERROR
    training_curve: list[float] = field(default_factory=list)
    feature_names: list[str] = field(default_factory=list)


def init_constant(targets) -> float:
    """The squared-error-optimal constant model: the target mean."""
    y = np.asarray(targets, dtype=np.float64)
    if y.size == 0:
        raise EmptyTargets()
    return float(np.mean(y))


def negative_gradient(targets, predictions) -> np.ndarray:
    """Residuals y - f, the negative gradient of 0.5*(y - f)^2."""
    y = np.asarray(targets, dtype=np.float64)
    f = np.asarray(predictions, dtype=np.float64)
    if y.shape != f.shape:
        raise LengthMismatch(y.size, f.size)
    return y - f


def line_search_leaf(residuals_in_leaf) -> float:
    """Optimal per-leaf step for squared error: the mean residual."""
    r = np.asarray(residuals_in_leaf, dtype=np.float64)
    if r.size == 0:
        raise EmptyLeaf()
    return float(np.mean(r))


def _sse(values: np.ndarray) -> float:
    """Sum of squared deviations from the mean, two-pass."""
    if values.size < 2:
        return 0.0
    return float(np.sum((values - values.mean()) ** 2))


def _matrix_values(rows) -> np.ndarray:
    if isinstance(rows, FeatureMatrix):
        return rows.values
    return np.asarray(rows, dtype=np.float64)


def best_split(rows, targets, min_samples_leaf: int = 1) -> SplitCandidate | None:
    """Exhaustive best two-leaf split by total SSE, or None when infeasible.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values of each feature; both sides must keep at least min_samples_leaf
    rows and the split must strictly reduce the node SSE. Candidates are
    scanned with prefix sums, then everything within a hair of the scanned
    optimum is re-scored with the exact two-pass SSE so that the returned
    (feature, threshold, sse) matches direct enumeration, ties resolved
    toward the lower (feature, threshold).
    """
    x = _matrix_values(rows)
    y = np.asarray(targets, dtype=np.float64)
    n, n_features = x.shape
    msl = min_samples_leaf
    if n != y.size:
        raise LengthMismatch(n, y.size)
    if n < 2 or n < 2 * msl:
        return None

    parent_sse = _sse(y)
    cand_feature: list[np.ndarray] = []
    cand_threshold: list[np.ndarray] = []
    cand_score: list[np.ndarray] = []
    total = None
    for f in range(n_features):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y[order]
        ks = np.arange(msl, n - msl + 1)
        ks = ks[xs[ks - 1] < xs[ks]]
        if ks.size == 0:
            continue
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        left_sum = csum[ks - 1]
        left_sq = csq[ks - 1]
        right_sum = csum[-1] - left_sum
        right_sq = csq[-1] - left_sq
        score = (left_sq - left_sum**2 / ks) + (right_sq - right_sum**2 / (n - ks))
        cand_feature.append(np.full(ks.size, f))
        cand_threshold.append(0.5 * (xs[ks - 1] + xs[ks]))
        cand_score.append(score)
    if not cand_feature:
        return None

    features = np.concatenate(cand_feature)
    thresholds = np.concatenate(cand_threshold)
    scores = np.concatenate(cand_score)
    margin = _NEAR_TIE_RELATIVE_MARGIN * max(parent_sse, 1.0)
    shortlist = np.flatnonzero(scores <= scores.min() + margin)

    best: SplitCandidate | None = None
    order = sorted(shortlist, key=lambda i: (features[i], thresholds[i]))
    for i in order:
        f = int(features[i])
        thr = float(thresholds[i])
        mask = x[:, f] <= thr
        n_left = int(mask.sum())
        if n_left < msl or n - n_left < msl:
            continue
        exact = _sse(y[mask]) + _sse(y[~mask])
        if best is None or exact < best.sse:
            best = SplitCandidate(feature=f, threshold=thr, sse=exact)
    if best is None or not parent_sse - best.sse > 0.0:
        return None
    return best


def fit_tree(rows, residuals, hp: Hyperparams) -> RegressionTree:
    """Greedy CART on residuals. A node splits only while its row count is at
    least min_samples_split and its depth is below max_depth; leaves carry the
    mean residual and their training row count."""
    x = _matrix_values(rows)
    r = np.asarray(residuals, dtype=np.float64)
    if r.size == 0:
        raise EmptyTargets()
    if x.shape[0] != r.size:
        raise LengthMismatch(x.shape[0], r.size)

    nodes: list[Internal | Leaf] = []

    def build(idx: np.ndarray, depth: int) -> int:
        sub = r[idx]
        if depth < hp.max_depth and idx.size >= hp.min_samples_split:
            cand = best_split(x[idx], sub, hp.min_samples_leaf)
            if cand is not None:
                node_id = len(nodes)
                nodes.append(None)  # type: ignore[arg-type]  # patched below
                mask = x[idx, cand.feature] <= cand.threshold
                left = build(idx[mask], depth + 1)
                right = build(idx[~mask], depth + 1)
                nodes[node_id] = Internal(cand.feature, cand.threshold, left, right)
                return node_id
        node_id = len(nodes)
        nodes.append(Leaf(value=line_search_leaf(sub), train_count=int(idx.size)))
        return node_id

    build(np.arange(r.size), 0)
    return RegressionTree(nodes=nodes)


def tree_depth(tree: RegressionTree) -> int:
    def walk(node_id: int) -> int:
        node = tree.nodes[node_id]
        if isinstance(node, Leaf):
            return 0
        return 1 + max(walk(node.left), walk(node.right))

    return walk(0)


def node_train_count(tree: RegressionTree, node_id: int = 0) -> int:
    """Training rows under a node, summed from its leaves."""
    node = tree.nodes[node_id]
    if isinstance(node, Leaf):
        return node.train_count
    return node_train_count(tree, node.left) + node_train_count(tree, node.right)


def tree_predict(tree: RegressionTree, row) -> float:
    values = np.asarray(row, dtype=np.float64).ravel()
    node = tree.nodes[0]
    while isinstance(node, Internal):
        node = tree.nodes[node.left if values[node.feature] <= node.threshold else node.right]
    return node.value


def tree_apply(tree: RegressionTree, x: np.ndarray) -> np.ndarray:
    """Vectorized leaf-value lookup for every row of x."""
    out = np.empty(x.shape[0], dtype=np.float64)
    stack = [(0, np.arange(x.shape[0]))]
    while stack:
        node_id, idx = stack.pop()
        node = tree.nodes[node_id]
        if isinstance(node, Leaf):
            out[idx] = node.value
        else:
            mask = x[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


def _scale_leaves(tree: RegressionTree, factor: float) -> RegressionTree:
    return RegressionTree(
        nodes=[
            Leaf(value=node.value * factor, train_count=node.train_count)
            if isinstance(node, Leaf)
            else node
            for node in tree.nodes
        ]
    )


def gbm_fit(x, y, hp: Hyperparams = Hyperparams()) -> GbmModel:
    """Run the boosting loop and return the fitted ensemble.

    Leaf values are stored with the learning rate already applied, so
    prediction is plainly f0 plus the sum of tree outputs. training_curve[0]
    is the loss of the constant model; entry t is the training MSE after
    adding tree t.
    """
    if isinstance(x, FeatureMatrix):
        fm = x
    else:
        arr = np.asarray(x, dtype=np.float64)
        fm = FeatureMatrix(arr, [f"f{j}" for j in range(arr.shape[1])])
    targets = np.asarray(y, dtype=np.float64)
    if targets.size == 0:
        raise EmptyTargets()
    if fm.n_rows != targets.size:
        raise LengthMismatch(fm.n_rows, targets.size)
    if not np.all(np.isfinite(targets)):
        raise NonFinite(None, context="targets")

    f0 = init_constant(targets)
    pred = np.full(targets.size, f0, dtype=np.float64)
    curve = [float(np.mean((targets - pred) ** 2))]
    trees: list[RegressionTree] = []
    for _ in range(hp.n_trees):
        resid = negative_gradient(targets, pred)
        tree = _scale_leaves(fit_tree(fm.values, resid, hp), hp.learning_rate)
        pred = pred + tree_apply(tree, fm.values)
        trees.append(tree)
        curve.append(float(np.mean((targets - pred) ** 2)))
    return GbmModel(
        f0=f0,
        trees=trees,
        hyperparams=hp,
        loss=SQUARED_ERROR,
        training_curve=curve,
        feature_names=list(fm.feature_names),
    )


def gbm_predict(model: GbmModel, row) -> float:
    """Ensemble prediction for one feature row: f0 plus every tree's output."""
    values = np.asarray(row, dtype=np.float64).ravel()
    if values.size != len(model.feature_names):
        raise ArityMismatch(len(model.feature_names), values.size)
    if not np.all(np.isfinite(values)):
        raise NonFinite(None, context="feature row")
    total = model.f0
    for tree in model.trees:
        total += tree_predict(tree, values)
    return float(total)


def predict_matrix(model: GbmModel, x: np.ndarray) -> np.ndarray:
    """Ensemble predictions for a whole matrix, same math as gbm_predict."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(model.feature_names):
        raise ArityMismatch(len(model.feature_names), x.shape[1] if x.ndim == 2 else -1)
    if not np.all(np.isfinite(x)):
        raise NonFinite(None, context="feature matrix")
    out = np.full(x.shape[0], model.f0, dtype=np.float64)
    for tree in model.trees:
        out += tree_apply(tree, x)
    return out


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def serialize_model(model: GbmModel) -> str:
    """Write a model to the line-oriented text format (exact round trip)."""
    for name in model.feature_names:
        if not name or "," in name or "\n" in name:
            raise ValueError(f"feature name not serializable: {name!r}")
    hp = model.hyperparams
    lines = [
        MODEL_MAGIC,
        f"version {MODEL_VERSION}",
        f"loss={model.loss}",
        f"n_trees={hp.n_trees}",
        f"learning_rate={_fmt(hp.learning_rate)}",
        f"max_depth={hp.max_depth}",
        f"min_samples_split={hp.min_samples_split}",
        f"min_samples_leaf={hp.min_samples_leaf}",
        f"seed={hp.seed}",
        f"f0={_fmt(model.f0)}",
        "feature_names=" + ",".join(model.feature_names),
        "training_curve=" + ",".join(_fmt(v) for v in model.training_curve),
    ]
    for t, tree in enumerate(model.trees):
        lines.append(f"tree {t} nodes {len(tree.nodes)}")
        for node in tree.nodes:
            if isinstance(node, Internal):
                lines.append(f"I {node.feature} {_fmt(node.threshold)} {node.left} {node.right}")
            else:
                lines.append(f"L {_fmt(node.value)} {node.train_count}")
    return "\n".join(lines) + "\n"


_TREE_HEADER_RE = re.compile(r"^tree (\d+) nodes (\d+)$")


def _validate_tree(nodes: list[Internal | Leaf], n_features: int) -> None:
    k = len(nodes)
    parents = [0] * k
    for i, node in enumerate(nodes):
        if isinstance(node, Internal):
            if not 0 <= node.feature < n_features:
                raise CorruptNode(i, f"feature index {node.feature} out of range")
            for child in (node.left, node.right):
                if not 0 <= child < k:
                    raise CorruptNode(i, f"child index {child} out of range")
                parents[child] += 1
    if parents[0] != 0:
        raise CorruptNode(0, "root has a parent")
    for i in range(1, k):
        if parents[i] != 1:
            raise CorruptNode(i, f"node has {parents[i]} parents, expected 1")
    # parent counts alone rule out cycles: every non-root node hangs off
    # exactly one edge and there are k-1 edges in total.


def deserialize_model(text: str) -> GbmModel:
    """Parse the text format back into a model; rejects anything malformed."""
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise BadMagic()
    if len(lines) < 2 or not lines[1].startswith("version "):
        raise UnsupportedVersion(lines[1] if len(lines) > 1 else "<missing>")
    version = lines[1][len("version ") :]
    if version != str(MODEL_VERSION):
        raise UnsupportedVersion(version)

    header: dict[str, str] = {}
    pos = 2
    while pos < len(lines) and not lines[pos].startswith("tree "):
        line = lines[pos]
        if "=" not in line:
            raise CorruptHeader(f"expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        header[key] = value
        pos += 1

    required = (
        "loss",
        "n_trees",
        "learning_rate",
        "max_depth",
        "min_samples_split",
        "min_samples_leaf",
        "seed",
        "f0",
        "feature_names",
    )
    for key in required:
        if key not in header:
            raise CorruptHeader(f"missing key {key!r}")
    if header["loss"] != SQUARED_ERROR:
        raise CorruptHeader(f"unknown loss {header['loss']!r}")
    try:
        hp = Hyperparams(
            n_trees=int(header["n_trees"]),
            learning_rate=float(header["learning_rate"]),
            max_depth=int(header["max_depth"]),
            min_samples_split=int(header["min_samples_split"]),
            min_samples_leaf=int(header["min_samples_leaf"]),
            seed=int(header["seed"]),
        )
        f0 = float(header["f0"])
    except ValueError as exc:
        raise CorruptHeader(str(exc)) from exc
    feature_names = [s for s in header["feature_names"].split(",") if s]
    curve_text = header.get("training_curve", "")
    try:
        curve = [float(tok) for tok in curve_text.split(",") if tok]
    except ValueError as exc:
        raise CorruptHeader(f"bad training_curve: {exc}") from exc

    trees: list[RegressionTree] = []
    while pos < len(lines):
        m = _TREE_HEADER_RE.match(lines[pos])
        if not m or int(m.group(1)) != len(trees):
            raise CorruptNode(0, f"bad tree block header: {lines[pos]!r}")
        k = int(m.group(2))
        if k < 1:
            raise CorruptNode(0, "tree has no nodes")
        pos += 1
        nodes: list[Internal | Leaf] = []
        for j in range(k):
            if pos >= len(lines):
                raise CorruptNode(j, "unexpected end of input inside tree block")
            parts = lines[pos].split()
            pos += 1
            try:
                if parts and parts[0] == "I" and len(parts) == 5:
                    nodes.append(
                        Internal(int(parts[1]), float(parts[2]), int(parts[3]), int(parts[4]))
                    )
                elif parts and parts[0] == "L" and len(parts) == 3:
                    nodes.append(Leaf(float(parts[1]), int(parts[2])))
                else:
                    raise CorruptNode(j, f"unrecognized node line: {' '.join(parts)!r}")
            except ValueError as exc:
                raise CorruptNode(j, f"bad numeric field: {exc}") from exc
        _validate_tree(nodes, len(feature_names))
        trees.append(RegressionTree(nodes=nodes))

    if len(trees) > hp.n_trees:
        raise CorruptHeader(f"file holds {len(trees)} trees but n_trees={hp.n_trees}")
    # A curve written at fit time pins the tree count, so a file truncated at
    # a tree-block boundary cannot pass for a smaller model.
    if curve and len(curve) != len(trees) + 1:
        raise CorruptHeader(
            f"training_curve has {len(curve)} entries but file holds {len(trees)} trees"
        )
    return GbmModel(
        f0=f0,
        trees=trees,
        hyperparams=hp,
        loss=header["loss"],
        training_curve=curve,
        feature_names=feature_names,
    )
