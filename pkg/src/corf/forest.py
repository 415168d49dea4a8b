"""Bagged classification forest with weighted candidate-variable sampling.

Trees are unpruned CART-style classifiers grown on bootstrap samples. The
one departure from a textbook random forest is that the ``mtry`` candidate
variables at each node are drawn from a caller-supplied probability vector
instead of uniformly, which is the hook the co-data pipeline uses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .datasets import PrimaryDataset
from .errors import InputError

DEFAULT_NTREE = 5000


@dataclass
class SamplingWeights:
    """Normalized per-variable candidate-sampling probabilities.

    ``uniform_fallback`` records that thresholding zeroed every weight and
    the constructor of the vector substituted the uniform distribution.
    """

    w_tilde: np.ndarray
    uniform_fallback: bool = False

    def __post_init__(self):
        self.w_tilde = np.asarray(self.w_tilde, dtype=np.float64)
        if self.w_tilde.ndim != 1:
            raise ValueError("weights must be a vector")
        if (self.w_tilde < 0).any():
            raise ValueError("weights must be nonnegative")
        s = self.w_tilde.sum()
        if not math.isfinite(s) or abs(s - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {s!r}")


@dataclass
class ForestParams:
    """Forest hyperparameters.

    mtry defaults to ceil(sqrt(P)) at fit time when left as None.
    min_node_size follows the plain-forest default of 1; the co-data
    pipeline passes 2.
    """

    ntree: int = DEFAULT_NTREE
    mtry: int | None = None
    min_node_size: int = 1
    seed: int = 0
    sampling_weights: SamplingWeights | None = None

    def __post_init__(self):
        if self.ntree < 1:
            raise ValueError("ntree must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")


@dataclass
class Tree:
    """A read-only view of one fitted tree inside a Forest.

    Nodes live in a flat arena: ``feature[k] >= 0`` marks an internal node
    with its threshold and child slots, ``feature[k] == -1`` a leaf. Leaf
    class counts are bootstrap multiplicities, so they sum to the node's
    bootstrap size. ``inbag_counts[i]`` is how often training sample i was
    drawn for this tree; 0 means out-of-bag.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    class_counts: np.ndarray
    inbag_counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


@dataclass
class Forest:
    """A fitted ensemble plus per-variable split-usage counts."""

    params: ForestParams
    n_variables: int
    _feat: np.ndarray = field(repr=False)
    _thr: np.ndarray = field(repr=False)
    _left: np.ndarray = field(repr=False)
    _right: np.ndarray = field(repr=False)
    _c0: np.ndarray = field(repr=False)
    _c1: np.ndarray = field(repr=False)
    _inbag: np.ndarray = field(repr=False)
    _n_nodes: np.ndarray = field(repr=False)
    split_counts: np.ndarray = field(default=None)
    total_splits: int = 0

    @property
    def ntree(self) -> int:
        return self._feat.shape[0]

    def tree(self, t: int) -> Tree:
        k = self._n_nodes[t]
        counts = np.stack([self._c0[t, :k], self._c1[t, :k]], axis=1)
        return Tree(self._feat[t, :k], self._thr[t, :k], self._left[t, :k],
                    self._right[t, :k], counts, self._inbag[t])

    @property
    def inbag_counts(self) -> np.ndarray:
        """(ntree, n) bootstrap multiplicities."""
        return self._inbag


@dataclass
class OobPrediction:
    """Out-of-bag vote fractions; NaN marks a sample that was never oob."""

    vote_fraction: np.ndarray
    oob_coverage: np.ndarray

    def defined(self) -> np.ndarray:
        return self.oob_coverage > 0


def gini_impurity(class_counts) -> float:
    """Gini impurity 2*p*(1-p) of a two-class count pair."""
    c0, c1 = class_counts
    total = c0 + c1
    if total <= 0:
        raise ValueError("degenerate node: both class counts are zero")
    p = c1 / total
    return 2.0 * p * (1.0 - p)


def find_best_split(x, y):
    """Best threshold on one variable, or None when no split helps.

    Scans midpoints between consecutive distinct sorted values of x and
    maximizes the Gini impurity decrease weighted by child sizes; ties
    break toward the smallest threshold.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be vectors of equal length")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples to split")
    found, thr, dec = _kernels.best_split(x, y)
    if not found:
        return None
    return {"threshold": float(thr), "impurity_decrease": float(dec)}


def sample_candidates(weights, mtry: int, rng) -> set[int]:
    """Draw up to mtry distinct variable indices proportional to weight.

    Sequential weighted sampling without replacement: after each draw the
    remaining weights are implicitly renormalized. Indices with zero
    weight never appear; if fewer than mtry indices have positive weight,
    all of them are returned. ``rng`` may be a numpy Generator or an
    integer seed.
    """
    w = np.asarray(
        weights.w_tilde if isinstance(weights, SamplingWeights) else weights,
        dtype=np.float64)
    if (w < 0).any() or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive sum")
    if mtry < 1:
        raise ValueError("mtry must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    state = np.uint64(rng.integers(0, 2**64, dtype=np.uint64))
    idx, _ = _kernels.sample_candidates_once(w, mtry, state)
    return set(int(i) for i in idx)


def fit_forest(data: PrimaryDataset, params: ForestParams) -> Forest:
    """Fit a forest; deterministic given (data, params.seed).

    Each tree grows on its own bootstrap sample (n draws with
    replacement) and keeps splitting any node larger than min_node_size
    for which some candidate variable yields a positive impurity
    decrease.
    """
    n, p = data.X.shape
    classes = np.unique(data.y)
    if classes.size < 2:
        raise InputError("single-class response: cannot fit a classifier")

    mtry = params.mtry if params.mtry is not None else math.ceil(math.sqrt(p))
    if mtry > p:
        warnings.warn(f"mtry={mtry} exceeds P={p}; clamping to P")
        mtry = p

    if params.sampling_weights is None:
        weights = np.full(p, 1.0 / p)
    else:
        weights = params.sampling_weights.w_tilde
        if weights.shape[0] != p:
            raise ValueError("sampling weights length must equal P")

    xf = np.asfortranarray(data.X)
    y = data.y.astype(np.int8)
    ntree = params.ntree
    max_nodes = 2 * n + 1

    feat = np.full((ntree, max_nodes), _kernels.UNUSED, dtype=np.int32)
    thr = np.zeros((ntree, max_nodes), dtype=np.float64)
    left = np.zeros((ntree, max_nodes), dtype=np.int32)
    right = np.zeros((ntree, max_nodes), dtype=np.int32)
    c0 = np.zeros((ntree, max_nodes), dtype=np.int32)
    c1 = np.zeros((ntree, max_nodes), dtype=np.int32)
    inbag = np.zeros((ntree, n), dtype=np.int32)
    n_nodes = np.zeros(ntree, dtype=np.int64)

    _kernels.grow_forest(xf, y, weights, ntree, mtry, params.min_node_size,
                         np.uint64(params.seed & (2**64 - 1)), max_nodes,
                         feat, thr, left, right, c0, c1, inbag, n_nodes)
    split_counts = _kernels.accumulate_split_counts(feat, n_nodes, p)

    return Forest(params=params, n_variables=p, _feat=feat, _thr=thr,
                  _left=left, _right=right, _c0=c0, _c1=c1, _inbag=inbag,
                  _n_nodes=n_nodes, split_counts=split_counts,
                  total_splits=int(split_counts.sum()))


def predict_forest(forest: Forest, x_new) -> np.ndarray:
    """Class-1 vote fraction per row of x_new (tied leaves vote 0.5)."""
    x_new = np.ascontiguousarray(x_new, dtype=np.float64)
    if x_new.ndim != 2 or x_new.shape[1] != forest.n_variables:
        raise ValueError(
            f"expected {forest.n_variables} columns, got {x_new.shape}")
    return _kernels.predict_votes(forest._feat, forest._thr, forest._left,
                                  forest._right, forest._c0, forest._c1,
                                  x_new)


def oob_probabilities(forest: Forest, data: PrimaryDataset) -> OobPrediction:
    """Vote fractions restricted to trees where each sample was oob."""
    if data.X.shape[0] != forest._inbag.shape[1]:
        raise ValueError("data does not match the training sample count")
    if data.X.shape[1] != forest.n_variables:
        raise ValueError("data does not match the training variable count")
    x = np.ascontiguousarray(data.X, dtype=np.float64)
    frac, cover = _kernels.oob_votes(forest._feat, forest._thr, forest._left,
                                     forest._right, forest._c0, forest._c1,
                                     forest._inbag, x)
    return OobPrediction(vote_fraction=frac, oob_coverage=cover)
