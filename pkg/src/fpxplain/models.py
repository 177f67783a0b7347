"""Core model classes: decision trees, perceptrons, ensembles, distributions.

Conventions used throughout the package:

* instances are tuples of 0/1 ints, feature i at position i (0-based)
* all numeric model parameters are exact rationals (fractions.Fraction)
* a perceptron outputs 1 iff w . x + b >= 0
* a decision tree tests each feature at most once per root-to-leaf path
  and has 0/1 leaf labels
* ensemble voting is either simple majority (at least ceil(k/2) votes)
  or weighted: output 1 iff sum(phi_i * f_i(x)) >= theta
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Union

from .errors import InputShapeError, UnsupportedModelError

Instance = tuple[int, ...]


class _AbsentType:
    """Sentinel for 'no witness exists' answers (e.g. MCR on a constant model)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Absent"

    def __bool__(self):
        return False


ABSENT = _AbsentType()


def as_fraction(v) -> Fraction:
    """Coerce ints, strings like '3/4' and Fractions to Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError(f"floats are not exact, got {v!r}; pass a Fraction or 'p/q' string")
    return Fraction(v)


# ---------------------------------------------------------------------------
# decision trees

LEAF = "leaf"
SPLIT = "split"


@dataclass(frozen=True)
class DecisionTree:
    """Binary decision tree over Boolean features, stored as a node arena.

    nodes[i] is either ("leaf", label) with label in {0, 1} or
    ("split", feature, child0, child1) where child0/child1 are arena
    indices for the feature=0 / feature=1 branches.
    """

    feature_count: int
    nodes: tuple[tuple, ...]
    root: int = 0

    @cached_property
    def paths(self) -> tuple[tuple[int, int, int], ...]:
        """All root-to-leaf paths as (mask, vals, label) bitmask triples.

        Bit i of mask is set iff feature i is tested on the path; bit i of
        vals gives the branch taken (only meaningful under mask). Paths are
        listed in DFS order, 0-branch first, so the order is deterministic.
        """
        out = []
        stack = [(self.root, 0, 0)]
        while stack:
            idx, mask, vals = stack.pop()
            node = self.nodes[idx]
            if node[0] == LEAF:
                out.append((mask, vals, node[1]))
            else:
                _, feat, c0, c1 = node
                bit = 1 << feat
                # push the 1-branch first so the 0-branch pops first
                stack.append((c1, mask | bit, vals | bit))
                stack.append((c0, mask | bit, vals))
        return tuple(out)

    @cached_property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if n[0] == LEAF)


def leaf(label: int) -> tuple:
    return (LEAF, label)


def split(feature: int, child0: int, child1: int) -> tuple:
    return (SPLIT, feature, child0, child1)


def constant_tree(feature_count: int, label: int) -> DecisionTree:
    return DecisionTree(feature_count, (leaf(label),), 0)


def eval_tree(tree: DecisionTree, x: Instance) -> int:
    idx = tree.root
    nodes = tree.nodes
    while True:
        node = nodes[idx]
        if node[0] == LEAF:
            return node[1]
        idx = node[2 + x[node[1]]]


# ---------------------------------------------------------------------------
# perceptrons


@dataclass(frozen=True)
class Perceptron:
    """Linear threshold classifier: output 1 iff weights . x + bias >= 0."""

    weights: tuple[Fraction, ...]
    bias: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(as_fraction(w) for w in self.weights))
        object.__setattr__(self, "bias", as_fraction(self.bias))

    @property
    def feature_count(self) -> int:
        return len(self.weights)

    @cached_property
    def scaled(self) -> tuple[tuple[int, ...], int, int]:
        """Integer view (int_weights, int_bias, denom) with w = int_w / denom."""
        denom = lcm(self.bias.denominator, *(w.denominator for w in self.weights)) \
            if self.weights else self.bias.denominator
        ws = tuple(int(w * denom) for w in self.weights)
        return ws, int(self.bias * denom), denom


def eval_perceptron(p: Perceptron, x: Instance) -> int:
    ws, b, _ = p.scaled
    total = b
    for w, xi in zip(ws, x):
        if xi:
            total += w
    return 1 if total >= 0 else 0


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class Majority:
    """Simple majority voting: output 1 iff at least ceil(k/2) members vote 1."""


@dataclass(frozen=True)
class Weighted:
    """Weighted voting: output 1 iff sum(weights[i] * vote_i) >= threshold."""

    weights: tuple[Fraction, ...]
    threshold: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(as_fraction(w) for w in self.weights))
        object.__setattr__(self, "threshold", as_fraction(self.threshold))


Voting = Union[Majority, Weighted]

BaseModel = Union[DecisionTree, Perceptron]
Model = Union[DecisionTree, Perceptron, "Ensemble"]


@dataclass(frozen=True)
class Ensemble:
    members: tuple[BaseModel, ...]
    voting: Voting

    @property
    def feature_count(self) -> int:
        return self.members[0].feature_count

    @property
    def size(self) -> int:
        return len(self.members)


def majority_ensemble(members) -> Ensemble:
    return Ensemble(tuple(members), Majority())


def majority_threshold(k: int) -> int:
    return (k + 1) // 2


def votes_accept(voting: Voting, votes: list[int] | tuple[int, ...]) -> int:
    """Apply the voting rule to a 0/1 vote vector."""
    if isinstance(voting, Majority):
        return 1 if sum(votes) >= majority_threshold(len(votes)) else 0
    total = Fraction(0)
    for w, v in zip(voting.weights, votes):
        if v:
            total += w
    return 1 if total >= voting.threshold else 0


def eval_ensemble(e: Ensemble, x: Instance) -> int:
    votes = [eval_base(m, x) for m in e.members]
    return votes_accept(e.voting, votes)


def eval_base(m: BaseModel, x: Instance) -> int:
    if isinstance(m, DecisionTree):
        return eval_tree(m, x)
    if isinstance(m, Perceptron):
        return eval_perceptron(m, x)
    raise UnsupportedModelError(f"not a base model: {type(m).__name__}")


def eval_model(m: Model, x: Instance) -> int:
    """Evaluate any supported model on a full instance."""
    if isinstance(m, Ensemble):
        return eval_ensemble(m, x)
    return eval_base(m, x)


def feature_count(m: Model) -> int:
    return m.feature_count


def is_tree_ensemble(m: Model) -> bool:
    return isinstance(m, Ensemble) and all(isinstance(t, DecisionTree) for t in m.members)


def is_perceptron_ensemble(m: Model) -> bool:
    return isinstance(m, Ensemble) and all(isinstance(p, Perceptron) for p in m.members)


# ---------------------------------------------------------------------------
# product distributions


@dataclass(frozen=True)
class ProductDistribution:
    """Independent per-feature Bernoulli parameters, probs[i] = Pr[z_i = 1]."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        ps = tuple(as_fraction(p) for p in self.probs)
        for i, p in enumerate(ps):
            if p < 0 or p > 1:
                raise ValueError(f"probs[{i}] = {p} outside [0, 1]")
        object.__setattr__(self, "probs", ps)

    @classmethod
    def uniform(cls, n: int) -> "ProductDistribution":
        half = Fraction(1, 2)
        return cls((half,) * n)

    @property
    def feature_count(self) -> int:
        return len(self.probs)

    def bit_prob(self, i: int, bit: int) -> Fraction:
        """Probability that feature i takes the given value."""
        return self.probs[i] if bit else 1 - self.probs[i]

    def is_uniform(self) -> bool:
        half = Fraction(1, 2)
        return all(p == half for p in self.probs)


# ---------------------------------------------------------------------------
# shape checks and bit helpers


def check_instance(x, n: int) -> Instance:
    """Validate and canonicalize an instance to a tuple of 0/1 ints."""
    xt = tuple(x)
    if len(xt) != n:
        raise InputShapeError(f"instance has {len(xt)} features, model expects {n}")
    for i, b in enumerate(xt):
        if b not in (0, 1):
            raise InputShapeError(f"instance bit {i} is {b!r}, expected 0 or 1")
    return xt


def check_subset(s, n: int) -> tuple[int, ...]:
    """Validate and canonicalize a feature subset to a sorted tuple."""
    st = tuple(sorted(set(s)))
    for i in st:
        if not isinstance(i, int) or i < 0 or i >= n:
            raise InputShapeError(f"feature index {i!r} outside range 0..{n - 1}")
    return st


def subset_mask(s) -> int:
    m = 0
    for i in s:
        m |= 1 << i
    return m


def bits_to_int(x: Instance) -> int:
    z = 0
    for i, b in enumerate(x):
        if b:
            z |= 1 << i
    return z


def int_to_bits(z: int, n: int) -> Instance:
    return tuple((z >> i) & 1 for i in range(n))


# ---------------------------------------------------------------------------
# validation


def validate_model(m: Model) -> list[str]:
    """Structural diagnostics for a model; empty list means valid."""
    problems: list[str] = []
    if isinstance(m, DecisionTree):
        _validate_tree(m, problems, prefix="")
    elif isinstance(m, Perceptron):
        _validate_perceptron(m, problems, prefix="")
    elif isinstance(m, Ensemble):
        if not m.members:
            problems.append("ensemble has no members")
            return problems
        n = m.members[0].feature_count
        for j, sub in enumerate(m.members):
            if not isinstance(sub, (DecisionTree, Perceptron)):
                problems.append(f"member {j}: unsupported type {type(sub).__name__}")
                continue
            if sub.feature_count != n:
                problems.append(
                    f"member {j}: feature count {sub.feature_count} differs from member 0 ({n})")
            if isinstance(sub, DecisionTree):
                _validate_tree(sub, problems, prefix=f"member {j}: ")
            else:
                _validate_perceptron(sub, problems, prefix=f"member {j}: ")
        if isinstance(m.voting, Weighted):
            if len(m.voting.weights) != len(m.members):
                problems.append(
                    f"voting has {len(m.voting.weights)} weights for {len(m.members)} members")
        elif not isinstance(m.voting, Majority):
            problems.append(f"unknown voting rule {type(m.voting).__name__}")
    else:
        problems.append(f"unsupported model type {type(m).__name__}")
    return problems


def _validate_perceptron(p: Perceptron, problems: list[str], prefix: str):
    if p.feature_count == 0:
        problems.append(prefix + "perceptron has no features")


def _validate_tree(t: DecisionTree, problems: list[str], prefix: str):
    if not t.nodes:
        problems.append(prefix + "tree has no nodes")
        return
    if not (0 <= t.root < len(t.nodes)):
        problems.append(prefix + f"root index {t.root} outside arena")
        return
    seen: set[int] = set()

    def walk(idx: int, used_mask: int) -> None:
        if not (0 <= idx < len(t.nodes)):
            problems.append(prefix + f"child index {idx} outside arena")
            return
        if idx in seen:
            problems.append(prefix + f"node {idx} reachable twice (arena must be a tree)")
            return
        seen.add(idx)
        node = t.nodes[idx]
        if node[0] == LEAF:
            if node[1] not in (0, 1):
                problems.append(prefix + f"leaf {idx} label {node[1]!r} not 0/1")
            return
        if node[0] != SPLIT:
            problems.append(prefix + f"node {idx} has unknown tag {node[0]!r}")
            return
        _, feat, c0, c1 = node
        if not (0 <= feat < t.feature_count):
            problems.append(prefix + f"node {idx} tests feature {feat} outside 0..{t.feature_count - 1}")
            return
        bit = 1 << feat
        if used_mask & bit:
            problems.append(prefix + f"feature {feat} tested twice on a path through node {idx}")
            return
        walk(c0, used_mask | bit)
        walk(c1, used_mask | bit)

    walk(t.root, 0)
