"""Exact explanation queries on ensembles of decision trees.

The engine behind every query enumerates joint leaf selections: one
root-to-leaf path per member tree, kept only when the paths are pairwise
non-conflicting. A full selection fixes a partial assignment (the union
of the path constraints) and determines the ensemble vote exactly from
the leaf labels, which stays correct for weighted voting with negative
weights. Distinct selections conflict in at least one tree, so the
accepted selections partition the accepted instances into disjoint
cylinders; expectation and counting queries just add up cylinder masses.

Cost is O(m^k) joint selections for k trees with at most m leaves each,
times cheap bitmask work, so everything here is exponential only in k.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

from . import _config
from .errors import InfeasibleError, UnsupportedModelError
from .models import (
    ABSENT, DecisionTree, Ensemble, Instance, Majority, ProductDistribution,
    Weighted, bits_to_int, check_instance, check_subset, eval_ensemble,
    eval_tree, majority_threshold, subset_mask,
)


# ---------------------------------------------------------------------------
# path descriptors


@dataclass(frozen=True)
class PathDescriptor:
    """One root-to-leaf path: which features it fixes and to what."""

    tree_index: int
    leaf: int
    mask: int
    vals: int
    label: int

    @property
    def assignment(self) -> dict[int, int]:
        return {i: (self.vals >> i) & 1
                for i in range(self.mask.bit_length()) if (self.mask >> i) & 1}


def paths_of(e: Ensemble) -> tuple[PathDescriptor, ...]:
    """All paths of all member trees, in tree order then DFS order."""
    _require_trees(e)
    out = []
    for ti, tree in enumerate(e.members):
        for li, (mask, vals, label) in enumerate(tree.paths):
            out.append(PathDescriptor(ti, li, mask, vals & mask, label))
    return tuple(out)


def paths_match(a: PathDescriptor, b: PathDescriptor) -> bool:
    """True iff no feature is fixed to different values by the two paths."""
    return ((a.vals ^ b.vals) & a.mask & b.mask) == 0


class Cylinder(NamedTuple):
    """A partial assignment whose every completion the ensemble accepts."""

    mask: int
    vals: int

    def fixed_features(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.mask.bit_length()) if (self.mask >> i) & 1)


def _require_trees(e: Ensemble):
    if not isinstance(e, Ensemble):
        raise UnsupportedModelError(f"expected an ensemble, got {type(e).__name__}")
    for t in e.members:
        if not isinstance(t, DecisionTree):
            raise UnsupportedModelError("ensemble member is not a decision tree")


def _raw_triples(e: Ensemble) -> list[tuple[tuple[int, int, int], ...]]:
    return [t.paths for t in e.members]


def _conditioned_triples(tree: DecisionTree, xbits: int, smask: int) -> list[tuple[int, int, int]]:
    """Paths consistent with x on s, with the s-constraints stripped.

    Equivalent to conditioning the tree and listing its paths, without
    rebuilding the arena.
    """
    out = []
    for mask, vals, label in tree.paths:
        if (vals ^ xbits) & (mask & smask):
            continue
        m2 = mask & ~smask
        out.append((m2, vals & m2, label))
    return out


# ---------------------------------------------------------------------------
# joint selection engines


def _vote_bounds(voting, k: int):
    """Per-depth bounds on the final vote sum for pruning."""
    if isinstance(voting, Majority):
        return None
    smax = [Fraction(0)] * (k + 1)
    smin = [Fraction(0)] * (k + 1)
    for j in range(k - 1, -1, -1):
        w = voting.weights[j]
        smax[j] = smax[j + 1] + (w if w > 0 else 0)
        smin[j] = smin[j + 1] + (w if w < 0 else 0)
    return smax, smin


def _exists_output(lists, voting, want: int) -> bool:
    """Is there a consistent joint selection with the given ensemble output?

    Since any partial assignment extends to a full instance, and a full
    instance follows some path in every tree, the answer is also whether
    some instance gets that output.
    """
    k = len(lists)
    if isinstance(voting, Majority):
        need = majority_threshold(k)

        def rec(j: int, mask: int, vals: int, ones: int) -> bool:
            rem = k - j
            if want:
                if ones >= need:
                    return True
                if ones + rem < need:
                    return False
            else:
                if ones + rem < need:
                    return True
                if ones >= need:
                    return False
            for m2, v2, lab in lists[j]:
                if (vals ^ v2) & (mask & m2):
                    continue
                if rec(j + 1, mask | m2, vals | v2, ones + lab):
                    return True
            return False

        return rec(0, 0, 0, 0)

    smax, smin = _vote_bounds(voting, k)
    theta = voting.threshold
    weights = voting.weights

    def recw(j: int, mask: int, vals: int, cur: Fraction) -> bool:
        if want:
            if cur + smin[j] >= theta:
                return True
            if cur + smax[j] < theta:
                return False
        else:
            if cur + smax[j] < theta:
                return True
            if cur + smin[j] >= theta:
                return False
        for m2, v2, lab in lists[j]:
            if (vals ^ v2) & (mask & m2):
                continue
            if recw(j + 1, mask | m2, vals | v2, cur + weights[j] if lab else cur):
                return True
        return False

    return recw(0, 0, 0, Fraction(0))


def _tuples_with_output(lists, voting, want: int,
                        first_indices=None) -> list[tuple[int, int]]:
    """All full joint selections with the given output, as (mask, vals).

    Full selections only (one path in every tree); the result order is
    row-major over the per-tree path lists and therefore deterministic.
    first_indices optionally restricts the choice in tree 0 (used to
    split the work across threads).
    """
    k = len(lists)
    out: list[tuple[int, int]] = []
    majority = isinstance(voting, Majority)
    if majority:
        need = majority_threshold(k)
        theta = smax = smin = weights = None
    else:
        smax, smin = _vote_bounds(voting, k)
        theta = voting.threshold
        weights = voting.weights

    def rec(j: int, mask: int, vals: int, vote) -> None:
        if j == k:
            if majority:
                ok = (vote >= need) if want else (vote < need)
            else:
                ok = (vote >= theta) if want else (vote < theta)
            if ok:
                out.append((mask, vals))
            return
        if majority:
            if want and vote + (k - j) < need:
                return
            if not want and vote >= need:
                return
        else:
            if want and vote + smax[j] < theta:
                return
            if not want and vote + smin[j] >= theta:
                return
        for m2, v2, lab in lists[j]:
            if (vals ^ v2) & (mask & m2):
                continue
            if majority:
                rec(j + 1, mask | m2, vals | v2, vote + lab)
            else:
                rec(j + 1, mask | m2, vals | v2, vote + weights[j] if lab else vote)

    start = Fraction(0) if not majority else 0
    if first_indices is None or k == 0:
        rec(0, 0, 0, start)
        return out
    for idx in first_indices:
        m2, v2, lab = lists[0][idx]
        if majority:
            rec(1, m2, v2, lab)
        else:
            rec(1, m2, v2, weights[0] if lab else start)
    return out


def _collect_tuples(lists, voting, want: int) -> list[tuple[int, int]]:
    """Like _tuples_with_output but optionally fanned out over threads.

    The first tree's paths are split into contiguous chunks, one task per
    chunk; concatenating the chunk results in submission order reproduces
    the sequential row-major order exactly, so the output is identical
    under any schedule and any thread count.
    """
    workers = _config.thread_count()
    k = len(lists)
    if workers <= 1 or k < 2 or len(lists[0]) < 2:
        return _tuples_with_output(lists, voting, want)
    first = list(range(len(lists[0])))
    step = (len(first) + workers - 1) // workers
    chunks = [first[i:i + step] for i in range(0, len(first), step)]
    with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
        results = ex.map(
            lambda chunk: _tuples_with_output(lists, voting, want, chunk), chunks)
        out: list[tuple[int, int]] = []
        for part in results:
            out.extend(part)
    return out


# ---------------------------------------------------------------------------
# sufficiency


def csr_tree_ensemble(e: Ensemble, x: Instance, s) -> bool:
    """Is fixing x on s enough to force the ensemble's prediction?"""
    _require_trees(e)
    n = e.feature_count
    x = check_instance(x, n)
    s = check_subset(s, n)
    target = eval_ensemble(e, x)
    xbits = bits_to_int(x)
    smask = subset_mask(s)
    lists = [_conditioned_triples(t, xbits, smask) for t in e.members]
    return not _exists_output(lists, e.voting, 1 - target)


def csr_single_tree(tree: DecisionTree, x: Instance, s) -> bool:
    """Single-tree sufficiency: every s-consistent path must keep the label."""
    if not isinstance(tree, DecisionTree):
        raise UnsupportedModelError(f"expected a decision tree, got {type(tree).__name__}")
    n = tree.feature_count
    x = check_instance(x, n)
    s = check_subset(s, n)
    target = eval_tree(tree, x)
    xbits = bits_to_int(x)
    smask = subset_mask(s)
    return all(label == target
               for _, _, label in _conditioned_triples(tree, xbits, smask))


def greedy_subset_minimal_sufficient(n: int, order, is_sufficient: Callable) -> tuple[int, ...]:
    """Shrink the full feature set to a subset-minimal sufficient reason.

    Walks the features in the given order and drops each one whose removal
    keeps sufficiency; makes exactly len(order) is_sufficient calls. With
    order a permutation of range(n) the result is subset-minimal.
    """
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of range(n)")
    current = set(range(n))
    for i in order:
        trial = tuple(sorted(current - {i}))
        if is_sufficient(trial):
            current.discard(i)
    return tuple(sorted(current))


# ---------------------------------------------------------------------------
# contrastive reasons and minimum sufficient reasons via hitting-set duality


def enumerate_candidate_contrastive(e: Ensemble, x: Instance,
                                    filter_minimal: bool = False) -> tuple[tuple[int, ...], ...]:
    """Flip sets extracted from joint selections that overturn f(x).

    Each returned set is contrastive (flipping it changes the prediction),
    and every subset-minimal contrastive set appears. Sorted by size then
    lexicographically. filter_minimal drops members that strictly contain
    another member.
    """
    _require_trees(e)
    n = e.feature_count
    x = check_instance(x, n)
    target = eval_ensemble(e, x)
    xbits = bits_to_int(x)
    found: set[tuple[int, ...]] = set()
    for mask, vals in _collect_tuples(_raw_triples(e), e.voting, 1 - target):
        diff = (vals ^ xbits) & mask
        assert diff, "a selection consistent with x cannot overturn f(x)"
        s = []
        dd = diff
        while dd:
            b = dd & -dd
            s.append(b.bit_length() - 1)
            dd ^= b
        found.add(tuple(s))
    family = sorted(found, key=lambda t: (len(t), t))
    if filter_minimal:
        kept = []
        sets = [frozenset(t) for t in family]
        for i, t in enumerate(family):
            ti = sets[i]
            if not any(sets[j] < ti for j in range(len(family)) if j != i):
                kept.append(t)
        family = kept
    return tuple(family)


def min_contrastive_size(e: Ensemble, x: Instance):
    """(size, witness) of a smallest contrastive set, or ABSENT if none."""
    family = enumerate_candidate_contrastive(e, x)
    if not family:
        return ABSENT
    best = family[0]  # already sorted by (size, lexicographic)
    return len(best), best


def mcr_tree_ensemble(e: Ensemble, x: Instance, d: int) -> bool:
    """Is there a contrastive set of size at most d?"""
    res = min_contrastive_size(e, x)
    return res is not ABSENT and res[0] <= d


def _disjoint_packing(masks: list[int]) -> int:
    """Greedy count of pairwise-disjoint members; lower-bounds the hitting set."""
    used = 0
    count = 0
    for m in masks:
        if not (m & used):
            used |= m
            count += 1
    return count


def minimum_hitting_set(family, n: int) -> tuple[int, tuple[int, ...]]:
    """Smallest set meeting every member; lexicographically first on ties.

    Iterative deepening with a disjoint-packing lower bound; element
    candidates are taken in increasing order, so the first solution found
    at the optimal size is the lexicographically smallest one.
    """
    fam = sorted({tuple(sorted(set(t))) for t in family}, key=lambda t: (len(t), t))
    if not fam:
        return 0, ()
    if fam[0] == ():
        raise InfeasibleError("family contains the empty set; no hitting set exists")
    masks = [subset_mask(t) for t in fam]
    lower = _disjoint_packing(masks)

    def search(size: int, start: int, chosen: list[int], unhit: list[int]):
        if not unhit:
            return tuple(chosen)
        room = size - len(chosen)
        if room <= 0 or _disjoint_packing(unhit) > room:
            return None
        for el in range(start, n):
            bit = 1 << el
            rest = [u for u in unhit if not (u & bit)]
            if len(rest) == len(unhit):
                continue  # hits nothing new; never needed for a minimum
            chosen.append(el)
            res = search(size, el + 1, chosen, rest)
            chosen.pop()
            if res is not None:
                return res
        return None

    for size in range(lower, n + 1):
        res = search(size, 0, [], masks)
        if res is not None:
            return size, res
    raise InfeasibleError("no hitting set within the ground set")  # pragma: no cover


def min_sufficient_size(e: Ensemble, x: Instance) -> tuple[int, tuple[int, ...]]:
    """(size, witness) of a minimum sufficient reason, via hitting-set duality.

    A set is sufficient exactly when it meets every contrastive set, and
    it is enough to meet the candidate family, which contains all the
    subset-minimal contrastive sets.
    """
    family = enumerate_candidate_contrastive(e, x)
    n = e.feature_count
    if not family:
        return 0, ()
    size, witness = minimum_hitting_set(family, n)
    assert csr_tree_ensemble(e, x, witness), "duality witness must be sufficient"
    return size, witness


def msr_tree_ensemble(e: Ensemble, x: Instance, d: int) -> bool:
    """Is there a sufficient reason of size at most d?"""
    size, _ = min_sufficient_size(e, x)
    return size <= d


# ---------------------------------------------------------------------------
# counting and expectation over cylinders


def cylinder_decomposition(e: Ensemble) -> tuple[Cylinder, ...]:
    """Disjoint partial assignments covering exactly the accepted instances."""
    _require_trees(e)
    return tuple(Cylinder(m, v) for m, v in _collect_tuples(_raw_triples(e), e.voting, 1))


def _mass_sum_scaled(tuples, nums: list[int], dens: list[int], denom_prod: int) -> int:
    """Sum of cylinder masses, as a numerator over denom_prod = prod(dens)."""
    acc = 0
    for mask, vals in tuples:
        t = denom_prod
        mm = mask
        while mm:
            b = mm & -mm
            i = b.bit_length() - 1
            mm ^= b
            t = t // dens[i] * (nums[i] if (vals >> i) & 1 else dens[i] - nums[i])
        acc += t
    return acc


def expected_value_tree_ensemble(e: Ensemble, dist: ProductDistribution) -> Fraction:
    """E[f(z)] under a product distribution, summed over disjoint cylinders."""
    _require_trees(e)
    n = e.feature_count
    if dist.feature_count != n:
        raise ValueError(f"distribution over {dist.feature_count} features, model has {n}")
    tuples = _collect_tuples(_raw_triples(e), e.voting, 1)
    nums = [p.numerator for p in dist.probs]
    dens = [p.denominator for p in dist.probs]
    denom_prod = 1
    for d in dens:
        denom_prod *= d
    return Fraction(_mass_sum_scaled(tuples, nums, dens, denom_prod), denom_prod)


def cc_tree_ensemble(e: Ensemble, x: Instance, s) -> Fraction:
    """Fraction of completions agreeing with x on s that keep the prediction."""
    _require_trees(e)
    n = e.feature_count
    x = check_instance(x, n)
    s = check_subset(s, n)
    target = eval_ensemble(e, x)
    xbits = bits_to_int(x)
    smask = subset_mask(s)
    lists = [_conditioned_triples(t, xbits, smask) for t in e.members]
    accept_mass = Fraction(0)
    for mask, _ in _collect_tuples(lists, e.voting, 1):
        accept_mass += Fraction(1, 1 << mask.bit_count())
    return accept_mass if target else 1 - accept_mass
