"""Exact explanation queries on a single perceptron.

Sufficiency and contrastiveness reduce to worst-case interval reasoning
on the weighted sum, counting goes through pseudo-polynomial subset-sum
tables on the integer-scaled weights, and Shapley attribution is
assembled from size-stratified conditional expectation sums H(k).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from . import _config
from .errors import ResourceCapError
from .models import (
    ABSENT, Instance, Perceptron, ProductDistribution, check_instance,
    check_subset,
)
from .transforms import project_out_feature


def _score(p: Perceptron, x: Instance) -> Fraction:
    total = p.bias
    for w, xi in zip(p.weights, x):
        if xi:
            total += w
    return total


# ---------------------------------------------------------------------------
# sufficiency


def csr_perceptron(p: Perceptron, x: Instance, s) -> bool:
    """Worst-case completion check: the fixed part plus adversarial free
    weights must stay on the prediction's side of the threshold."""
    n = p.feature_count
    x = check_instance(x, n)
    s = check_subset(s, n)
    sset = set(s)
    fixed = p.bias
    worst_low = Fraction(0)
    worst_high = Fraction(0)
    for i, w in enumerate(p.weights):
        if i in sset:
            if x[i]:
                fixed += w
        else:
            if w < 0:
                worst_low += w
            elif w > 0:
                worst_high += w
    if _score(p, x) >= 0:
        return fixed + worst_low >= 0
    return fixed + worst_high < 0


# ---------------------------------------------------------------------------
# contrastive reasons


def _flip_benefits(p: Perceptron, x: Instance) -> tuple[list[Fraction], Fraction, bool]:
    """Per-feature gain toward overturning the prediction.

    Flipping feature i moves the score by delta_i = (1-2x_i) w_i. With
    target 1 we need the total score to drop below 0, with target 0 to
    reach 0; benefit is the helpful direction, clipped at 0.
    """
    score = _score(p, x)
    positive = score >= 0
    benefits = []
    for i, w in enumerate(p.weights):
        delta = -w if x[i] else w
        benefit = -delta if positive else delta
        benefits.append(benefit if benefit > 0 else Fraction(0))
    return benefits, score, positive


def _crosses(score: Fraction, benefit_sum: Fraction, positive: bool) -> bool:
    if positive:
        return benefit_sum > score
    return benefit_sum >= -score


def min_contrastive_perceptron(p: Perceptron, x: Instance):
    """(size, witness) of a smallest contrastive set, or ABSENT if none.

    The witness is the lexicographically first among the minimum-size
    contrastive sets: a set of flips overturns the prediction exactly when
    its benefit sum crosses the score gap, so feasibility of extending a
    prefix is a top-r benefit sum check.
    """
    n = p.feature_count
    x = check_instance(x, n)
    benefits, score, positive = _flip_benefits(p, x)
    ranked = sorted(benefits, reverse=True)
    best = Fraction(0)
    size = None
    for r in range(0, n + 1):
        if _crosses(score, best, positive):
            size = r
            break
        if r < n:
            best += ranked[r]
    if size is None or size == 0:
        # size 0 would mean x itself overturns its own prediction
        return ABSENT if size is None else (0, ())
    chosen: list[int] = []
    acc = Fraction(0)
    start = 0
    while len(chosen) < size:
        for i in range(start, n):
            need = size - len(chosen) - 1
            tail = sorted(benefits[i + 1:], reverse=True)[:need]
            if _crosses(score, acc + benefits[i] + sum(tail, Fraction(0)), positive):
                chosen.append(i)
                acc += benefits[i]
                start = i + 1
                break
        else:  # pragma: no cover
            raise AssertionError("feasible size must admit a witness")
    return size, tuple(chosen)


def mcr_perceptron(p: Perceptron, x: Instance, d: int) -> bool:
    """Is there a contrastive set of size at most d?"""
    res = min_contrastive_perceptron(p, x)
    return res is not ABSENT and res[0] <= d


# ---------------------------------------------------------------------------
# minimum sufficient reasons


def _fix_gains(p: Perceptron, x: Instance) -> tuple[list[Fraction], Fraction, bool]:
    """Per-feature gain toward sufficiency when fixing the feature to x.

    With target 1, an unfixed feature contributes min(0, w_i) in the worst
    case and w_i x_i once fixed; the deficit is measured against 0.
    """
    score = _score(p, x)
    positive = score >= 0
    gains = []
    base = p.bias
    for i, w in enumerate(p.weights):
        if positive:
            worst = w if w < 0 else Fraction(0)
            gain = (w if x[i] else Fraction(0)) - worst
        else:
            worst = w if w > 0 else Fraction(0)
            gain = worst - (w if x[i] else Fraction(0))
        base += worst
        gains.append(gain)
    # base is the worst-case score with nothing fixed; fixing a set adds its gains
    return gains, base, positive


def _gains_sufficient(base: Fraction, gain_sum: Fraction, positive: bool) -> bool:
    if positive:
        return base + gain_sum >= 0
    return base - gain_sum < 0


def min_sufficient_perceptron(p: Perceptron, x: Instance) -> tuple[int, tuple[int, ...]]:
    """(size, witness) of a minimum sufficient reason.

    Sufficiency of a set is monotone in its gain sum against a fixed
    worst-case base, so the minimum size comes from the top gains and the
    lexicographically first witness from a prefix-feasibility scan.
    """
    n = p.feature_count
    x = check_instance(x, n)
    gains, base, positive = _fix_gains(p, x)
    ranked = sorted(gains, reverse=True)
    acc = Fraction(0)
    size = None
    for r in range(0, n + 1):
        if _gains_sufficient(base, acc, positive):
            size = r
            break
        if r < n:
            acc += ranked[r]
    assert size is not None, "the full feature set is always sufficient"
    if size == 0:
        return 0, ()
    chosen: list[int] = []
    got = Fraction(0)
    start = 0
    while len(chosen) < size:
        for i in range(start, n):
            need = size - len(chosen) - 1
            tail = sorted(gains[i + 1:], reverse=True)[:need]
            if _gains_sufficient(base, got + gains[i] + sum(tail, Fraction(0)), positive):
                chosen.append(i)
                got += gains[i]
                start = i + 1
                break
        else:  # pragma: no cover
            raise AssertionError("feasible size must admit a witness")
    assert csr_perceptron(p, x, chosen)
    return size, tuple(chosen)


def msr_perceptron(p: Perceptron, x: Instance, d: int) -> bool:
    """Is there a sufficient reason of size at most d?"""
    size, _ = min_sufficient_perceptron(p, x)
    return size <= d


# ---------------------------------------------------------------------------
# pseudo-polynomial counting


def _check_dp_budget(cells: int, what: str):
    budget = _config.pseudo_budget()
    if cells > budget:
        raise ResourceCapError(
            f"{what} needs about {cells} DP cells, over the budget {budget}; "
            f"raise {_config.PSEUDO_BUDGET_VAR} to allow it")


def cc_perceptron_pseudopoly(p: Perceptron, x: Instance, s) -> Fraction:
    """Fraction of completions agreeing with x on s that keep the prediction.

    Subset-sum counting over the integer-scaled free weights; exact, with
    cost proportional to the number of distinct achievable sums.
    """
    n = p.feature_count
    x = check_instance(x, n)
    s = check_subset(s, n)
    sset = set(s)
    ws, b, _ = p.scaled
    fixed = b + sum(w for i, w in enumerate(ws) if i in sset and x[i])
    free = [ws[i] for i in range(n) if i not in sset]
    span = sum(abs(w) for w in free) + 1
    _check_dp_budget(span * max(1, len(free)), "cc_perceptron_pseudopoly")
    counts: dict[int, int] = {0: 1}
    for w in free:
        nxt: dict[int, int] = {}
        for total, c in counts.items():
            nxt[total] = nxt.get(total, 0) + c
            nxt[total + w] = nxt.get(total + w, 0) + c
        counts = nxt
    kept = sum(c for total, c in counts.items() if total + fixed >= 0)
    n_free = len(free)
    target = 1 if _score(p, x) >= 0 else 0
    if not target:
        kept = (1 << n_free) - kept
    return Fraction(kept, 1 << n_free)


def expected_value_perceptron(p: Perceptron, dist: ProductDistribution) -> Fraction:
    """E[f(z)] under a product distribution via subset-sum accumulation."""
    n = p.feature_count
    if dist.feature_count != n:
        raise ValueError(f"distribution over {dist.feature_count} features, model has {n}")
    ws, b, _ = p.scaled
    span = sum(abs(w) for w in ws) + 1
    _check_dp_budget(span * max(1, n), "expected_value_perceptron")
    # integer numerators over the running product of probability denominators
    weights: dict[int, int] = {0: 1}
    denom_prod = 1
    for i, w in enumerate(ws):
        a = dist.probs[i].numerator
        d = dist.probs[i].denominator
        denom_prod *= d
        nxt: dict[int, int] = {}
        for total, c in weights.items():
            if d != a:
                nxt[total] = nxt.get(total, 0) + c * (d - a)
            if a:
                nxt[total + w] = nxt.get(total + w, 0) + c * a
        weights = nxt
    hits = sum(c for total, c in weights.items() if total + b >= 0)
    return Fraction(hits, denom_prod)


# ---------------------------------------------------------------------------
# size-stratified conditional expectation sums and Shapley values


@dataclass(frozen=True)
class HTable:
    """H(k) = sum over size-k subsets of E[f | z_s = x_s], for k = 0..n.

    Carries short fingerprints of the model and distribution it was
    computed from so stale tables are easy to spot in reports.
    """

    values: tuple[Fraction, ...]
    model_fingerprint: str
    dist_fingerprint: str

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)


def _fingerprint(obj) -> str:
    return hashlib.sha256(repr(obj).encode()).hexdigest()[:12]


def h_table_perceptron(p: Perceptron, x: Instance, dist: ProductDistribution) -> HTable:
    """All H(k) at once, by a three-branch subset-sum DP.

    For the agreement set A = sim(z, x), f(z) = 1 iff sum over A of
    w''_i <= T with w''_i = -w_i when x_i = 1 else w_i and
    T = b + sum of w_i over x_i = 0. Each feature is either conditioned
    (in s, weight 1, counts toward k, adds w''), agrees by chance
    (probability q_i, adds w''), or disagrees (probability 1 - q_i).
    States are (w'' sum, conditioned count) with integer numerators over
    the running denominator product.
    """
    n = p.feature_count
    x = check_instance(x, n)
    if dist.feature_count != n:
        raise ValueError(f"distribution over {dist.feature_count} features, model has {n}")
    ws, b, _ = p.scaled
    span = sum(abs(w) for w in ws) + 1
    _check_dp_budget(span * max(1, n) * (n + 1), "h_table_perceptron")
    t_threshold = b + sum(w for i, w in enumerate(ws) if not x[i])
    states: dict[tuple[int, int], int] = {(0, 0): 1}
    denom_prod = 1
    for i in range(n):
        w2 = -ws[i] if x[i] else ws[i]
        q = dist.probs[i] if x[i] else 1 - dist.probs[i]
        a, d = q.numerator, q.denominator
        denom_prod *= d
        nxt: dict[tuple[int, int], int] = {}
        for (total, j), c in states.items():
            if d != a:  # disagree, stays out of the agreement set
                key = (total, j)
                nxt[key] = nxt.get(key, 0) + c * (d - a)
            if a:  # agrees by chance
                key = (total + w2, j)
                nxt[key] = nxt.get(key, 0) + c * a
            key = (total + w2, j + 1)  # conditioned, probability 1
            nxt[key] = nxt.get(key, 0) + c * d
        states = nxt
    sums = [0] * (n + 1)
    for (total, j), c in states.items():
        if total <= t_threshold:
            sums[j] += c
    values = tuple(Fraction(c, denom_prod) for c in sums)
    return HTable(values, _fingerprint(p), _fingerprint(dist))


def h_sum_perceptron(p: Perceptron, x: Instance, dist: ProductDistribution, k: int) -> Fraction:
    return h_table_perceptron(p, x, dist).values[k]


def shap_perceptron_pseudopoly(p: Perceptron, x: Instance,
                               dist: ProductDistribution) -> tuple[Fraction, ...]:
    """Exact Shapley attributions from size-stratified sums.

    phi_i combines the H table of the model with the H table of the model
    conditioned on feature i (taken over the remaining n-1 features):
    phi_i = sum_k k! (n-k-1)! / n! * (H_g(k) - H_f(k) + H_g(k-1)).
    """
    n = p.feature_count
    x = check_instance(x, n)
    h_f = h_table_perceptron(p, x, dist).values
    fact = [factorial(j) for j in range(n + 1)]
    coef = [Fraction(fact[k] * fact[n - k - 1], fact[n]) for k in range(n)]
    phis = []
    for i in range(n):
        g = project_out_feature(p, i, x[i])
        x_g = x[:i] + x[i + 1:]
        dist_g = ProductDistribution(dist.probs[:i] + dist.probs[i + 1:])
        h_g = h_table_perceptron(g, x_g, dist_g).values
        total = Fraction(0)
        for k in range(n):
            term = h_g[k] - h_f[k]
            if k > 0:
                term += h_g[k - 1]
            total += coef[k] * term
        phis.append(total)
    return tuple(phis)
