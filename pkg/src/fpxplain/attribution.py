"""Exact Shapley attribution and the identities it must satisfy.

Three routes, all exact:
* shap_enum: the defining sum over feature subsets, with conditional
  expectations computed by conditioning the model (exponential in n but
  polynomial per term; fine for small n)
* shap_interpolation: for tree ensembles, recovers the size-stratified
  sums H(k) from expectations under lambda-mixed distributions and
  assembles attributions from them
* shap_perceptron_pseudopoly (in .perceptron): H(k) by subset-sum DP

The mixed distribution locks each feature to its x-value with probability
lambda and samples it otherwise, so E under the mix is the polynomial
sum_k lambda^k (1-lambda)^(n-k) H(k); evaluating at n+1 distinct lambdas
and solving the linear system recovers H exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from . import _config
from .errors import ResourceCapError, UnsupportedModelError
from .models import (
    DecisionTree, Ensemble, Instance, Majority, Model, Perceptron,
    ProductDistribution, check_instance, eval_model, is_tree_ensemble,
)
from .oracle import oracle_expected_value
from .perceptron import (
    HTable, _fingerprint, expected_value_perceptron, h_table_perceptron,
    shap_perceptron_pseudopoly,
)
from .transforms import condition_model
from .trees import _collect_tuples, _mass_sum_scaled, _raw_triples, expected_value_tree_ensemble


def _solve_linear(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over exact rationals."""
    size = len(b)
    m = [row[:] + [bv] for row, bv in zip(a, b)]
    for col in range(size):
        piv = next(r for r in range(col, size) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        pivot = m[col][col]
        m[col] = [v / pivot for v in m[col]]
        for r in range(size):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [m[r][size] for r in range(size)]


@lru_cache(maxsize=64)
def size_stratified_sums(e: Ensemble, x: Instance, dist: ProductDistribution,
                         features: tuple[int, ...] | None = None) -> HTable:
    """H(k) = sum over size-k subsets of `features` of E[f | z_s = x_s].

    Tree ensembles only. `features` defaults to all of them; passing a
    smaller tuple computes the table over that ground set, which is what
    the per-feature conditioned tables need (the model must not test the
    excluded features). The cylinder decomposition is computed once and
    re-weighted for each lambda on the grid j/(r+2).
    """
    if not is_tree_ensemble(e):
        raise UnsupportedModelError("size_stratified_sums expects an ensemble of trees")
    n = e.feature_count
    x = check_instance(x, n)
    if dist.feature_count != n:
        raise ValueError(f"distribution over {dist.feature_count} features, model has {n}")
    if features is None:
        features = tuple(range(n))
    feats = set(features)
    tuples = _collect_tuples(_raw_triples(e), e.voting, 1)
    r = len(features)
    grid = [Fraction(j, r + 2) for j in range(r + 1)]
    expectations = []
    for lam in grid:
        mixed = [lam * x[i] + (1 - lam) * dist.probs[i] if i in feats else dist.probs[i]
                 for i in range(n)]
        nums = [p.numerator for p in mixed]
        dens = [p.denominator for p in mixed]
        denom_prod = 1
        for d in dens:
            denom_prod *= d
        expectations.append(
            Fraction(_mass_sum_scaled(tuples, nums, dens, denom_prod), denom_prod))
    matrix = [[lam ** k * (1 - lam) ** (r - k) for k in range(r + 1)] for lam in grid]
    values = _solve_linear(matrix, expectations)
    return HTable(tuple(values), _fingerprint(e), _fingerprint(dist))


def _shap_coefficients(n: int) -> list[Fraction]:
    fact = [factorial(j) for j in range(n + 1)]
    return [Fraction(fact[k] * fact[n - k - 1], fact[n]) for k in range(n)]


def shap_interpolation(e: Ensemble, x: Instance, i: int, dist: ProductDistribution) -> Fraction:
    """Shapley value of feature i for a tree ensemble, via H-table algebra.

    phi_i = sum_k k! (n-k-1)! / n! * (H_g(k) - H_f(k) + H_g(k-1)) where g
    is the ensemble conditioned on feature i and its table runs over the
    remaining features.
    """
    n = e.feature_count
    x = check_instance(x, n)
    if not (0 <= i < n):
        raise ValueError(f"feature {i} outside 0..{n - 1}")
    h_f = size_stratified_sums(e, x, dist).values
    g = condition_model(e, x, (i,))
    rest = tuple(j for j in range(n) if j != i)
    h_g = size_stratified_sums(g, x, dist, rest).values
    coef = _shap_coefficients(n)
    total = Fraction(0)
    for k in range(n):
        term = h_g[k] - h_f[k]
        if k > 0:
            term += h_g[k - 1]
        total += coef[k] * term
    return total


def _default_expectation(m: Model, dist: ProductDistribution) -> Fraction:
    if isinstance(m, Perceptron):
        return expected_value_perceptron(m, dist)
    if isinstance(m, DecisionTree):
        return expected_value_tree_ensemble(Ensemble((m,), Majority()), dist)
    if is_tree_ensemble(m):
        return expected_value_tree_ensemble(m, dist)
    if isinstance(m, Ensemble):
        # Mixed or perceptron ensembles: no polynomial route, but enum is
        # already exponential so the capped oracle is an honest backend.
        return oracle_expected_value(m, dist)
    raise UnsupportedModelError(
        f"no expectation backend for {type(m).__name__}; pass one explicitly")


def shap_enum(m: Model, x: Instance, dist: ProductDistribution,
              backend=None) -> tuple[Fraction, ...]:
    """Shapley values straight from the defining subset sum.

    v(s) is the expectation of the model conditioned on z_s = x_s,
    computed by `backend(conditioned_model, dist)`. Exponential in the
    feature count, hence capped.
    """
    n = m.feature_count
    cap = _config.shap_enum_cap()
    if n > cap:
        raise ResourceCapError(
            f"shap_enum refuses n={n} features (cap {cap}); "
            f"raise {_config.SHAP_ENUM_CAP_VAR} if you really want this")
    x = check_instance(x, n)
    if dist.feature_count != n:
        raise ValueError(f"distribution over {dist.feature_count} features, model has {n}")
    if backend is None:
        backend = _default_expectation

    v_cache: dict[int, Fraction] = {}

    def v(smask: int) -> Fraction:
        got = v_cache.get(smask)
        if got is None:
            subset = tuple(i for i in range(n) if (smask >> i) & 1)
            got = backend(condition_model(m, x, subset), dist)
            v_cache[smask] = got
        return got

    coef = _shap_coefficients(n)
    phis = []
    for i in range(n):
        bit = 1 << i
        total = Fraction(0)
        for smask in range(1 << n):
            if smask & bit:
                continue
            total += coef[smask.bit_count()] * (v(smask | bit) - v(smask))
        phis.append(total)
    return tuple(phis)


# ---------------------------------------------------------------------------
# reports and identities


@dataclass(frozen=True)
class ShapReport:
    """A full attribution vector plus the data its identities refer to."""

    values: tuple[Fraction, ...]
    prediction: int
    expected: Fraction
    method: str
    model_fingerprint: str

    @property
    def total(self) -> Fraction:
        return sum(self.values, Fraction(0))


def shap_report(m: Model, x: Instance, dist: ProductDistribution,
                method: str = "auto") -> ShapReport:
    """Compute attributions by the named method and package them up.

    method: auto | interpolation | pseudopoly | enum. auto picks
    interpolation for tree ensembles (single trees are wrapped) and the
    pseudo-polynomial route for perceptrons.
    """
    if isinstance(m, DecisionTree):
        m = Ensemble((m,), Majority())
    n = m.feature_count
    x = check_instance(x, n)
    if method == "auto":
        if is_tree_ensemble(m):
            method = "interpolation"
        elif isinstance(m, Perceptron):
            method = "pseudopoly"
        else:
            method = "enum"
    if method == "interpolation":
        values = tuple(shap_interpolation(m, x, i, dist) for i in range(n))
        expected = size_stratified_sums(m, x, dist).values[0]
    elif method == "pseudopoly":
        if not isinstance(m, Perceptron):
            raise UnsupportedModelError("pseudopoly attribution is for perceptrons")
        values = shap_perceptron_pseudopoly(m, x, dist)
        expected = h_table_perceptron(m, x, dist).values[0]
    elif method == "enum":
        values = shap_enum(m, x, dist)
        expected = _default_expectation(m, dist)
    else:
        raise ValueError(f"unknown attribution method {method!r}")
    return ShapReport(values, eval_model(m, x), expected, method, _fingerprint(m))


def check_efficiency(report: ShapReport) -> bool:
    """Attributions must add up to prediction minus expectation, exactly."""
    return report.total == report.prediction - report.expected


def check_model_count_identity(report: ShapReport, count: int, n: int) -> bool:
    """Under the uniform distribution, 2^n (f(x) - sum phi) equals |f^-1(1)|."""
    return (report.prediction - report.total) * (1 << n) == count
