"""Exact relative-variance computations for the sampling estimators.

Everything here is exhaustive and therefore only meant for small posets.
Values are computed in rational arithmetic and converted to ``float`` at the
boundary, so identities between the different routes hold to rounding.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import SizeLimitError
from .oracle import (
    DEFAULT_LABELED_LIMIT,
    _ideal_counter,
    enumerate_extensions,
    enumerate_labeled_posets,
    exact_count,
    multinomial,
)
from .poset import iter_bits
from .sis import ImportanceSpec, _components, importance, replay, run_batch

REL_TOL = 1e-9
ABS_TOL = 1e-12


def close(a, b, rel=REL_TOL, abs_=ABS_TOL):
    """Agreement under the lab's tolerance: the looser of ``rel`` and ``abs_``."""
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


@dataclass
class RvReport:
    poset_id: str
    spec: str
    rv_explicit: float
    rv_recursive: float
    empirical_rv: float = None
    samples: int = 0

    @property
    def difference(self):
        return self.rv_explicit - self.rv_recursive


@dataclass
class LevelBound:
    i: int
    a_i: Fraction
    poset: object
    element: int


def estimate_for_extension(p, spec, extension):
    """``f_P(lambda)``: the Algorithm 1 estimate along ``extension``, as a log."""
    return replay(p, spec, extension).log_value


def _level_weights(spec, p, alive, maxes, d):
    size = alive.bit_count()
    view = p.restrict(alive) if spec.needs_view else None
    return [Fraction(importance(spec, m, d[m], size, view, rational=True)) for m in maxes]


def second_moment(p, spec):
    """``sum over extensions of f_P(lambda)``, which equals ``E[f^2]``."""
    return sum(
        (Fraction(replay(p, spec, ext, rational=True).value) for ext in enumerate_extensions(p)),
        Fraction(0),
    )


def rv_explicit(p, spec, exact=False):
    """Relative variance as the uniform average of ``f / L`` minus one."""
    total = exact_count(p)
    rv = second_moment(p, spec) / (total * total) - 1
    return rv if exact else float(rv)


def rv_recursive(p, spec, exact=False):
    """Relative variance through the recursion over first elements.

    ``RV(P) + 1 = r(M) / L^2 * sum_m L_m^2 / r(m) * (RV(P - m) + 1)``,
    memoised over the set of remaining elements.
    """
    if len(p) > 24:
        raise SizeLimitError("recursive RV is limited to 24 elements")
    count = _ideal_counter(p, 4_000_000)
    up = p.up
    base = p.alive
    d = [(p.down[v] & base).bit_count() + 1 for v in range(p.n)]
    memo = {}

    def g(alive):
        if alive.bit_count() <= 1:
            return Fraction(1)
        hit = memo.get(alive)
        if hit is not None:
            return hit
        maxes = [v for v in iter_bits(alive) if not up[v] & alive]
        weights = _level_weights(spec, p, alive, maxes, d)
        total_r = sum(weights)
        big_l = count(alive)
        acc = Fraction(0)
        for m, r_m in zip(maxes, weights):
            rest = alive & ~(1 << m)
            l_m = count(rest)
            acc += Fraction(l_m * l_m) / r_m * g(rest)
        value = total_r * acc / (big_l * big_l)
        memo[alive] = value
        return value

    rv = g(base) - 1
    return rv if exact else float(rv)


def step_ratio_max(p, spec):
    """``max_m r(M)/r(m) * L_m/L`` at the top level of ``p``, with its argmax."""
    count = _ideal_counter(p, 4_000_000)
    alive = p.alive
    d = p.descendant_counts()
    maxes = [v for v in iter_bits(alive) if not p.up[v] & alive]
    weights = _level_weights(spec, p, alive, maxes, d)
    total_r = sum(weights)
    big_l = count(alive)
    best, arg = None, None
    for m, r_m in zip(maxes, weights):
        ratio = total_r / r_m * Fraction(count(alive & ~(1 << m)), big_l)
        if best is None or ratio > best:
            best, arg = ratio, m
    return best, arg


def level_bound(i, spec, limit=DEFAULT_LABELED_LIMIT):
    """``A_i``: the worst single-step ratio over every labeled poset of size ``i``."""
    if i > limit:
        raise SizeLimitError(f"level bounds are limited to i <= {limit}")
    best = None
    for q in enumerate_labeled_posets(i, limit=limit):
        value, m = step_ratio_max(q, spec)
        if best is None or value > best.a_i:
            best = LevelBound(i, value, q, m)
    return best


@lru_cache(maxsize=None)
def _cached_level(i, kind):
    return level_bound(i, ImportanceSpec(kind)).a_i


def product_bound(n, spec):
    """``A_1 A_2 ... A_n`` for a shipped importance kind."""
    if spec.kind == "table":
        raise ValueError("level bounds are only cached for the shipped kinds")
    result = Fraction(1)
    for i in range(1, n + 1):
        result *= _cached_level(i, spec.kind)
    return result


def check_product_bound(p, spec, limit=DEFAULT_LABELED_LIMIT):
    """True iff ``RV(P) <= A_1 ... A_n - 1`` (with a 1e-9 slack)."""
    n = len(p)
    if n > limit:
        raise SizeLimitError(f"product bound check limited to n <= {limit}")
    return rv_explicit(p, spec) <= float(product_bound(n, spec)) - 1 + 1e-9


def empirical_rv_convergence(p, spec, k, seed, recursive=False, poset_id="", oracle_limit=10):
    """Empirical RV from a seeded batch, paired with the exact values when affordable."""
    stats = run_batch(p, spec, k, seed, recursive=recursive)
    explicit = recursive_value = None
    if len(p) <= oracle_limit and not recursive:
        explicit = rv_explicit(p, spec)
        recursive_value = rv_recursive(p, spec)
    return RvReport(
        poset_id=poset_id,
        spec=spec.kind,
        rv_explicit=explicit,
        rv_recursive=recursive_value,
        empirical_rv=stats.relative_variance,
        samples=k,
    )


# -- full path enumeration ----------------------------------------------------


def path_distribution(p, spec):
    """Every Algorithm 1 path as ``(probability, estimate)``, both exact.

    The probability is the product of ``r(v)/r(S)`` and the estimate the
    product of the reciprocal ratios; they are accumulated separately.
    """
    up = p.up
    d = p.descendant_counts()
    out = []

    def walk(alive, prob, est):
        if alive.bit_count() <= 1:
            out.append((prob, est))
            return
        maxes = [v for v in iter_bits(alive) if not up[v] & alive]
        weights = _level_weights(spec, p, alive, maxes, d)
        total = sum(weights)
        for m, w in zip(maxes, weights):
            walk(alive & ~(1 << m), prob * Fraction(w) / total, est * Fraction(total) / w)

    walk(p.alive, Fraction(1), Fraction(1))
    return out


def recursive_distribution(p, spec):
    """Every Algorithm 2 outcome as ``(probability, estimate)``, both exact."""
    up, down = p.up, p.down
    d = p.descendant_counts()

    def outcomes(alive):
        if alive.bit_count() <= 1:
            return [(Fraction(1), Fraction(1))]
        comps = _components(alive, down, up)
        acc = [(Fraction(1), Fraction(multinomial([c.bit_count() for c in comps])))]
        for comp in comps:
            maxes = [v for v in iter_bits(comp) if not up[v] & comp]
            weights = _level_weights(spec, p, comp, maxes, d)
            total = sum(weights)
            local = []
            for m, w in zip(maxes, weights):
                for prob, est in outcomes(comp & ~(1 << m)):
                    local.append((prob * w / total, est * total / w))
            acc = [(pa * pb, ea * eb) for pa, ea in acc for pb, eb in local]
        return acc

    return outcomes(p.alive)


def exact_expectation(p, spec, recursive=False):
    """Probability-weighted mean of the estimator over all of its outcomes."""
    dist = recursive_distribution(p, spec) if recursive else path_distribution(p, spec)
    return sum((prob * est for prob, est in dist), Fraction(0))
