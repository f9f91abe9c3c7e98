"""Sequential importance sampling estimators for the number of linear extensions.

A sample walks one root-to-leaf path of the decision tree whose branches are
the currently maximal elements.  At each branch the element ``v`` is taken
with probability ``r(v) / r(S)`` and the estimate is multiplied by the
reciprocal, so the product over a path is an unbiased estimate of the leaf
count.  Estimates are carried in log space; the integer-weighted importance
functions additionally keep the exact rational value.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DomainError,
    EmptyPosetError,
    InvalidExtensionError,
    NotForestError,
)
from .oracle import multinomial
from .poset import iter_bits

KINDS = ("uniform", "descendants", "asq", "table")
ALIASES = {"desc": "descendants", "d": "descendants", "u": "uniform"}


@dataclass(frozen=True)
class ImportanceSpec:
    """Which importance function to use.

    ``table`` is only meaningful for ``kind == "table"``: either a sequence of
    per-element weights or a callable ``table(view, v)`` that receives the
    current (partially deleted) poset.  Integer or ``Fraction`` tables are
    accumulated exactly; pass ``exact=False`` to force float arithmetic.
    """

    kind: str = "uniform"
    table: object = field(default=None, compare=False)
    exact: bool = None

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown importance kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "table" and self.table is None:
            raise ValueError("table importance needs a table")
        if self.exact is None:
            if kind in ("uniform", "descendants"):
                exact = True
            elif kind == "table" and not callable(self.table):
                exact = all(isinstance(w, (int, Fraction)) for w in self.table)
            else:
                exact = False
            object.__setattr__(self, "exact", exact)

    @property
    def needs_view(self):
        return self.kind == "table" and callable(self.table)


UNIFORM = ImportanceSpec("uniform")
DESCENDANTS = ImportanceSpec("descendants")
ASQ = ImportanceSpec("asq")
SHIPPED_SPECS = (UNIFORM, DESCENDANTS, ASQ)


def importance(spec, v, d_v, i, view=None, rational=False):
    """Importance of element ``v`` with ``d_v`` descendants when ``i`` elements remain."""
    if d_v < 1 or d_v > i:
        raise DomainError(f"need 1 <= d(v) <= i, got d(v)={d_v}, i={i}")
    kind = spec.kind
    if kind == "uniform":
        return 1
    if kind == "descendants":
        return d_v
    if kind == "asq":
        if rational:
            return Fraction(i + d_v - 1, i - d_v + 1)
        return (i + d_v - 1) / (i - d_v + 1)
    w = spec.table(view, v) if callable(spec.table) else spec.table[v]
    if w <= 0:
        raise DomainError(f"importance of element {v} must be positive, got {w}")
    return Fraction(w) if rational else w


def log_of(value):
    """Natural log of a positive int, Fraction or float without overflow."""
    if isinstance(value, Fraction):
        return math.log(value.numerator) - math.log(value.denominator)
    return math.log(value)


@dataclass
class LogEstimate:
    log_value: float
    exact: object = None

    @property
    def value(self):
        if self.exact is not None:
            return self.exact
        return math.exp(self.log_value)

    def __float__(self):
        try:
            return float(self.value)
        except OverflowError:
            return math.inf


@dataclass
class SampledForest:
    """Spanning forest recorded during one sample: ``parent[v]`` is the last ancestor deleted."""

    parent: list
    order: tuple

    def descendant_counts(self):
        d = [0] * len(self.parent)
        for v in self.order:
            d[v] = 1
        for v in reversed(self.order):
            u = self.parent[v]
            if u is not None:
                d[u] += d[v]
        return d

    def count(self):
        d = self.descendant_counts()
        denom = 1
        for v in self.order:
            denom *= d[v]
        return math.factorial(len(self.order)) // denom

    def edges(self):
        return sorted((u, v) for v, u in enumerate(self.parent) if u is not None)


def _make_result(exact, num, den, log_value):
    if exact:
        value = Fraction(num, den)
        if value.denominator == 1:
            value = value.numerator
        return LogEstimate(log_of(value), value)
    return LogEstimate(log_value, None)


def _walk(p, spec, uniforms=None, forced=None, track_forest=False, rational=False):
    """Algorithm 1 on a private copy of ``p``.

    Either ``uniforms`` (one draw in [0, 1) per branching step) or ``forced``
    (a full extension to replay) drives the choices.
    """
    alive = p.alive
    size = alive.bit_count()
    if not size:
        raise EmptyPosetError("cannot sample an empty poset")
    down, up = p.down, p.up
    kind = spec.kind
    exact = spec.exact or rational
    with_view = spec.needs_view
    if kind in ("descendants", "asq"):
        d = [(down[v] & alive).bit_count() + 1 if alive >> v & 1 else 0 for v in range(p.n)]
    else:
        d = None
    anc = [0] * p.n
    maxmask = 0
    for v in iter_bits(alive):
        c = (up[v] & alive).bit_count()
        anc[v] = c
        if not c:
            maxmask |= 1 << v
    parent = [None] * p.n if track_forest else None
    order = []
    num = den = 1
    logv = 0.0
    step = 0
    while size > 1:
        maxes = list(iter_bits(maxmask))
        if kind == "uniform":
            weights = None
            total = len(maxes)
        elif kind == "descendants":
            weights = [d[v] for v in maxes]
            total = sum(weights)
        else:
            view = p.restrict(alive) if with_view else None
            if kind == "asq" and not rational:
                weights = [(size + d[v] - 1) / (size - d[v] + 1) for v in maxes]
            else:
                weights = [
                    importance(spec, v, d[v] if d else 1, size, view, rational)
                    for v in maxes
                ]
            total = sum(weights)
        if forced is not None:
            chosen = forced[step]
            if not maxmask >> chosen & 1:
                raise InvalidExtensionError(
                    f"element {chosen} is not maximal at position {step}"
                )
            idx = maxes.index(chosen)
        else:
            target = uniforms[step] * total
            idx = 0
            if weights is None:
                acc = 1
                while acc < target:
                    idx += 1
                    acc += 1
            else:
                acc = weights[0]
                last = len(maxes) - 1
                while acc < target and idx < last:
                    idx += 1
                    acc += weights[idx]
            chosen = maxes[idx]
        w = 1 if weights is None else weights[idx]
        if exact:
            num *= total
            den *= w
        else:
            logv += math.log(total / w)
        order.append(chosen)
        bit = 1 << chosen
        alive &= ~bit
        maxmask &= ~bit
        for v in iter_bits(down[chosen] & alive):
            anc[v] -= 1
            if not anc[v]:
                maxmask |= 1 << v
                if parent is not None:
                    parent[v] = chosen
        size -= 1
        step += 1
    last = maxmask.bit_length() - 1
    if forced is not None and forced[step] != last:
        raise InvalidExtensionError(f"element {forced[step]} is not maximal at position {step}")
    order.append(last)
    est = _make_result(exact, num, den, logv)
    forest = SampledForest(parent, tuple(order)) if track_forest else None
    return est, tuple(order), forest


def _draws(rng, count):
    return rng.random(count).tolist()


def single_estimate(p, spec, rng):
    """One Algorithm 1 sample: ``(LogEstimate, extension)``."""
    est, order, _ = _walk(p, spec, _draws(rng, max(len(p), 1)))
    return est, order


def replay(p, spec, extension, rational=False):
    """Estimate that Algorithm 1 produces when its choices follow ``extension``."""
    extension = tuple(extension)
    if sorted(extension) != p.elements():
        raise InvalidExtensionError("extension is not a permutation of the alive elements")
    est, _, _ = _walk(p, spec, forced=extension, rational=rational)
    return est


def sample_with_forest(p, spec, rng):
    """Algorithm 1 sample plus the spanning forest it builds and that forest's log count."""
    est, order, forest = _walk(p, spec, _draws(rng, max(len(p), 1)), track_forest=True)
    return est, forest, math.log(forest.count())


def sample_forest_extension_uniform(p, rng):
    """Uniformly random linear extension of a forest order."""
    if not p.is_forest():
        raise NotForestError("uniform sampling via descendant importance needs a forest")
    _, order = single_estimate(p, DESCENDANTS, rng)
    return order


def lower_bound_exact(p):
    """``n! / prod d(v)`` as a ``Fraction``."""
    if not p.alive:
        raise EmptyPosetError("empty poset")
    d = p.descendant_counts()
    denom = 1
    for v in iter_bits(p.alive):
        denom *= d[v]
    return Fraction(math.factorial(len(p)), denom)


def lower_bound(p):
    """Log of the descendant-count lower bound on the number of extensions."""
    return log_of(lower_bound_exact(p))


# -- Algorithm 2 -------------------------------------------------------------


def _components(mask, down, up):
    masks = []
    remaining = mask
    while remaining:
        seed = remaining & -remaining
        comp = frontier = seed
        while frontier:
            reach = 0
            for v in iter_bits(frontier):
                reach |= down[v] | up[v]
            reach &= remaining & ~comp
            comp |= reach
            frontier = reach
        masks.append(comp)
        remaining &= ~comp
    return masks


class _Recursive:
    """Algorithm 2, recomputing components after every deletion."""

    def __init__(self, p, spec, draws, rational=False):
        self.p = p
        self.spec = spec
        self.draws = draws
        self.pos = 0
        self.rational = rational
        self.exact = spec.exact or rational
        alive = p.alive
        self.d = [(p.down[v] & alive).bit_count() + 1 for v in range(p.n)]
        self.num = 1
        self.den = 1
        self.logv = 0.0

    def _mul(self, top, bottom):
        if self.exact:
            self.num *= top
            self.den *= bottom
        else:
            self.logv += math.log(top / bottom)

    def run(self, mask):
        if mask.bit_count() <= 1:
            return
        down, up = self.p.down, self.p.up
        comps = _components(mask, down, up)
        if len(comps) > 1:
            self._mul(multinomial([c.bit_count() for c in comps]), 1)
        for comp in comps:
            maxes = [v for v in iter_bits(comp) if not up[v] & comp]
            size = comp.bit_count()
            kind = self.spec.kind
            d = self.d
            if kind == "uniform":
                weights = [1] * len(maxes)
            elif kind == "descendants":
                weights = [d[v] for v in maxes]
            elif kind == "asq" and not self.rational:
                weights = [(size + d[v] - 1) / (size - d[v] + 1) for v in maxes]
            else:
                view = self.p.restrict(comp) if self.spec.needs_view else None
                weights = [
                    importance(self.spec, v, d[v], size, view, self.rational)
                    for v in maxes
                ]
            total = sum(weights)
            target = self.draws[self.pos] * total
            self.pos += 1
            idx = 0
            acc = weights[0]
            while acc < target and idx < len(maxes) - 1:
                idx += 1
                acc += weights[idx]
            self._mul(total, weights[idx])
            self.run(comp & ~(1 << maxes[idx]))

    def result(self):
        return _make_result(self.exact, self.num, self.den, self.logv)


def recursive_estimate(p, spec, rng):
    """One Algorithm 2 (connected-components) sample."""
    if not p.alive:
        raise EmptyPosetError("cannot sample an empty poset")
    walker = _Recursive(p, spec, _draws(rng, len(p)))
    walker.run(p.alive)
    return walker.result()


# -- batches -----------------------------------------------------------------


def sample_rng(seed, index):
    """Independent generator for sample ``index`` of the batch seeded by ``seed``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


@dataclass
class BatchStats:
    samples: int
    mean_estimate: float
    mean_log_estimate: float
    relative_variance: float
    min_log: float
    max_log: float
    std_error: float
    lower_bound: float = None
    best_upper_bound: float = None
    log_values: np.ndarray = field(default=None, repr=False)

    def within(self, target, k_sigma=3.0):
        return abs(self.mean_estimate - target) <= k_sigma * self.std_error


def summarize(log_values, exact_values=None):
    """Mean, relative variance and standard error from log-space samples.

    All arithmetic is shifted by the largest log so that estimates far beyond
    the float range still give finite ratios.
    """
    logs = np.asarray(log_values, dtype=float)
    k = logs.size
    top = float(logs.max())
    bottom = float(logs.min())
    if exact_values is not None and all(v == exact_values[0] for v in exact_values):
        value = exact_values[0]
        try:
            mean = float(value)
        except OverflowError:
            mean = math.inf
        return mean, log_of(value), 0.0, top, bottom, 0.0
    w = np.exp(logs - top)
    m1 = w.mean()
    m2 = np.mean(w * w)
    rv = max(float(m2 / (m1 * m1) - 1.0), 0.0)
    mean_log = top + math.log(m1)
    try:
        mean = math.exp(mean_log)
    except OverflowError:
        mean = math.inf
    if k > 1:
        se = mean * math.sqrt(rv * k / (k - 1) / k)
    else:
        se = math.inf
    return mean, mean_log, rv, top, bottom, se


def _batch_chunk(p, spec, seed, start, stop, recursive, track_forest):
    logs = []
    exacts = [] if spec.exact else None
    best_upper = math.inf
    for i in range(start, stop):
        rng = sample_rng(seed, i)
        if recursive:
            est = recursive_estimate(p, spec, rng)
        elif track_forest:
            est, forest, upper = sample_with_forest(p, spec, rng)
            best_upper = min(best_upper, upper)
        else:
            est, _ = single_estimate(p, spec, rng)
        logs.append(est.log_value)
        if exacts is not None:
            exacts.append(est.exact)
    return logs, exacts, best_upper


def _chunks(k, workers):
    parts = max(1, min(k, workers * 4))
    bounds = [k * j // parts for j in range(parts + 1)]
    return [(bounds[j], bounds[j + 1]) for j in range(parts) if bounds[j] < bounds[j + 1]]


def run_batch(p, spec, k, seed, recursive=False, workers=1, track_forest=False):
    """``k`` independent samples; results depend only on ``(p, spec, k, seed, recursive)``."""
    if k < 1:
        raise ValueError("need at least one sample")
    if not p.alive:
        raise EmptyPosetError("cannot sample an empty poset")
    track_forest = track_forest and not recursive
    if workers > 1 and k > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_batch_chunk, p, spec, seed, a, b, recursive, track_forest)
                for a, b in _chunks(k, workers)
            ]
            parts = [f.result() for f in futures]
    else:
        parts = [_batch_chunk(p, spec, seed, 0, k, recursive, track_forest)]
    logs = [x for part in parts for x in part[0]]
    exacts = None if parts[0][1] is None else [x for part in parts for x in part[1]]
    best_upper = min(part[2] for part in parts)
    mean, mean_log, rv, top, bottom, se = summarize(logs, exacts)
    return BatchStats(
        samples=k,
        mean_estimate=mean,
        mean_log_estimate=mean_log,
        relative_variance=rv,
        min_log=bottom,
        max_log=top,
        std_error=se,
        lower_bound=lower_bound(p) if spec.kind == "descendants" else None,
        best_upper_bound=best_upper if track_forest else None,
        log_values=np.asarray(logs),
    )
