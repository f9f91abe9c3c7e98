"""Exact counting of linear extensions, used as ground truth for the samplers."""

import itertools
import math

from .errors import NotForestError, NotMaximalError, SizeLimitError
from .poset import Poset, iter_bits

DEFAULT_SIZE_LIMIT = 24
DEFAULT_STATE_LIMIT = 4_000_000
DEFAULT_EXTENSION_LIMIT = 10**6
DEFAULT_LABELED_LIMIT = 5


def multinomial(sizes):
    """``(sum sizes)! / prod(size!)`` as an exact integer."""
    total = 0
    result = 1
    for k in sizes:
        total += k
        result *= math.comb(total, k)
    return result


def _ideal_counter(p, max_states):
    up = p.up
    memo = {0: 1}

    def count(alive):
        hit = memo.get(alive)
        if hit is not None:
            return hit
        total = 0
        for v in iter_bits(alive):
            if not up[v] & alive:
                total += count(alive & ~(1 << v))
        if len(memo) >= max_states:
            raise SizeLimitError(
                f"exact count needs more than {max_states} memoised states; "
                "use the estimator instead"
            )
        memo[alive] = total
        return total

    return count


def exact_count(p, limit=DEFAULT_SIZE_LIMIT, max_states=DEFAULT_STATE_LIMIT):
    """Number of linear extensions of the alive part of ``p``.

    Memoised over the sets of still-unplaced elements, which are always
    downward closed, so the table holds at most one entry per order ideal.
    """
    size = len(p)
    if size > limit:
        raise SizeLimitError(
            f"poset has {size} elements, exact counting is limited to {limit}"
        )
    return _ideal_counter(p, max_states)(p.alive)


def count_starting_with(p, m, **kwargs):
    """Linear extensions of ``p`` whose first (top) element is ``m``."""
    if not (p.alive >> m & 1) or p.up[m] & p.alive:
        raise NotMaximalError(f"element {m} is not maximal")
    q = p.copy()
    q.delete_element(m)
    return exact_count(q, **kwargs)


def enumerate_extensions(p, limit=DEFAULT_EXTENSION_LIMIT):
    """Every linear extension as a tuple, maximal-first, in lexicographic order."""
    total = exact_count(p)
    if total > limit:
        raise SizeLimitError(f"{total} extensions exceed the enumeration limit {limit}")
    up = p.up
    out = []
    prefix = []

    def walk(alive):
        if not alive:
            out.append(tuple(prefix))
            return
        for v in iter_bits(alive):
            if not up[v] & alive:
                prefix.append(v)
                walk(alive & ~(1 << v))
                prefix.pop()

    walk(p.alive)
    return out


def forest_count(p):
    """``n! / prod d(v)`` for a forest order."""
    if not p.is_forest():
        raise NotForestError("poset is not a forest")
    d = p.descendant_counts()
    denom = 1
    for v in iter_bits(p.alive):
        denom *= d[v]
    count, rem = divmod(math.factorial(len(p)), denom)
    assert rem == 0
    return count


def component_product_count(p, counter=exact_count):
    """Count via the multinomial split over connected components."""
    masks = p.component_masks()
    total = multinomial([m.bit_count() for m in masks])
    for m in masks:
        total *= counter(p.restrict(m))
    return total


def enumerate_labeled_posets(n, limit=DEFAULT_LABELED_LIMIT):
    """Yield every strict partial order on ``0..n-1`` exactly once.

    Each unordered pair is unrelated or oriented either way; candidates that
    are not transitive are skipped.  Counts run 1, 1, 3, 19, 219, 4231.
    """
    if n > limit:
        raise SizeLimitError(f"labeled enumeration limited to n <= {limit}, got {n}")
    pairs = list(itertools.combinations(range(n), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        down = [0] * n
        for (i, j), s in zip(pairs, states):
            if s == 1:
                down[i] |= 1 << j
            elif s == 2:
                down[j] |= 1 << i
        if all(
            (down[w] & ~down[u]) == 0 for u in range(n) for w in iter_bits(down[u])
        ):
            yield Poset._from_down(n, down)
