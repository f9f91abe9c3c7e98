"""Finite posets stored as dense bitset closures.

Elements are the integers ``0..n-1``.  ``down[u]`` is the bitmask of every
``v`` with ``u > v`` and ``up[v]`` the mask of every ``u`` with ``u > v``.
The orientation is "greater elements are chosen first": a linear extension
lists maximal elements before anything below them.

Deletion only clears a bit in the ``alive`` mask, so every query is
restricted to alive elements and the closure itself is never rebuilt.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyDeletedError,
    CycleError,
    EmptyPosetError,
    PosetParseError,
)


def iter_bits(mask):
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(elements):
    mask = 0
    for v in elements:
        mask |= 1 << v
    return mask


@dataclass
class CoverDag:
    """Cover edges ``(u, v)`` with ``u`` covering ``v`` (the Hasse diagram)."""

    n: int
    edges: list

    def parents(self):
        out = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[v].append(u)
        return out


@dataclass
class ComponentPartition:
    assignment: dict
    sizes: list
    masks: list = field(repr=False)

    def __len__(self):
        return len(self.sizes)


class Poset:
    """A strict partial order on ``n`` labelled elements with deletable members."""

    __slots__ = ("n", "down", "up", "alive", "labels")

    def __init__(self, n, down, up, alive=None, labels=None):
        self.n = n
        self.down = down
        self.up = up
        self.alive = (1 << n) - 1 if alive is None else alive
        self.labels = labels

    # -- construction -------------------------------------------------------

    @classmethod
    def from_relations(cls, n, pairs, labels=None):
        """Build the transitive closure of ``pairs`` where ``(u, v)`` means ``u > v``."""
        if n < 0:
            raise ValueError(f"element count must be non-negative, got {n}")
        down = [0] * n
        for u, v in pairs:
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"relation ({u}, {v}) out of range for n={n}")
            if u == v:
                raise CycleError(f"element {u} cannot be above itself")
            down[u] |= 1 << v
        # Warshall over bitset rows
        for k in range(n):
            bit = 1 << k
            row = down[k]
            for i in range(n):
                if down[i] & bit:
                    down[i] |= row
        for i in range(n):
            if down[i] >> i & 1:
                raise CycleError(f"relations imply a cycle through element {i}")
        return cls._from_down(n, down, labels=labels)

    @classmethod
    def _from_down(cls, n, down, alive=None, labels=None):
        up = [0] * n
        for u in range(n):
            bit = 1 << u
            for v in iter_bits(down[u]):
                up[v] |= bit
        return cls(n, down, up, alive=alive, labels=labels)

    @classmethod
    def antichain(cls, n):
        return cls(n, [0] * n, [0] * n)

    @classmethod
    def chain(cls, n):
        return cls.from_relations(n, [(i, i + 1) for i in range(n - 1)])

    def copy(self):
        return Poset(self.n, self.down, self.up, self.alive, self.labels)

    def restrict(self, mask):
        """A view of the sub-poset induced on ``mask`` (shares the closure rows)."""
        return Poset(self.n, self.down, self.up, self.alive & mask, self.labels)

    def compact(self):
        """Re-index the alive elements as ``0..k-1``, preserving their order."""
        keep = list(iter_bits(self.alive))
        index = {v: i for i, v in enumerate(keep)}
        down = []
        for v in keep:
            row = 0
            for w in iter_bits(self.down[v] & self.alive):
                row |= 1 << index[w]
            down.append(row)
        labels = None if self.labels is None else [self.labels[v] for v in keep]
        return Poset._from_down(len(keep), down, labels=labels), keep

    # -- queries ------------------------------------------------------------

    def __len__(self):
        return self.alive.bit_count()

    def __repr__(self):
        return f"Poset(n={self.n}, alive={len(self)}, relations={len(self.relations())})"

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        if self.n != other.n or self.alive != other.alive:
            return False
        a = self.alive
        return all(
            (self.down[v] & a) == (other.down[v] & a) for v in iter_bits(a)
        )

    def elements(self):
        return list(iter_bits(self.alive))

    def label(self, v):
        return str(v) if self.labels is None else str(self.labels[v])

    def greater(self, u, v):
        """True iff ``u > v`` and both are alive."""
        a = self.alive
        return bool(a >> u & 1 and a >> v & 1 and self.down[u] >> v & 1)

    def relations(self):
        """All alive closure pairs ``(u, v)`` with ``u > v``, sorted."""
        a = self.alive
        return [(u, v) for u in iter_bits(a) for v in iter_bits(self.down[u] & a)]

    def closure_matrix(self):
        """Dense boolean matrix view of the alive part of the closure."""
        m = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.relations():
            m[u, v] = True
        return m

    def maximal_mask(self):
        a = self.alive
        up = self.up
        mask = 0
        for v in iter_bits(a):
            if not up[v] & a:
                mask |= 1 << v
        return mask

    def maximal_elements(self):
        if not self.alive:
            raise EmptyPosetError("an empty poset has no maximal elements")
        return list(iter_bits(self.maximal_mask()))

    def descendant_counts(self):
        """``d(v)``: alive elements at or below ``v`` (0 for deleted elements)."""
        a = self.alive
        return [
            (self.down[v] & a).bit_count() + 1 if a >> v & 1 else 0
            for v in range(self.n)
        ]

    def ancestor_counts(self):
        a = self.alive
        return [
            (self.up[v] & a).bit_count() if a >> v & 1 else 0 for v in range(self.n)
        ]

    def delete_element(self, v):
        if not (0 <= v < self.n) or not self.alive >> v & 1:
            raise AlreadyDeletedError(f"element {v} is not alive")
        self.alive &= ~(1 << v)

    def component_masks(self):
        """Alive elements split by connectivity of the comparability graph."""
        remaining = self.alive
        down, up = self.down, self.up
        masks = []
        while remaining:
            seed = remaining & -remaining
            comp = seed
            frontier = seed
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

    def connected_components(self):
        masks = self.component_masks()
        assignment = {}
        for cid, m in enumerate(masks):
            for v in iter_bits(m):
                assignment[v] = cid
        return ComponentPartition(assignment, [m.bit_count() for m in masks], masks)

    def cover_parents_mask(self, v):
        """Alive elements covering ``v``: minimal members of its ancestor set."""
        anc = self.up[v] & self.alive
        down = self.down
        return mask_of(u for u in iter_bits(anc) if not down[u] & anc)

    def transitive_reduction(self):
        a = self.alive
        edges = []
        for u in iter_bits(a):
            below = self.down[u] & a
            shadow = 0
            for w in iter_bits(below):
                shadow |= self.down[w]
            for v in iter_bits(below & ~shadow):
                edges.append((u, v))
        return CoverDag(self.n, edges)

    def is_forest(self):
        """True iff every alive element has at most one covering element."""
        for v in iter_bits(self.alive):
            if self.cover_parents_mask(v).bit_count() > 1:
                return False
        return True


def from_relations(n, pairs, labels=None):
    return Poset.from_relations(n, pairs, labels=labels)


def transitive_reduction(p):
    return p.transitive_reduction()


def maximal_elements(p):
    return p.maximal_elements()


def descendant_counts(p):
    return p.descendant_counts()


def ancestor_counts(p):
    return p.ancestor_counts()


def delete_element(p, v):
    p.delete_element(v)


def connected_components(p):
    return p.connected_components()


def is_forest(p):
    return p.is_forest()


def random_poset(n, edge_prob, seed):
    """Random order on ``v_0..v_{n-1}``: each ``v_i > v_j`` (``i < j``) with prob ``edge_prob``.

    Pairs are drawn row by row (``i`` outer, ``j`` inner) from a PCG64 stream,
    then transitively completed; the result depends only on ``seed``.
    """
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random(n * (n - 1) // 2)
    down = [0] * n
    pos = 0
    direct = [0] * n
    for i in range(n):
        row = 0
        for j in range(i + 1, n):
            if draws[pos] < edge_prob:
                row |= 1 << j
            pos += 1
        direct[i] = row
    # upper-triangular: close from the bottom up
    for i in range(n - 1, -1, -1):
        row = direct[i]
        closed = row
        for j in iter_bits(row):
            closed |= down[j]
        down[i] = closed
    return Poset._from_down(n, down)


def random_forest(n, seed):
    """Random rooted forest on ``n`` elements (each element picks at most one parent)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = []
    for v in range(1, n):
        parent = int(rng.integers(-1, v))
        if parent >= 0:
            pairs.append((parent, v))
    return Poset.from_relations(n, pairs)


# -- text format ------------------------------------------------------------


def parse_poset(text, path=None):
    """Parse the ``.poset`` format: first line ``n``, then ``u v`` lines meaning ``u > v``."""
    n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            values = [int(f) for f in fields]
        except ValueError:
            raise PosetParseError(f"expected integers, got {line!r}", path, lineno) from None
        if n is None:
            if len(values) != 1 or values[0] < 0:
                raise PosetParseError("first line must hold the element count", path, lineno)
            n = values[0]
            continue
        if len(values) != 2:
            raise PosetParseError(f"expected 'u v', got {line!r}", path, lineno)
        u, v = values
        if not (0 <= u < n and 0 <= v < n):
            raise PosetParseError(f"index out of range for n={n}: {line!r}", path, lineno)
        pairs.append((u, v))
    if n is None:
        raise PosetParseError("missing element count", path, None)
    try:
        return Poset.from_relations(n, pairs)
    except CycleError as exc:
        raise CycleError(f"{path}: {exc}" if path else str(exc)) from None


def load_poset(path):
    path = Path(path)
    return parse_poset(path.read_text(), path=str(path))


def format_poset(p):
    """Serialise as ``n`` followed by the cover edges of the alive part."""
    q, _ = p.compact() if p.alive != (1 << p.n) - 1 else (p, None)
    lines = [str(q.n)]
    lines.extend(f"{u} {v}" for u, v in sorted(q.transitive_reduction().edges))
    return "\n".join(lines) + "\n"


def save_poset(p, path):
    Path(path).write_text(format_poset(p))
