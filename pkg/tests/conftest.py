import itertools

import pytest

from linext.poset import Poset


def fig1():
    # a=0, b=1, c=2, d=3 with a > c, b > c, b > d
    return Poset.from_relations(4, [(0, 2), (1, 2), (1, 3)], labels="abcd")


def fig2():
    # a=0, b=1, c=2, d=3, e=4 with a > d, b > d, b > e; c isolated
    return Poset.from_relations(5, [(0, 3), (1, 3), (1, 4)], labels="abcde")


def out_star():
    return Poset.from_relations(4, [(0, 1), (0, 2), (0, 3)])


def two_chains():
    return Poset.from_relations(4, [(0, 1), (2, 3)])


def out_tree7():
    return Poset.from_relations(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])


def brute_force_count(p):
    """Count permutations of the alive elements that respect every relation."""
    elems = p.elements()
    rels = p.relations()
    total = 0
    for perm in itertools.permutations(elems):
        pos = {v: i for i, v in enumerate(perm)}
        if all(pos[u] < pos[v] for u, v in rels):
            total += 1
    return total


@pytest.fixture
def fig1_poset():
    return fig1()


@pytest.fixture
def fig2_poset():
    return fig2()


CRITERIA = []


def record_criterion(number, title, ok, detail=""):
    CRITERIA.append((number, title, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(CRITERIA, key=lambda c: c[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
