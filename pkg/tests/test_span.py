from fractions import Fraction as F

from hypothesis import given, strategies as st

from nsboxes.constraints import LinearConstraint
from nsboxes.span import SpanEngine

from oracles import rank

WIDTH = 6


def row(vec, label=""):
    items = [(i, c) for i, c in enumerate(vec) if c]
    return LinearConstraint(tuple(i for i, _ in items), tuple(c for _, c in items), label)


def dense(c):
    out = [0] * WIDTH
    for i, v in zip(c.indices, c.coeffs):
        out[i] = v
    return out


def test_chain_certificate_telescopes():
    # a - b, b - c  =>  a - c
    rows = [row([1, -1, 0, 0, 0, 0]), row([0, 1, -1, 0, 0, 0])]
    eng = SpanEngine(rows)
    assert eng.add_targets([row([1, 0, -1, 0, 0, 0])]) is None
    assert eng.recipes[0][0] == "chain"
    assert eng.certificate(0) == {0: 1, 1: 1}
    assert eng.verify_structure(0)


def test_non_member_is_returned():
    eng = SpanEngine([row([1, -1, 0, 0, 0, 0])])
    target = row([0, 0, 1, -1, 0, 0])
    assert eng.add_targets([target]) is target


def test_general_rows_use_elimination():
    rows = [row([1, 2, 0, 0, 0, 0]), row([0, 1, 3, 0, 0, 0])]
    eng = SpanEngine(rows)
    target = row([2, 7, 9, 0, 0, 0])
    assert eng.add_targets([target]) is None
    lam = eng.certificate(0)
    combo = [sum(F(lam.get(j, 0)) * dense(rows[j])[i] for j in range(2)) for i in range(WIDTH)]
    assert combo == dense(target)


vectors = st.lists(st.integers(-2, 2), min_size=WIDTH, max_size=WIDTH)


@given(st.lists(vectors, min_size=1, max_size=5), vectors)
def test_membership_matches_rank(premises, target):
    rows = [row(v) for v in premises]
    eng = SpanEngine(rows)
    t = row(target)
    inside = eng.add_targets([t]) is None
    assert inside == (rank(premises + [target]) == rank(premises))
    if inside:
        lam = eng.certificate(0)
        combo = [sum(F(lam.get(j, 0)) * premises[j][i] for j in range(len(premises))) for i in range(WIDTH)]
        assert combo == target


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=8),
       st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_two_set_edges(edges, query):
    # cells 0..4 as singleton "sum-sets": x_a - x_b rows
    def diff(a, b):
        v = [0] * WIDTH
        v[a] += 1
        v[b] -= 1
        return v

    premises = [diff(a, b) for a, b in edges if a != b]
    if not premises:
        return
    target = diff(*query)
    eng = SpanEngine([row(v) for v in premises])
    inside = eng.add_targets([row(target)]) is None
    assert inside == (rank(premises + [target]) == rank(premises))
    if inside and any(target):
        assert eng.verify_structure(0)
