from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from nsboxes.attack import HALF, HashFn, best_attack, validate_element
from nsboxes.boxes import noisy_pr_box, product_system
from nsboxes.constraints import LinearConstraint
from nsboxes.errors import DomainError
from nsboxes.lp import LinearProgram, attack_program, export_lp, optimal_attack, solve, sweep_p

from oracles import lp_brute_force

EPS = F(1, 10)
P1 = noisy_pr_box(EPS)
ID1 = HashFn.named("identity", 1)


def _eq(coeffs, label="eq"):
    items = [(i, c) for i, c in enumerate(coeffs) if c]
    return LinearConstraint(tuple(i for i, _ in items), tuple(c for _, c in items), label)


def test_zero_objective_keeps_start():
    lp = attack_program(P1, ID1)
    lp.objective = {}
    sol = solve(lp)
    assert sol.optimum == 0 and sol.verify(lp)


def test_single_cell_under_normalization_only():
    for j in (0, 5, 15):
        lp = attack_program(P1, ID1, family=None, include_ab=False)
        lp.objective = {j: F(1)}
        sol = solve(lp)
        assert sol.optimum == min(2 * P1.cells[j], 1)
        assert sol.verify(lp)


def test_worked_instance_dominates_construction():
    best = optimal_attack(P1, ID1)
    assert best.d >= F(1, 10) and best.d >= best_attack(P1, ID1).d
    assert best.solution.verify(best.program)
    assert validate_element(P1, HALF, best.element.system, "pairwise-box")
    assert best.b0 >= F(1, 5)


def test_constant_key():
    best = optimal_attack(P1, HashFn.named("const0", 1))
    assert best.d == HALF


@pytest.mark.parametrize("code", range(4))
def test_monotone_in_constraints_n1(code):
    f = HashFn.from_code(1, code)
    full = optimal_attack(P1, f, family="full").d
    mid = optimal_attack(P1, f, family="pairwise-box").d
    ab = optimal_attack(P1, f, family="ab").d
    free = optimal_attack(P1, f, family=None, include_ab=False).d
    assert full <= mid <= ab <= free


def test_verify_rejects_tampering():
    best = optimal_attack(P1, ID1)
    sol = best.solution
    sol.optimum += 1
    assert not sol.verify(best.program)
    sol.optimum -= 1
    j = next(iter(sol.at_upper))
    sol.at_upper[j] = not sol.at_upper[j]
    assert not sol.verify(best.program)


def test_infeasible_start_rejected():
    lp = LinearProgram(2, {0: F(1)}, "max", [_eq([1, 1])], [F(1)], [F(0)] * 2, [F(1)] * 2, start=[F(1), F(1)])
    with pytest.raises(DomainError):
        solve(lp)


def test_cap_and_p_range():
    P2 = product_system(EPS, 3)
    with pytest.raises(DomainError):
        optimal_attack(P2, HashFn.named("xor", 3))
    with pytest.raises(DomainError):
        attack_program(P1, ID1, p=1)


def test_p_sweep_reports():
    rows = sweep_p(P1, ID1, [F(1, 4), F(1, 2)])
    assert [p for p, _ in rows] == [F(1, 4), F(1, 2)]
    assert all(0 <= d <= HALF for _, d in rows)


def test_export_has_exact_comments():
    text = export_lp(attack_program(P1, ID1))
    assert text.startswith("\\") and "Maximize" in text and text.rstrip().endswith("End")
    assert "p_0_0_0_1 <= 0.1  \\ 0/1 , 1/10" in text
    assert " = 1\n" in text


@st.composite
def tiny_lps(draw):
    n = draw(st.integers(2, 4))
    start = [draw(st.fractions(0, 1, max_denominator=4)) for _ in range(n)]
    lower = [s - draw(st.fractions(0, 1, max_denominator=3)) for s in start]
    upper = [s + draw(st.fractions(0, 1, max_denominator=3)) for s in start]
    rows = []
    for _ in range(draw(st.integers(0, 2))):
        rows.append([draw(st.integers(-2, 2)) for _ in range(n)])
    rhs = [sum(F(c) * s for c, s in zip(r, start)) for r in rows]
    objective = [draw(st.integers(-3, 3)) for _ in range(n)]
    sense = draw(st.sampled_from(["max", "min"]))
    return n, start, lower, upper, rows, rhs, objective, sense


@given(tiny_lps())
def test_solver_matches_vertex_enumeration(case):
    n, start, lower, upper, rows, rhs, objective, sense = case
    lp = LinearProgram(n, {j: F(c) for j, c in enumerate(objective) if c}, sense,
                       [_eq(r, f"r{k}") for k, r in enumerate(rows)], rhs, lower, upper, start=start)
    sol = solve(lp)
    assert sol.verify(lp)
    assert sol.optimum == lp_brute_force(objective, rows, rhs, lower, upper, sense)
