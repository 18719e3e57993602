"""Eve's best single partition element, as an exact linear program.

Variables are the cells of a candidate ``P^{z=0}``.  Feasibility is
``0 <= var <= P.cell / p`` plus per-input normalization plus the imposed
non-signalling equalities, so ``var = P`` is always feasible and the
simplex starts there (no phase one).

The solver is a bounded-variable primal simplex on a compact tableau over
``gmpy2.mpq``.  Pricing is Dantzig's largest reduced cost; after a
degenerate pivot it switches to the smallest-index rule until progress
resumes, which rules out cycling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from . import bits
from .attack import DEFAULT_FAMILY, HashFn, PartitionElement, _cached_constraints, _family_key, complement_element
from .boxes import BoxSystem, as_fraction
from .constraints import FamilySpec, LinearConstraint
from .errors import DomainError

LP_CAP = 2
_PRIME = (1 << 61) - 1


@dataclass
class LinearProgram:
    """``optimize objective . x`` subject to ``equalities[k] . x = rhs[k]`` and ``lower <= x <= upper``."""

    n_vars: int
    objective: dict[int, Fraction]
    sense: str  # "max" or "min"
    equalities: list[LinearConstraint]
    rhs: list[Fraction]
    lower: list[Fraction]
    upper: list[Fraction]
    names: list[str] = field(default_factory=list)
    start: list[Fraction] | None = None

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise DomainError("sense must be 'max' or 'min'")
        if len(self.equalities) != len(self.rhs):
            raise DomainError("one right-hand side per equality")
        if not self.names:
            self.names = [f"x{j}" for j in range(self.n_vars)]

    def value(self, x: Sequence) -> Fraction:
        return sum((Fraction(c) * Fraction(x[j]) for j, c in self.objective.items()), Fraction(0))

    def violations(self, x: Sequence) -> list[str]:
        """Every equality or bound the point breaks (empty when feasible)."""
        bad = []
        for row, b in zip(self.equalities, self.rhs):
            if sum((Fraction(c) * Fraction(x[i]) for i, c in zip(row.indices, row.coeffs)), Fraction(0)) != b:
                bad.append(row.label)
        for j in range(self.n_vars):
            if not self.lower[j] <= Fraction(x[j]) <= self.upper[j]:
                bad.append(f"bound on {self.names[j]}")
        return bad


@dataclass
class LPSolution:
    optimum: Fraction
    assignment: list[Fraction]
    basis: list[int]                    # basic variable per tableau row
    at_upper: dict[int, bool]           # nonbasic variable -> sits at its upper bound
    directions: dict[int, dict[int, Fraction]]  # nonbasic j -> coefficients of x_B along the edge leaving j
    pivots: int = 0

    def verify(self, lp: LinearProgram) -> bool:
        """Independent optimality check from the stored basis.

        Each nonbasic ``j`` defines the edge direction ``e_j - sum_i T_ij e_{B_i}``.
        We confirm every direction lies in the equality null space, the basic
        columns have full rank (modulo a large prime, which cannot exceed the
        rational rank), and no direction improves the objective from the
        bound where ``j`` sits.  Together these certify global optimality.
        """
        x = self.assignment
        if lp.violations(x) or lp.value(x) != self.optimum:
            return False
        sign = 1 if lp.sense == "max" else -1
        rows = [dict(zip(r.indices, r.coeffs)) for r in lp.equalities]
        by_var: dict[int, list[tuple[int, object]]] = {}
        for k, row in enumerate(rows):
            for j, c in row.items():
                by_var.setdefault(j, []).append((k, c))
        basic = set(self.basis)
        if len(basic) != len(self.basis) or basic & set(self.at_upper) or len(basic) + len(self.at_upper) != lp.n_vars:
            return False
        for j, up in self.at_upper.items():
            if x[j] != (lp.upper[j] if up else lp.lower[j]):
                return False
            d = {j: Fraction(1)}
            for i, t in self.directions[j].items():
                d[i] = -Fraction(t)
            acc: dict[int, Fraction] = {}
            for var, coef in d.items():
                for k, c in by_var.get(var, ()):
                    acc[k] = acc.get(k, 0) + c * coef
            if any(acc.values()):
                return False
            r = sign * sum((Fraction(lp.objective.get(var, 0)) * coef for var, coef in d.items()), Fraction(0))
            if lp.lower[j] < lp.upper[j] and (r < 0 if up else r > 0):
                return False
        return _rank_mod_p(rows, self.basis) == len(self.basis)


def _rank_mod_p(rows: list[dict], cols: list[int]) -> int:
    keep = set(cols)
    mat = []
    for row in rows:
        scale = math.lcm(*(Fraction(c).denominator for c in row.values())) if row else 1
        r = {j: int(Fraction(c) * scale) % _PRIME for j, c in row.items() if j in keep}
        r = {j: c for j, c in r.items() if c}
        if r:
            mat.append(r)
    rank = 0
    pivots: dict[int, dict[int, int]] = {}
    for r in mat:
        while r:
            lead = min(r)
            if lead not in pivots:
                inv = pow(r[lead], -1, _PRIME)
                pivots[lead] = {j: c * inv % _PRIME for j, c in r.items()}
                rank += 1
                break
            k = r[lead]
            for j, c in pivots[lead].items():
                w = (r.get(j, 0) - k * c) % _PRIME
                if w:
                    r[j] = w
                else:
                    r.pop(j, None)
    return rank


class _Tableau:
    """Compact tableau ``x_B = beta - T x_N`` kept through explicit values ``x``."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n = lp.n_vars
        self.lo = [mpq(b) for b in lp.lower]
        self.hi = [mpq(b) for b in lp.upper]
        sign = 1 if lp.sense == "max" else -1
        self.c = [mpq(0)] * n
        for j, v in lp.objective.items():
            self.c[j] = sign * mpq(v)
        basis, rref = _rref(lp)
        self.basis = basis
        self.row_of = {b: i for i, b in enumerate(basis)}
        basic = set(basis)
        self.nonbasic = [j for j in range(n) if j not in basic]
        self.col_of = {j: k for k, j in enumerate(self.nonbasic)}
        # T[i][k]: coefficient of nonbasic nonbasic[k] in row i
        self.T = [[row.get(j, mpq(0)) for j in self.nonbasic] for row in rref]
        start = lp.start
        if start is None:
            raise DomainError("the solver needs a feasible starting point")
        self.x = [mpq(v) for v in start]
        self.r = [self.c[j] - sum((self.c[b] * self.T[i][k] for i, b in enumerate(basis)), mpq(0))
                  for k, j in enumerate(self.nonbasic)]
        self.pivots = 0

    def _ratio(self, k: int, s: int):
        """Largest step along nonbasic column k in direction s, and the blocking row (None for a bound flip).

        Ties go to the bound flip, then to the smallest blocking variable index.
        """
        j = self.nonbasic[k]
        best = (self.hi[j] - self.x[j]) if s > 0 else (self.x[j] - self.lo[j])
        leave, leave_var = None, None
        for i, row in enumerate(self.T):
            t = row[k]
            if not t:
                continue
            delta = -t * s
            b = self.basis[i]
            lim = (self.hi[b] - self.x[b]) / delta if delta > 0 else (self.x[b] - self.lo[b]) / -delta
            if lim < best or (lim == best and leave is not None and b < leave_var):
                best, leave, leave_var = lim, i, b
        return best, leave

    def _move(self, k: int, s: int, step) -> None:
        if not step:
            return
        j = self.nonbasic[k]
        self.x[j] += s * step
        for i, row in enumerate(self.T):
            if row[k]:
                self.x[self.basis[i]] -= row[k] * s * step

    def _pivot(self, i: int, k: int) -> None:
        T = self.T
        prow = T[i]
        a = prow[k]
        inv = 1 / a
        new_prow = [v * inv for v in prow]
        new_prow[k] = inv
        for row_i, row in enumerate(T):
            if row_i == i:
                continue
            f = row[k]
            if not f:
                continue
            for col, v in enumerate(prow):
                if v:
                    row[col] -= f * v * inv
            row[k] = -f * inv
        rq = self.r[k]
        if rq:
            for col, v in enumerate(prow):
                if v:
                    self.r[col] -= rq * v * inv
            self.r[k] = -rq * inv
        T[i] = new_prow
        entering, leaving = self.nonbasic[k], self.basis[i]
        self.basis[i] = entering
        self.nonbasic[k] = leaving
        self.row_of = {b: idx for idx, b in enumerate(self.basis)}
        self.col_of[leaving] = k
        del self.col_of[entering]
        self.pivots += 1

    def _snap(self, k: int) -> None:
        """Pin a nonbasic variable that has just reached a bound to that bound."""
        j = self.nonbasic[k]
        if self.x[j] - self.lo[j] < self.hi[j] - self.x[j]:
            self.x[j] = self.lo[j]
        else:
            self.x[j] = self.hi[j]

    def purify(self) -> None:
        """Push nonbasic variables sitting strictly inside their bounds onto a bound."""
        for j in sorted(self.nonbasic):
            k = self.col_of.get(j)
            if k is None or self.x[j] in (self.lo[j], self.hi[j]):
                continue
            s = 1 if self.r[k] > 0 else -1
            step, leave = self._ratio(k, s)
            self._move(k, s, step)
            if leave is not None:
                self._pivot(leave, k)
            self._snap(k)

    def optimize(self) -> None:
        bland = False
        while True:
            choice, best = None, mpq(0)
            for k, j in enumerate(self.nonbasic):
                if self.lo[j] == self.hi[j]:
                    continue
                rk = self.r[k]
                if rk > 0 and self.x[j] == self.lo[j]:
                    gain, s = rk, 1
                elif rk < 0 and self.x[j] == self.hi[j]:
                    gain, s = -rk, -1
                else:
                    continue
                if bland:
                    if choice is None or j < self.nonbasic[choice[0]]:
                        choice = (k, s)
                elif gain > best or (gain == best and choice is not None and j < self.nonbasic[choice[0]]):
                    choice, best = (k, s), gain
            if choice is None:
                return
            k, s = choice
            step, leave = self._ratio(k, s)
            self._move(k, s, step)
            if leave is not None:
                self._pivot(leave, k)
            self._snap(k)
            bland = step == 0


def _rref(lp: LinearProgram) -> tuple[list[int], list[dict[int, mpq]]]:
    """Reduced row echelon form of the equalities; returns pivot columns and rows (rhs under key -1)."""
    pivots: dict[int, dict[int, mpq]] = {}
    order: list[int] = []
    for row, b in zip(lp.equalities, lp.rhs):
        vec = {i: mpq(c) for i, c in zip(row.indices, row.coeffs) if c}
        if b:
            vec[-1] = mpq(b)
        # reduce by existing pivots
        for col in [c for c in vec if c in pivots]:
            k = vec.get(col)
            if not k:
                continue
            for c2, v in pivots[col].items():
                w = vec.get(c2, 0) - k * v
                if w:
                    vec[c2] = w
                else:
                    vec.pop(c2, None)
        cols = [c for c in vec if c >= 0]
        if not cols:
            if vec.get(-1):
                raise DomainError(f"inconsistent equalities at {row.label}")
            continue
        lead = min(cols)
        scale = vec[lead]
        vec = {c: v / scale for c, v in vec.items()}
        for prow in pivots.values():
            k = prow.get(lead)
            if k:
                for c2, v in vec.items():
                    w = prow.get(c2, 0) - k * v
                    if w:
                        prow[c2] = w
                    else:
                        prow.pop(c2, None)
        pivots[lead] = vec
        order.append(lead)
    order.sort()
    return order, [{c: v for c, v in pivots[p].items() if c != p} for p in order]


def solve(lp: LinearProgram) -> LPSolution:
    if lp.start is None or lp.violations(lp.start):
        raise DomainError("the starting point is missing or infeasible")
    tab = _Tableau(lp)
    tab.purify()
    tab.optimize()
    x = [Fraction(int(v.numerator), int(v.denominator)) for v in tab.x]
    at_upper = {j: tab.x[j] == tab.hi[j] and tab.hi[j] != tab.lo[j] for j in tab.nonbasic}
    directions = {}
    for k, j in enumerate(tab.nonbasic):
        directions[j] = {tab.basis[i]: Fraction(int(row[k].numerator), int(row[k].denominator))
                         for i, row in enumerate(tab.T) if row[k]}
    return LPSolution(lp.value(x), x, list(tab.basis), at_upper, directions, tab.pivots)


def _cell_name(i: int, n: int) -> str:
    u, v, x, y = (bits.to_str(t, n) for t in bits.split_index(i, n))
    return f"p_{u}_{v}_{x}_{y}"


def bias_objective(n: int, f: HashFn, u: int, v: int) -> dict[int, Fraction]:
    """``b0 = sum_{x,y} (-1)^(f(x)+1) P^{z=0}(x, y | u, v)``."""
    size = 1 << n
    return {bits.cell_index(u, v, x, y, n): Fraction(1 if f.table[x] else -1)
            for x in range(size) for y in range(size)}


def attack_program(P: BoxSystem, f: HashFn, u: int = 0, v: int = 0, family: FamilySpec | None = DEFAULT_FAMILY,
                   p=Fraction(1, 2), sense: str = "max", *, include_ab: bool = True) -> LinearProgram:
    """The feasibility region for ``(p, P^{z=0})`` with the bias objective.

    ``include_ab=False`` drops the Alice-Bob equalities (and ``family=None``
    then leaves only normalization and the cellwise bounds).
    """
    p = as_fraction(p)
    if not 0 < p < 1:
        raise DomainError("p must lie strictly between 0 and 1")
    n = P.n
    kinds = _family_key(family, with_ab=include_ab)
    rows = list(_cached_constraints(kinds, n)) if kinds else []
    rhs = [Fraction(0)] * len(rows)
    size = 1 << n
    width = size * size
    for a in range(size):
        for b in range(size):
            start = (a * size + b) * width
            rows.append(LinearConstraint(tuple(range(start, start + width)), (1,) * width,
                                         f"normalization at (u,v)=({bits.to_str(a, n)},{bits.to_str(b, n)})",
                                         "normalization"))
            rhs.append(Fraction(1))
    return LinearProgram(
        n_vars=len(P.cells),
        objective=bias_objective(n, f, u, v),
        sense=sense,
        equalities=rows,
        rhs=rhs,
        lower=[Fraction(0)] * len(P.cells),
        upper=[c / p for c in P.cells],
        names=[_cell_name(i, n) for i in range(len(P.cells))],
        start=list(P.cells),
    )


@dataclass
class OptimalAttack:
    d: Fraction
    b0: Fraction
    element: PartitionElement
    complement: PartitionElement
    solution: LPSolution
    program: LinearProgram


def _check_cap(n: int, force: bool) -> None:
    if n > LP_CAP and not force:
        raise DomainError(f"exact LP at n={n} has {16 ** n} variables; the cap is n <= {LP_CAP} (use force to override)")


def optimal_attack(P: BoxSystem, f: HashFn, u: int = 0, v: int = 0, family: FamilySpec | None = DEFAULT_FAMILY,
                   p=Fraction(1, 2), *, include_ab: bool = True, force: bool = False) -> OptimalAttack:
    """Best ``(p, P^{z=0})`` for biasing ``f(X)`` at input ``(u, v)``.

    ``d = (p |b0| + (1 - p) |b1|) / 2`` is convex in ``b0``, so its maximum
    over the region sits at one end of the range of ``b0``; both ends are
    solved and the larger ``d`` kept (ties favour the maximum).
    """
    p = as_fraction(p)
    _check_cap(P.n, force)
    best = None
    for sense in ("max", "min"):
        lp = attack_program(P, f, u, v, family, p, sense, include_ab=include_ab)
        sol = solve(lp)
        pz = BoxSystem(P.n, tuple(sol.assignment))
        comp = complement_element(P, p, pz)
        b0 = sol.optimum
        b1 = sum((c * comp.system.cells[j] for j, c in lp.objective.items()), Fraction(0))
        d = (p * abs(b0) + (1 - p) * abs(b1)) / 2
        if best is None or d > best.d:
            best = OptimalAttack(d, b0, PartitionElement(p, pz), comp, sol, lp)
    return best


def sweep_p(P: BoxSystem, f: HashFn, grid: Sequence, u: int = 0, v: int = 0,
            family: FamilySpec | None = DEFAULT_FAMILY, *, force: bool = False) -> list[tuple[Fraction, Fraction]]:
    """``(p, d_opt)`` for each weight on a rational grid; reported, not asserted."""
    return [(as_fraction(p), optimal_attack(P, f, u, v, family, p, force=force).d) for p in grid]


def _decimal(q: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 17
        return format(Decimal(q.numerator) / Decimal(q.denominator), "g")


def _linear_terms(terms) -> str:
    parts = []
    for j, c in terms:
        c = Fraction(c)
        parts.append(f"{'-' if c < 0 else '+'} {_decimal(abs(c))} {j}")
    return " ".join(parts) if parts else "0"


def export_lp(lp: LinearProgram) -> str:
    """CPLEX LP text; every non-integer number is followed by its exact ``num/den`` in a comment."""
    names = lp.names
    out = ["\\ exact rationals follow each approximated number as '\\ num/den'"]
    out.append("Maximize" if lp.sense == "max" else "Minimize")
    obj = [(names[j], c) for j, c in sorted(lp.objective.items())]
    out.append(f" obj: {_linear_terms(obj)}")
    out.append("Subject To")
    for k, (row, b) in enumerate(zip(lp.equalities, lp.rhs)):
        terms = [(names[i], c) for i, c in zip(row.indices, row.coeffs)]
        line = f" c{k}: {_linear_terms(terms)} = {_decimal(b)}"
        if b.denominator != 1:
            line += f"  \\ {b.numerator}/{b.denominator}"
        out.append(f"\\ {row.label}")
        out.append(line)
    out.append("Bounds")
    for j in range(lp.n_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        line = f" {_decimal(lo)} <= {names[j]} <= {_decimal(hi)}"
        exact = [f"{q.numerator}/{q.denominator}" for q in (lo, hi) if q.denominator != 1]
        if exact:
            line += "  \\ " + " , ".join(f"{q.numerator}/{q.denominator}" for q in (lo, hi))
        out.append(line)
    out.append("End")
    return "\n".join(out) + "\n"
