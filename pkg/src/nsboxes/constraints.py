"""Non-signalling constraint families as exact linear equalities over cells.

Every generated equality says that one marginal sum of cells equals the same
marginal sum at a different input assignment, i.e. ``sum(+cells) - sum(cells) = 0``
with coefficients +1/-1.  Families quantify over *ordered* pairs of distinct
input assignments, exactly as the defining conditions read, so each equality
also appears with its sign flipped; :func:`dedupe` removes those.

Interfaces are named ``X_i``/``U_i`` (Alice, box ``i``) and ``Y_i``/``V_i``
(Bob), 1-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Iterable, Iterator, Sequence, Union

from . import bits
from .boxes import Table
from .errors import DomainError


class Family(str, enum.Enum):
    FULL = "full"
    AB = "ab"
    BACKWARD = "backward"
    ALMOST_BACKWARD = "almost-backward"
    PAIRWISE = "pairwise-box"
    PER_PARTY = "per-party"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, name: Union[str, "Family"]) -> "Family":
        if isinstance(name, Family):
            return name
        try:
            return cls(name)
        except ValueError:
            known = ", ".join(f.value for f in cls if f is not cls.CUSTOM)
            raise DomainError(f"unknown constraint family {name!r} (known: {known})") from None


FamilySpec = Union[str, Family, Sequence[Union[str, Family]]]


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coeffs[k] * cell[indices[k]]) == 0``, indices strictly increasing.

    ``varied`` names the inputs that change between the two sides of the
    equality, ``summed`` the outputs summed over and ``fixed`` the outputs
    held fixed; together with ``label`` they make violation witnesses readable.
    """

    indices: tuple[int, ...]
    coeffs: tuple[Union[int, Fraction], ...]
    label: str = ""
    family: str = "custom"
    varied: tuple[str, ...] = ()
    summed: tuple[str, ...] = ()
    fixed: tuple[str, ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[object, int]], label: str = "", **meta) -> "LinearConstraint":
        acc: dict[int, Fraction] = {}
        for coef, idx in terms:
            acc[idx] = acc.get(idx, 0) + coef
        items = sorted((i, c) for i, c in acc.items() if c != 0)
        return cls(tuple(i for i, _ in items), tuple(_normal(c) for _, c in items), label, **meta)

    @property
    def terms(self) -> list[tuple[Union[int, Fraction], int]]:
        return list(zip(self.coeffs, self.indices))

    def negated(self) -> "LinearConstraint":
        return LinearConstraint(self.indices, tuple(-c for c in self.coeffs), self.label, self.family,
                                self.varied, self.summed, self.fixed)

    def evaluate(self, cells: Sequence[Fraction]) -> Fraction:
        return sum((c * cells[i] for c, i in zip(self.coeffs, self.indices)), Fraction(0))

    def sides(self) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """``(plus, minus)`` index sets when every coefficient is +1 or -1."""
        plus, minus = [], []
        for c, i in zip(self.coeffs, self.indices):
            if c == 1:
                plus.append(i)
            elif c == -1:
                minus.append(i)
            else:
                return None
        return tuple(plus), tuple(minus)


def _normal(c):
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


def _names(prefix: str, mask: int, n: int) -> list[str]:
    return [f"{prefix}_{i}" for i in range(1, n + 1) if mask & bits.mask(i, n)]


def _submasks(m: int) -> list[int]:
    out, s = [], m
    while True:
        out.append(s)
        if s == 0:
            break
        s = (s - 1) & m
    return sorted(out)


def _free_values(m: int, n: int) -> list[int]:
    """All n-bit values that are zero on the bits of ``m``."""
    return [w for w in range(1 << n) if w & m == 0]


def _assign(prefix: str, mask: int, value: int, n: int) -> str:
    return " ".join(f"{prefix}_{i}={bits.get(value, i, n)}" for i in range(1, n + 1) if mask & bits.mask(i, n))


def marginal_equalities(
    n: int,
    family: str,
    *,
    sum_x: int = 0,
    sum_y: int = 0,
    vary_u: int = 0,
    vary_v: int = 0,
    fixed_u: Sequence[int] | None = None,
    fixed_v: Sequence[int] | None = None,
    tag: str = "",
) -> Iterator[LinearConstraint]:
    """Equalities "the sum over outputs ``sum_x``/``sum_y`` does not depend on
    inputs ``vary_u``/``vary_v``" (arguments are bit masks over boxes).

    For every assignment of the remaining outputs and remaining inputs, and
    every ordered pair of distinct assignments to the varied inputs, one
    equality is emitted.  ``fixed_u``/``fixed_v`` restrict the non-varied
    inputs to the listed values (used to lift per-party conditions).
    """
    full = (1 << n) - 1
    summed = tuple(_names("X", sum_x, n) + _names("Y", sum_y, n))
    varied = tuple(_names("U", vary_u, n) + _names("V", vary_v, n))
    fixed = tuple(_names("X", full & ~sum_x, n) + _names("Y", full & ~sum_y, n))
    sx, sy = _submasks(sum_x), _submasks(sum_y)
    wu, wv = _submasks(vary_u), _submasks(vary_v)
    variants = list(product(wu, wv))
    base_u = [u for u in (fixed_u if fixed_u is not None else _free_values(vary_u, n)) if u & vary_u == 0]
    base_v = [v for v in (fixed_v if fixed_v is not None else _free_values(vary_v, n)) if v & vary_v == 0]
    head = f"{family}{tag}: sum {','.join(summed) or '-'}"
    for x0 in _free_values(sum_x, n):
        for y0 in _free_values(sum_y, n):
            outs = [(x0 | a, y0 | b) for a in sx for b in sy]
            out_txt = " ".join(t for t in (_assign("X", full & ~sum_x, x0, n), _assign("Y", full & ~sum_y, y0, n)) if t)
            for u0 in base_u:
                for v0 in base_v:
                    in_txt = " ".join(t for t in (_assign("U", full & ~vary_u, u0, n), _assign("V", full & ~vary_v, v0, n)) if t)
                    blocks = {}
                    for a, b in variants:
                        u, v = u0 | a, v0 | b
                        blocks[a, b] = [bits.cell_index(u, v, x, y, n) for x, y in outs]
                    for (a, b), plus in blocks.items():
                        for (c, d), minus in blocks.items():
                            if (a, b) == (c, d):
                                continue
                            items = sorted([(i, 1) for i in plus] + [(i, -1) for i in minus])
                            lhs = _assign("U", vary_u, a, n) + (" " if vary_u and vary_v else "") + _assign("V", vary_v, b, n)
                            rhs = _assign("U", vary_u, c, n) + (" " if vary_u and vary_v else "") + _assign("V", vary_v, d, n)
                            label = f"{head} | {out_txt or '-'} | {in_txt or '-'} | {lhs} vs {rhs}"
                            yield LinearConstraint(
                                tuple(i for i, _ in items), tuple(c_ for _, c_ in items), label,
                                family, varied, summed, fixed,
                            )


def iter_family(kind: Union[str, Family], n: int, *, side: str | None = None) -> Iterator[LinearConstraint]:
    """Lazily generate one family; ``side`` ('A' or 'B') keeps only one party's half."""
    kind = Family.parse(kind)
    if n < 1:
        raise DomainError("n must be a positive integer")
    if kind is Family.CUSTOM:
        raise DomainError("custom families are supplied as explicit constraint lists")
    full = (1 << n) - 1
    sides = ("A", "B") if side is None else (side,)
    name = kind.value
    if kind is Family.AB:
        if "A" in sides:
            yield from marginal_equalities(n, name, sum_x=full, vary_u=full, tag="[A->B]")
        if "B" in sides:
            yield from marginal_equalities(n, name, sum_y=full, vary_v=full, tag="[B->A]")
        return
    for i in range(1, n + 1):
        m = bits.mask(i, n)
        if kind is Family.FULL:
            if "A" in sides:
                yield from marginal_equalities(n, name, sum_x=m, vary_u=m, tag=f"[A_{i}]")
            if "B" in sides:
                yield from marginal_equalities(n, name, sum_y=m, vary_v=m, tag=f"[B_{i}]")
        elif kind is Family.PAIRWISE:
            if "A" in sides:
                yield from marginal_equalities(n, name, sum_x=m, sum_y=m, vary_u=m, tag=f"[U_{i}]")
            if "B" in sides:
                yield from marginal_equalities(n, name, sum_x=m, sum_y=m, vary_v=m, tag=f"[V_{i}]")
        elif kind is Family.PER_PARTY:
            # lifted from Alice's (Bob's) marginal by fixing the other side's input to all zeros
            if "A" in sides:
                yield from marginal_equalities(n, name, sum_x=m, sum_y=full, vary_u=m, fixed_v=[0], tag=f"[A_{i}]")
            if "B" in sides:
                yield from marginal_equalities(n, name, sum_x=full, sum_y=m, vary_v=m, fixed_u=[0], tag=f"[B_{i}]")
        elif i >= 2:
            # cut between boxes i-1 and i: I1 = {1..i-1}, I2 = {i..n}
            later = full >> (i - 1)
            if kind is Family.BACKWARD:
                if "A" in sides:
                    yield from marginal_equalities(n, name, sum_x=later, vary_u=later, tag=f"[A,i={i}]")
                if "B" in sides:
                    yield from marginal_equalities(n, name, sum_y=later, vary_v=later, tag=f"[B,i={i}]")
            elif kind is Family.ALMOST_BACKWARD:
                yield from marginal_equalities(n, name, sum_x=later, sum_y=later, vary_u=later, vary_v=later,
                                               tag=f"[i={i}]")


def generate(kind: Union[str, Family], n: int, *, side: str | None = None) -> list[LinearConstraint]:
    return list(iter_family(kind, n, side=side))


def family_list(spec: FamilySpec) -> list[Family]:
    if isinstance(spec, (str, Family)):
        parts = [p for p in str(spec.value if isinstance(spec, Family) else spec).split(",") if p]
        return [Family.parse(p) for p in parts]
    return [Family.parse(s) for s in spec]


def constraints_for(spec: FamilySpec, n: int) -> list[LinearConstraint]:
    """Union of several families, deduplicated."""
    out: list[LinearConstraint] = []
    for kind in family_list(spec):
        out.extend(iter_family(kind, n))
    return dedupe(out)


def normalization_rows(n: int) -> list[LinearConstraint]:
    """Homogeneous form of per-input normalization: each block sum equals block (0,0)'s."""
    size = 1 << n
    width = size * size
    rows = []
    for u, v in product(range(size), repeat=2):
        if (u, v) == (0, 0):
            continue
        start = (u * size + v) * width
        items = [(i, -1) for i in range(width)] + [(start + i, 1) for i in range(width)]
        label = f"normalization: sum at (u,v)=({bits.to_str(u, n)},{bits.to_str(v, n)}) vs ({'0' * n},{'0' * n})"
        rows.append(LinearConstraint(tuple(i for i, _ in items), tuple(c for _, c in items), label, "normalization"))
    return rows


def dedupe(cs: Iterable[LinearConstraint]) -> list[LinearConstraint]:
    """Drop exact repeats and sign-flipped repeats, keeping first occurrences."""
    seen: set = set()
    out = []
    for c in cs:
        key = (c.indices, c.coeffs)
        if key in seen:
            continue
        seen.add(key)
        seen.add((c.indices, tuple(-k for k in c.coeffs)))
        out.append(c)
    return out


@dataclass(frozen=True)
class Violation:
    constraint: LinearConstraint
    left: Fraction
    right: Fraction

    @property
    def label(self) -> str:
        return self.constraint.label


@dataclass
class ViolationReport:
    violated: list[Violation] = field(default_factory=list)
    passed: int = 0

    @property
    def ok(self) -> bool:
        return not self.violated

    def to_json(self, limit: int | None = None) -> dict:
        shown = self.violated if limit is None else self.violated[:limit]
        return {
            "passed": self.passed,
            "violated_count": len(self.violated),
            "violated": [
                {
                    "label": v.label,
                    "left": _fstr(v.left),
                    "right": _fstr(v.right),
                    "varied": list(v.constraint.varied),
                    "summed": list(v.constraint.summed),
                }
                for v in shown
            ],
        }


def _fstr(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def integer_cells(cells: Sequence[Fraction]) -> tuple[list[int], int]:
    scale = lcm(*(c.denominator for c in cells))
    return [c.numerator * (scale // c.denominator) for c in cells], scale


def check(system: Table, family: Union[FamilySpec, Sequence[LinearConstraint]]) -> ViolationReport:
    """Evaluate every equality exactly and report each one that fails."""
    if isinstance(family, (str, Family)) or (
        isinstance(family, (list, tuple)) and family and not isinstance(family[0], LinearConstraint)
    ):
        cs = constraints_for(family, system.n)
    else:
        cs = list(family)
    size = len(system.cells)
    values, scale = integer_cells(system.cells)
    report = ViolationReport()
    for c in cs:
        if c.indices and c.indices[-1] >= size:
            raise DomainError(f"constraint {c.label!r} addresses cell {c.indices[-1]} of a {size}-cell system")
        left = right = 0
        for k, i in zip(c.coeffs, c.indices):
            if k > 0:
                left += k * values[i]
            else:
                right -= k * values[i]
        if left == right:
            report.passed += 1
        else:
            report.violated.append(Violation(c, Fraction(left) / scale, Fraction(right) / scale))
    return report


@dataclass
class Implication:
    """Outcome of :func:`implies`.

    ``rows`` is the list the certificates refer to: the premise constraints
    followed by the homogeneous normalization rows.  ``certificate(k)`` gives
    coefficients ``lam`` with ``sum(lam[j] * rows[j]) == targets[k]``.
    """

    holds: bool
    rows: list[LinearConstraint]
    targets: list[LinearConstraint]
    witness: LinearConstraint | None
    engine: object = field(repr=False, default=None)

    def __bool__(self) -> bool:
        return self.holds

    def certificate(self, k: int) -> dict[int, Fraction]:
        if not self.holds:
            raise DomainError("no certificate: the implication does not hold")
        return self.engine.certificate(k)

    def verify(self, k: int, expand: bool = True) -> bool:
        """Re-check target ``k``'s certificate exactly.

        With ``expand=False`` a chained (telescoping) certificate is checked
        structurally: consecutive links must share their sum-set endpoints.
        """
        if not expand:
            return self.engine.verify_structure(k)
        lam = self.certificate(k)
        acc: dict[int, Fraction] = {}
        for j, coef in lam.items():
            for c, i in zip(self.rows[j].coeffs, self.rows[j].indices):
                acc[i] = acc.get(i, 0) + coef * c
        got = {i: c for i, c in acc.items() if c != 0}
        want = dict(zip(self.targets[k].indices, self.targets[k].coeffs))
        return got == want


def implies(
    a: Sequence[LinearConstraint],
    b: Sequence[LinearConstraint],
    n: int,
    *,
    with_normalization: bool = True,
) -> Implication:
    """Decide whether every constraint of ``b`` lies in the rational span of ``a``
    (plus per-input normalization).  Certificates are computed on demand.
    """
    from .span import SpanEngine

    a = list(a)
    rows = a + (normalization_rows(n) if with_normalization else [])
    targets = dedupe(b)
    engine = SpanEngine(rows)
    witness = engine.add_targets(targets)
    return Implication(witness is None, rows, targets, witness, engine)
