"""Exhaustive checks of the row-symmetry identities behind the attack's validity.

Each check walks every box index ``i`` and every cell it quantifies over and
counts failures; nothing is sampled.  ``P`` is assumed to be a product of
noisy PR boxes (the identities are statements about that system).

Two Bob-side statements hold only for ``u_i = 1``; with ``u_i = 0`` the
input ``v_i`` does not enter box ``i`` at all, so flipping it cannot match a
flip of ``y_i``.  The checks use the ``u_i = 1`` condition and offer
``literal=True`` to test the unrestricted wording, which fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

from . import bits
from .attack import DEFAULT_FAMILY, HALF, HashFn, construct, validate_element
from .boxes import BoxSystem, Table, as_fraction, product_system
from .constraints import Family, integer_cells, check, generate
from .errors import DomainError


@dataclass
class LemmaResult:
    name: str
    checked: int = 0
    failures: int = 0
    example: str | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def record(self, good: bool, describe: Callable[[], str]) -> None:
        self.checked += 1
        if not good:
            self.failures += 1
            if self.example is None:
                self.example = describe()

    def merge(self, other: "LemmaResult") -> None:
        self.checked += other.checked
        self.failures += other.failures
        if self.example is None:
            self.example = other.example


def _where(n: int, i: int, **parts: int) -> str:
    return f"i={i} " + " ".join(f"{k}={bits.to_str(v, n)}" for k, v in parts.items())


def _cells(P: Table, n: int):
    size = 1 << n
    for u in range(size):
        for v in range(size):
            for x in range(size):
                for y in range(size):
                    yield u, v, x, y


def alice_equiv_cell(P: Table) -> LemmaResult:
    """``P(x, y^i | u, v) = P(x, y | u^i, v)`` whenever ``v_i = 1``."""
    n = P.n
    res = LemmaResult("alice-equiv-cell")
    for i in range(1, n + 1):
        for u, v, x, y in _cells(P, n):
            if not bits.get(v, i, n):
                continue
            a = P.cells[bits.cell_index(u, v, x, bits.flip(y, i, n), n)]
            b = P.cells[bits.cell_index(bits.flip(u, i, n), v, x, y, n)]
            res.record(a == b, lambda: _where(n, i, u=u, v=v, x=x, y=y))
    return res


def bob_equiv_cell(P: Table, literal: bool = False) -> LemmaResult:
    """``P(x, y^i | u, v) = P(x, y | u, v^i)`` whenever ``u_i = 1`` (all cells if ``literal``)."""
    n = P.n
    res = LemmaResult("bob-equiv-cell" + (" (unrestricted)" if literal else ""))
    for i in range(1, n + 1):
        for u, v, x, y in _cells(P, n):
            if not literal and not bits.get(u, i, n):
                continue
            a = P.cells[bits.cell_index(u, v, x, bits.flip(y, i, n), n)]
            b = P.cells[bits.cell_index(u, bits.flip(v, i, n), x, y, n)]
            res.record(a == b, lambda: _where(n, i, u=u, v=v, x=x, y=y))
    return res


def alice_equiv_type(ctab: dict, n: int) -> LemmaResult:
    """``c(x, y^i | u, v) = c(x, y | u^i, v)`` whenever ``v_i = 1``."""
    res = LemmaResult("alice-equiv-type")
    for i in range(1, n + 1):
        for (u, v, x, y), c in ctab.items():
            if not bits.get(v, i, n):
                continue
            other = ctab[bits.flip(u, i, n), v, x, bits.flip(y, i, n)]
            res.record(c == other, lambda: _where(n, i, u=u, v=v, x=x, y=y))
    return res


def bob_equiv_type(ctab: dict, n: int, literal: bool = False) -> LemmaResult:
    """``c(x, y^i | u, v) = c(x, y | u, v^i)`` whenever ``u_i = 1``.

    With ``literal=True`` the condition is ``v_i = 1`` instead.
    """
    res = LemmaResult("bob-equiv-type" + (" (v_i=1 condition)" if literal else ""))
    for i in range(1, n + 1):
        for (u, v, x, y), c in ctab.items():
            if not bits.get(v if literal else u, i, n):
                continue
            other = ctab[u, bits.flip(v, i, n), x, bits.flip(y, i, n)]
            res.record(c == other, lambda: _where(n, i, u=u, v=v, x=x, y=y))
    return res


def _side_sums(pz: Table, i: int, flip_u: bool, strong: bool):
    """Yield (where, lhs, rhs) for one box index and one party's input flip."""
    n = pz.n
    size = 1 << n
    m = bits.mask(i, n)
    cells = integer_cells(pz.cells)[0]  # common-denominator integers; equality is unchanged
    for u in range(size):
        for v in range(size):
            u2, v2 = (u ^ m, v) if flip_u else (u, v ^ m)
            for x in range(size):
                if not strong and x & m:
                    continue
                xs = (x,) if strong else (x, x | m)
                for y in range(size):
                    if y & m:
                        continue
                    ys = (y, y | m)
                    lhs = sum(cells[bits.cell_index(u, v, a, b, n)] for a in xs for b in ys)
                    rhs = sum(cells[bits.cell_index(u2, v2, a, b, n)] for a in xs for b in ys)
                    yield (u, v, x, y), lhs, rhs


def proof_alice_side(pz: Table, strong: bool = False) -> LemmaResult:
    """Summing box ``i``'s outputs hides Alice's input ``u_i``.

    ``strong`` keeps ``x_i`` fixed and sums only ``y_i``.
    """
    n = pz.n
    res = LemmaResult("proof-alice-side" + (" (per-x)" if strong else ""))
    for i in range(1, n + 1):
        for (u, v, x, y), lhs, rhs in _side_sums(pz, i, True, strong):
            res.record(lhs == rhs, lambda: _where(n, i, u=u, v=v, x=x, y=y))
    return res


def proof_bob_side(pz: Table, strong: bool = False) -> LemmaResult:
    n = pz.n
    res = LemmaResult("proof-bob-side" + (" (per-x)" if strong else ""))
    for i in range(1, n + 1):
        for (u, v, x, y), lhs, rhs in _side_sums(pz, i, False, strong):
            res.record(lhs == rhs, lambda: _where(n, i, u=u, v=v, x=x, y=y))
    return res


def bob_side_full_ns(pz: Table) -> LemmaResult:
    """Every full non-signalling equality on Bob's interfaces."""
    report = check(pz, _bob_full(pz.n))
    res = LemmaResult("bob-side-full-ns", report.passed + len(report.violated), len(report.violated))
    if report.violated:
        res.example = report.violated[0].label
    return res


@lru_cache(maxsize=8)
def _bob_full(n: int) -> tuple:
    return tuple(generate(Family.FULL, n, side="B"))


SUITE = (
    "alice-equiv-cell",
    "bob-equiv-cell",
    "alice-equiv-type",
    "bob-equiv-type",
    "proof-alice-side",
    "proof-alice-side (per-x)",
    "proof-bob-side",
    "proof-bob-side (per-x)",
    "bob-side-full-ns",
    "element-valid",
)


def lemmas_for(P: BoxSystem, f: HashFn, family=DEFAULT_FAMILY) -> list[LemmaResult]:
    """The f-dependent identities for one hash, plus validity of ``(1/2, P^{z=0})``."""
    ctab, pz = construct(P, f)
    validity = validate_element(P, HALF, pz, family)
    valid = LemmaResult("element-valid", 1, 0 if validity else 1, None if validity else validity.reason)
    return [
        alice_equiv_type(ctab, P.n),
        bob_equiv_type(ctab, P.n),
        proof_alice_side(pz),
        proof_alice_side(pz, strong=True),
        proof_bob_side(pz),
        proof_bob_side(pz, strong=True),
        bob_side_full_ns(pz),
        valid,
    ]


def run_suite(eps, n: int, functions: Iterable[HashFn] | None = None, family=DEFAULT_FAMILY) -> list[LemmaResult]:
    """Run every identity over every hash (or the given ones); results in ``SUITE`` order."""
    eps = as_fraction(eps)
    if not 0 < eps < HALF:
        raise DomainError(f"eps must lie in (0, 1/2) so every row is strictly ordered; got {eps}")
    P = product_system(eps, n)
    totals = {name: LemmaResult(name) for name in SUITE}
    totals["alice-equiv-cell"].merge(alice_equiv_cell(P))
    totals["bob-equiv-cell"].merge(bob_equiv_cell(P))
    if functions is None:
        functions = (HashFn.from_code(n, code) for code in range(1 << (1 << n)))
    for f in functions:
        for r in lemmas_for(P, f, family):
            if r.example is not None:
                r.example = f"f={f.hex} {r.example}"
            totals[r.name].merge(r)
    return [totals[name] for name in SUITE]


__all__ = [
    "LemmaResult", "SUITE", "alice_equiv_cell", "bob_equiv_cell", "alice_equiv_type", "bob_equiv_type",
    "proof_alice_side", "proof_bob_side", "bob_side_full_ns", "lemmas_for", "run_suite",
]
