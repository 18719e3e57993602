"""Eve's two-outcome partition attack on a hashed key bit.

Alice's key is ``K = f(X)`` for a one-bit hash ``f``.  Eve picks an element
``(1/2, P^{z=0})`` of a partition of Alice and Bob's system in which ``f(X)``
is pushed towards 0: inside each row (fixed ``u, v, y``) probability is moved
from ``f = 1`` cells into ``f = 0`` cells by the factor table ``c``.  The
complementary element ``P^{z=1} = 2P - P^{z=0}`` absorbs the shift.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import bits
from .boxes import BoxSystem, Table, as_fraction, product_system
from .constraints import Family, FamilySpec, check, constraints_for, family_list
from .errors import DegenerateRowError, DomainError, InvalidConstructionError

HALF = Fraction(1, 2)
DEFAULT_FAMILY = (Family.PAIRWISE, Family.AB)
NAMED_FUNCTIONS = ("identity", "xor", "and", "const0", "const1")


@dataclass(frozen=True)
class HashFn:
    """Truth table of ``f: {0,1}^n -> {0,1}``; ``table[x]`` is ``f(x)``."""

    n: int
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != 1 << self.n or any(b not in (0, 1) for b in self.table):
            raise DomainError(f"a hash on {self.n} bits needs {1 << self.n} output bits")

    def __call__(self, x: int) -> int:
        return self.table[x]

    @property
    def code(self) -> int:
        """Integer whose bit ``x`` is ``f(x)``; the scan order."""
        return sum(b << x for x, b in enumerate(self.table))

    @property
    def hex(self) -> str:
        digits = max(1, -(-(1 << self.n) // 4))
        return format(self.code, f"0{digits}x")

    @classmethod
    def from_code(cls, n: int, code: int) -> "HashFn":
        if not 0 <= code < 1 << (1 << n):
            raise DomainError(f"truth-table code {code} out of range for n={n}")
        return cls(n, tuple((code >> x) & 1 for x in range(1 << n)))

    @classmethod
    def from_hex(cls, n: int, text: str) -> "HashFn":
        return cls.from_code(n, int(text.removeprefix("0x"), 16))

    @classmethod
    def named(cls, name: str, n: int) -> "HashFn":
        """``identity`` is the first bit ``x_1`` (the identity when n = 1)."""
        rules = {
            "identity": lambda x: bits.get(x, 1, n),
            "xor": bits.parity,
            "and": lambda x: int(x == (1 << n) - 1),
            "const0": lambda x: 0,
            "const1": lambda x: 1,
        }
        if name not in rules:
            raise DomainError(f"unknown hash {name!r}; use a hex truth table or one of {', '.join(NAMED_FUNCTIONS)}")
        return cls(n, tuple(rules[name](x) for x in range(1 << n)))

    @classmethod
    def parse(cls, spec: str, n: int) -> "HashFn":
        return cls.named(spec, n) if spec in NAMED_FUNCTIONS else cls.from_hex(n, spec)

    def zeros(self) -> list[int]:
        return [x for x, b in enumerate(self.table) if b == 0]

    def ones(self) -> list[int]:
        return [x for x, b in enumerate(self.table) if b == 1]

    def is_balanced(self) -> bool:
        return 2 * sum(self.table) == len(self.table)


class RowKind(enum.Enum):
    LESS = "<"      # less mass on f=0 than on f=1
    GREATER = ">"
    EQUAL = "="


def _row_masses(P: Table, f: HashFn, u: int, v: int, y: int) -> tuple[Fraction, Fraction]:
    n = P.n
    m0 = m1 = Fraction(0)
    for x in range(P.size):
        c = P.cells[bits.cell_index(u, v, x, y, n)]
        if f.table[x]:
            m1 += c
        else:
            m0 += c
    return m0, m1


def _check_shapes(P: Table, f: HashFn) -> None:
    if P.n != f.n:
        raise DomainError(f"system has n={P.n} but the hash takes {f.n} bits")


def classify_rows(P: Table, f: HashFn, u: int, v: int) -> dict[int, RowKind]:
    _check_shapes(P, f)
    out = {}
    for y in range(P.size):
        m0, m1 = _row_masses(P, f, u, v, y)
        out[y] = RowKind.LESS if m0 < m1 else RowKind.GREATER if m0 > m1 else RowKind.EQUAL
    return out


def c_factor(P: Table, f: HashFn, u: int, v: int) -> dict[tuple[int, int], Fraction]:
    """Shift factors ``c(x, y | u, v)`` for one input pair, keyed by ``(x, y)``.

    Rows with equal mass on both key values are left untouched (c = 1).
    """
    _check_shapes(P, f)
    table = {}
    for y in range(P.size):
        m0, m1 = _row_masses(P, f, u, v, y)
        if m0 < m1:
            if m1 == 0:
                raise DegenerateRowError(f"row y={y} at (u,v)=({u},{v}) has no mass on f=1")
            c0, c1 = Fraction(2), (m1 - m0) / m1
        elif m0 > m1:
            if m0 == 0:
                raise DegenerateRowError(f"row y={y} at (u,v)=({u},{v}) has no mass on f=0")
            c0, c1 = (m0 + m1) / m0, Fraction(0)
        else:
            c0 = c1 = Fraction(1)
        for x in range(P.size):
            table[x, y] = c1 if f.table[x] else c0
    return table


def construct(P: BoxSystem, f: HashFn) -> tuple[dict[tuple[int, int, int, int], Fraction], BoxSystem]:
    """The full factor table (keyed ``(u, v, x, y)``) and ``P^{z=0}``."""
    _check_shapes(P, f)
    n = P.n
    ctab: dict[tuple[int, int, int, int], Fraction] = {}
    cells = list(P.cells)
    for u, v in P.input_pairs():
        block = c_factor(P, f, u, v)
        total = Fraction(0)
        for (x, y), c in block.items():
            i = bits.cell_index(u, v, x, y, n)
            ctab[u, v, x, y] = c
            cells[i] = c * P.cells[i]
            total += cells[i]
        if total != 1:
            raise InvalidConstructionError(
                f"P^(z=0) not normalized at (u,v)=({bits.to_str(u, n)},{bits.to_str(v, n)}): {total}", (u, v)
            )
    return ctab, BoxSystem(n, tuple(cells))


def build_pz0(P: BoxSystem, f: HashFn) -> BoxSystem:
    return construct(P, f)[1]


@dataclass(frozen=True)
class PartitionElement:
    weight: Fraction
    system: BoxSystem


@dataclass(frozen=True)
class Validity:
    valid: bool
    reason: str = "ok"
    witness: object = None

    def __bool__(self) -> bool:
        return self.valid


@lru_cache(maxsize=32)
def _cached_constraints(kinds: tuple[Family, ...], n: int):
    return tuple(constraints_for(list(kinds), n))


def _family_key(family: FamilySpec | None, with_ab: bool = True) -> tuple[Family, ...]:
    kinds = [] if family is None else family_list(family)
    if with_ab and Family.AB not in kinds:
        kinds.append(Family.AB)
    return tuple(sorted(set(kinds), key=lambda k: k.value))


def validate_element(P: BoxSystem, p, Pz: Table, family: FamilySpec | None = DEFAULT_FAMILY) -> Validity:
    """Can ``(p, Pz)`` be one element of a partition of ``P`` obeying ``family``?

    Requires ``Pz`` to be a normalized system, ``p * Pz <= P`` cellwise, and
    ``Pz`` to satisfy ``family`` together with Alice-Bob non-signalling.
    """
    p = as_fraction(p)
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    if P.n != Pz.n:
        raise DomainError("systems disagree on n")
    if not isinstance(Pz, BoxSystem):
        try:
            Pz = BoxSystem(Pz.n, Pz.cells)
        except DomainError as exc:
            return Validity(False, f"not a valid system: {exc}")
    n = P.n
    for i, (a, b) in enumerate(zip(Pz.cells, P.cells)):
        if p * a > b:
            u, v, x, y = (bits.to_str(t, n) for t in bits.split_index(i, n))
            return Validity(False, f"p*Pz exceeds P at u={u} v={v} x={x} y={y}: {p * a} > {b}", (u, v, x, y))
    report = check(Pz, list(_cached_constraints(_family_key(family), n)))
    if not report.ok:
        first = report.violated[0]
        return Validity(False, f"violates {first.label}", first)
    return Validity(True)


def complement_element(P: BoxSystem, p, Pz0: BoxSystem) -> PartitionElement:
    """The second element ``(1 - p, (P - p Pz0) / (1 - p))`` of a two-element partition."""
    p = as_fraction(p)
    if not 0 <= p < 1:
        raise DomainError("complement needs 0 <= p < 1")
    cells = []
    for a, b in zip(Pz0.cells, P.cells):
        if p * a > b:
            raise DomainError("p * Pz0 exceeds P in some cell; no complement exists")
        cells.append((b - p * a) / (1 - p))
    element = PartitionElement(1 - p, BoxSystem(P.n, tuple(cells)))
    assert all(p * a + (1 - p) * c == b for a, b, c in zip(Pz0.cells, P.cells, element.system.cells))
    return element


def signed_bias(system: Table, f: HashFn, u: int, v: int) -> Fraction:
    """``sum_{x,y} (-1)^f(x) P(x, y | u, v)``, positive when biased towards 0."""
    n = system.n
    total = Fraction(0)
    for x in range(system.size):
        part = sum((system.cells[bits.cell_index(u, v, x, y, n)] for y in range(system.size)), Fraction(0))
        total += -part if f.table[x] else part
    return total


def distance_bit(partition: Sequence[PartitionElement], f: HashFn, u: int, v: int,
                 P: BoxSystem | None = None) -> Fraction:
    """Distance from uniform of ``f(X)`` given Eve's outcome.

    When ``P`` is supplied the partition is first checked to reproduce it.
    """
    if P is not None:
        weights = sum((e.weight for e in partition), Fraction(0))
        recon = [sum((e.weight * e.system.cells[i] for e in partition), Fraction(0)) for i in range(len(P.cells))]
        if weights != 1 or tuple(recon) != P.cells:
            raise DomainError("partition does not reproduce the system")
    return sum((e.weight * abs(signed_bias(e.system, f, u, v)) for e in partition), Fraction(0)) / 2


@dataclass
class AttackOutcome:
    strategy: str                 # "construction" or "trivial"
    d: Fraction
    input_pair: tuple[int, int]
    valid: bool
    reason: str
    trivial_d: Fraction
    construction_d: Fraction | None = None
    c_table: dict | None = None
    pz0: BoxSystem | None = None
    pz1: BoxSystem | None = None


def trivial_attack(P: BoxSystem, f: HashFn, u: int = 0, v: int = 0) -> AttackOutcome:
    d = abs(signed_bias(P, f, u, v)) / 2
    return AttackOutcome("trivial", d, (u, v), True, "trivial partition", d)


def best_attack(P: BoxSystem, f: HashFn, u: int = 0, v: int = 0,
                family: FamilySpec | None = DEFAULT_FAMILY) -> AttackOutcome:
    """Construction with ``p = 1/2`` if it validates, else the trivial strategy.

    When both are available the larger distance wins (ties go to the
    construction).
    """
    trivial = trivial_attack(P, f, u, v)
    try:
        ctab, pz0 = construct(P, f)
    except (InvalidConstructionError, DegenerateRowError) as exc:
        trivial.reason = f"construction unavailable: {exc}"
        return trivial
    validity = validate_element(P, HALF, pz0, family)
    if not validity:
        trivial.reason = f"construction invalid: {validity.reason}"
        trivial.c_table, trivial.pz0 = ctab, pz0
        return trivial
    pz1 = complement_element(P, HALF, pz0).system
    d = distance_bit([PartitionElement(HALF, pz0), PartitionElement(HALF, pz1)], f, u, v)
    outcome = AttackOutcome("construction", d, (u, v), True, "ok", trivial.d, d, ctab, pz0, pz1)
    if trivial.d > d:
        outcome.strategy, outcome.d = "trivial", trivial.d
    return outcome


def bound_holds(d, eps) -> bool:
    """Exact test of ``d >= (-1 + sqrt(1 + 64 eps^2)) / (32 eps)`` without radicals."""
    d, eps = as_fraction(d), as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    if d < 0:
        raise DomainError("d must be nonnegative")
    return (32 * eps * d + 1) ** 2 >= 1 + 64 * eps**2


def c_eps_bracket(eps, digits: int = 12) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds on the bound constant, for display only."""
    from math import isqrt

    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    scale = 10**digits
    radicand = (eps.denominator**2 + 64 * eps.numerator**2) * scale**2
    root = isqrt(radicand)  # floor(sqrt(...)), so root/(den*scale) <= sqrt(1+64 eps^2)
    den = eps.denominator * scale
    lo = (Fraction(root, den) - 1) / (32 * eps)
    hi = (Fraction(root + 1, den) - 1) / (32 * eps)
    return lo, hi


@dataclass
class ScanRow:
    f: HashFn
    input_pair: tuple[int, int]
    strategy: str
    d: Fraction
    bound_holds: bool
    valid: bool
    reason: str


@dataclass
class ScanResult:
    eps: Fraction
    n: int
    family: tuple[str, ...]
    rows: list[ScanRow] = field(default_factory=list)

    @property
    def min_row(self) -> ScanRow:
        return min(self.rows, key=lambda r: (r.d, r.f.code, r.input_pair))

    @property
    def all_hold(self) -> bool:
        return all(r.bound_holds for r in self.rows)


def _scan_one(args) -> list[ScanRow]:
    eps, n, code, pairs, kinds = args
    P = _product(eps, n)
    f = HashFn.from_code(n, code)
    rows = []
    for u, v in pairs:
        out = best_attack(P, f, u, v, list(kinds))
        rows.append(ScanRow(f, (u, v), out.strategy, out.d, bound_holds(out.d, eps), out.valid, out.reason))
    return rows


@lru_cache(maxsize=8)
def _product(eps: Fraction, n: int) -> BoxSystem:
    return product_system(eps, n)


def default_jobs() -> int:
    return max(1, int(os.environ.get("NSBOXES_JOBS", "1")))


def scan_all_f(eps, n: int, u: int = 0, v: int = 0, family: FamilySpec | None = DEFAULT_FAMILY, *,
               all_inputs: bool = False, cap: int = 3, force: bool = False, jobs: int | None = None,
               codes: Iterable[int] | None = None) -> ScanResult:
    """Run :func:`best_attack` on the product system for every one-bit hash on ``n`` bits.

    Rows come out in truth-table order regardless of ``jobs``.
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    if n < 1:
        raise DomainError("n must be a positive integer")
    if n > cap and not force:
        raise DomainError(
            f"n={n} means {2 ** (2 ** n)} hash functions; the cap is n <= {cap} (pass force=True / --force to override)"
        )
    kinds = _family_key(family)
    pairs = [(a, b) for a in range(1 << n) for b in range(1 << n)] if all_inputs else [(u, v)]
    todo = list(codes) if codes is not None else list(range(1 << (1 << n)))
    tasks = [(eps, n, code, pairs, kinds) for code in todo]
    jobs = default_jobs() if jobs is None else jobs
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_scan_one, tasks, chunksize=4))
    else:
        chunks = [_scan_one(t) for t in tasks]
    result = ScanResult(eps, n, tuple(k.value for k in kinds))
    for chunk in chunks:
        result.rows.extend(chunk)
    return result
