"""Exact conditional probability tables over binary inputs and outputs.

A system with ``n`` box pairs gives Alice the interfaces ``A_1..A_n`` (inputs
``U``, outputs ``X``) and Bob ``B_1..B_n`` (inputs ``V``, outputs ``Y``).
Every probability is a :class:`fractions.Fraction`; see :mod:`nsboxes.bits`
for the indexing convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from itertools import product
from typing import Callable, Iterable, Iterator, Literal

from . import bits
from .bits import BitsLike
from .errors import DomainError, SignallingError

Side = Literal["alice", "bob"]

ONE = Fraction(1)
ZERO = Fraction(0)


def as_fraction(value) -> Fraction:
    """Exact conversion; floats are refused so nothing binary sneaks in."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a Fraction, int or 'num/den' string")
    return Fraction(value)


@dataclass(frozen=True)
class Table:
    """Shared storage: ``cells[i]`` is the value at canonical index ``i``."""

    n: int
    cells: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be a positive integer")
        if len(self.cells) != 16**self.n:
            raise DomainError(f"a table with n={self.n} needs {16**self.n} cells, got {len(self.cells)}")

    @property
    def size(self) -> int:
        """Number of values each of u, v, x, y ranges over (``2**n``)."""
        return 1 << self.n

    def index(self, u: BitsLike, v: BitsLike, x: BitsLike, y: BitsLike) -> int:
        n = self.n
        return bits.cell_index(bits.to_int(u, n), bits.to_int(v, n), bits.to_int(x, n), bits.to_int(y, n), n)

    def cell(self, u: BitsLike, v: BitsLike, x: BitsLike, y: BitsLike) -> Fraction:
        return self.cells[self.index(u, v, x, y)]

    def block(self, u: int, v: int) -> tuple[Fraction, ...]:
        """All cells at input pair ``(u, v)``, ordered by ``x * 2**n + y``."""
        width = self.size * self.size
        start = (u * self.size + v) * width
        return self.cells[start:start + width]

    def input_pairs(self) -> Iterator[tuple[int, int]]:
        return product(range(self.size), repeat=2)

    def block_sum(self, u: int, v: int) -> Fraction:
        return sum(self.block(u, v), ZERO)


@dataclass(frozen=True)
class SubNormalizedSystem(Table):
    """Nonnegative table whose per-input sums lie in [0, 1], e.g. ``p * P^z``."""

    def __post_init__(self):
        super().__post_init__()
        for i, c in enumerate(self.cells):
            if c < 0:
                u, v, x, y = bits.split_index(i, self.n)
                raise DomainError(f"negative cell at u={u}, v={v}, x={x}, y={y}: {c}")
        for u, v in self.input_pairs():
            if self.block_sum(u, v) > 1:
                raise DomainError(f"mass above 1 at (u,v)=({bits.to_str(u, self.n)},{bits.to_str(v, self.n)})")


@dataclass(frozen=True)
class BoxSystem(Table):
    """A total, normalized conditional distribution ``P_{XY|UV}``.

    Construction validates every cell against [0, 1] and every input pair
    against exact normalization.
    """

    def __post_init__(self):
        super().__post_init__()
        for i, c in enumerate(self.cells):
            if not isinstance(c, Fraction):
                raise TypeError("cells must be Fractions")
            if c < 0 or c > 1:
                u, v, x, y = bits.split_index(i, self.n)
                raise DomainError(f"cell out of [0,1] at u={u}, v={v}, x={x}, y={y}: {c}")
        for u, v in self.input_pairs():
            total = self.block_sum(u, v)
            if total != 1:
                raise DomainError(
                    f"not normalized at (u,v)=({bits.to_str(u, self.n)},{bits.to_str(v, self.n)}): sum is {total}"
                )

    def scaled(self, weight) -> SubNormalizedSystem:
        w = as_fraction(weight)
        return SubNormalizedSystem(self.n, tuple(w * c for c in self.cells))

    def prob_win(self, u: int, v: int) -> Fraction:
        """``Pr[X xor Y = u . v]`` for an n=1 system at one input pair."""
        if self.n != 1:
            raise DomainError("prob_win is defined for n = 1")
        return sum((self.cell(u, v, x, y) for x, y in product((0, 1), repeat=2) if x ^ y == u & v), ZERO)

    def to_json(self) -> dict:
        n = self.n
        cells: dict[str, dict[str, str]] = {}
        for u, v in self.input_pairs():
            row = {}
            for x, y in product(range(self.size), repeat=2):
                row[f"{bits.to_str(x, n)},{bits.to_str(y, n)}"] = _frac_str(self.cells[bits.cell_index(u, v, x, y, n)])
            cells[f"{bits.to_str(u, n)},{bits.to_str(v, n)}"] = row
        return {"n": n, "cells": cells}

    @classmethod
    def from_json(cls, data: dict) -> "BoxSystem":
        import jsonschema

        jsonschema.validate(data, system_schema())
        n = data["n"]
        size = 1 << n
        cells = [None] * 16**n
        expected_keys = {f"{bits.to_str(a, n)},{bits.to_str(b, n)}" for a in range(size) for b in range(size)}
        if set(data["cells"]) != expected_keys:
            missing = sorted(expected_keys - set(data["cells"]))
            extra = sorted(set(data["cells"]) - expected_keys)
            raise DomainError(f"input pairs must be total; missing={missing[:4]} unexpected={extra[:4]}")
        for uv, row in data["cells"].items():
            if set(row) != expected_keys:
                raise DomainError(f"outputs at {uv} are not total")
            u, v = (int(s, 2) for s in uv.split(","))
            for xy, value in row.items():
                x, y = (int(s, 2) for s in xy.split(","))
                cells[bits.cell_index(u, v, x, y, n)] = Fraction(value)
        return cls(n, tuple(cells))


def _frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def system_schema() -> dict:
    text = resources.files("nsboxes").joinpath("data/system.schema.json").read_text()
    return json.loads(text)


def load_system(path) -> BoxSystem:
    with open(path) as fh:
        return BoxSystem.from_json(json.load(fh))


def dump_system(system: BoxSystem, path) -> None:
    with open(path, "w") as fh:
        json.dump(system.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def from_function(n: int, fn: Callable[[int, int, int, int], object], cls=BoxSystem) -> BoxSystem:
    """Evaluate ``fn(u, v, x, y)`` on every cell (arguments as integers)."""
    size = 1 << n
    cells = tuple(
        as_fraction(fn(u, v, x, y))
        for u in range(size) for v in range(size) for x in range(size) for y in range(size)
    )
    return cls(n, cells)


def _check_eps(eps) -> Fraction:
    eps = as_fraction(eps)
    if not 0 <= eps <= Fraction(1, 2):
        raise DomainError(f"eps must lie in [0, 1/2], got {eps}")
    return eps


def pr_box() -> BoxSystem:
    return noisy_pr_box(0)


def noisy_pr_box(eps) -> BoxSystem:
    """Unbiased PR box with error ``eps``: uniform marginals, win probability ``1 - eps``."""
    eps = _check_eps(eps)
    good, bad = (1 - eps) / 2, eps / 2
    return from_function(1, lambda u, v, x, y: good if x ^ y == u & v else bad)


def product_system(eps, n: int) -> BoxSystem:
    """``n`` independent copies of :func:`noisy_pr_box`."""
    eps = _check_eps(eps)
    if n < 1:
        raise DomainError("n must be a positive integer")
    good, bad = (1 - eps) / 2, eps / 2
    # a cell only depends on how many boxes win
    powers = [good**a * bad ** (n - a) for a in range(n + 1)]
    full = (1 << n) - 1

    def value(u, v, x, y):
        losses = bin((x ^ y ^ (u & v)) & full).count("1")
        return powers[n - losses]

    return from_function(n, value)


def uniform_noise_box(n: int = 1) -> BoxSystem:
    return from_function(n, lambda u, v, x, y: Fraction(1, 4**n))


def local_deterministic_box(alice: tuple[int, int], bob: tuple[int, int]) -> BoxSystem:
    """n=1 box where Alice outputs ``alice[u]`` and Bob ``bob[v]``."""
    return from_function(1, lambda u, v, x, y: int(x == alice[u] and y == bob[v]))


def example_almost_backward() -> BoxSystem:
    """n=2: X_2, Y_1, Y_2 uniform and independent, X_1 = Y_2 xor U_2."""
    def value(u, v, x, y):
        x1 = bits.get(x, 1, 2)
        return Fraction(1, 8) if x1 == bits.get(y, 2, 2) ^ bits.get(u, 2, 2) else ZERO

    return from_function(2, value)


def example_not_full_ns() -> BoxSystem:
    """n=2: X_1, Y_1, Y_2 uniform and independent, X_2 = Y_1 xor U_1."""
    def value(u, v, x, y):
        x2 = bits.get(x, 2, 2)
        return Fraction(1, 8) if x2 == bits.get(y, 1, 2) ^ bits.get(u, 1, 2) else ZERO

    return from_function(2, value)


def chsh_value(system: BoxSystem) -> Fraction:
    """Average over the four input pairs of ``Pr[X xor Y = u . v]``."""
    if system.n != 1:
        raise DomainError(f"CHSH value needs n = 1, got n = {system.n}")
    return sum((system.prob_win(u, v) for u, v in system.input_pairs()), ZERO) / 4


def marginal(system: BoxSystem, side: Side) -> dict[str, dict[str, Fraction]]:
    """Marginal of the kept side, keyed by bit strings.

    Refuses (raises :class:`SignallingError`) when the summed-out distribution
    differs between two inputs of the discarded side.
    """
    n, size = system.n, system.size
    if side not in ("alice", "bob"):
        raise DomainError(f"side must be 'alice' or 'bob', got {side!r}")
    result: dict[str, dict[str, Fraction]] = {}
    for kept in range(size):
        reference = None
        for other in range(size):
            u, v = (kept, other) if side == "alice" else (other, kept)
            dist = []
            for out in range(size):
                if side == "alice":
                    dist.append(sum((system.cells[bits.cell_index(u, v, out, y, n)] for y in range(size)), ZERO))
                else:
                    dist.append(sum((system.cells[bits.cell_index(u, v, x, out, n)] for x in range(size)), ZERO))
            if reference is None:
                reference = (other, dist)
            elif dist != reference[1]:
                names = ("V", "U") if side == "alice" else ("U", "V")
                a, b = bits.to_str(reference[0], n), bits.to_str(other, n)
                raise SignallingError(
                    f"marginal of {side} at {names[1]}={bits.to_str(kept, n)} differs between "
                    f"{names[0]}={a} and {names[0]}={b}",
                    inputs=(a, b),
                )
        result[bits.to_str(kept, n)] = {bits.to_str(o, n): p for o, p in enumerate(reference[1])}
    return result


def tensor(a: BoxSystem, b: BoxSystem) -> BoxSystem:
    """Independent composition; ``a`` supplies boxes ``1..n_a``, ``b`` the rest."""
    na, nb = a.n, b.n
    mb = (1 << nb) - 1

    def value(u, v, x, y):
        return (
            a.cells[bits.cell_index(u >> nb, v >> nb, x >> nb, y >> nb, na)]
            * b.cells[bits.cell_index(u & mb, v & mb, x & mb, y & mb, nb)]
        )

    return from_function(na + nb, value)


def mixture(components: Iterable[tuple[object, BoxSystem]]) -> BoxSystem:
    """Convex combination ``sum_k w_k P_k``; weights must sum to one."""
    components = [(as_fraction(w), s) for w, s in components]
    if not components:
        raise DomainError("empty mixture")
    if sum(w for w, _ in components) != 1 or any(w < 0 for w, _ in components):
        raise DomainError("mixture weights must be nonnegative and sum to 1")
    n = components[0][1].n
    if any(s.n != n for _, s in components):
        raise DomainError("mixture components disagree on n")
    cells = tuple(sum((w * s.cells[i] for w, s in components), ZERO) for i in range(16**n))
    return BoxSystem(n, cells)
