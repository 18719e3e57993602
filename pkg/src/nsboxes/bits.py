"""Bit-string conventions.

A bit string ``b_1 b_2 ... b_n`` is written most-significant-box-first and is
stored internally as the integer whose bit ``n - i`` holds ``b_i``.  So box 1
is the most significant bit: ``"10"`` is the integer 2.

The cell of a system with ``n`` box pairs at inputs ``(u, v)`` and outputs
``(x, y)`` has the linear index ``((u * 2**n + v) * 2**n + x) * 2**n + y``,
i.e. ``u`` is the most significant group.  Constraint vectors, LP columns and
JSON files all use this one index.
"""

from __future__ import annotations

from typing import Sequence, Union

BitsLike = Union[str, int, Sequence[int]]


def to_int(bits: BitsLike, n: int) -> int:
    """Convert a bit string, bit sequence or raw integer encoding to an int."""
    if isinstance(bits, str):
        if len(bits) != n or any(ch not in "01" for ch in bits):
            raise ValueError(f"expected a {n}-bit string, got {bits!r}")
        return int(bits, 2)
    if isinstance(bits, int):
        if not 0 <= bits < (1 << n):
            raise ValueError(f"{bits} does not fit in {n} bits")
        return bits
    seq = list(bits)
    if len(seq) != n or any(b not in (0, 1) for b in seq):
        raise ValueError(f"expected {n} bits, got {seq!r}")
    value = 0
    for b in seq:
        value = (value << 1) | b
    return value


def to_str(value: int, n: int) -> str:
    return format(value, f"0{n}b") if n else ""


def mask(i: int, n: int) -> int:
    """Mask of box ``i`` (1-based) inside an ``n``-bit integer."""
    if not 1 <= i <= n:
        raise ValueError(f"box index {i} outside 1..{n}")
    return 1 << (n - i)


def get(value: int, i: int, n: int) -> int:
    return (value >> (n - i)) & 1


def flip(value: int, i: int, n: int) -> int:
    """The string with only bit ``i`` flipped (written ``x^{i'}`` in the notes)."""
    return value ^ mask(i, n)


def cell_index(u: int, v: int, x: int, y: int, n: int) -> int:
    return (((u << n | v) << n | x) << n) | y


def split_index(index: int, n: int) -> tuple[int, int, int, int]:
    m = (1 << n) - 1
    return (index >> 3 * n, (index >> 2 * n) & m, (index >> n) & m, index & m)


def parity(value: int) -> int:
    return bin(value).count("1") & 1
