import pytest
from hypothesis import given, strategies as st

from nsboxes import bits


def test_box_one_is_most_significant():
    assert bits.to_int("10", 2) == 2
    assert bits.get(2, 1, 2) == 1 and bits.get(2, 2, 2) == 0
    assert bits.flip(0, 1, 3) == 0b100


def test_accepts_sequences_and_rejects_bad_strings():
    assert bits.to_int([1, 0, 1], 3) == 5
    with pytest.raises(ValueError):
        bits.to_int("102", 3)
    with pytest.raises(ValueError):
        bits.to_int("1", 2)
    with pytest.raises(ValueError):
        bits.mask(0, 2)


@given(st.integers(1, 4), st.data())
def test_cell_index_roundtrip(n, data):
    parts = [data.draw(st.integers(0, (1 << n) - 1)) for _ in range(4)]
    idx = bits.cell_index(*parts, n)
    assert bits.split_index(idx, n) == tuple(parts)
    assert 0 <= idx < 16**n


@given(st.integers(1, 6), st.data())
def test_string_roundtrip(n, data):
    value = data.draw(st.integers(0, (1 << n) - 1))
    assert bits.to_int(bits.to_str(value, n), n) == value
