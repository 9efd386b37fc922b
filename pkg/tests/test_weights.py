import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from negdim.errors import DomainError
from negdim.weights import POLE, is_pole, pole_indices, weight, weight_sequence


def recurrence_sequence(dim, i_max):
    """Independent oracle: q_0 = 1 and q_{i+1} = q_i (i + D) / (i + 1)."""
    vals = [1.0]
    for i in range(i_max):
        vals.append(vals[-1] * (i + dim) / (i + 1))
    return vals


def test_weight_d3_matches_triangular_numbers():
    # (l+1)(l+2)/2 at l = 2 is 6
    assert weight(2, 3) == 6.0
    for i in range(0, 51):
        assert weight(i, 3) == (i + 1) * (i + 2) / 2


def test_weight_d1_is_flat():
    assert all(weight(i, 1) == 1.0 for i in range(0, 30))


def test_weight_neg1_raw_matches_inverse_i_i_minus_1():
    assert weight(3, -1, normalization="raw") == pytest.approx(1.0 / 6.0, rel=1e-15)
    for i in range(2, 51):
        assert weight(i, -1, normalization="raw") == pytest.approx(
            1.0 / (i * (i - 1)), rel=1e-12
        )


def test_weight_sequence_d3():
    seq = weight_sequence(3, 3)
    assert list(seq) == recurrence_sequence(3, 3)
    assert list(seq) == [1, 3, 6, 10]


def test_weight_sequence_d1():
    assert list(weight_sequence(1, 4)) == [1, 1, 1, 1, 1]


def test_weight_sequence_neg1_shape():
    seq = weight_sequence(-1, 4, normalization="raw")
    assert is_pole(seq[0]) and is_pole(seq[1])
    assert seq.poles == frozenset({0, 1})
    c = seq[2]
    assert c > 0
    assert seq[3] == pytest.approx(c / 3, rel=1e-12)
    assert seq[4] == pytest.approx(c / 6, rel=1e-12)


@pytest.mark.parametrize(
    "dim,expected",
    [(-1, {0, 1}), (3, set()), (-2.5, set()), (0, {0}), (-3, {0, 1, 2, 3})],
)
def test_pole_indices(dim, expected):
    assert pole_indices(dim) == frozenset(expected)


def test_pole_markers_match_pole_indices():
    for dim in (-3, -1, 0, 0.5, -2.5, 2, 4.25):
        poles = pole_indices(dim)
        for i in range(0, 12):
            assert is_pole(weight(i, dim)) == (i in poles)


def test_positive_integer_dims_match_exact_binomials():
    for dim in (1, 2, 3, 4):
        for i in range(0, 51):
            assert weight(i, dim) == float(math.comb(i + dim - 1, i))


@given(
    dim=st.floats(min_value=-8, max_value=8).filter(
        lambda d: abs(d - round(d)) > 1e-3
    ),
    i=st.integers(min_value=0, max_value=200),
)
@settings(max_examples=200, deadline=None)
def test_recurrence_invariant(dim, i):
    a, b = weight(i, dim), weight(i + 1, dim)
    lhs = b * (i + 1)
    rhs = a * (i + dim)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


def test_recurrence_invariant_across_pole_free_integer_region():
    for dim in (-1, -2):
        for i in range(-dim + 1, 40):
            a = weight(i, dim, normalization="raw")
            b = weight(i + 1, dim, normalization="raw")
            assert b * (i + 1) == pytest.approx(a * (i + dim), rel=1e-12)


def test_gamma_continuation_is_continuous_across_minus_one():
    # raw mode: the Gamma ratio varies smoothly through D = -1
    for i in (2, 5, 9):
        lo = weight(i, -1 - 1e-6, normalization="raw")
        hi = weight(i, -1 + 1e-6, normalization="raw")
        assert abs(hi - lo) / abs(lo) < 1e-4


def test_large_index_does_not_overflow():
    v = weight(5000, 2.5)
    assert math.isfinite(v) and v > 0


def test_domain_errors():
    with pytest.raises(DomainError):
        weight(-1, 3)
    with pytest.raises(DomainError):
        weight(2, math.nan)
    with pytest.raises(DomainError):
        weight(2, math.inf)
    with pytest.raises(DomainError):
        weight(2, 3, normalization="bogus")
    with pytest.raises(DomainError):
        pole_indices(math.nan)


def test_pole_marker_repr_and_identity():
    assert repr(POLE) == "POLE"
    assert not is_pole(1.0)
    assert is_pole(POLE)
