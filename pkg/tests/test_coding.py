import io
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blindlink.coding import (
    Codeword,
    Scheme,
    SecrecyCode,
    bits_per_symbol,
    certify_leakage,
    decode_scheme1,
    decode_scheme2,
    decode_stream,
    efficiency,
    encode,
    encode_scheme1,
    encode_scheme2,
    encode_stream,
    exact_mutual_information,
    format_codeword,
    pack_bits,
    parse_codeword,
    rank_mutual_information,
    read_codewords,
    unpack_symbols,
    worst_individual_leakage,
    write_codewords,
)
from blindlink.errors import ArityError, EncodingError, InsufficientObservations, TooLarge
from blindlink.field import PrimeField

LOG2_11 = math.log2(11)


@pytest.fixture(scope="module")
def s1():
    return SecrecyCode(11, 3, Scheme.PADDED)


@pytest.fixture(scope="module")
def s2():
    return SecrecyCode(11, 3, Scheme.FULL_RATE)


def test_scheme1_examples(s1):
    assert encode_scheme1(s1, 5, (2, 3)).values() == [10, 10, 5]
    assert encode_scheme1(s1, 0, (1, 1)).values() == [2, 6, 1]
    for m in range(11):
        assert encode_scheme1(s1, m, (0, 0)).values() == [m, m, m]
    msg, pads = decode_scheme1(s1, encode_scheme1(s1, 5, (2, 3)))
    assert msg.value == 5 and [t.value for t in pads] == [2, 3]
    with pytest.raises(ArityError):
        encode_scheme1(s1, 1, (1,))


def test_erased_symbol_refused(s1):
    cw = encode_scheme1(s1, 5, (2, 3)).masked((True, True, False))
    with pytest.raises(InsufficientObservations) as err:
        decode_scheme1(s1, cw)
    assert err.value.missing == 1


def test_scheme2_examples(s2):
    assert encode_scheme2(s2, (1, 2, 3)).values() == [6, 6, 1]
    assert encode_scheme2(s2, (4, 0, 0)).values() == [4, 4, 4]
    assert [m.value for m in decode_scheme2(s2, encode_scheme2(s2, (1, 2, 3)))] == [1, 2, 3]
    with pytest.raises(ArityError):
        encode_scheme2(s2, (1, 2))


def test_round_trip_exhaustive(s1, s2):
    for m, t1, t2 in itertools.product(range(11), repeat=3):
        msg, pads = decode_scheme1(s1, encode(s1, m, (t1, t2)))
        assert (msg.value, pads[0].value, pads[1].value) == (m, t1, t2)
        assert [x.value for x in decode_scheme2(s2, encode(s2, (m, t1, t2)))] == [m, t1, t2]


def test_efficiency():
    assert efficiency(SecrecyCode(11, 3)) == Fraction(1, 3)
    assert efficiency(SecrecyCode(11, 5)) == Fraction(1, 5)
    for q in (1, 3, 7):
        assert efficiency(SecrecyCode(11, q, Scheme.FULL_RATE)) == 1


def test_leakage_examples(s1, s2):
    pair = exact_mutual_information(s1, (0, 1), 0)
    assert pair.joint_factorizes and pair.mutual_information_bits == 0.0
    assert pair.tuples_enumerated == 11**3
    assert pair.summary() == "I = 0 (exact)"
    full = exact_mutual_information(s1, (0, 1, 2), 0)
    assert not full.joint_factorizes
    assert full.mutual_information_bits == pytest.approx(LOG2_11, abs=1e-12)
    assert exact_mutual_information(s2, (0, 1), 0).joint_factorizes


@pytest.mark.parametrize("p,q", [(11, 3), (13, 3), (13, 4)])
def test_scheme1_zero_leakage_every_strict_subset(p, q):
    code = SecrecyCode(p, q)
    for subset in itertools.combinations(range(q), q - 1):
        report = exact_mutual_information(code, subset, 0)
        assert report.joint_factorizes and report.mutual_information_bits == 0.0


def test_scheme2_individual_leakage_zero(s2):
    for subset in itertools.combinations(range(3), 2):
        for k in range(3):
            assert exact_mutual_information(s2, subset, k).exact_zero
        assert worst_individual_leakage(s2, subset).exact_zero
    # the pair jointly still reveals information about the whole vector
    assert not exact_mutual_information(s2, (0, 1), None).exact_zero


def _subsets(q):
    return [s for r in range(q + 1) for s in itertools.combinations(range(q), r)]


@pytest.mark.parametrize("scheme,target", [(Scheme.PADDED, 0), (Scheme.FULL_RATE, 1), (Scheme.FULL_RATE, None)])
def test_leakage_monotone_in_subset(scheme, target):
    code = SecrecyCode(11, 3, scheme)
    mi = {s: exact_mutual_information(code, s, target).mutual_information_bits for s in _subsets(3)}
    for a in mi:
        for b in mi:
            if set(a) <= set(b):
                assert mi[a] <= mi[b] + 1e-12


@pytest.mark.parametrize("p,q,scheme", [(5, 3, 1), (7, 4, 1), (11, 3, 2), (5, 4, 2), (3, 2, 2)])
def test_rank_identity_matches_enumeration(p, q, scheme):
    code = SecrecyCode(p, q, scheme)
    targets = [None] + list(code.message_indices())
    for subset in _subsets(q):
        for target in targets:
            a = exact_mutual_information(code, subset, target)
            b = rank_mutual_information(code, subset, target)
            assert a.joint_factorizes == b.joint_factorizes
            assert a.mutual_information_bits == pytest.approx(b.mutual_information_bits, abs=1e-9)


def test_enumeration_budget_and_fallback():
    code = SecrecyCode(11, 10)
    with pytest.raises(TooLarge):
        exact_mutual_information(code, range(9), 0)
    report = certify_leakage(code, range(9), 0)
    assert report.method == "rank" and report.exact_zero
    full = certify_leakage(code, range(10), 0)
    assert full.mutual_information_bits == pytest.approx(LOG2_11)


def test_pack_examples():
    f = PrimeField(11)
    assert bits_per_symbol(f) == 3
    assert pack_bits("101", f) == ([5], 0)
    assert unpack_symbols([5], f) == [1, 0, 1]
    assert pack_bits("", f) == ([], 0)
    assert unpack_symbols([], f) == []
    # 8 bits -> three 3-bit blocks, the last right-padded by one zero: 111 111 10(0)
    assert pack_bits("1111_1110", f) == ([7, 7, 4], 1)
    assert unpack_symbols([7, 7, 4], f, 1) == [1, 1, 1, 1, 1, 1, 1, 0]
    with pytest.raises(EncodingError):
        unpack_symbols([8], f)
    with pytest.raises(EncodingError):
        pack_bits("10a", f)


def test_pack_round_trip_random_streams():
    rng = np.random.default_rng(11)
    for p in (2, 11, 13, 257):
        for _ in range(250):
            bits = rng.integers(0, 2, rng.integers(0, 65)).tolist()
            symbols, pad = pack_bits(bits, p)
            assert all(0 <= s < p for s in symbols)
            assert unpack_symbols(symbols, p, pad) == bits


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 10), max_size=40), st.sampled_from([Scheme.PADDED, Scheme.FULL_RATE]),
       st.integers(0, 2**32 - 1))
def test_stream_round_trip(symbols, scheme, seed):
    code = SecrecyCode(11, 3, scheme)
    words, fill = encode_stream(code, symbols, np.random.default_rng(seed))
    assert decode_stream(code, words, fill) == symbols


def test_codeword_text_round_trip(s1):
    assert format_codeword([10, 10, 5], [True, False, True]) == "10,10,5;101"
    cw = parse_codeword("10,10,5;101", 11)
    assert cw.values() == [10, 10, 5] and cw.present == (True, False, True) and cw.erased == 1
    with pytest.raises(EncodingError):
        parse_codeword("10,11,5;111", 11)
    with pytest.raises(EncodingError):
        parse_codeword("1,2,3;11", 11)
    words, _ = encode_stream(s1, [1, 2, 3, 4], np.random.default_rng(0))
    buf = io.StringIO()
    write_codewords(buf, words, header={"p": 11, "q": 3})
    buf.seek(0)
    parsed, header = read_codewords(buf, 11)
    assert header == {"p": "11", "q": "3"}
    assert [c.values() for c in parsed] == words.tolist()
    assert isinstance(parsed[0], Codeword)
