import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lwe_attack.codec import (
    DecodeError,
    Vocab,
    decode_int,
    decode_vector,
    digits_of,
    encode_int,
    encode_rows,
    encode_vector,
)

BASES = (2, 3, 7, 24, 81, 128)


class TestEncodeInt:
    def test_sixteen_base_two(self):
        assert list(encode_int(16, 2)) == [1, 0, 0, 0, 0]

    def test_sixteen_base_seven(self):
        assert list(encode_int(16, 7)) == [2, 2]

    def test_three_base_seven(self):
        assert list(encode_int(3, 7)) == [3]

    def test_zero_is_single_digit(self):
        for base in BASES:
            assert list(encode_int(0, base)) == [0]

    def test_no_leading_zeros(self, rng):
        for base in BASES:
            for x in rng.integers(1, 2**20, 200):
                assert digits_of(int(x), base)[0] != 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            encode_int(-1, 2)

    @given(st.integers(min_value=1, max_value=2**30),
           st.sampled_from(BASES))
    @settings(max_examples=400)
    def test_length_formula(self, x, base):
        import math
        assert len(encode_int(x, base)) == math.floor(math.log(x, base)) + 1


class TestDecodeInt:
    def test_output_side_example(self):
        assert decode_int([1, 1], 2) == 3

    def test_zero(self):
        for base in BASES:
            assert decode_int([0], base) == 0

    def test_digit_out_of_range(self):
        with pytest.raises(DecodeError):
            decode_int([7], 7)

    def test_empty_fails(self):
        with pytest.raises(DecodeError):
            decode_int([], 81)

    @given(st.integers(min_value=0, max_value=2**30),
           st.sampled_from(BASES))
    @settings(max_examples=500)
    def test_roundtrip(self, x, base):
        assert decode_int(encode_int(x, base), base) == x


class TestVector:
    def test_worked_example(self):
        vocab = Vocab(2, 2)
        seq = encode_vector([16, 3], 2, vocab.sep)
        assert list(seq) == [1, 0, 0, 0, 0, vocab.sep, 1, 1]

    def test_zero_vector(self):
        vocab = Vocab(81, 81)
        assert list(vocab.encode_input([0, 0, 0])) == [0, vocab.sep, 0,
                                                       vocab.sep, 0]

    def test_roundtrip_random_vectors(self, rng):
        for base in (2, 3, 7, 81):
            vocab = Vocab(base, base)
            for _ in range(2500):
                n = int(rng.integers(1, 8))
                v = rng.integers(0, 2**20, n)
                seq = vocab.encode_input(v)
                back = decode_vector(seq, base, vocab.sep)
                assert back == list(v)

    def test_malformed_vector_fails(self):
        vocab = Vocab(7, 7)
        with pytest.raises(DecodeError):
            decode_vector([1, vocab.sep, vocab.sep, 2], 7, vocab.sep)


class TestVocab:
    def test_ids_dense_and_disjoint(self):
        vocab = Vocab(81, 7)
        assert vocab.digit_count == 81
        specials = [vocab.sep, vocab.bos, vocab.eos, vocab.pad]
        assert specials == [81, 82, 83, 84]
        assert vocab.size == 85
        assert len(set(specials)) == 4

    def test_asymmetric_bases(self):
        vocab = Vocab(base_in=81, base_out=7)
        assert list(vocab.encode_input([16])) == [16]
        assert list(vocab.encode_output(16)) == [2, 2]

    def test_bad_base(self):
        with pytest.raises(ValueError):
            Vocab(1, 81)

    def test_decode_output_strips_wrapping(self):
        vocab = Vocab(81, 81)
        assert vocab.decode_output([vocab.bos, 3, 8, vocab.eos]) == 3 * 81 + 8
        with pytest.raises(DecodeError):
            vocab.decode_output([vocab.bos, vocab.eos])  # no digits
        with pytest.raises(DecodeError):
            vocab.decode_output([vocab.bos, vocab.sep, vocab.eos])


class TestEncodeRows:
    def test_matches_scalar_paths(self, rng):
        vocab = Vocab(81, 7)
        q = 251
        A = rng.integers(0, q, (40, 3))
        b = rng.integers(0, q, 40)
        src, dec_in, tgt = encode_rows(A, b, q, vocab)
        for i in range(40):
            expect = [t for t in vocab.encode_input(A[i])]
            got = [t for t in src[i] if t != vocab.pad]
            assert got == expect
            digits = list(encode_int(int(b[i]), 7))
            row_in = [t for t in dec_in[i] if t != vocab.pad]
            row_tgt = [t for t in tgt[i] if t != vocab.pad]
            assert row_in == [vocab.bos] + digits
            assert row_tgt == digits + [vocab.eos]
