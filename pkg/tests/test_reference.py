"""The oracles themselves must be trustworthy before anything leans on them."""

import hashlib
import random

import pytest

from pimcrypt import reference as ref

FIPS_KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
FIPS_PLAINTEXT = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_CIPHERTEXT = bytes.fromhex("69c4e0d86a7b0430d8cdb78070b4c55a")


def test_gf_mul_basics():
    assert ref.gf_mul(2, 1) == 2
    assert ref.gf_mul(3, 1) == 3
    assert ref.gf_mul(2, 0x80) == 0x1B  # wraps through the reduction polynomial
    assert ref.gf_mul(0, 0xFF) == 0
    assert ref.gf_mul(1, 0xAB) == 0xAB


def test_gf_mul_field_laws():
    rng = random.Random(7)
    for _ in range(200):
        a, b, c = (rng.randrange(256) for _ in range(3))
        assert ref.gf_mul(a, b) == ref.gf_mul(b, a)
        assert ref.gf_mul(a, b ^ c) == ref.gf_mul(a, b) ^ ref.gf_mul(a, c)


def test_computed_sbox_shape():
    box = ref.computed_sbox()
    assert len(box) == 256
    assert len(set(box)) == 256  # bijection
    assert box[0x00] == 0x63
    assert box[0x01] == 0x7C
    assert box[0x53] == 0xED


def test_key_schedule_zero_key():
    ks = ref.key_schedule(bytes(16))
    assert len(ks) == 176
    assert ks[:16] == bytes(16)
    assert ks[16:20] == bytes.fromhex("62636363")


def test_key_schedule_known_key():
    ks = ref.key_schedule(bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c"))
    assert ks[-4:] == bytes.fromhex("b6630ca6")


def test_key_schedule_rejects_bad_length():
    with pytest.raises(ValueError):
        ref.key_schedule(bytes(15))


def test_encrypt_block_published_vector():
    assert ref.encrypt_block(FIPS_PLAINTEXT, FIPS_KEY) == FIPS_CIPHERTEXT


def test_hash_constants_derive_to_published_values():
    assert ref.hash_init_words()[0] == 0x6A09E667
    assert ref.hash_init_words()[7] == 0x5BE0CD19
    assert ref.hash_round_words()[0] == 0x428A2F98
    assert ref.hash_round_words()[63] == 0xC67178F2


def test_sha256_published_vectors():
    assert ref.sha256(b"abc").hex() == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )
    assert ref.sha256(b"").hex() == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    )


def test_sha256_against_hashlib():
    rng = random.Random(11)
    for _ in range(64):
        msg = rng.randbytes(rng.randrange(0, 300))
        assert ref.sha256(msg) == hashlib.sha256(msg).digest()
