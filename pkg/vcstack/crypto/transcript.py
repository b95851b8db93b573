"""Fiat-Shamir transcript and hash-to-scalar helpers."""

import hashlib
import struct

from vcstack.crypto.pairing import g1_to_bytes, scalar_to_bytes
from vcstack.crypto.polynomial import P, Scalar


def hash_to_scalar(data: bytes) -> Scalar:
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % P


def hash_point(point) -> Scalar:
    """H(C): SHA-256 of the compressed encoding, reduced mod p."""
    return hash_to_scalar(g1_to_bytes(point))


def hash_message(message: int) -> Scalar:
    return hash_to_scalar(scalar_to_bytes(message))


class Transcript:
    """Absorbs length-prefixed elements and squeezes a scalar challenge."""

    def __init__(self):
        self._buffer = bytearray()

    def append_bytes(self, data: bytes) -> "Transcript":
        self._buffer += struct.pack("<I", len(data))
        self._buffer += data
        return self

    def append_point(self, point) -> "Transcript":
        return self.append_bytes(g1_to_bytes(point))

    def append_scalar(self, value: int) -> "Transcript":
        return self.append_bytes(scalar_to_bytes(value))

    def challenge(self) -> Scalar:
        return hash_to_scalar(bytes(self._buffer))
