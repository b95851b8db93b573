"""BLS12-381 group helpers, the structured reference string and KZG openings."""

import hashlib
import logging
import struct
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

from py_ecc.bls.point_compression import (
    compress_G1,
    compress_G2,
    decompress_G1,
    decompress_G2,
)
from py_ecc.bls.typing import G1Compressed, G2Compressed
from py_ecc.optimized_bls12_381 import (
    FQ12,
    G1,
    G2,
    Z1,
    Z2,
    add,
    final_exponentiate,
    is_inf,
    multiply,
    neg,
    pairing,
)

from vcstack.api.exceptions import (
    DegreeBoundException,
    InvalidParameterException,
    MalformedEncodingException,
)
from vcstack.crypto.polynomial import P, DensePolynomial, Scalar

logger = logging.getLogger(__name__)

G1_BYTES = 48
G2_BYTES = 96
SCALAR_BYTES = 32

SRS_MAGIC = b"SVCSRS01"

# Optimized_Point3D from py_ecc; kept opaque here.
G1Element = tuple
G2Element = tuple


def mul(point, scalar: int):
    """Scalar multiplication that takes the short route for negative scalars."""
    s = scalar % P
    if s == 0:
        return Z2 if _is_g2(point) else Z1
    if s > P // 2:
        return neg(multiply(point, P - s))
    return multiply(point, s)


def _is_g2(point) -> bool:
    return hasattr(point[0], "coeffs")


def msm(points: Sequence, scalars: Sequence[int], identity=Z1):
    acc = identity
    for point, scalar in zip(points, scalars):
        if scalar % P == 0 or is_inf(point):
            continue
        acc = add(acc, mul(point, scalar))
    return acc


def g1_to_bytes(point) -> bytes:
    return compress_G1(point).to_bytes(G1_BYTES, "big")


def g1_from_bytes(data: bytes):
    if len(data) != G1_BYTES:
        raise MalformedEncodingException(
            f"G1 element must be {G1_BYTES} bytes, got {len(data)}"
        )
    try:
        return decompress_G1(G1Compressed(int.from_bytes(data, "big")))
    except ValueError as e:
        raise MalformedEncodingException(f"Invalid G1 encoding: {e}")


def g2_to_bytes(point) -> bytes:
    z1, z2 = compress_G2(point)
    return z1.to_bytes(G1_BYTES, "big") + z2.to_bytes(G1_BYTES, "big")


def g2_from_bytes(data: bytes):
    if len(data) != G2_BYTES:
        raise MalformedEncodingException(
            f"G2 element must be {G2_BYTES} bytes, got {len(data)}"
        )
    z1 = int.from_bytes(data[:G1_BYTES], "big")
    z2 = int.from_bytes(data[G1_BYTES:], "big")
    try:
        return decompress_G2(G2Compressed((z1, z2)))
    except ValueError as e:
        raise MalformedEncodingException(f"Invalid G2 encoding: {e}")


def scalar_to_bytes(value: int) -> bytes:
    return (value % P).to_bytes(SCALAR_BYTES, "big")


def pairing_check(pairs: Iterable[Tuple[tuple, tuple]]) -> bool:
    """True iff prod e(P_i, Q_i) is the identity of GT.

    Miller loops are multiplied first and share one final exponentiation.
    """
    acc = FQ12.one()
    for p, q in pairs:
        if is_inf(p) or is_inf(q):
            continue
        acc = acc * pairing(q, p, final_exponentiate=False)
    return final_exponentiate(acc) == FQ12.one()


class Srs:
    """Powers of a secret tau in G1 (up to ``degree``) and G2.

    A debug setup keeps ``tau`` and derives powers lazily, so a large degree
    bound costs nothing until a power is read. Without ``tau`` every power is
    materialized at construction.
    """

    def __init__(
        self,
        degree: int,
        g1_powers: Optional[Sequence] = None,
        g2_powers: Optional[Sequence] = None,
        tau: Optional[int] = None,
        g2_degree: int = 1,
    ):
        if degree < 1:
            raise InvalidParameterException("Degree bound must be at least 1")
        self.degree = degree
        self.tau = tau
        if tau is None:
            if g1_powers is None or g2_powers is None:
                raise InvalidParameterException(
                    "An SRS without trapdoor needs explicit powers"
                )
            if len(g1_powers) != degree + 1 or len(g2_powers) < 2:
                raise InvalidParameterException("SRS power lists have wrong length")
            self._g1 = tuple(g1_powers)
            self._g2 = tuple(g2_powers)
            self.g2_degree = len(g2_powers) - 1
        else:
            self._g1 = None
            self._g2 = None
            self.g2_degree = max(g2_degree, 1)

    @property
    def insecure(self) -> bool:
        return self.tau is not None

    def g1_power(self, i: int):
        if not 0 <= i <= self.degree:
            raise DegreeBoundException(f"G1 power {i} exceeds bound {self.degree}")
        if self._g1 is not None:
            return self._g1[i]
        return _lazy_power("g1", self.tau, i)

    def g2_power(self, i: int):
        if not 0 <= i <= self.g2_degree:
            raise DegreeBoundException(
                f"G2 power {i} exceeds bound {self.g2_degree}"
            )
        if self._g2 is not None:
            return self._g2[i]
        return _lazy_power("g2", self.tau, i)

    @property
    def g1_powers(self) -> List:
        return [self.g1_power(i) for i in range(self.degree + 1)]

    @property
    def g2_powers(self) -> List:
        return [self.g2_power(i) for i in range(self.g2_degree + 1)]

    def without_trapdoor(self) -> "Srs":
        return Srs(self.degree, self.g1_powers, self.g2_powers)


@lru_cache(maxsize=4096)
def _lazy_power(group: str, tau: int, i: int):
    generator = G1 if group == "g1" else G2
    return mul(generator, pow(tau, i, P))


def derive_tau(seed: bytes) -> Scalar:
    tau = int.from_bytes(hashlib.sha256(b"vcstack/srs/" + seed).digest(), "big") % P
    return tau or 1


def trusted_setup(
    degree_bound: int,
    seed: bytes,
    g2_degree: int = 1,
    insecure_debug: bool = False,
) -> Srs:
    """Deterministic test-only setup.

    Args:
        degree_bound: Maximum polynomial degree committed in G1.
        seed: Seed that tau is derived from.
        g2_degree: Highest G2 power published. AMT verification needs the
            vector length here.
        insecure_debug: Keep tau on the returned Srs. Commitments then take a
            single exponentiation each.
    """
    if degree_bound < 1:
        raise InvalidParameterException("Degree bound must be at least 1")
    tau = derive_tau(seed)
    g2_degree = max(g2_degree, 1)
    if insecure_debug:
        logger.debug(f"Trusted setup with retained trapdoor, degree {degree_bound}")
        return Srs(degree_bound, tau=tau, g2_degree=g2_degree)

    logger.debug(f"Trusted setup, degree {degree_bound}, G2 degree {g2_degree}")
    g1_powers = [G1]
    for _ in range(degree_bound):
        g1_powers.append(mul(g1_powers[-1], tau))
    g2_powers = [G2]
    for _ in range(g2_degree):
        g2_powers.append(mul(g2_powers[-1], tau))
    return Srs(degree_bound, g1_powers, g2_powers)


def check_srs(srs: Srs) -> bool:
    """e(pp[i], g2) == e(pp[i-1], g2^tau) for every 1 <= i <= degree."""
    g2_tau = srs.g2_power(1)
    for i in range(1, srs.degree + 1):
        if not pairing_check(
            [(srs.g1_power(i), G2), (neg(srs.g1_power(i - 1)), g2_tau)]
        ):
            return False
    return True


def commit_poly(srs: Srs, poly: DensePolynomial, use_trapdoor: bool = True):
    if poly.degree > srs.degree:
        raise DegreeBoundException(
            f"Polynomial degree {poly.degree} exceeds bound {srs.degree}"
        )
    if poly.is_zero():
        return Z1
    if use_trapdoor and srs.tau is not None:
        return mul(G1, poly.evaluate(srs.tau))
    return msm(
        [srs.g1_power(i) for i in range(len(poly.coefficients))], poly.coefficients
    )


def commit_poly_g2(srs: Srs, poly: DensePolynomial, use_trapdoor: bool = True):
    if poly.degree > srs.g2_degree:
        raise DegreeBoundException(
            f"Polynomial degree {poly.degree} exceeds G2 bound {srs.g2_degree}"
        )
    if poly.is_zero():
        return Z2
    if use_trapdoor and srs.tau is not None:
        return mul(G2, poly.evaluate(srs.tau))
    return msm(
        [srs.g2_power(i) for i in range(len(poly.coefficients))],
        poly.coefficients,
        identity=Z2,
    )


def open_poly(
    srs: Srs, poly: DensePolynomial, point: int, use_trapdoor: bool = True
) -> Tuple[Scalar, tuple]:
    """Returns (phi(point), [(phi(X) - phi(point)) / (X - point)])."""
    if poly.degree > srs.degree:
        raise DegreeBoundException(
            f"Polynomial degree {poly.degree} exceeds bound {srs.degree}"
        )
    quotient, value = poly.divide_linear(point)
    return value, commit_poly(srs, quotient, use_trapdoor)


def verify_kzg(srs: Srs, commitment, point: int, value: int, proof) -> bool:
    lhs = add(commitment, neg(mul(G1, value)))
    shifted = add(srs.g2_power(1), neg(mul(G2, point)))
    return pairing_check([(lhs, G2), (neg(proof), shifted)])


def encode_srs(srs: Srs) -> bytes:
    out = bytearray(SRS_MAGIC)
    out += struct.pack("<I", srs.degree)
    for i in range(srs.degree + 1):
        out += g1_to_bytes(srs.g1_power(i))
    for i in range(2):
        out += g2_to_bytes(srs.g2_power(i))
    return bytes(out)


def decode_srs(data: bytes) -> Srs:
    header = len(SRS_MAGIC) + 4
    if len(data) < header or data[: len(SRS_MAGIC)] != SRS_MAGIC:
        raise MalformedEncodingException("Bad SRS magic")
    (degree,) = struct.unpack_from("<I", data, len(SRS_MAGIC))
    expected = header + (degree + 1) * G1_BYTES + 2 * G2_BYTES
    if len(data) != expected:
        raise MalformedEncodingException(
            f"SRS of degree {degree} must be {expected} bytes, got {len(data)}"
        )
    offset = header
    g1_powers = []
    for _ in range(degree + 1):
        g1_powers.append(g1_from_bytes(data[offset : offset + G1_BYTES]))
        offset += G1_BYTES
    g2_powers = []
    for _ in range(2):
        g2_powers.append(g2_from_bytes(data[offset : offset + G2_BYTES]))
        offset += G2_BYTES
    return Srs(degree, g1_powers, g2_powers)
