"""Dense polynomials over the scalar field of BLS12-381.

Scalars are plain ints reduced mod ``P``. Coefficients are stored low to high.
"""

from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

from py_ecc.optimized_bls12_381 import curve_order

from vcstack.api.exceptions import IndexOutOfRangeException, InvalidParameterException

P = curve_order

Scalar = int


def inv(value: Scalar) -> Scalar:
    value %= P
    if value == 0:
        raise InvalidParameterException("Zero has no inverse in the scalar field")
    return pow(value, -1, P)


def batch_inverse(values: Sequence[Scalar]) -> List[Scalar]:
    """Invert every value with a single field inversion."""
    prefix = [1] * (len(values) + 1)
    for i, v in enumerate(values):
        prefix[i + 1] = prefix[i] * v % P
    acc = inv(prefix[-1])
    out = [0] * len(values)
    for i in range(len(values) - 1, -1, -1):
        out[i] = acc * prefix[i] % P
        acc = acc * values[i] % P
    return out


class DensePolynomial:
    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[int] = ()):
        coeffs = [c % P for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients: Tuple[Scalar, ...] = tuple(coeffs)

    @classmethod
    def zero(cls) -> "DensePolynomial":
        return cls()

    @classmethod
    def constant(cls, value: int) -> "DensePolynomial":
        return cls([value])

    @classmethod
    def x(cls) -> "DensePolynomial":
        return cls([0, 1])

    @classmethod
    def vanishing(cls, points: Iterable[int]) -> "DensePolynomial":
        """Returns prod (X - p) over the given points."""
        coeffs = [1]
        for p in points:
            p %= P
            nxt = [0] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] = (nxt[i + 1] + c) % P
                nxt[i] = (nxt[i] - p * c) % P
            coeffs = nxt
        return cls(coeffs)

    @property
    def degree(self) -> int:
        # The zero polynomial reports -1.
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, i: int) -> Scalar:
        return self.coefficients[i] if i < len(self.coefficients) else 0

    def evaluate(self, point: int) -> Scalar:
        acc = 0
        point %= P
        for c in reversed(self.coefficients):
            acc = (acc * point + c) % P
        return acc

    def __call__(self, point: int) -> Scalar:
        return self.evaluate(point)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DensePolynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"DensePolynomial({list(self.coefficients)})"

    def __add__(self, other: "DensePolynomial") -> "DensePolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        return DensePolynomial(
            self.coefficient(i) + other.coefficient(i) for i in range(n)
        )

    def __neg__(self) -> "DensePolynomial":
        return DensePolynomial(-c for c in self.coefficients)

    def __sub__(self, other: "DensePolynomial") -> "DensePolynomial":
        return self + (-other)

    def __mul__(self, other: "DensePolynomial") -> "DensePolynomial":
        if self.is_zero() or other.is_zero():
            return DensePolynomial()
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a == 0:
                continue
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return DensePolynomial(out)

    def scale(self, factor: int) -> "DensePolynomial":
        factor %= P
        return DensePolynomial(c * factor for c in self.coefficients)

    def divide_linear(self, point: int) -> Tuple["DensePolynomial", Scalar]:
        """Synthetic division by (X - point). Returns (quotient, remainder)."""
        point %= P
        if self.is_zero():
            return DensePolynomial(), 0
        coeffs = self.coefficients
        quotient = [0] * (len(coeffs) - 1)
        acc = 0
        for i in range(len(coeffs) - 1, 0, -1):
            acc = (acc * point + coeffs[i]) % P
            quotient[i - 1] = acc
        remainder = (acc * point + coeffs[0]) % P
        return DensePolynomial(quotient), remainder

    def divmod(
        self, divisor: "DensePolynomial"
    ) -> Tuple["DensePolynomial", "DensePolynomial"]:
        if divisor.is_zero():
            raise InvalidParameterException("Polynomial division by zero")
        remainder = list(self.coefficients)
        d = divisor.degree
        lead_inv = inv(divisor.coefficients[-1])
        if len(remainder) <= d:
            return DensePolynomial(), DensePolynomial(remainder)
        quotient = [0] * (len(remainder) - d)
        for i in range(len(remainder) - d - 1, -1, -1):
            q = remainder[i + d] * lead_inv % P
            quotient[i] = q
            if q == 0:
                continue
            for j, c in enumerate(divisor.coefficients):
                remainder[i + j] = (remainder[i + j] - q * c) % P
        return DensePolynomial(quotient), DensePolynomial(remainder[:d])

    def __floordiv__(self, divisor: "DensePolynomial") -> "DensePolynomial":
        return self.divmod(divisor)[0]

    def __mod__(self, divisor: "DensePolynomial") -> "DensePolynomial":
        return self.divmod(divisor)[1]


@lru_cache(maxsize=64)
def _domain_denominators(domain_size: int) -> Tuple[Scalar, ...]:
    # prod_{k != i} (i - k) over {0..n-1} is (-1)^(n-1-i) * i! * (n-1-i)!
    fact = [1] * (domain_size + 1)
    for i in range(1, domain_size + 1):
        fact[i] = fact[i - 1] * i % P
    out = []
    for i in range(domain_size):
        d = fact[i] * fact[domain_size - 1 - i] % P
        if (domain_size - 1 - i) % 2:
            d = -d % P
        out.append(d)
    return tuple(out)


def range_denominator(start: int, end: int, index: int) -> Scalar:
    """prod (index - k) over k in [start, end), k != index."""
    if not start <= index < end:
        raise IndexOutOfRangeException(f"Index {index} not in [{start}, {end})")
    return _domain_denominators(end - start)[index - start]


def lagrange_basis(domain_size: int, index: int) -> DensePolynomial:
    """Lagrange polynomial L_index over the domain {0, ..., domain_size-1}."""
    if domain_size < 1:
        raise InvalidParameterException("Domain size must be positive")
    if not 0 <= index < domain_size:
        raise IndexOutOfRangeException(
            f"Lagrange index {index} out of range for domain size {domain_size}"
        )
    numerator = DensePolynomial.vanishing(k for k in range(domain_size) if k != index)
    return numerator.scale(inv(_domain_denominators(domain_size)[index]))


def interpolate(values: Sequence[int]) -> DensePolynomial:
    """The unique polynomial of degree < len(values) with phi(i) = values[i]."""
    n = len(values)
    if n == 0:
        return DensePolynomial()
    full = DensePolynomial.vanishing(range(n))
    denominators = batch_inverse(_domain_denominators(n))
    acc = [0] * n
    for i, v in enumerate(values):
        v %= P
        if v == 0:
            continue
        quotient, _ = full.divide_linear(i)
        weight = v * denominators[i] % P
        for j, c in enumerate(quotient.coefficients):
            acc[j] += c * weight
    return DensePolynomial(acc)


def lagrange_evaluations(start: int, end: int, point: int) -> List[Scalar]:
    """Evaluate every local Lagrange basis of [start, end) at ``point``.

    ``point`` must lie outside the range.
    """
    point %= P
    diffs = [(point - k) % P for k in range(start, end)]
    vanishing = 1
    for d in diffs:
        vanishing = vanishing * d % P
    inverses = batch_inverse(
        [
            diffs[i] * range_denominator(start, end, start + i) % P
            for i in range(end - start)
        ]
    )
    return [vanishing * x % P for x in inverses]
