"""
Exact arithmetic in F_q, q = p^k, for odd primes p >= 5.

Elements are stored by their canonical encoding ``enc = sum(c_i * p**i)`` of the
little-endian coefficient list modulo an irreducible monic polynomial. Prime fields
use plain modular arithmetic; extension fields use addition and multiplication
tables built once per field from the polynomial representation.
"""
import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .error_models import RainbowFqError

logger = logging.getLogger(__name__)


class FieldError(RainbowFqError):
    """
    Base exception for field construction and arithmetic errors.
    """
    code = "field_error"


class NotPrime(FieldError):
    code = "not_prime"
    exit_code = 3


class CharacteristicTooSmall(FieldError):
    code = "characteristic_too_small"
    exit_code = 3


class ReducibleModulus(FieldError):
    code = "reducible_modulus"
    exit_code = 3


class InadmissibleField(FieldError):
    code = "inadmissible_field"
    exit_code = 3


class DivisionByZero(FieldError, ZeroDivisionError):
    code = "division_by_zero"


class MixedFields(FieldError, ValueError):
    code = "mixed_fields"


Poly = List[int]


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def prime_factors(n: int) -> List[int]:
    """Distinct prime factors of n in increasing order."""
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return factors


def parse_prime_power(q: int) -> Tuple[int, int]:
    """
    Split a field order q into (p, k) with q = p**k.

    Raises:
        InadmissibleField: If q is not a prime power.
    """
    if q < 2:
        raise InadmissibleField(f"q={q} is not a prime power")
    factors = prime_factors(q)
    if len(factors) != 1:
        raise InadmissibleField(f"q={q} is not a prime power")
    p = factors[0]
    k = round(math.log(q, p))
    if p ** k != q:
        raise InadmissibleField(f"q={q} is not a prime power")
    return p, k


# ---------- polynomials over F_p (little-endian, no trailing zeros) ----------

def _trim(a: Poly) -> Poly:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a: Poly, b: Poly, p: int) -> Tuple[Poly, Poly]:
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise DivisionByZero("polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    quotient = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        coef = (a[-1] * inv_lead) % p
        quotient[shift] = coef
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _trim(a)
    return _trim(quotient), a


def _poly_mulmod(a: Poly, b: Poly, f: Poly, p: int) -> Poly:
    product = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                product[i + j] = (product[i + j] + x * y) % p
    return _poly_divmod(product, f, p)[1]


def _poly_powmod(base: Poly, e: int, f: Poly, p: int) -> Poly:
    result: Poly = [1]
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _poly_gcd(a: Poly, b: Poly, p: int) -> Poly:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_divmod(a, b, p)[1]
    return a


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """
    Ben-Or irreducibility test for a monic polynomial over F_p.

    f of degree k is irreducible iff gcd(x^{p^i} - x, f) = 1 for every i <= k/2.
    """
    f = _trim([int(c) % p for c in modulus])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    x = [0, 1]
    h = x
    for _ in range(k // 2):
        h = _poly_powmod(h, p, f, p)
        diff = _trim([((h[i] if i < len(h) else 0) - (x[i] if i < len(x) else 0)) % p
                      for i in range(max(len(h), len(x)))])
        if len(_poly_gcd(f, diff, p)) > 1:
            return False
    return True


def _find_irreducible(p: int, k: int, seed: int) -> Tuple[int, ...]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0,))))
    attempts = 0
    while True:
        attempts += 1
        low = [int(c) for c in rng.integers(0, p, size=k)]
        if low[0] == 0:
            continue
        candidate = tuple(low) + (1,)
        if is_irreducible(candidate, p):
            logger.info(f"Found irreducible modulus {candidate} over F_{p} after {attempts} draws")
            return candidate


# ---------- the field ----------

@dataclass(frozen=True)
class FieldSpec:
    """
    The finite field F_q with q = p**k.

    ``modulus`` holds the little-endian coefficients of the monic irreducible
    polynomial (length k + 1); it is the empty tuple for prime fields.
    """
    p: int
    k: int
    modulus: Tuple[int, ...] = ()

    @property
    def q(self) -> int:
        return self.p ** self.k

    def __repr__(self) -> str:
        if self.k == 1:
            return f"FieldSpec(F_{self.p})"
        return f"FieldSpec(F_{self.p}^{self.k}, modulus={self.modulus})"

    # -- construction of elements --

    def element(self, enc: int) -> "FieldElement":
        if not 0 <= enc < self.q:
            raise ValueError(f"encoding {enc} outside [0, {self.q})")
        return FieldElement(self, int(enc))

    def from_int(self, n: int) -> "FieldElement":
        """Image of the integer n in the prime subfield."""
        return FieldElement(self, n % self.p)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def coeffs(self, enc: int) -> Tuple[int, ...]:
        digits = []
        for _ in range(self.k):
            enc, digit = divmod(enc, self.p)
            digits.append(digit)
        return tuple(digits)

    def encode(self, coeffs: Sequence[int]) -> int:
        enc = 0
        for c in reversed(list(coeffs)[:self.k]):
            enc = enc * self.p + (int(c) % self.p)
        return enc

    # -- encoding-level arithmetic --

    def add_enc(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return int(self._add_table[a, b])

    def neg_enc(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self.encode([-c for c in self.coeffs(a)])

    def sub_enc(self, a: int, b: int) -> int:
        return self.add_enc(a, self.neg_enc(b))

    def mul_enc(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a * b) % self.p
        return int(self._mul_table[a, b])

    def pow_enc(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow_enc(self.inv_enc(a), -n)
        if self.k == 1:
            return pow(a, n, self.p)
        result = 1
        while n:
            if n & 1:
                result = self.mul_enc(result, a)
            a = self.mul_enc(a, a)
            n >>= 1
        return result

    def inv_enc(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.k == 1:
            return pow(a, -1, self.p)
        return self.pow_enc(a, self.q - 2)

    # -- array arithmetic over encodings --

    def add_arr(self, a: np.ndarray, b) -> np.ndarray:
        if self.k == 1:
            return (a + b) % self.p
        return self._add_table[a, b]

    def mul_arr(self, a: np.ndarray, b) -> np.ndarray:
        if self.k == 1:
            return (a * b) % self.p
        return self._mul_table[a, b]

    @cached_property
    def _digits(self) -> np.ndarray:
        encs = np.arange(self.q, dtype=np.int64)
        return np.stack([(encs // self.p ** i) % self.p for i in range(self.k)], axis=1)

    @cached_property
    def _add_table(self) -> np.ndarray:
        digits = self._digits
        weights = np.array([self.p ** i for i in range(self.k)], dtype=np.int64)
        summed = (digits[:, None, :] + digits[None, :, :]) % self.p
        return summed @ weights

    @cached_property
    def _mul_table(self) -> np.ndarray:
        # exp/log tables from a primitive element
        q, p = self.q, self.p
        f = list(self.modulus)
        order_factors = prime_factors(q - 1)
        for g_enc in range(2, q):
            g = list(self.coeffs(g_enc))
            if all(_poly_powmod(g, (q - 1) // r, f, p) != [1] for r in order_factors):
                break
        exp = np.zeros(q - 1, dtype=np.int64)
        current: Poly = [1]
        for i in range(q - 1):
            exp[i] = self.encode(current)
            current = _poly_mulmod(current, g, f, p)
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(q - 1, dtype=np.int64)
        logs = (log[:, None] + log[None, :]) % (q - 1)
        table = exp[logs]
        table[0, :] = 0
        table[:, 0] = 0
        logger.info(f"Built multiplication table for F_{p}^{self.k} with generator {g_enc}")
        return table

    @cached_property
    def _nonresidue(self) -> int:
        half = (self.q - 1) // 2
        for enc in range(1, self.q):
            if self.pow_enc(enc, half) != 1:
                return enc
        raise FieldError("no quadratic non-residue found")

    def nonresidue(self) -> "FieldElement":
        """Smallest-encoding quadratic non-residue."""
        return FieldElement(self, self._nonresidue)


def make_field(p: int, k: int = 1, modulus: Optional[Sequence[int]] = None, seed: int = 0) -> FieldSpec:
    """
    Validate parameters and build a FieldSpec.

    Args:
        p (int): Characteristic; a prime >= 5.
        k (int): Extension degree.
        modulus (Optional[Sequence[int]]): Monic degree-k coefficient list, little-endian.
        seed (int): Seed of the irreducible-polynomial search when modulus is omitted.

    Returns:
        FieldSpec: The validated field.

    Raises:
        NotPrime, CharacteristicTooSmall, ReducibleModulus, InadmissibleField
    """
    if not is_prime(p):
        raise NotPrime(f"p={p} is not prime")
    if p < 5:
        raise CharacteristicTooSmall(f"characteristic {p} is excluded; p must be >= 5")
    if k < 1:
        raise InadmissibleField(f"extension degree k={k} must be positive")
    if k == 1:
        return FieldSpec(p, 1, ())
    if modulus is None:
        return FieldSpec(p, k, _find_irreducible(p, k, seed))
    coeffs = tuple(int(c) for c in modulus)
    if len(coeffs) != k + 1 or coeffs[-1] != 1:
        raise InadmissibleField(f"modulus {coeffs} is not monic of degree {k}")
    if any(not 0 <= c < p for c in coeffs):
        raise InadmissibleField(f"modulus coefficients must lie in [0, {p})")
    if not is_irreducible(coeffs, p):
        raise ReducibleModulus(f"modulus {coeffs} is reducible over F_{p}")
    return FieldSpec(p, k, coeffs)


Operand = Union["FieldElement", int]


@dataclass(frozen=True)
class FieldElement:
    """
    An element of F_q identified by its canonical encoding.
    """
    field: FieldSpec
    enc: int

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return self.field.coeffs(self.enc)

    def __repr__(self) -> str:
        return f"F{self.field.q}({self.enc})"

    def __bool__(self) -> bool:
        return self.enc != 0

    def _other(self, other: Operand) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MixedFields(f"{self.field!r} and {other.field!r}")
            return other.enc
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other: Operand) -> "FieldElement":
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.add_enc(self.enc, b))

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "FieldElement":
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub_enc(self.enc, b))

    def __rsub__(self, other: Operand) -> "FieldElement":
        return (-self) + other

    def __mul__(self, other: Operand) -> "FieldElement":
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.mul_enc(self.enc, b))

    __rmul__ = __mul__

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, self.field.neg_enc(self.enc))

    def __truediv__(self, other: Operand) -> "FieldElement":
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.mul_enc(self.enc, self.field.inv_enc(b)))

    def __rtruediv__(self, other: Operand) -> "FieldElement":
        return self.inverse() * other

    def __pow__(self, n: int) -> "FieldElement":
        return FieldElement(self.field, self.field.pow_enc(self.enc, n))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv_enc(self.enc))


def _same_field(a: FieldElement, b: FieldElement) -> None:
    if a.field != b.field:
        raise MixedFields(f"{a.field!r} and {b.field!r}")


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    _same_field(a, b)
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    _same_field(a, b)
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _same_field(a, b)
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, n: int) -> FieldElement:
    if n < 0:
        raise ValueError("exponent must be non-negative")
    return a ** n


def quadratic_character(e: FieldElement) -> int:
    """
    Quadratic character of e: 0 for zero, +1 for non-zero squares, -1 otherwise.
    """
    if e.enc == 0:
        return 0
    field = e.field
    return 1 if field.pow_enc(e.enc, (field.q - 1) // 2) == 1 else -1


def field_sqrt(e: FieldElement) -> Optional[Tuple[FieldElement, ...]]:
    """
    Square roots of e via Tonelli-Shanks.

    Returns:
        Optional[Tuple[FieldElement, ...]]: ``(0,)`` for zero, the two roots ordered by
        encoding for a non-zero square, None for a non-residue.
    """
    field = e.field
    if e.enc == 0:
        return (field.zero,)
    if quadratic_character(e) != 1:
        return None
    q = field.q
    odd, twos = q - 1, 0
    while odd % 2 == 0:
        odd //= 2
        twos += 1
    a = e.enc
    c = field.pow_enc(field._nonresidue, odd)
    t = field.pow_enc(a, odd)
    root = field.pow_enc(a, (odd + 1) // 2)
    m = twos
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = field.mul_enc(t2, t2)
            i += 1
        b = field.pow_enc(c, 1 << (m - i - 1))
        m = i
        c = field.mul_enc(b, b)
        t = field.mul_enc(t, c)
        root = field.mul_enc(root, b)
    roots = sorted({root, field.neg_enc(root)})
    return tuple(FieldElement(field, r) for r in roots)


def enumerate_elements(field: FieldSpec) -> Iterator[FieldElement]:
    """Yield every element of the field in increasing canonical-encoding order."""
    for enc in range(field.q):
        yield FieldElement(field, enc)


_HEADER_RE = re.compile(r"^field\s+p=(\d+)\s+k=(\d+)(?:\s+modulus=([\d,]+))?\s*$")


def format_header(field: FieldSpec) -> str:
    """Serialize the field as ``field p=<p> k=<k> [modulus=<c0,...,ck>]``."""
    header = f"field p={field.p} k={field.k}"
    if field.k > 1:
        header += " modulus=" + ",".join(str(c) for c in field.modulus)
    return header


def parse_header(line: str) -> FieldSpec:
    """
    Parse a field header line.

    Raises:
        ValueError: If the line is not a field header.
        FieldError: If the described field is not admissible.
    """
    match = _HEADER_RE.match(line.strip())
    if not match:
        raise ValueError(f"malformed field header: {line.strip()!r}")
    p, k = int(match.group(1)), int(match.group(2))
    modulus = [int(c) for c in match.group(3).split(",")] if match.group(3) else None
    if k == 1:
        modulus = None
    elif modulus is None:
        raise ValueError("extension field header requires modulus=")
    return make_field(p, k, modulus)
