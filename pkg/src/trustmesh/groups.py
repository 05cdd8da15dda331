"""Prime-order group backends, scalar field arithmetic and protocol hashes.

Two interchangeable backends sit behind one additive-group API:

* ``ed25519`` -- the prime-order subgroup of the Ed25519 curve, for real runs.
* ``toy``    -- the order-11 subgroup of Z_23* (g=2, h=3), small enough that
  every protocol equation can be cross-checked by brute force in tests.

Scalars live in Z_q for the backend order q and are canonically reduced after
every operation.  Group elements are immutable; the second generator H backs
the blinding side of Pedersen-style commitments and is derived by hashing the
encoding of G onto the curve (fixed h=3 on the toy backend).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Scalar:
    """Residue modulo the group order q."""

    value: int
    q: int

    def __post_init__(self):
        if not 0 <= self.value < self.q:
            object.__setattr__(self, "value", self.value % self.q)

    def _coerce(self, other) -> int:
        if isinstance(other, Scalar):
            if other.q != self.q:
                raise ValueError("mixed scalar fields")
            return other.value
        if isinstance(other, int):
            return other % self.q
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return Scalar((self.value + v) % self.q, self.q)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return Scalar((self.value - v) % self.q, self.q)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return Scalar((v - self.value) % self.q, self.q)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return Scalar((self.value * v) % self.q, self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar((-self.value) % self.q, self.q)

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise ZeroDivisionError("no inverse for 0")
        return Scalar(pow(self.value, self.q - 2, self.q), self.q)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return self * Scalar(v, self.q).inverse()

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.value == other.value and self.q == other.q
        if isinstance(other, int):
            return self.value == other % self.q
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.q))

    def __repr__(self):
        return f"Scalar({self.value} mod {self.q})"


# ---------------------------------------------------------------------------
# Group elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class GroupElement:
    """Element of the backend's prime-order group, written additively."""

    backend: "GroupBackend"
    rep: object
    _enc: bytes | None = field(default=None, init=False, repr=False, compare=False)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.backend, self.backend._add(self.rep, other.rep))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.backend, self.backend._add(self.rep, self.backend._neg(other.rep)))

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.backend, self.backend._neg(self.rep))

    def mul(self, k) -> "GroupElement":
        """Scalar multiplication k*P (k a Scalar or int)."""
        if isinstance(k, Scalar):
            if k.q != self.backend.order:
                raise ValueError("scalar from a different field")
            k = k.value
        return GroupElement(self.backend, self.backend._mul(k % self.backend.order, self.rep))

    __rmul__ = mul

    def __eq__(self, other):
        if not isinstance(other, GroupElement) or other.backend is not self.backend:
            return NotImplemented
        return self.backend._eq(self.rep, other.rep)

    def __hash__(self):
        return hash((self.backend.name, self.encode()))

    def is_identity(self) -> bool:
        return self.backend._eq(self.rep, self.backend._identity_rep())

    def is_valid(self) -> bool:
        """Membership check: on the curve / in the subgroup."""
        return self.backend._is_valid(self.rep)

    def encode(self) -> bytes:
        # encoding normalizes projective coordinates (one field inversion);
        # cache it, elements are immutable
        if self._enc is None:
            object.__setattr__(self, "_enc", self.backend._encode(self.rep))
        return self._enc

    def __repr__(self):
        return f"GroupElement<{self.backend.name}:{self.encode().hex()}>"

    def _check(self, other):
        if not isinstance(other, GroupElement) or other.backend is not self.backend:
            raise ValueError("elements from different groups")


# ---------------------------------------------------------------------------
# Backend base
# ---------------------------------------------------------------------------


class GroupBackend:
    """Shared surface of a prime-order group with generators G and H."""

    name: str
    order: int
    scalar_bytes: int
    element_bytes: int

    # -- scalars ----------------------------------------------------------

    def scalar(self, value: int) -> Scalar:
        return Scalar(value % self.order, self.order)

    def random_scalar(self, rng) -> Scalar:
        return Scalar(rng.randbelow(self.order), self.order)

    def random_nonzero_scalar(self, rng) -> Scalar:
        return Scalar(1 + rng.randbelow(self.order - 1), self.order)

    def encode_scalar(self, s: Scalar) -> bytes:
        if s.q != self.order:
            raise ValueError("scalar from a different field")
        return s.value.to_bytes(self.scalar_bytes, "little")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_bytes:
            raise ValueError(f"scalar encoding must be {self.scalar_bytes} bytes")
        value = int.from_bytes(data, "little")
        if value >= self.order:
            raise ValueError("non-canonical scalar encoding")
        return Scalar(value, self.order)

    # -- elements ---------------------------------------------------------

    def generator(self) -> GroupElement:
        return GroupElement(self, self._generator_rep())

    def second_generator(self) -> GroupElement:
        return GroupElement(self, self._second_generator_rep())

    def identity(self) -> GroupElement:
        return GroupElement(self, self._identity_rep())

    def element_sum(self, elements: Iterable[GroupElement]) -> GroupElement:
        acc = self.identity()
        for e in elements:
            acc = acc + e
        return acc

    def decode_element(self, data: bytes) -> GroupElement:
        return GroupElement(self, self._decode(data))

    # hooks implemented per backend
    def _generator_rep(self):
        raise NotImplementedError

    def _second_generator_rep(self):
        raise NotImplementedError

    def _identity_rep(self):
        raise NotImplementedError

    def _add(self, a, b):
        raise NotImplementedError

    def _neg(self, a):
        raise NotImplementedError

    def _mul(self, k: int, a):
        raise NotImplementedError

    def _eq(self, a, b) -> bool:
        raise NotImplementedError

    def _is_valid(self, a) -> bool:
        raise NotImplementedError

    def _encode(self, a) -> bytes:
        raise NotImplementedError

    def _decode(self, data: bytes):
        raise NotImplementedError

    def __repr__(self):
        return f"<GroupBackend {self.name}>"


# ---------------------------------------------------------------------------
# Toy backend: order-11 subgroup of Z_23*
# ---------------------------------------------------------------------------


class ToyGroup(GroupBackend):
    """Multiplicative subgroup of Z_23* of prime order 11, g=2, h=3.

    Group operations are written additively in the API but are modular
    multiplications underneath, so tests can brute-force every discrete log.
    """

    name = "toy"
    modulus = 23
    order = 11
    scalar_bytes = 1
    element_bytes = 1

    _g = 2
    _h = 3

    def _generator_rep(self):
        return self._g

    def _second_generator_rep(self):
        return self._h

    def _identity_rep(self):
        return 1

    def _add(self, a, b):
        return (a * b) % self.modulus

    def _neg(self, a):
        return pow(a, self.modulus - 2, self.modulus)

    def _mul(self, k, a):
        return pow(a, k % self.order, self.modulus)

    def _eq(self, a, b):
        return a == b

    def _is_valid(self, a):
        return 0 < a < self.modulus and pow(a, self.order, self.modulus) == 1

    def _encode(self, a):
        return bytes([a])

    def _decode(self, data):
        if len(data) != 1:
            raise ValueError("toy element encoding must be 1 byte")
        a = data[0]
        if not self._is_valid(a):
            raise ValueError(f"{a} is not in the order-11 subgroup of Z_23*")
        return a


# ---------------------------------------------------------------------------
# Ed25519 backend: prime-order subgroup of the Ed25519 curve
# ---------------------------------------------------------------------------

_P = 2**255 - 19
_D = (-121665 * pow(121666, _P - 2, _P)) % _P
_SQRT_M1 = pow(2, (_P - 1) // 4, _P)
_BASE_X = 15112221349535400772501151409588531511454012693041857206046113283949847762202
_BASE_Y = 46316835694926478169428394003475163141307993866256225615783033603165251855960

_WINDOW = 4
_WINDOW_COUNT = 64  # ceil(253 / 4)


def _ed_add(p1, p2):
    x1, y1, z1, t1 = p1
    x2, y2, z2, t2 = p2
    a = (y1 - x1) * (y2 - x2) % _P
    b = (y1 + x1) * (y2 + x2) % _P
    c = t1 * t2 % _P * (2 * _D) % _P
    d = z1 * z2 * 2 % _P
    e = b - a
    f = d - c
    g = d + c
    h = b + a
    return (e * f % _P, g * h % _P, f * g % _P, e * h % _P)


def _ed_double(p):
    x1, y1, z1, _ = p
    a = x1 * x1 % _P
    b = y1 * y1 % _P
    c = 2 * z1 * z1 % _P
    h = a + b
    e = (h - (x1 + y1) * (x1 + y1)) % _P
    g = a - b
    f = c + g
    return (e * f % _P, g * h % _P, f * g % _P, e * h % _P)


_ED_IDENTITY = (0, 1, 1, 0)


def _ed_mul(k: int, p):
    """Fixed-window scalar multiplication for an arbitrary point."""
    if k == 0:
        return _ED_IDENTITY
    if k < 1 << 16:
        # small exponents (share-index powers): plain double-and-add beats
        # paying for the window table
        acc = None
        while k:
            if k & 1:
                acc = p if acc is None else _ed_add(acc, p)
            k >>= 1
            if k:
                p = _ed_double(p)
        return acc
    table = [_ED_IDENTITY, p]
    for _ in range(14):
        table.append(_ed_add(table[-1], p))
    acc = None
    P = _P
    for shift in range(((k.bit_length() + 3) // 4) * 4 - 4, -1, -4):
        if acc is not None:
            x, y, z, _ = acc
            for _ in range(4):
                a = x * x % P
                b = y * y % P
                c = 2 * z * z % P
                h = a + b
                e = (h - (x + y) * (x + y)) % P
                g = a - b
                f = c + g
                x, y, z = e * f % P, g * h % P, f * g % P
            acc = (x, y, z, e * h % P)
        nibble = (k >> shift) & 0xF
        if nibble:
            acc = table[nibble] if acc is None else _ed_add(acc, table[nibble])
    return acc if acc is not None else _ED_IDENTITY


class Ed25519Group(GroupBackend):
    """Prime-order subgroup of Ed25519 (order 2^252 + 27742...493).

    Base-point multiplications for G and H use precomputed window tables;
    points are kept in extended twisted-Edwards coordinates.  Not hardened
    against timing side channels.
    """

    name = "ed25519"
    order = 2**252 + 27742317777372353535851937790883648493
    scalar_bytes = 32
    element_bytes = 32

    def __init__(self):
        self._gen = (_BASE_X, _BASE_Y, 1, _BASE_X * _BASE_Y % _P)
        self._second_gen = self._derive_second_generator()
        self._tables = {}

    # -- second generator ---------------------------------------------------

    def _derive_second_generator(self):
        """Hash the encoding of G to a curve point, clear the cofactor."""
        seed = self._encode(self._gen)
        counter = 0
        while True:
            digest = hashlib.sha512(b"trustmesh/generator-h" + seed + bytes([counter])).digest()
            try:
                candidate = self._decode_point(digest[:32])
            except ValueError:
                counter += 1
                continue
            cleared = _ed_mul(8, candidate)
            if not self._eq(cleared, _ED_IDENTITY):
                return cleared
            counter += 1

    # -- precomputed base tables ---------------------------------------------

    def _table_for(self, rep):
        key = self._encode(rep)
        table = self._tables.get(key)
        if table is None:
            table = []
            base = rep
            for _ in range(_WINDOW_COUNT):
                row = [base]
                for _ in range(14):
                    row.append(_ed_add(row[-1], base))
                table.append(row)
                for _ in range(_WINDOW):
                    base = _ed_double(base)
            self._tables[key] = table
        return table

    def _mul_base(self, k: int, rep):
        table = self._table_for(rep)
        acc = _ED_IDENTITY
        for w in range(_WINDOW_COUNT):
            nibble = (k >> (w * _WINDOW)) & 0xF
            if nibble:
                acc = _ed_add(acc, table[w][nibble - 1])
        return acc

    # -- backend hooks --------------------------------------------------------

    def _generator_rep(self):
        return self._gen

    def _second_generator_rep(self):
        return self._second_gen

    def _identity_rep(self):
        return _ED_IDENTITY

    def _add(self, a, b):
        return _ed_add(a, b)

    def _neg(self, a):
        x, y, z, t = a
        return ((-x) % _P, y, z, (-t) % _P)

    def _mul(self, k, a):
        if a is self._gen or a == self._gen:
            return self._mul_base(k, self._gen)
        if a is self._second_gen or a == self._second_gen:
            return self._mul_base(k, self._second_gen)
        return _ed_mul(k, a)

    def _eq(self, a, b):
        x1, y1, z1, _ = a
        x2, y2, z2, _ = b
        return (x1 * z2 - x2 * z1) % _P == 0 and (y1 * z2 - y2 * z1) % _P == 0

    def _is_valid(self, a):
        # projective curve check: -x^2 + y^2 = 1 + d x^2 y^2
        x, y, z, t = a
        if z % _P == 0:
            return False
        if (t * z - x * y) % _P != 0:
            return False
        lhs = (y * y - x * x) * (z * z) % _P
        rhs = (z * z % _P * (z * z) + _D * x * x % _P * (y * y)) % _P
        return lhs == rhs

    def _encode(self, a):
        x, y, z, _ = a
        zinv = pow(z, _P - 2, _P)
        xa = x * zinv % _P
        ya = y * zinv % _P
        return (ya | ((xa & 1) << 255)).to_bytes(32, "little")

    def _decode_point(self, data: bytes):
        """Decode 32 bytes to a curve point (may lie outside the subgroup)."""
        if len(data) != 32:
            raise ValueError("point encoding must be 32 bytes")
        raw = int.from_bytes(data, "little")
        sign = raw >> 255
        y = raw & ((1 << 255) - 1)
        if y >= _P:
            raise ValueError("non-canonical point encoding")
        y2 = y * y % _P
        u = (y2 - 1) % _P
        v = (_D * y2 + 1) % _P
        x = u * pow(v, 3, _P) % _P * pow(u * pow(v, 7, _P) % _P, (_P - 5) // 8, _P) % _P
        if (v * x * x - u) % _P != 0:
            x = x * _SQRT_M1 % _P
        if (v * x * x - u) % _P != 0:
            raise ValueError("not a point on the curve")
        if x == 0 and sign:
            raise ValueError("invalid sign bit for x=0")
        if x & 1 != sign:
            x = _P - x
        return (x, y, 1, x * y % _P)

    def _decode(self, data: bytes):
        point = self._decode_point(data)
        # reject small-order components: decoded wire points must sit in the
        # prime-order subgroup
        if not self._eq(_ed_mul(self.order, point), _ED_IDENTITY):
            raise ValueError("point is not in the prime-order subgroup")
        return point


# ---------------------------------------------------------------------------
# Backend registry
# ---------------------------------------------------------------------------

_BACKENDS: dict[str, GroupBackend] = {}


def get_backend(name: str) -> GroupBackend:
    """Return the shared backend instance for "toy" or "ed25519"."""
    backend = _BACKENDS.get(name)
    if backend is None:
        if name == "toy":
            backend = ToyGroup()
        elif name == "ed25519":
            backend = Ed25519Group()
        else:
            raise ValueError(f"unknown backend {name!r} (expected 'toy' or 'ed25519')")
        _BACKENDS[name] = backend
    return backend


# ---------------------------------------------------------------------------
# Protocol hashes
# ---------------------------------------------------------------------------


def hash_bytes(domain_tag: str, parts: Sequence[bytes]) -> bytes:
    """SHA-512 over a domain tag and length-prefixed parts."""
    h = hashlib.sha512(domain_tag.encode("ascii"))
    for part in parts:
        h.update(len(part).to_bytes(8, "big"))
        h.update(part)
    return h.digest()


def hash_to_scalar(backend: GroupBackend, domain_tag: str, parts: Sequence[bytes]) -> Scalar:
    """Reduce the 512-bit domain-separated hash into Z_q."""
    return backend.scalar(int.from_bytes(hash_bytes(domain_tag, parts), "big"))


def id_bytes(participant_id: int) -> bytes:
    """Canonical 4-byte big-endian participant id used in transcripts."""
    return participant_id.to_bytes(4, "big")
