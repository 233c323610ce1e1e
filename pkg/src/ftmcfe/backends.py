"""Group arithmetic providers behind :class:`ftmcfe.pairing_core.PairingContext`.

Two providers exist:

* ``Bls12381Backend`` -- BLS12-381 (Type-III, ~128-bit security) via the
  arkworks bindings in ``py_arkworks_bls12381``.
* ``ToyBackend`` -- an *insecure* exponent model of a prime-order pairing
  group. Elements are stored as their discrete logs, so the pairing is a
  modular product. Used by the test-suite for fast exhaustive checks and as a
  transparent oracle; never for real data.

A provider works on raw values of three kinds (``G``, ``GHAT``, ``GT``) and
knows nothing about the scheme.
"""

from __future__ import annotations

import enum

import py_arkworks_bls12381 as ark

from .errors import MalformedEncoding, WrongSubgroup
from .hashing import expand_message_xmd, hash_to_int


class Kind(enum.IntEnum):
    """Group kinds; the values double as the 1-byte wire tag."""

    G = 1
    GHAT = 2
    GT = 3


# BLS12-381 parameters
FIELD_Q = 0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB
ORDER_R = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
# effective cofactors for clearing (RFC 9380, section 8.8.1/8.8.2)
H_EFF_G1 = 0xD201000000010001
H_EFF_G2 = 0xBC69F08F2EE75B3584C6A0EA91B352888E2A8E9145AD7689986FF031508FFE1329C2F178731DB956D82BF015D1212B02EC0EC69D7477C1AE954CBC06689F6A359894C0ADEBBF6B4E8020005AAA95551

_FQ_BYTES = 48
_MAX_HASH_TRIES = 256


# ---------------------------------------------------------------------------
# Fq12 in the arkworks tower layout: Fq2 = Fq[u]/(u^2+1), Fq6 = Fq2[v]/(v^3-(u+1)),
# Fq12 = Fq6[w]/(w^2-v). Only used for GT values that arrive as bytes, because
# the native binding cannot deserialize GT.

def _f2_add(a, b):
    return ((a[0] + b[0]) % FIELD_Q, (a[1] + b[1]) % FIELD_Q)


def _f2_sub(a, b):
    return ((a[0] - b[0]) % FIELD_Q, (a[1] - b[1]) % FIELD_Q)


def _f2_mul(a, b):
    t0 = a[0] * b[0]
    t1 = a[1] * b[1]
    return ((t0 - t1) % FIELD_Q, ((a[0] + a[1]) * (b[0] + b[1]) - t0 - t1) % FIELD_Q)


def _f2_mul_xi(a):
    # (a0 + a1 u)(1 + u)
    return ((a[0] - a[1]) % FIELD_Q, (a[0] + a[1]) % FIELD_Q)


def _f6_add(a, b):
    return (_f2_add(a[0], b[0]), _f2_add(a[1], b[1]), _f2_add(a[2], b[2]))


def _f6_sub(a, b):
    return (_f2_sub(a[0], b[0]), _f2_sub(a[1], b[1]), _f2_sub(a[2], b[2]))


def _f6_mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    t0, t1, t2 = _f2_mul(a0, b0), _f2_mul(a1, b1), _f2_mul(a2, b2)
    c0 = _f2_add(t0, _f2_mul_xi(_f2_add(_f2_mul(a1, b2), _f2_mul(a2, b1))))
    c1 = _f2_add(_f2_add(_f2_mul(a0, b1), _f2_mul(a1, b0)), _f2_mul_xi(t2))
    c2 = _f2_add(_f2_add(_f2_mul(a0, b2), _f2_mul(a2, b0)), t1)
    return (c0, c1, c2)


def _f6_mul_v(a):
    return (_f2_mul_xi(a[2]), a[0], a[1])


def f12_mul(a, b):
    t0 = _f6_mul(a[0], b[0])
    t1 = _f6_mul(a[1], b[1])
    cross = _f6_sub(_f6_sub(_f6_mul(_f6_add(a[0], a[1]), _f6_add(b[0], b[1])), t0), t1)
    return (_f6_add(t0, _f6_mul_v(t1)), cross)


_F2_ZERO = (0, 0)
F12_ONE = (((1, 0), _F2_ZERO, _F2_ZERO), (_F2_ZERO, _F2_ZERO, _F2_ZERO))


def f12_pow(a, k: int):
    result = F12_ONE
    for bit in bin(k)[2:]:
        result = f12_mul(result, result)
        if bit == "1":
            result = f12_mul(result, a)
    return result


def f12_from_bytes(data: bytes):
    coeffs = []
    for i in range(12):
        c = int.from_bytes(data[i * _FQ_BYTES:(i + 1) * _FQ_BYTES], "little")
        if c >= FIELD_Q:
            raise MalformedEncoding("GT coefficient not reduced mod q")
        coeffs.append(c)
    f2 = [(coeffs[2 * i], coeffs[2 * i + 1]) for i in range(6)]
    return ((f2[0], f2[1], f2[2]), (f2[3], f2[4], f2[5]))


def f12_to_bytes(a) -> bytes:
    out = bytearray()
    for f6 in a:
        for f2 in f6:
            for c in f2:
                out += c.to_bytes(_FQ_BYTES, "little")
    return bytes(out)


class PyGT:
    """GT value held as Python Fq12 coefficients (decoded from bytes)."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


# ---------------------------------------------------------------------------


def _double_and_add(point, k: int, identity):
    # plain double-and-add: valid for points outside the prime-order subgroup,
    # unlike the binding's scalar multiplication which reduces k mod r
    acc = identity
    for bit in bin(k)[2:]:
        acc = acc + acc
        if bit == "1":
            acc = acc + point
    return acc


class Bls12381Backend:
    name = "bls12-381"
    order = ORDER_R
    secure = True
    sizes = {Kind.G: 48, Kind.GHAT: 96, Kind.GT: 576}

    def identity(self, kind: Kind):
        if kind is Kind.G:
            return ark.G1Point.identity()
        if kind is Kind.GHAT:
            return ark.G2Point.identity()
        return ark.GT.one()

    # group law, written multiplicatively at the call sites
    def op(self, kind: Kind, a, b):
        if kind is Kind.GT:
            if isinstance(a, PyGT) or isinstance(b, PyGT):
                return PyGT(f12_mul(self._f12(a), self._f12(b)))
            return a * b
        return a + b

    def exp(self, kind: Kind, a, k: int):
        k %= ORDER_R
        if kind is Kind.GT:
            if isinstance(a, PyGT):
                return PyGT(f12_pow(a.value, k))
            acc = ark.GT.one()
            for bit in bin(k)[2:]:
                acc = acc * acc
                if bit == "1":
                    acc = acc * a
            return acc
        return a * ark.Scalar(k)

    def inv(self, kind: Kind, a):
        if kind is Kind.GT:
            return self.exp(kind, a, ORDER_R - 1)
        return -a

    def eq(self, kind: Kind, a, b) -> bool:
        if kind is Kind.GT and (isinstance(a, PyGT) or isinstance(b, PyGT)):
            return self._f12(a) == self._f12(b)
        return a == b

    def key(self, kind: Kind, a):
        """A hashable value that is equal exactly when the elements are."""
        if kind is Kind.GT:
            return self.encode(kind, a)
        return bytes(a.to_compressed_bytes())

    def _f12(self, a):
        if isinstance(a, PyGT):
            return a.value
        return f12_from_bytes(bytes.fromhex(str(a)))

    def encode(self, kind: Kind, a) -> bytes:
        if kind is Kind.GT:
            if isinstance(a, PyGT):
                return f12_to_bytes(a.value)
            return bytes.fromhex(str(a))
        return bytes(a.to_compressed_bytes())

    def decode(self, kind: Kind, data: bytes):
        if len(data) != self.sizes[kind]:
            raise MalformedEncoding(f"{kind.name}: expected {self.sizes[kind]} bytes, got {len(data)}")
        if kind is Kind.GT:
            if not any(data):
                raise MalformedEncoding("GT: zero is not a group element")
            value = f12_from_bytes(data)
            if f12_pow(value, ORDER_R) != F12_ONE:
                raise WrongSubgroup("GT element outside the order-r subgroup")
            return PyGT(value)
        cls = ark.G1Point if kind is Kind.G else ark.G2Point
        try:
            cls.from_compressed_bytes_unchecked(data)
        except ValueError as exc:
            raise MalformedEncoding(f"{kind.name}: {exc}") from None
        try:
            return cls.from_compressed_bytes(data)
        except ValueError:
            raise WrongSubgroup(f"{kind.name}: point is on the curve but not in the prime-order subgroup") from None

    def hash_to(self, kind: Kind, msg: bytes, dst: bytes):
        """Try-and-increment onto the curve followed by cofactor clearing.

        Field elements come from expand_message_xmd; the x-coordinate candidate
        is fed to the binding's point decompression, which rejects x values
        with no curve point.
        """
        if kind is Kind.G:
            cls, h_eff, nfield = ark.G1Point, H_EFF_G1, 1
        elif kind is Kind.GHAT:
            cls, h_eff, nfield = ark.G2Point, H_EFF_G2, 2
        else:
            raise ValueError("cannot hash into GT")
        identity = cls.identity()
        for ctr in range(_MAX_HASH_TRIES):
            uniform = expand_message_xmd(msg + bytes([ctr]), dst, 64 * nfield + 1)
            xs = [int.from_bytes(uniform[64 * i:64 * (i + 1)], "big") % FIELD_Q for i in range(nfield)]
            # zcash-style compressed encoding: Fq2 x is written c1 || c0
            enc = bytearray(b"".join(x.to_bytes(_FQ_BYTES, "big") for x in reversed(xs)))
            enc[0] |= 0x80 | (0x20 if uniform[-1] & 1 else 0)
            try:
                point = cls.from_compressed_bytes_unchecked(bytes(enc))
            except ValueError:
                continue
            point = _double_and_add(point, h_eff, identity)
            if point != identity:
                return point
        raise RuntimeError("hash_to: no curve point found")  # probability ~2^-256

    def pair(self, a, b):
        return ark.GT.pairing(a, b)

    def multi_pair(self, gs, hs):
        return ark.GT.multi_pairing(list(gs), list(hs))


class ToyBackend:
    """Exponent model over a 61-bit prime. Insecure by construction."""

    name = "toy"
    order = (1 << 61) - 1
    secure = False
    sizes = {Kind.G: 8, Kind.GHAT: 8, Kind.GT: 8}

    def identity(self, kind: Kind):
        return 0

    def op(self, kind: Kind, a, b):
        return (a + b) % self.order

    def exp(self, kind: Kind, a, k: int):
        return a * k % self.order

    def inv(self, kind: Kind, a):
        return -a % self.order

    def eq(self, kind: Kind, a, b) -> bool:
        return a == b

    def key(self, kind: Kind, a):
        return a

    def encode(self, kind: Kind, a) -> bytes:
        return a.to_bytes(8, "big")

    def decode(self, kind: Kind, data: bytes):
        if len(data) != 8:
            raise MalformedEncoding(f"{kind.name}: expected 8 bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        if value >= self.order:
            raise MalformedEncoding(f"{kind.name}: value not reduced")
        return value

    def hash_to(self, kind: Kind, msg: bytes, dst: bytes):
        for ctr in range(_MAX_HASH_TRIES):
            value = hash_to_int(msg, dst, self.order, ctr)
            if value:
                return value
        raise RuntimeError("hash_to: exhausted counter")

    def pair(self, a, b):
        return a * b % self.order

    def multi_pair(self, gs, hs):
        return sum(a * b for a, b in zip(gs, hs)) % self.order


BACKENDS = {
    "bls12-381": Bls12381Backend,
    "toy": ToyBackend,
}
