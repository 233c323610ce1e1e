"""Binary wire formats for keys and ciphertexts.

Every object starts with ``b"FTMC" | version u8 | kind u8`` and then lists its
fields in declaration order. Integers are big-endian, scalars are 32 bytes,
strings are u32-length-prefixed UTF-8, group elements use the tagged
encoding from :mod:`ftmcfe.pairing_core`.
"""

from __future__ import annotations

import struct

from .backends import Kind
from .errors import MalformedEncoding, VersionMismatch
from .pairing_core import Diag, DiagScalar, Element, PairingContext, deserialize, init_pairing
from .polynomial import PowersOfGamma
from .scheme import Ciphertext, ClientKeyPair, MasterPublicKey, PartialFunctionalKey

MAGIC = b"FTMC"
VERSION = 1

KIND_MPK = 1
KIND_CLIENT_KEY = 2
KIND_PARTIAL_KEY = 3
KIND_CIPHERTEXT = 4


class _Writer:
    def __init__(self, kind: int):
        self.buf = bytearray(MAGIC + bytes([VERSION, kind]))

    def u32(self, v: int):
        self.buf += struct.pack(">I", v)

    def scalar(self, v: int):
        self.buf += v.to_bytes(32, "big")

    def raw(self, data: bytes):
        self.buf += data

    def string(self, s: str):
        data = s.encode("utf-8")
        self.u32(len(data))
        self.buf += data

    def element(self, el: Element):
        self.buf += el.to_bytes()

    def diag(self, d: Diag):
        self.element(d.c1)
        self.element(d.c2)


class _Reader:
    def __init__(self, data: bytes, kind: int, ctx: PairingContext | None = None):
        if len(data) < 6 or data[:4] != MAGIC:
            raise MalformedEncoding("missing FTMC header")
        if data[4] != VERSION:
            raise VersionMismatch(f"wire version {data[4]}, expected {VERSION}")
        if data[5] != kind:
            raise MalformedEncoding(f"object kind {data[5]}, expected {kind}")
        self.data = data
        self.pos = 6
        self.ctx = ctx

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedEncoding("truncated buffer")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def scalar(self) -> int:
        v = int.from_bytes(self.take(32), "big")
        if self.ctx is not None and v >= self.ctx.p:
            raise MalformedEncoding("scalar not reduced")
        return v

    def string(self) -> str:
        try:
            return self.take(self.u32()).decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedEncoding("label is not valid UTF-8") from None

    def element(self, kind: Kind) -> Element:
        return deserialize(self.ctx, self.take(self.ctx.element_size(kind)), kind)

    def diag(self, kind: Kind) -> Diag:
        return Diag(self.element(kind), self.element(kind))

    def done(self):
        if self.pos != len(self.data):
            raise MalformedEncoding(f"{len(self.data) - self.pos} trailing bytes")


def dump_mpk(mpk: MasterPublicKey) -> bytes:
    w = _Writer(KIND_MPK)
    w.string(mpk.ctx.curve)
    w.u32(mpk.n)
    blob = mpk.powers.to_bytes()
    w.u32(len(blob))
    w.raw(blob)
    return bytes(w.buf)


def load_mpk(data: bytes) -> MasterPublicKey:
    r = _Reader(data, KIND_MPK)
    r.ctx = init_pairing(r.string())
    n = r.u32()
    powers = PowersOfGamma.from_bytes(r.ctx, r.take(r.u32()))
    r.done()
    if powers.n != n:
        raise MalformedEncoding(f"mpk declares n={n} but carries powers up to {powers.n}")
    return MasterPublicKey(ctx=r.ctx, n=n, powers=powers)


def dump_client_key(key: ClientKeyPair) -> bytes:
    w = _Writer(KIND_CLIENT_KEY)
    w.u32(key.index)
    for v in (*key.S.lanes(), *key.T.lanes(), key.w):
        w.scalar(v)
    return bytes(w.buf)


def load_client_key(data: bytes, ctx: PairingContext | None = None) -> ClientKeyPair:
    r = _Reader(data, KIND_CLIENT_KEY, ctx)
    index = r.u32()
    s1, s2, t1, t2, w = (r.scalar() for _ in range(5))
    r.done()
    return ClientKeyPair(index=index, S=DiagScalar(s1, s2), T=DiagScalar(t1, t2), w=w)


def dump_partial_key(key: PartialFunctionalKey) -> bytes:
    w = _Writer(KIND_PARTIAL_KEY)
    w.u32(key.index)
    for d in (key.sk1, key.sk2, key.sk3, key.sk4, key.sk5):
        w.diag(d)
    w.element(key.set_commit_gh1)
    w.element(key.shifted_commit_g2)
    w.raw(key.b_digest)
    w.raw(key.y_digest)
    w.u32(key.t)
    return bytes(w.buf)


def load_partial_key(data: bytes, ctx: PairingContext) -> PartialFunctionalKey:
    r = _Reader(data, KIND_PARTIAL_KEY, ctx)
    key = PartialFunctionalKey(
        index=r.u32(),
        sk1=r.diag(Kind.GHAT),
        sk2=r.diag(Kind.GHAT),
        sk3=r.diag(Kind.G),
        sk4=r.diag(Kind.GHAT),
        sk5=r.diag(Kind.G),
        set_commit_gh1=r.element(Kind.GHAT),
        shifted_commit_g2=r.element(Kind.G),
        b_digest=r.take(32),
        y_digest=r.take(32),
        t=r.u32(),
    )
    r.done()
    return key


def dump_ciphertext(ct: Ciphertext) -> bytes:
    w = _Writer(KIND_CIPHERTEXT)
    w.u32(ct.index)
    w.string(ct.label)
    w.u32(ct.t)
    w.diag(ct.C1)
    w.diag(ct.C2)
    w.element(ct.C3)
    w.element(ct.C4)
    w.diag(ct.C5)
    return bytes(w.buf)


def load_ciphertext(data: bytes, ctx: PairingContext) -> Ciphertext:
    r = _Reader(data, KIND_CIPHERTEXT, ctx)
    ct = Ciphertext(
        index=r.u32(),
        label=r.string(),
        t=r.u32(),
        C1=r.diag(Kind.G),
        C2=r.diag(Kind.G),
        C3=r.element(Kind.G),
        C4=r.element(Kind.GHAT),
        C5=r.diag(Kind.G),
    )
    r.done()
    return ct
