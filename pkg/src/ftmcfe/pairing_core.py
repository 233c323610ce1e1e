"""Type-III pairing arithmetic, diagonal-pair elements and the two hash oracles.

Group elements are written multiplicatively: ``a * b`` is the group law,
``a ** k`` exponentiation and ``a / b`` division, in all three groups.
A 2x2 diagonal matrix in the exponent is stored as a pair of elements
(:class:`Diag`) or a pair of scalars (:class:`DiagScalar`); every matrix the
scheme touches is diagonal, so the algebra is two independent lanes.
"""

from __future__ import annotations

import functools
import secrets
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .backends import BACKENDS, Kind
from .errors import EmptyInput, MalformedEncoding, UnsupportedCurve

DEFAULT_CURVE = "bls12-381"

# domain-separation tags
GENERATOR_TAGS = {
    "g0": (Kind.G, b"ftmcfe/g0"),
    "g1": (Kind.G, b"ftmcfe/g1"),
    "g2": (Kind.G, b"ftmcfe/g2"),
    "gh0": (Kind.GHAT, b"ftmcfe/ghat0"),
    "gh1": (Kind.GHAT, b"ftmcfe/ghat1"),
    "gh2": (Kind.GHAT, b"ftmcfe/ghat2"),
    "g": (Kind.G, b"ftmcfe/g"),
    "gh": (Kind.GHAT, b"ftmcfe/ghat"),
}
H1_TAGS = (b"ftmcfe/H1/c1", b"ftmcfe/H1/c2")
H2_TAGS = (b"ftmcfe/H2/c1", b"ftmcfe/H2/c2")

_BACKEND_INSTANCES = {name: cls() for name, cls in BACKENDS.items()}


class Element:
    """An element of G, Ĝ or G_T. Immutable."""

    __slots__ = ("kind", "raw", "backend")

    def __init__(self, kind: Kind, raw, backend):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    def _check(self, other: "Element") -> None:
        if not isinstance(other, Element) or other.kind is not self.kind or other.backend is not self.backend:
            raise TypeError(f"cannot combine {self.kind.name} element with {other!r}")

    def __mul__(self, other):
        if isinstance(other, Diag):
            return other * self
        self._check(other)
        return Element(self.kind, self.backend.op(self.kind, self.raw, other.raw), self.backend)

    def __truediv__(self, other: "Element") -> "Element":
        return self * other.inverse()

    def __pow__(self, k):
        if isinstance(k, DiagScalar):
            return Diag(self ** k.d1, self ** k.d2)
        return Element(self.kind, self.backend.exp(self.kind, self.raw, k % self.backend.order), self.backend)

    def inverse(self) -> "Element":
        return Element(self.kind, self.backend.inv(self.kind, self.raw), self.backend)

    def is_identity(self) -> bool:
        return self.backend.eq(self.kind, self.raw, self.backend.identity(self.kind))

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return (
            other.kind is self.kind
            and other.backend is self.backend
            and self.backend.eq(self.kind, self.raw, other.raw)
        )

    def __hash__(self):
        return hash((self.kind, self.backend.key(self.kind, self.raw)))

    def to_bytes(self) -> bytes:
        return serialize(self)

    def __repr__(self):
        return f"Element({self.kind.name}, {serialize(self)[1:9].hex()}...)"


@dataclass(frozen=True)
class DiagScalar:
    """diag(d1, d2) over Z_p."""

    d1: int
    d2: int

    def lanes(self) -> tuple[int, int]:
        return (self.d1, self.d2)

    def __mul__(self, k: int) -> "DiagScalar":
        return DiagScalar(self.d1 * k, self.d2 * k)


@dataclass(frozen=True)
class Diag:
    """A diagonal matrix in the exponent: (c1, c2) in one group.

    Stands in for DiagG, DiagĜ and DiagGt depending on the component kind.
    """

    c1: Element
    c2: Element

    @property
    def kind(self) -> Kind:
        return self.c1.kind

    def lanes(self) -> tuple[Element, Element]:
        return (self.c1, self.c2)

    def __mul__(self, other):
        if isinstance(other, Diag):
            return Diag(self.c1 * other.c1, self.c2 * other.c2)
        return Diag(self.c1 * other, self.c2 * other)

    def __pow__(self, k):
        if isinstance(k, DiagScalar):
            return Diag(self.c1 ** k.d1, self.c2 ** k.d2)
        return Diag(self.c1 ** k, self.c2 ** k)


# aliases that mirror the three diagonal element types
DiagG = DiagGhat = DiagGt = Diag


@dataclass(frozen=True)
class PairingContext:
    """Group descriptors and the fixed generators. ``gh*`` live in Ĝ.

    ``gh2`` is carried for completeness; no scheme formula uses it.
    """

    curve: str
    p: int
    g0: Element
    g1: Element
    g2: Element
    gh0: Element
    gh1: Element
    gh2: Element
    g: Element
    gh: Element
    backend: object = field(repr=False, compare=False)

    @property
    def secure(self) -> bool:
        return self.backend.secure

    def identity(self, kind: Kind) -> Element:
        return Element(kind, self.backend.identity(kind), self.backend)

    def element_size(self, kind: Kind) -> int:
        """Wire size of a serialized element, tag byte included."""
        return 1 + self.backend.sizes[kind]


@functools.lru_cache(maxsize=None)
def init_pairing(config: str = DEFAULT_CURVE) -> PairingContext:
    """Build the context for ``config`` ("bls12-381", or the insecure "toy")."""
    try:
        backend = _BACKEND_INSTANCES[config]
    except KeyError:
        raise UnsupportedCurve(f"unsupported curve {config!r}; choose from {sorted(_BACKEND_INSTANCES)}") from None
    gens = {
        name: Element(kind, backend.hash_to(kind, b"", tag), backend)
        for name, (kind, tag) in GENERATOR_TAGS.items()
    }
    return PairingContext(curve=config, p=backend.order, backend=backend, **gens)


def pair(a: Element, b: Element) -> Element:
    if a.kind is not Kind.G or b.kind is not Kind.GHAT or a.backend is not b.backend:
        raise TypeError("pair expects (G, Ĝ) elements of one context")
    return Element(Kind.GT, a.backend.pair(a.raw, b.raw), a.backend)


def multi_pair(terms: Sequence[tuple[Element, Element, int]]) -> Element:
    """Π e(a, b)^sign with a single shared final exponentiation.

    A negative sign is folded into the G argument (e(a, b)^-1 = e(a^-1, b)).
    """
    if not terms:
        raise EmptyInput("multi_pair needs at least one term")
    backend = terms[0][0].backend
    gs, hs = [], []
    for a, b, sign in terms:
        if a.kind is not Kind.G or b.kind is not Kind.GHAT:
            raise TypeError("multi_pair terms must be (G, Ĝ, ±1)")
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        gs.append(a.raw if sign == 1 else backend.inv(Kind.G, a.raw))
        hs.append(b.raw)
    return Element(Kind.GT, backend.multi_pair(gs, hs), backend)


def encode_function_vector(y: Iterable[int], p: int) -> bytes:
    """Canonical H1 input: u32-BE count, then 32-byte big-endian scalars."""
    y = [v % p for v in y]
    return len(y).to_bytes(4, "big") + b"".join(v.to_bytes(32, "big") for v in y)


@functools.lru_cache(maxsize=4096)
def _hash_diag(curve: str, kind: Kind, data: bytes, tags: tuple[bytes, bytes]):
    backend = _BACKEND_INSTANCES[curve]
    return Diag(*(Element(kind, backend.hash_to(kind, data, tag), backend) for tag in tags))


def clear_hash_cache() -> None:
    _hash_diag.cache_clear()


def hash_h1(ctx: PairingContext, y: bytes) -> Diag:
    """H1: canonical function-vector bytes -> diagonal pair in Ĝ."""
    if not y:
        raise EmptyInput("H1 input must be non-empty")
    return _hash_diag(ctx.curve, Kind.GHAT, bytes(y), H1_TAGS)


def hash_h2(ctx: PairingContext, label: bytes | str) -> Diag:
    """H2: label -> diagonal pair in G. Strings are UTF-8 encoded."""
    if isinstance(label, str):
        label = label.encode("utf-8")
    return _hash_diag(ctx.curve, Kind.G, bytes(label), H2_TAGS)


def random_scalar(ctx: PairingContext, rng=None) -> int:
    rng = rng or secrets.SystemRandom()
    return rng.randrange(ctx.p)


def random_nonzero_scalar(ctx: PairingContext, rng=None) -> int:
    rng = rng or secrets.SystemRandom()
    while True:
        v = rng.randrange(ctx.p)
        if v:
            return v


def random_diag_scalar(ctx: PairingContext, rng=None) -> DiagScalar:
    return DiagScalar(random_scalar(ctx, rng), random_scalar(ctx, rng))


def serialize(element: Element) -> bytes:
    """1-byte kind tag followed by the backend's encoding (compressed points)."""
    return bytes([element.kind]) + element.backend.encode(element.kind, element.raw)


def deserialize(ctx: PairingContext, data: bytes, kind: Kind | None = None) -> Element:
    if not data:
        raise MalformedEncoding("empty buffer")
    try:
        tag = Kind(data[0])
    except ValueError:
        raise MalformedEncoding(f"unknown element tag 0x{data[0]:02x}") from None
    if kind is not None and tag is not kind:
        raise MalformedEncoding(f"expected {kind.name} element, found {tag.name}")
    return Element(tag, ctx.backend.decode(tag, bytes(data[1:])), ctx.backend)
