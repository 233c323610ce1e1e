"""Participation sets, their vanishing polynomials, and the powers-of-γ degree check.

The check works because the reference string stops at γ^n: a client can only
produce g2^{B(γ)·γ^t} when deg B + t <= n, i.e. when at least t clients are
online. The verifier tests e(g2^{B(γ)γ^t}, ĝ1) == e(g2^{γ^t}, ĝ1^{B(γ)}).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

from .backends import Kind
from .errors import DegreeExceedsSrs, IndexOutOfRange, MalformedEncoding, VersionMismatch
from .pairing_core import Element, PairingContext, deserialize, multi_pair

POWERS_MAGIC = b"FTPG"
POWERS_VERSION = 1


@dataclass(frozen=True)
class ParticipationSet:
    """Online clients B ⊆ {1..n}, kept sorted."""

    n: int
    members: tuple[int, ...]

    def __init__(self, n: int, members: Iterable[int]):
        members = tuple(sorted(members))
        if n < 1:
            raise IndexOutOfRange(f"n must be >= 1, got {n}")
        if not members:
            raise IndexOutOfRange("participation set must be non-empty")
        if len(set(members)) != len(members):
            raise IndexOutOfRange(f"duplicate indices in {members}")
        if members[0] < 1 or members[-1] > n:
            raise IndexOutOfRange(f"indices must lie in 1..{n}, got {members}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, n: int) -> "ParticipationSet":
        return cls(n, range(1, n + 1))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "ParticipationSet":
        return cls(len(bits), [i + 1 for i, b in enumerate(bits) if b])

    def bits(self) -> tuple[int, ...]:
        return tuple(int(i in self.members) for i in range(1, self.n + 1))

    def absent(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if i not in self.members)

    def digest(self) -> bytes:
        data = struct.pack(">I", self.n) + b"".join(struct.pack(">I", i) for i in self.members)
        return hashlib.sha256(b"ftmcfe/B" + data).digest()

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class VanishingPoly:
    """Integer coefficients a_0..a_d, ascending degree."""

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, x: int, p: int | None = None) -> int:
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
            if p is not None:
                acc %= p
        return acc


def vanishing_poly(B: ParticipationSet) -> VanishingPoly:
    """Monic polynomial whose roots are the absent client indices."""
    coeffs = [1]
    for root in B.absent():
        # multiply by (x - root)
        shifted = [0] + coeffs
        for j, a in enumerate(coeffs):
            shifted[j] -= root * a
        coeffs = shifted
    return VanishingPoly(tuple(coeffs))


@dataclass(frozen=True)
class PowersOfGamma:
    """Rows [base^{γ^j}] for j = 0..n, base in {g1, g2, ĝ1}."""

    g1: tuple[Element, ...]
    g2: tuple[Element, ...]
    gh1: tuple[Element, ...]

    @property
    def n(self) -> int:
        return len(self.g1) - 1

    def to_bytes(self) -> bytes:
        out = bytearray(POWERS_MAGIC + bytes([POWERS_VERSION]) + struct.pack(">I", self.n))
        for row in (self.g1, self.g2, self.gh1):
            for el in row:
                out += el.to_bytes()
        return bytes(out)

    @classmethod
    def from_bytes(cls, ctx: PairingContext, data: bytes) -> "PowersOfGamma":
        if len(data) < 9 or data[:4] != POWERS_MAGIC:
            raise MalformedEncoding("not a powers-of-gamma blob")
        if data[4] != POWERS_VERSION:
            raise VersionMismatch(f"powers-of-gamma version {data[4]}, expected {POWERS_VERSION}")
        (n,) = struct.unpack(">I", data[5:9])
        sg, sh = ctx.element_size(Kind.G), ctx.element_size(Kind.GHAT)
        expected = 9 + (n + 1) * (2 * sg + sh)
        if len(data) != expected:
            raise MalformedEncoding(f"powers-of-gamma blob is {len(data)} bytes, expected {expected}")
        pos = 9
        rows = []
        for kind, size in ((Kind.G, sg), (Kind.G, sg), (Kind.GHAT, sh)):
            row = []
            for _ in range(n + 1):
                row.append(deserialize(ctx, data[pos:pos + size], kind))
                pos += size
            rows.append(tuple(row))
        return cls(*rows)


def make_powers(ctx: PairingContext, gamma: int, n: int) -> PowersOfGamma:
    exps = [pow(gamma, j, ctx.p) for j in range(n + 1)]
    return PowersOfGamma(
        g1=tuple(ctx.g1 ** e for e in exps),
        g2=tuple(ctx.g2 ** e for e in exps),
        gh1=tuple(ctx.gh1 ** e for e in exps),
    )


def check_powers(ctx: PairingContext, powers: PowersOfGamma) -> bool:
    """Pairing consistency of all three rows against the ĝ1 row."""
    if powers.g1[0] != ctx.g1 or powers.g2[0] != ctx.g2 or powers.gh1[0] != ctx.gh1:
        return False
    for a1, a2, b in zip(powers.g1, powers.g2, powers.gh1):
        if not multi_pair([(a1, ctx.gh1, 1), (ctx.g1, b, -1)]).is_identity():
            return False
        if not multi_pair([(a2, ctx.gh1, 1), (ctx.g2, b, -1)]).is_identity():
            return False
    return True


def _product(row: Sequence[Element], coeffs: Sequence[int], offset: int) -> Element:
    if len(coeffs) + offset > len(row):
        raise DegreeExceedsSrs(
            f"degree {len(coeffs) - 1 + offset} exceeds reference string degree {len(row) - 1}"
        )
    acc = None
    for j, a in enumerate(coeffs):
        if a == 0:
            continue
        term = row[j + offset] ** a
        acc = term if acc is None else acc * term
    return acc if acc is not None else row[0] / row[0]


def commit(poly: VanishingPoly, row: Sequence[Element]) -> Element:
    """base^{B(γ)} from one row of the reference string."""
    return _product(row, poly.coeffs, 0)


def shifted_commit(poly: VanishingPoly, t: int, row: Sequence[Element]) -> Element:
    """base^{B(γ)·γ^t}; fails when deg B + t exceeds the reference string."""
    if t < 0:
        raise ValueError("shift must be non-negative")
    return _product(row, poly.coeffs, t)


def verify_degree(c_shifted: Element, c_plain: Element, t: int, powers: PowersOfGamma) -> bool:
    """e(c_shifted, ĝ1) == e(g2^{γ^t}, c_plain)."""
    if not 1 <= t <= powers.n:
        return False
    check = multi_pair([(c_shifted, powers.gh1[0], 1), (powers.g2[t], c_plain, -1)])
    return check.is_identity()
