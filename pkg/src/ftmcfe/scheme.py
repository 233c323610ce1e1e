"""Flexible-threshold multi-client functional encryption for inner products.

Roles:

* the TA runs :func:`ta_setup` once and publishes the powers-of-γ string;
* each client runs :func:`client_init` on its own, then :func:`encrypt`
  per (label, threshold) and :func:`pkeygen` per (B, y, t) request;
* the aggregator runs :func:`decrypt` with keys and ciphertexts from B.

For one client and one lane c of the diagonal, the decryption block

    e(C1, ĝ0^{y_i}) e(C2, H1(y)) e(sk3, C4) e(C5, sk4) e(sk5, C4)
    -------------------------------------------------------------
                   e(H2(l), sk1) e(C3, sk2)

collapses to e(g0, ĝ0)^{x_i y_i} once B(γ)γ^t (inside sk5) equals γ^t (inside
C3, C5) times B(γ) (inside sk2, sk3). Blocks are elements of the commutative
group G_T, so they are combined in whatever order they finish.
"""

from __future__ import annotations

import hashlib
import math
import secrets
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    ComponentMismatch,
    DlogNotFound,
    IndexOutOfRange,
    InconsistentInputs,
    MismatchedLabel,
    MismatchedThreshold,
    NotAMember,
    PlaintextOutOfRange,
    QuorumTooSmall,
    ThresholdOutOfRange,
)
from .pairing_core import (
    Diag,
    DiagScalar,
    Element,
    PairingContext,
    encode_function_vector,
    hash_h1,
    hash_h2,
    multi_pair,
    pair,
    random_diag_scalar,
    random_nonzero_scalar,
    random_scalar,
)
from .polynomial import (
    ParticipationSet,
    PowersOfGamma,
    commit,
    make_powers,
    shifted_commit,
    vanishing_poly,
    verify_degree,
)

DEFAULT_DLOG_BOUND = 1 << 20


@dataclass(frozen=True)
class MasterPublicKey:
    ctx: PairingContext
    n: int
    powers: PowersOfGamma
    # only populated in test-oracle mode; never serialized
    gamma: int | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class ClientKeyPair:
    """(S_i, T_i, w_i); the same tuple serves as secret key and encryption key."""

    index: int
    S: DiagScalar
    T: DiagScalar
    w: int

    def __repr__(self):
        return f"ClientKeyPair(index={self.index}, ...)"


@dataclass(frozen=True)
class PartialFunctionalKey:
    index: int
    sk1: Diag
    sk2: Diag
    sk3: Diag
    sk4: Diag
    sk5: Diag
    set_commit_gh1: Element  # ĝ1^{B(γ)}
    shifted_commit_g2: Element  # g2^{B(γ)γ^t}
    b_digest: bytes
    y_digest: bytes
    t: int


@dataclass(frozen=True)
class Ciphertext:
    index: int
    label: str
    t: int
    C1: Diag
    C2: Diag
    C3: Element
    C4: Element
    C5: Diag


@dataclass(frozen=True)
class DlogConfig:
    bound: int = DEFAULT_DLOG_BOUND

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("dlog bound must be >= 1")

    @property
    def table_size(self) -> int:
        return math.isqrt(2 * self.bound) + 1  # == ceil(sqrt(2*bound + 1))


def _check_threshold(t: int, n: int) -> None:
    if not isinstance(t, int) or not 1 <= t <= n:
        raise ThresholdOutOfRange(f"threshold {t} outside 1..{n}")


def function_vector_digest(y: Sequence[int], p: int) -> bytes:
    return hashlib.sha256(b"ftmcfe/y" + encode_function_vector(y, p)).digest()


def _check_vector(y: Sequence[int], n: int) -> list[int]:
    y = [int(v) for v in y]
    if len(y) != n:
        raise InconsistentInputs(f"function vector has length {len(y)}, expected {n}")
    return y


# ---------------------------------------------------------------------------
# Setup


def ta_setup(n: int, ctx: PairingContext, rng=None, retain_gamma: bool = False) -> MasterPublicKey:
    """Sample γ != 0 and publish g1^{γ^j}, g2^{γ^j}, ĝ1^{γ^j} for j = 0..n."""
    if n < 1:
        raise IndexOutOfRange(f"n must be >= 1, got {n}")
    gamma = random_nonzero_scalar(ctx, rng)
    powers = make_powers(ctx, gamma, n)
    return MasterPublicKey(ctx=ctx, n=n, powers=powers, gamma=gamma if retain_gamma else None)


def client_init(i: int, mpk: MasterPublicKey, rng=None) -> ClientKeyPair:
    if not 1 <= i <= mpk.n:
        raise IndexOutOfRange(f"client index {i} outside 1..{mpk.n}")
    rng = rng or secrets.SystemRandom()
    ctx = mpk.ctx
    S = random_diag_scalar(ctx, rng)
    T = random_diag_scalar(ctx, rng)
    return ClientKeyPair(index=i, S=S, T=T, w=random_scalar(ctx, rng))


# ---------------------------------------------------------------------------
# PKeyGen


def pkeygen(
    B: ParticipationSet,
    sk: ClientKeyPair,
    y: Sequence[int],
    t: int,
    mpk: MasterPublicKey,
) -> PartialFunctionalKey:
    ctx, powers = mpk.ctx, mpk.powers
    _check_threshold(t, mpk.n)
    if B.n != mpk.n:
        raise InconsistentInputs(f"participation set is over {B.n} clients, mpk over {mpk.n}")
    y = _check_vector(y, mpk.n)
    if sk.index not in B:
        raise NotAMember(f"client {sk.index} is not in B={B.members}")
    if len(B) < t:
        raise QuorumTooSmall(f"|B|={len(B)} < t={t}")

    H = hash_h1(ctx, encode_function_vector(y, ctx.p))
    poly = vanishing_poly(B)
    c_g1 = commit(poly, powers.g1)
    c_gh1 = commit(poly, powers.gh1)
    c_g2_shifted = shifted_commit(poly, t, powers.g2)

    T = sk.T
    return PartialFunctionalKey(
        index=sk.index,
        sk1=(ctx.gh0 ** (sk.S * y[sk.index - 1])) * (H ** T),
        sk2=(H * c_gh1) ** T,
        sk3=c_g1 ** T,
        sk4=H ** sk.w,
        sk5=c_g2_shifted ** T,
        set_commit_gh1=c_gh1,
        shifted_commit_g2=c_g2_shifted,
        b_digest=B.digest(),
        y_digest=function_vector_digest(y, ctx.p),
        t=t,
    )


def verify_partial_key(key: PartialFunctionalKey, t: int, mpk: MasterPublicKey) -> bool:
    return verify_degree(key.shifted_commit_g2, key.set_commit_gh1, t, mpk.powers)


# ---------------------------------------------------------------------------
# Enc


def encrypt(
    x: int,
    ek: ClientKeyPair,
    t: int,
    label: str,
    mpk: MasterPublicKey,
    bound: int | None = None,
) -> Ciphertext:
    """Encrypt x under (label, t). Negative x is encoded as p - |x|.

    ``bound`` optionally narrows the accepted plaintexts to |x| <= bound.
    """
    ctx, powers = mpk.ctx, mpk.powers
    _check_threshold(t, mpk.n)
    if isinstance(x, bool) or not isinstance(x, int):
        raise PlaintextOutOfRange(f"plaintext must be an integer, got {type(x).__name__}")
    limit = (ctx.p - 1) // 2 if bound is None else bound
    if abs(x) > limit:
        raise PlaintextOutOfRange(f"|{x}| exceeds {limit}")

    Hl = hash_h2(ctx, label)
    g2_gamma_t = powers.g2[t]
    return Ciphertext(
        index=ek.index,
        label=label,
        t=t,
        C1=(Hl ** ek.S) * (ctx.g0 ** x),
        C2=(Hl * (ctx.g1 ** ek.w)) ** ek.T,
        C3=(ctx.g1 * g2_gamma_t) ** ek.w,
        C4=ctx.gh1 ** ek.w,
        C5=g2_gamma_t ** ek.T,
    )


# ---------------------------------------------------------------------------
# Dec


def _check_decrypt_inputs(B, y, keys, cts, label, mpk) -> int:
    """Cheap consistency checks; returns the threshold. No pairing is computed."""
    if B.n != mpk.n:
        raise InconsistentInputs(f"participation set is over {B.n} clients, mpk over {mpk.n}")
    if not cts:
        raise InconsistentInputs("no ciphertexts supplied")
    thresholds = {ct.t for ct in cts}
    if len(thresholds) != 1:
        raise MismatchedThreshold(f"ciphertexts carry thresholds {sorted(thresholds)}")
    (t,) = thresholds
    _check_threshold(t, mpk.n)
    if len(B) < t:
        raise QuorumTooSmall(f"|B|={len(B)} < t={t}")
    if any(ct.label != label for ct in cts):
        raise MismatchedLabel(f"ciphertext labels differ from {label!r}")
    if any(k.t != t for k in keys):
        raise MismatchedThreshold("partial keys were issued for a different threshold")
    if sorted(ct.index for ct in cts) != list(B.members):
        raise InconsistentInputs("ciphertexts do not cover exactly B")
    if sorted(k.index for k in keys) != list(B.members):
        raise InconsistentInputs("partial keys do not cover exactly B")
    b_digest = B.digest()
    y_digest = function_vector_digest(y, mpk.ctx.p)
    if any(k.b_digest != b_digest for k in keys):
        raise InconsistentInputs("partial key issued for a different participation set")
    if any(k.y_digest != y_digest for k in keys):
        raise InconsistentInputs("partial key issued for a different function vector")
    return t


def client_block(
    ct: Ciphertext, key: PartialFunctionalKey, y_i: int, Hy: Diag, Hl: Diag, lane: int, ctx: PairingContext
) -> Element:
    """One client's contribution to one lane of the decryption product."""
    c = lane
    return multi_pair([
        (ct.C1.lanes()[c], ctx.gh0 ** y_i, 1),
        (ct.C2.lanes()[c], Hy.lanes()[c], 1),
        (key.sk3.lanes()[c], ct.C4, 1),
        (ct.C5.lanes()[c], key.sk4.lanes()[c], 1),
        (key.sk5.lanes()[c], ct.C4, 1),
        (Hl.lanes()[c], key.sk1.lanes()[c], -1),
        (ct.C3, key.sk2.lanes()[c], -1),
    ])


def decrypt_components(
    B: ParticipationSet,
    y: Sequence[int],
    keys: Sequence[PartialFunctionalKey],
    cts: Sequence[Ciphertext],
    label: str,
    mpk: MasterPublicKey,
) -> tuple[Element, Element]:
    """Both lanes of the decryption product, each e(g0, ĝ0)^{<x,y>} when honest."""
    y = _check_vector(y, mpk.n)
    _check_decrypt_inputs(B, y, keys, cts, label, mpk)
    ctx = mpk.ctx
    Hy = hash_h1(ctx, encode_function_vector(y, ctx.p))
    Hl = hash_h2(ctx, label)
    by_index_ct = {ct.index: ct for ct in cts}
    by_index_key = {k.index: k for k in keys}
    lanes = []
    for c in (0, 1):
        acc = None
        for i in B:
            block = client_block(by_index_ct[i], by_index_key[i], y[i - 1], Hy, Hl, c, ctx)
            acc = block if acc is None else acc * block
        lanes.append(acc)
    return lanes[0], lanes[1]


def decrypt(
    B: ParticipationSet,
    y: Sequence[int],
    keys: Sequence[PartialFunctionalKey],
    cts: Sequence[Ciphertext],
    label: str,
    dlog: DlogConfig,
    mpk: MasterPublicKey,
) -> int:
    """Recover Σ_{i∈B} x_i y_i, or raise.

    Aborts with QuorumTooSmall when |B| < t before any pairing is evaluated.
    """
    k1, k2 = decrypt_components(B, y, keys, cts, label, mpk)
    if k1 != k2:
        raise ComponentMismatch("the two diagonal lanes disagree")
    return bsgs_dlog(k1, dlog_base(mpk.ctx), dlog.bound)


def dlog_base(ctx: PairingContext) -> Element:
    return pair(ctx.g0, ctx.gh0)


# ---------------------------------------------------------------------------
# discrete log

_BABY_TABLES: dict = {}


def _baby_table(base: Element, m: int) -> dict:
    cache_key = (base, m)
    table = _BABY_TABLES.get(cache_key)
    if table is None:
        backend, kind = base.backend, base.kind
        table = {}
        cur = backend.identity(kind)
        for j in range(m):
            table.setdefault(backend.key(kind, cur), j)
            cur = backend.op(kind, cur, base.raw)
        if len(_BABY_TABLES) > 8:
            _BABY_TABLES.clear()
        _BABY_TABLES[cache_key] = table
    return table


def bsgs_dlog(target: Element, base: Element, bound: int) -> int:
    """v in [-bound, bound] with base^v == target (baby-step giant-step).

    Giant steps walk outwards from 0 in both directions, so small |v| (the
    common case for aggregated gradients) is found after a few steps; the
    worst case still costs about one table length of steps.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    m = DlogConfig(bound).table_size
    table = _baby_table(base, m)
    backend, kind = base.backend, base.kind
    step = base ** m
    down = target.raw  # target * base^{-i m}: hit j gives v = i m + j
    up = target.raw  # target * base^{+i m}: hit j gives v = j - i m
    down_step, up_step = step.inverse().raw, step.raw
    for i in range(bound // m + 2):
        j = table.get(backend.key(kind, down))
        if j is not None and i * m + j <= bound:
            return i * m + j
        if i:
            j = table.get(backend.key(kind, up))
            if j is not None and j - i * m >= -bound:
                return j - i * m
        down = backend.op(kind, down, down_step)
        up = backend.op(kind, up, up_step)
    raise DlogNotFound(f"no exponent in [-{bound}, {bound}]")
