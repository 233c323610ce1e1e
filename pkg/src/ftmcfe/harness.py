"""Desk-scale federated aggregation on top of the scheme.

One round aggregates a d-dimensional gradient per client. Coordinate j is an
independent scheme instance under label ``f"{prefix}:{j}"``; the weight vector
(and hence the partial keys) is shared by all coordinates of the round.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import random
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import (
    CodecOverflow,
    ConfigParseError,
    CorruptKey,
    DuplicateCiphertext,
    InconsistentInputs,
    MalformedEncoding,
    QuorumTooSmall,
    StoreIOError,
    VersionMismatch,
)
from .pairing_core import DEFAULT_CURVE, init_pairing
from .polynomial import ParticipationSet, check_powers
from .scheme import (
    DEFAULT_DLOG_BOUND,
    Ciphertext,
    ClientKeyPair,
    DlogConfig,
    MasterPublicKey,
    client_init,
    decrypt,
    encrypt,
    pkeygen,
    ta_setup,
    verify_partial_key,
)
from . import wire

log = logging.getLogger(__name__)

STORE_VERSION = 1
MPK_FILE = "mpk.bin"
MANIFEST_FILE = "manifest.json"


# ---------------------------------------------------------------------------
# fixed-point codec


def encode(value: float, scale: int, limit: int | None = None) -> int:
    if not math.isfinite(value):
        raise CodecOverflow(f"cannot encode non-finite value {value}")
    v = round(value * scale)
    if limit is not None and abs(v) > limit:
        raise CodecOverflow(f"encoded value {v} exceeds {limit}")
    return v


def decode(total: int, scale_x: int, scale_y: int) -> float:
    return total / (scale_x * scale_y)


@dataclass(frozen=True)
class FixedPointCodec:
    scale_x: int = 1000
    scale_y: int = 100

    def encode_x(self, value: float) -> int:
        return encode(value, self.scale_x)

    def encode_y(self, value: float) -> int:
        return encode(value, self.scale_y)

    def decode(self, total: int) -> float:
        return decode(total, self.scale_x, self.scale_y)

    def fits(self, max_abs_x: float, max_abs_w: float, n: int, bound: int) -> bool:
        return self.scale_x * self.scale_y * max_abs_x * max_abs_w * n <= bound


# ---------------------------------------------------------------------------
# round description


@dataclass(frozen=True)
class DropoutSpec:
    """Either an explicit offline set or a per-client offline probability q."""

    offline: tuple[int, ...] | None = None
    q: float | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, data: dict | None) -> "DropoutSpec":
        data = data or {}
        unknown = set(data) - {"offline", "q", "seed"}
        if unknown:
            raise ConfigParseError(f"unknown dropout keys {sorted(unknown)}")
        offline = data.get("offline")
        q = data.get("q")
        if offline is not None and q is not None:
            raise ConfigParseError("dropout takes either 'offline' or 'q', not both")
        if q is not None and not (isinstance(q, (int, float)) and 0 <= q < 1):
            raise ConfigParseError(f"dropout q must lie in [0, 1), got {q!r}")
        if offline is not None:
            if not isinstance(offline, list) or not all(isinstance(i, int) for i in offline):
                raise ConfigParseError("dropout 'offline' must be a list of client indices")
            offline = tuple(offline)
        return cls(offline=offline, q=q, seed=data.get("seed"))

    def to_dict(self) -> dict:
        out = {}
        if self.offline is not None:
            out["offline"] = list(self.offline)
        if self.q is not None:
            out["q"] = self.q
        if self.seed is not None:
            out["seed"] = self.seed
        return out


@dataclass(frozen=True)
class RoundSpec:
    round_id: int
    label_prefix: str
    t: int
    d: int
    weights: tuple[float, ...]
    dropout: DropoutSpec = DropoutSpec()
    codec: FixedPointCodec = FixedPointCodec()
    dlog_bound: int = DEFAULT_DLOG_BOUND

    def __post_init__(self):
        n = len(self.weights)
        if n < 1:
            raise ConfigParseError("weights must be non-empty")
        if not 1 <= self.t <= n:
            raise ConfigParseError(f"threshold t={self.t} outside 1..{n}")
        if self.d < 1:
            raise ConfigParseError(f"dimension d={self.d} must be >= 1")
        if self.dlog_bound < 1:
            raise ConfigParseError("dlog_bound must be >= 1")
        if self.dropout.offline is not None and any(not 1 <= i <= n for i in self.dropout.offline):
            raise ConfigParseError(f"offline indices must lie in 1..{n}")

    @property
    def n(self) -> int:
        return len(self.weights)

    def label(self, j: int) -> str:
        return f"{self.label_prefix}:{j}"

    @classmethod
    def from_dict(cls, data: dict) -> "RoundSpec":
        if not isinstance(data, dict):
            raise ConfigParseError("round spec must be a JSON object")
        try:
            scales = data.get("scales", {})
            return cls(
                round_id=int(data.get("round", 0)),
                label_prefix=str(data["label_prefix"]),
                t=int(data["t"]),
                d=int(data["d"]),
                weights=tuple(float(w) for w in data["weights"]),
                dropout=DropoutSpec.from_dict(data.get("dropout")),
                codec=FixedPointCodec(int(scales.get("x", 1000)), int(scales.get("y", 100))),
                dlog_bound=int(data.get("dlog_bound", DEFAULT_DLOG_BOUND)),
            )
        except KeyError as exc:
            raise ConfigParseError(f"missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigParseError(str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "round": self.round_id,
            "label_prefix": self.label_prefix,
            "t": self.t,
            "d": self.d,
            "weights": list(self.weights),
            "dropout": self.dropout.to_dict(),
            "scales": {"x": self.codec.scale_x, "y": self.codec.scale_y},
            "dlog_bound": self.dlog_bound,
        }


@dataclass
class AggregateResult:
    round_id: int
    sums: list[float]
    participants: tuple[int, ...]
    n: int
    t: int
    metrics: dict[str, float] = field(default_factory=dict)  # phase -> milliseconds

    def to_dict(self) -> dict:
        return {
            "round": self.round_id,
            "sums": self.sums,
            "participants": list(self.participants),
            "n": self.n,
            "t": self.t,
            "metrics_ms": self.metrics,
        }

    def metrics_rows(self) -> list[dict]:
        return [{"phase": k, "n": self.n, "t": self.t, "millis": round(v, 3)} for k, v in self.metrics.items()]


# ---------------------------------------------------------------------------
# key store


@dataclass
class KeyStore:
    path: Path
    mpk: MasterPublicKey
    clients: dict[int, ClientKeyPair]

    @property
    def n(self) -> int:
        return self.mpk.n


def _client_file(i: int) -> str:
    return f"client_{i:04d}.key"


def keystore_init(n: int, path, seed: int | None = None, curve: str = DEFAULT_CURVE) -> KeyStore:
    """Run setup and all n client initialisations, then persist them.

    A seed makes the whole store reproducible; that is for testing only.
    """
    path = Path(path)
    rng = random.Random(seed) if seed is not None else secrets.SystemRandom()
    ctx = init_pairing(curve)
    mpk = ta_setup(n, ctx, rng)
    clients = {i: client_init(i, mpk, rng) for i in range(1, n + 1)}
    files = {MPK_FILE: wire.dump_mpk(mpk)}
    files.update({_client_file(i): wire.dump_client_key(k) for i, k in clients.items()})
    manifest = {
        "version": STORE_VERSION,
        "wire_version": wire.VERSION,
        "curve": curve,
        "n": n,
        "sha256": {name: hashlib.sha256(data).hexdigest() for name, data in files.items()},
    }
    try:
        path.mkdir(parents=True, exist_ok=True)
        for name, data in files.items():
            (path / name).write_bytes(data)
        (path / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    except OSError as exc:
        raise StoreIOError(str(exc)) from None
    return KeyStore(path=path, mpk=mpk, clients=clients)


def keystore_load(path) -> KeyStore:
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST_FILE).read_text())
    except OSError as exc:
        raise StoreIOError(str(exc)) from None
    except json.JSONDecodeError:
        raise CorruptKey("manifest is not valid JSON") from None
    if manifest.get("version") != STORE_VERSION or manifest.get("wire_version") != wire.VERSION:
        raise VersionMismatch(f"store version {manifest.get('version')}, expected {STORE_VERSION}")

    def read(name: str) -> bytes:
        try:
            data = (path / name).read_bytes()
        except OSError as exc:
            raise StoreIOError(str(exc)) from None
        if hashlib.sha256(data).hexdigest() != manifest["sha256"].get(name):
            raise CorruptKey(f"{name}: checksum mismatch")
        return data

    n = manifest["n"]
    try:
        mpk = wire.load_mpk(read(MPK_FILE))
        clients = {i: wire.load_client_key(read(_client_file(i)), mpk.ctx) for i in range(1, n + 1)}
    except (MalformedEncoding, VersionMismatch) as exc:
        raise CorruptKey(str(exc)) from None
    if mpk.n != n or any(k.index != i for i, k in clients.items()):
        raise CorruptKey("store contents disagree with manifest")
    if not check_powers(mpk.ctx, mpk.powers):
        raise CorruptKey("powers-of-gamma consistency check failed")
    return KeyStore(path=path, mpk=mpk, clients=clients)


class CiphertextStore:
    """Aggregator-side inbox; keeps the first ciphertext per (i, label, t)."""

    def __init__(self):
        self._cts: dict[tuple[int, str, int], Ciphertext] = {}

    def add(self, ct: Ciphertext) -> None:
        key = (ct.index, ct.label, ct.t)
        if key in self._cts:
            raise DuplicateCiphertext(f"ciphertext for client {ct.index}, label {ct.label!r}, t={ct.t} already stored")
        self._cts[key] = ct

    def collect(self, label: str, t: int, members: Sequence[int]) -> list[Ciphertext]:
        return [self._cts[(i, label, t)] for i in members if (i, label, t) in self._cts]

    def __len__(self):
        return len(self._cts)


# ---------------------------------------------------------------------------
# rounds


def simulate_dropout(n: int, spec: DropoutSpec) -> ParticipationSet | None:
    """Online set after dropout, or None when every client dropped."""
    if spec.offline is not None:
        members = [i for i in range(1, n + 1) if i not in spec.offline]
    elif spec.q:
        rng = random.Random(spec.seed)
        members = [i for i in range(1, n + 1) if rng.random() >= spec.q]
    else:
        members = list(range(1, n + 1))
    return ParticipationSet(n, members) if members else None


class _Timer:
    def __init__(self, metrics: dict, phase: str):
        self.metrics, self.phase = metrics, phase

    def __enter__(self):
        self.start = time.perf_counter()

    def __exit__(self, *exc):
        self.metrics[self.phase] = self.metrics.get(self.phase, 0.0) + (time.perf_counter() - self.start) * 1e3


def run_round(
    spec: RoundSpec,
    store: KeyStore,
    gradients: Sequence[Sequence[float]],
    inbox: CiphertextStore | None = None,
) -> AggregateResult:
    """Encrypt, key, verify and decrypt every coordinate of one round."""
    n = store.n
    if spec.n != n:
        raise InconsistentInputs(f"round has {spec.n} weights, store has {n} clients")
    if len(gradients) != n or any(len(row) != spec.d for row in gradients):
        raise InconsistentInputs(f"gradients must be a {n}x{spec.d} matrix")
    if any(not math.isfinite(v) for row in gradients for v in row):
        raise CodecOverflow("gradients must be finite")

    B = simulate_dropout(n, spec.dropout)
    if B is None or len(B) < spec.t:
        raise QuorumTooSmall(f"|B|={0 if B is None else len(B)} < t={spec.t}")

    codec, mpk = spec.codec, store.mpk
    y = [codec.encode_y(w) for w in spec.weights]
    xs = [[codec.encode_x(v) for v in row] for row in gradients]
    for j in range(spec.d):
        predicted = sum(abs(xs[i - 1][j] * y[i - 1]) for i in B)
        if predicted > spec.dlog_bound:
            raise CodecOverflow(f"coordinate {j}: |<x,y>| may reach {predicted} > dlog bound {spec.dlog_bound}")

    inbox = inbox if inbox is not None else CiphertextStore()
    metrics: dict[str, float] = {}
    with _Timer(metrics, "encrypt"):
        for j in range(spec.d):
            for i in B:
                inbox.add(encrypt(xs[i - 1][j], store.clients[i], spec.t, spec.label(j), mpk))
    with _Timer(metrics, "pkeygen"):
        keys = [pkeygen(B, store.clients[i], y, spec.t, mpk) for i in B]
    with _Timer(metrics, "verify"):
        bad = [k.index for k in keys if not verify_partial_key(k, spec.t, mpk)]
    if bad:
        raise InconsistentInputs(f"partial keys from clients {bad} failed the degree check")
    sums = []
    dlog = DlogConfig(spec.dlog_bound)
    with _Timer(metrics, "decrypt"):
        for j in range(spec.d):
            label = spec.label(j)
            total = decrypt(B, y, keys, inbox.collect(label, spec.t, B.members), label, dlog, mpk)
            sums.append(codec.decode(total))
    log.info("round %s: |B|=%d t=%d sums=%s", spec.round_id, len(B), spec.t, sums)
    return AggregateResult(
        round_id=spec.round_id, sums=sums, participants=B.members, n=n, t=spec.t, metrics=metrics
    )


def random_gradients(n: int, d: int, seed: int | None, scale: float = 1.0) -> list[list[float]]:
    rng = random.Random(seed)
    return [[rng.uniform(-scale, scale) for _ in range(d)] for _ in range(n)]


def load_round_config(path) -> tuple[RoundSpec, dict]:
    """Parse a JSON round config; returns the spec and the raw dict (for extra keys)."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON: {exc}") from None
    spec = RoundSpec.from_dict(data)
    grads = data.get("gradients")
    if grads is not None:
        if len(grads) != spec.n or any(len(row) != spec.d for row in grads):
            raise ConfigParseError(f"gradients must be {spec.n}x{spec.d}")
    return spec, data


def example_config_path() -> Path:
    return Path(__file__).with_name("configs") / "example_round.json"


__all__ = [
    "AggregateResult",
    "CiphertextStore",
    "DropoutSpec",
    "FixedPointCodec",
    "KeyStore",
    "RoundSpec",
    "decode",
    "encode",
    "example_config_path",
    "keystore_init",
    "keystore_load",
    "load_round_config",
    "random_gradients",
    "run_round",
    "simulate_dropout",
]
