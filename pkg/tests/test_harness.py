import json
import math
import random

import pytest

from ftmcfe import wire
from ftmcfe.errors import (
    CodecOverflow,
    ConfigParseError,
    CorruptKey,
    DuplicateCiphertext,
    InconsistentInputs,
    QuorumTooSmall,
    StoreIOError,
    VersionMismatch,
)
from ftmcfe.harness import (
    CiphertextStore,
    DropoutSpec,
    FixedPointCodec,
    RoundSpec,
    decode,
    encode,
    example_config_path,
    keystore_init,
    keystore_load,
    load_round_config,
    random_gradients,
    run_round,
    simulate_dropout,
)
from ftmcfe.scheme import encrypt


def _spec(t=2, weights=(1, 1, 1), dropout=None, scales=(10, 1), d=1, **kw):
    return RoundSpec(
        round_id=1,
        label_prefix="2026-10-16T00:00:00Z",
        t=t,
        d=d,
        weights=tuple(weights),
        dropout=dropout or DropoutSpec(),
        codec=FixedPointCodec(*scales),
        **kw,
    )


@pytest.fixture(scope="module")
def store3(tmp_path_factory):
    return keystore_init(3, tmp_path_factory.mktemp("ks3"), seed=1)


@pytest.fixture(scope="module")
def toy_store8(tmp_path_factory):
    return keystore_init(8, tmp_path_factory.mktemp("toy8"), seed=2, curve="toy")


# --- codec -------------------------------------------------------------------

def test_encode_examples():
    assert encode(0.25, 100) == 25
    assert encode(-0.5, 1000) == -500
    assert decode(4500, 1000, 100) == 0.045


def test_encode_errors():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(CodecOverflow):
            encode(bad, 10)
    with pytest.raises(CodecOverflow) as info:
        encode(2.0, 1000, limit=1000)
    assert info.value.code == "codec-overflow"


def test_codec_fits():
    codec = FixedPointCodec()
    assert codec.fits(1.0, 1.0, 10, 1 << 20)
    assert not codec.fits(1.0, 1.0, 11, 1 << 20)


# --- round spec and config ---------------------------------------------------

def test_round_spec_validation():
    with pytest.raises(ConfigParseError):
        _spec(t=4)
    with pytest.raises(ConfigParseError):
        _spec(t=0)
    with pytest.raises(ConfigParseError):
        _spec(d=0)
    with pytest.raises(ConfigParseError):
        _spec(weights=())
    with pytest.raises(ConfigParseError):
        _spec(dropout=DropoutSpec(offline=(4,)))


def test_round_spec_dict_round_trip():
    spec = _spec(dropout=DropoutSpec(q=0.25, seed=3))
    assert RoundSpec.from_dict(spec.to_dict()) == spec
    assert spec.label(0) == "2026-10-16T00:00:00Z:0"


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"t": 1, "d": 1, "weights": [1]},
        {"label_prefix": "x", "t": "a", "d": 1, "weights": [1]},
        {"label_prefix": "x", "t": 1, "d": 1, "weights": [1], "dropout": {"q": 1.0}},
        {"label_prefix": "x", "t": 1, "d": 1, "weights": [1], "dropout": {"q": 0.1, "offline": [1]}},
        {"label_prefix": "x", "t": 1, "d": 1, "weights": [1], "dropout": {"bogus": 1}},
        {"label_prefix": "x", "t": 1, "d": 1, "weights": [1], "dropout": {"offline": "1"}},
    ],
)
def test_round_spec_bad_dicts(data):
    with pytest.raises(ConfigParseError):
        RoundSpec.from_dict(data)


def test_load_round_config_errors(tmp_path):
    with pytest.raises(ConfigParseError):
        load_round_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigParseError):
        load_round_config(bad)
    ragged = tmp_path / "ragged.json"
    ragged.write_text(json.dumps({"label_prefix": "x", "t": 1, "d": 2, "weights": [1], "gradients": [[1]]}))
    with pytest.raises(ConfigParseError):
        load_round_config(ragged)


def test_bundled_config_parses():
    spec, raw = load_round_config(example_config_path())
    assert (spec.n, spec.t, spec.d) == (10, 5, 2)
    assert spec.dropout.offline == (7,)
    assert raw["n"] == 10


# --- dropout -----------------------------------------------------------------

def test_dropout_explicit():
    assert simulate_dropout(3, DropoutSpec(offline=(2,))).members == (1, 3)


def test_dropout_none():
    assert simulate_dropout(5, DropoutSpec(q=0)).members == (1, 2, 3, 4, 5)
    assert simulate_dropout(5, DropoutSpec()).members == (1, 2, 3, 4, 5)


def test_dropout_everyone_offline():
    assert simulate_dropout(2, DropoutSpec(offline=(1, 2))) is None


def test_dropout_seeded_reproducible():
    spec = DropoutSpec(q=0.5, seed=9)
    assert simulate_dropout(20, spec) == simulate_dropout(20, spec)


def test_dropout_probability_mean():
    sizes = []
    for k in range(1000):
        B = simulate_dropout(20, DropoutSpec(q=0.3, seed=k))
        sizes.append(0 if B is None else len(B))
    assert abs(sum(sizes) / len(sizes) - 14) <= 1


# --- key store ---------------------------------------------------------------

def test_keystore_round_trip(store3):
    loaded = keystore_load(store3.path)
    assert wire.dump_mpk(loaded.mpk) == wire.dump_mpk(store3.mpk)
    assert loaded.clients == store3.clients
    assert sorted(p.name for p in store3.path.iterdir()) == [
        "client_0001.key", "client_0002.key", "client_0003.key", "manifest.json", "mpk.bin",
    ]


def test_keystore_corrupt_byte(tmp_path):
    keystore_init(3, tmp_path, seed=3, curve="toy")
    path = tmp_path / "client_0002.key"
    data = bytearray(path.read_bytes())
    data[-1] ^= 0x01
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptKey) as info:
        keystore_load(tmp_path)
    assert info.value.code == "corrupt-key"


def test_keystore_missing_files(tmp_path):
    with pytest.raises(StoreIOError) as info:
        keystore_load(tmp_path)
    assert info.value.code == "io-error"
    keystore_init(2, tmp_path, seed=3, curve="toy")
    (tmp_path / "client_0002.key").unlink()
    with pytest.raises(StoreIOError):
        keystore_load(tmp_path)


def test_keystore_version_mismatch(tmp_path):
    keystore_init(2, tmp_path, seed=3, curve="toy")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    manifest["version"] = 99
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(VersionMismatch):
        keystore_load(tmp_path)


def test_keystore_deterministic(tmp_path):
    a = keystore_init(10, tmp_path / "a", seed=7)
    b = keystore_init(10, tmp_path / "b", seed=7)
    for name in ["mpk.bin", "manifest.json"] + [f"client_{i:04d}.key" for i in range(1, 11)]:
        assert (a.path / name).read_bytes() == (b.path / name).read_bytes()


def test_keystore_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(StoreIOError):
        keystore_init(1, blocker / "sub", seed=1, curve="toy")


# --- ciphertext inbox --------------------------------------------------------

def test_duplicate_ciphertext_rejected(store3):
    inbox = CiphertextStore()
    ct = encrypt(1, store3.clients[1], 2, "dup", store3.mpk)
    inbox.add(ct)
    with pytest.raises(DuplicateCiphertext):
        inbox.add(encrypt(2, store3.clients[1], 2, "dup", store3.mpk))
    inbox.add(encrypt(1, store3.clients[1], 3, "dup", store3.mpk))
    inbox.add(encrypt(1, store3.clients[1], 2, "dup-2", store3.mpk))
    assert len(inbox) == 3
    assert inbox.collect("dup", 2, [1, 2]) == [ct]


def test_rerunning_a_round_into_same_inbox_is_rejected(store3):
    inbox = CiphertextStore()
    spec = _spec()
    run_round(spec, store3, [[0.5], [1.5], [2.5]], inbox)
    with pytest.raises(DuplicateCiphertext):
        run_round(spec, store3, [[0.5], [1.5], [2.5]], inbox)


# --- rounds ------------------------------------------------------------------

def test_run_round_full(store3):
    result = run_round(_spec(), store3, [[0.5], [1.5], [2.5]])
    assert result.sums == [pytest.approx(4.5)]
    assert result.participants == (1, 2, 3)
    assert set(result.metrics) == {"encrypt", "pkeygen", "verify", "decrypt"}


def test_run_round_dropout(store3):
    result = run_round(_spec(dropout=DropoutSpec(offline=(3,))), store3, [[0.5], [1.5], [2.5]])
    assert result.sums == [pytest.approx(2.0)]
    assert result.participants == (1, 2)


def test_run_round_quorum(store3):
    with pytest.raises(QuorumTooSmall):
        run_round(_spec(dropout=DropoutSpec(offline=(2, 3))), store3, [[0.5], [1.5], [2.5]])
    with pytest.raises(QuorumTooSmall):
        run_round(_spec(dropout=DropoutSpec(offline=(1, 2, 3))), store3, [[0.5], [1.5], [2.5]])


def test_run_round_overflow(store3):
    spec = _spec(dlog_bound=100)
    with pytest.raises(CodecOverflow):
        run_round(spec, store3, [[5.0], [5.0], [5.0]])


def test_run_round_input_shape(store3):
    with pytest.raises(InconsistentInputs):
        run_round(_spec(), store3, [[0.5], [1.5]])
    with pytest.raises(InconsistentInputs):
        run_round(_spec(weights=(1, 1)), store3, [[0.5], [1.5], [2.5]])
    with pytest.raises(CodecOverflow):
        run_round(_spec(), store3, [[0.5], [math.nan], [2.5]])


def test_result_serialisation(store3):
    result = run_round(_spec(), store3, [[0.5], [1.5], [2.5]])
    body = result.to_dict()
    assert body["sums"] == result.sums and body["participants"] == [1, 2, 3]
    rows = result.metrics_rows()
    assert {r["phase"] for r in rows} == set(result.metrics)


def test_random_rounds_match_real_arithmetic(toy_store8):
    rng = random.Random(77)
    store = toy_store8
    sx, sy = 1000, 100
    for trial in range(25):
        n = store.n
        t = rng.randint(1, n)
        d = rng.randint(1, 4)
        weights = [rng.uniform(0, 1) for _ in range(n)]
        offline = tuple(rng.sample(range(1, n + 1), rng.randint(0, n - t)))
        grads = random_gradients(n, d, seed=trial)
        spec = RoundSpec(
            round_id=trial,
            label_prefix=f"trial-{trial}",
            t=t,
            d=d,
            weights=tuple(weights),
            dropout=DropoutSpec(offline=offline),
            codec=FixedPointCodec(sx, sy),
        )
        result = run_round(spec, store, grads)
        B = [i for i in range(1, n + 1) if i not in offline]
        assert list(result.participants) == B
        # |x|, |w| <= 1 and each is rounded by at most half a step
        bound = len(B) * (1 / (2 * sx) + 1 / (2 * sy) + 1 / (4 * sx * sy))
        for j in range(d):
            real = sum(grads[i - 1][j] * weights[i - 1] for i in B)
            assert abs(result.sums[j] - real) <= bound


def test_thresholds_vary_over_one_store(toy_store8):
    grads = [[0.1 * i] for i in range(1, 9)]
    for t in (2, 4, 8):
        spec = RoundSpec(1, f"flex-{t}", t, 1, (1.0,) * 8, codec=FixedPointCodec(10, 1))
        result = run_round(spec, toy_store8, grads)
        assert result.sums == [pytest.approx(3.6)]
