"""Command-line entry points for the TA, clients and the aggregator.

    ftmcfe setup --n 3 --out keys
    ftmcfe client-init --keys keys --index 1
    ftmcfe encrypt --keys keys --index 1 --value 2 --t 2 --label r1 --out c1.ct
    ftmcfe pkeygen --keys keys --index 1 --members 1,2,3 --y 1,1,1 --t 2 --out k1.pk
    ftmcfe decrypt --keys keys --ct c1.ct c2.ct --pk k1.pk k2.pk --y 1,1,1 --label r1
    ftmcfe simulate --config round.json --out results
    ftmcfe bench --cases standard --reps 10 --out bench

Failures exit non-zero and print one JSON line {"error": <code>, "message": ...}
on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
from pathlib import Path

from . import wire
from .errors import ConfigParseError, FtmcfeError, MalformedEncoding, StoreIOError, UsageError
from .harness import (
    keystore_init,
    keystore_load,
    load_round_config,
    random_gradients,
    run_round,
)
from .pairing_core import DEFAULT_CURVE, init_pairing
from .polynomial import ParticipationSet, check_powers
from .scheme import DlogConfig, DEFAULT_DLOG_BOUND, client_init, decrypt, encrypt, pkeygen, ta_setup

ORACLE_ENV = "FTMCFE_TEST_ORACLE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise StoreIOError(str(exc)) from None


def _write(path, data: bytes) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)
    except OSError as exc:
        raise StoreIOError(str(exc)) from None


def _load_mpk(keys_dir):
    mpk = wire.load_mpk(_read(Path(keys_dir) / "mpk.bin"))
    if not check_powers(mpk.ctx, mpk.powers):
        raise MalformedEncoding("mpk fails the powers-of-gamma consistency check")
    return mpk


def _load_client(keys_dir, index, mpk):
    return wire.load_client_key(_read(Path(keys_dir) / f"client_{index:04d}.key"), mpk.ctx)


def _rng(seed):
    # seeded keys are reproducible and therefore only fit for testing
    return None if seed is None else random.Random(seed)


def cmd_setup(args) -> int:
    oracle_env = os.environ.get(ORACLE_ENV) == "1"
    if oracle_env != args.insecure_test:
        raise UsageError(f"gamma retention needs both {ORACLE_ENV}=1 and --insecure-test")
    mpk = ta_setup(args.n, init_pairing(args.curve), _rng(args.seed), retain_gamma=oracle_env)
    out = Path(args.out)
    _write(out / "mpk.bin", wire.dump_mpk(mpk))
    if mpk.gamma is not None:
        _write(out / "gamma.insecure", f"{mpk.gamma:x}\n".encode())
    print(json.dumps({"mpk": str(out / "mpk.bin"), "n": args.n, "curve": args.curve}))
    return 0


def cmd_client_init(args) -> int:
    mpk = _load_mpk(args.keys)
    key = client_init(args.index, mpk, _rng(args.seed))
    path = Path(args.keys) / f"client_{args.index:04d}.key"
    _write(path, wire.dump_client_key(key))
    print(json.dumps({"key": str(path), "i": args.index}))
    return 0


def cmd_encrypt(args) -> int:
    mpk = _load_mpk(args.keys)
    ek = _load_client(args.keys, args.index, mpk)
    ct = encrypt(args.value, ek, args.t, args.label, mpk, bound=args.bound)
    _write(args.out, wire.dump_ciphertext(ct))
    sidecar = {"i": ct.index, "l": ct.label, "t": ct.t, "n": mpk.n}
    _write(str(args.out) + ".json", json.dumps(sidecar).encode())
    print(json.dumps(sidecar))
    return 0


def cmd_pkeygen(args) -> int:
    members, y = _int_list(args.members), _int_list(args.y)
    mpk = _load_mpk(args.keys)
    sk = _load_client(args.keys, args.index, mpk)
    B = ParticipationSet(mpk.n, members)
    key = pkeygen(B, sk, y, args.t, mpk)
    _write(args.out, wire.dump_partial_key(key))
    print(json.dumps({"i": key.index, "t": key.t, "members": list(B.members)}))
    return 0


def cmd_decrypt(args) -> int:
    y = _int_list(args.y)
    explicit = _int_list(args.members) if args.members else None
    mpk = _load_mpk(args.keys)
    keys = [wire.load_partial_key(_read(p), mpk.ctx) for p in args.pk]
    cts = [wire.load_ciphertext(_read(p), mpk.ctx) for p in args.ct]
    members = explicit if explicit is not None else sorted({k.index for k in keys})
    if not members:
        raise UsageError("no partial keys supplied")
    B = ParticipationSet(mpk.n, members)
    cts = [ct for ct in cts if ct.index in B]
    keys = [k for k in keys if k.index in B]
    value = decrypt(B, y, keys, cts, args.label, DlogConfig(args.bound), mpk)
    print(value)
    return 0


def cmd_simulate(args) -> int:
    spec, raw = load_round_config(args.config)
    if "n" in raw and raw["n"] != spec.n:
        raise ConfigParseError(f"config n={raw['n']} disagrees with {spec.n} weights")
    if args.keys and (Path(args.keys) / "manifest.json").exists():
        store = keystore_load(args.keys)
    else:
        store_dir = args.keys or Path(args.out) / "keys"
        store = keystore_init(spec.n, store_dir, seed=raw.get("seed", args.seed), curve=raw.get("curve", DEFAULT_CURVE))
    gradients = raw.get("gradients") or random_gradients(spec.n, spec.d, raw.get("gradient_seed"))
    result = run_round(spec, store, gradients)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    body = result.to_dict()
    (out / "result.json").write_text(json.dumps(body, indent=2))
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["phase", "n", "t", "millis"])
        writer.writeheader()
        writer.writerows(result.metrics_rows())
    print(json.dumps(body))
    return 0


def cmd_bench(args) -> int:
    # must precede the first native parallel call
    os.environ.setdefault("RAYON_NUM_THREADS", "1")
    from .bench import STANDARD_CASES, BenchCase, n_sweep, run_bench, t_sweep

    if args.cases == "standard":
        cases = [BenchCase(c.name, c.n, c.t, args.reps) for c in STANDARD_CASES]
    elif args.cases == "n-sweep":
        cases = n_sweep(reps=args.reps)
    elif args.cases == "t-sweep":
        cases = t_sweep(reps=args.reps)
    else:
        cases = [BenchCase("custom", args.n, args.t, args.reps)]
    report = run_bench(cases, curve=args.curve, seed=args.seed or 0)
    if args.out:
        report.write(args.out)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ftmcfe", description="Flexible-threshold MCFE for inner products")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("setup", help="TA: publish the powers-of-gamma reference string")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--curve", default=DEFAULT_CURVE)
    p.add_argument("--insecure-test", action="store_true", help=f"retain gamma (also needs {ORACLE_ENV}=1)")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("client-init", help="client: generate (S, T, w)")
    p.add_argument("--keys", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_client_init)

    p = sub.add_parser("encrypt", help="client: encrypt one integer under (label, t)")
    p.add_argument("--keys", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--bound", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("pkeygen", help="client: partial functional key for (B, y, t)")
    p.add_argument("--keys", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--members", required=True, help="comma-separated online client indices")
    p.add_argument("--y", required=True, help="comma-separated weight vector of length n")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pkeygen)

    p = sub.add_parser("decrypt", help="aggregator: recover the inner product over B")
    p.add_argument("--keys", required=True)
    p.add_argument("--ct", nargs="+", required=True)
    p.add_argument("--pk", nargs="+", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--members", help="defaults to the indices of the supplied partial keys")
    p.add_argument("--bound", type=int, default=DEFAULT_DLOG_BOUND)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("simulate", help="run one federated aggregation round from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--keys", help="existing key store (created under --out if absent)")
    p.add_argument("--out", default="simulate-out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time Setup/PKeyGen/Enc/Dec and fit scaling trends")
    p.add_argument("--cases", choices=["standard", "n-sweep", "t-sweep", "custom"], default="standard")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--t", type=int, default=5)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--curve", default=DEFAULT_CURVE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            import logging

            logging.basicConfig(level=logging.INFO)
        return args.func(args)
    except FtmcfeError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    except ValueError as exc:
        print(json.dumps({"error": "usage-error", "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
