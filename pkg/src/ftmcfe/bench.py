"""Timing harness for the four algorithms.

Per case (n, t) the online set is the minimal quorum B = {1..t}. What is timed:

    Setup   ta_setup plus n client_init calls
    PKeyGen one client's partial key for B
    Enc     all n clients encrypting under one label
    Dec     decrypt over B, including hashing and the discrete log

Hash caches are cleared before every timed call so hash-to-group work is
counted. Each case gets one discarded warm-up repetition, which also builds
the discrete-log baby-step table; that table depends only on the group, not
on the inputs, and is reused afterwards. Repetitions are interleaved across
cases. File I/O is never inside a timed region.
"""

from __future__ import annotations

import csv
import gc
import json
import os
import platform
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .pairing_core import DEFAULT_CURVE, clear_hash_cache, init_pairing
from .polynomial import ParticipationSet
from .scheme import DlogConfig, client_init, decrypt, encrypt, pkeygen, ta_setup

ALGORITHMS = ("Setup", "PKeyGen", "Enc", "Dec")
# which parameter each algorithm's cost is fitted against
FIT_AXIS = {"Setup": "n", "PKeyGen": "n", "Enc": "n", "Dec": "t"}


@dataclass(frozen=True)
class BenchCase:
    name: str
    n: int
    t: int
    repetitions: int = 10

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 1 <= self.t <= self.n:
            raise ValueError(f"need 1 <= t <= n, got t={self.t}, n={self.n}")


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


@dataclass
class BenchReport:
    rows: list[dict]
    fits: dict[str, Fit | None]
    header: dict = field(default_factory=dict)

    def mean(self, case: str, algorithm: str) -> float:
        for row in self.rows:
            if row["case"] == case and row["algorithm"] == algorithm:
                return row["mean_ms"]
        raise KeyError((case, algorithm))

    def to_dict(self) -> dict:
        return {
            "header": self.header,
            "rows": self.rows,
            "fits": {k: (asdict(v) if v else None) for k, v in self.fits.items()},
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bench.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["case", "algorithm", "n", "t", "mean_ms", "stddev_ms"])
            writer.writeheader()
            writer.writerows(self.rows)
        (out / "bench.json").write_text(json.dumps(self.to_dict(), indent=2))


STANDARD_CASES = (
    BenchCase("case-i", 10, 5),
    BenchCase("case-ii", 10, 10),
    BenchCase("case-iii", 20, 10),
)


def n_sweep(ns=(5, 10, 20, 40), t: int = 5, reps: int = 10) -> list[BenchCase]:
    return [BenchCase(f"n{n}-t{t}", n, t, reps) for n in ns]


def t_sweep(ts=(5, 10, 15, 20), n: int = 20, reps: int = 10) -> list[BenchCase]:
    return [BenchCase(f"n{n}-t{t}", n, t, reps) for t in ts]


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> Fit | None:
    """Least squares y = a x + b with R²; None when fewer than two distinct x."""
    if len(set(xs)) < 2:
        return None
    slope, intercept = statistics.linear_regression(xs, ys)
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return Fit(slope, intercept, r2)


def _time_ms(fn: Callable[[], object]) -> float:
    clear_hash_cache()
    # same policy as timeit: no collector pauses inside the measurement
    gc.collect()
    gc.disable()
    try:
        start = time.perf_counter()
        fn()
        return (time.perf_counter() - start) * 1e3
    finally:
        gc.enable()


def _bench_once(case: BenchCase, ctx, rng: random.Random, rep: int) -> dict[str, float]:
    """One repetition of all four algorithms for one case."""
    n, t = case.n, case.t
    times = {}
    state = {}

    def setup():
        mpk = ta_setup(n, ctx, rng)
        state["mpk"] = mpk
        state["keys"] = [client_init(i, mpk, rng) for i in range(1, n + 1)]

    times["Setup"] = _time_ms(setup)
    mpk, keys = state["mpk"], state["keys"]
    B = ParticipationSet(n, range(1, t + 1))
    y = [rng.randrange(0, 101) for _ in range(n)]
    x = [rng.randrange(0, 101) for _ in range(n)]
    label = f"bench:{case.name}:{rep}"

    times["PKeyGen"] = _time_ms(lambda: pkeygen(B, keys[0], y, t, mpk))
    pks = [pkeygen(B, keys[i - 1], y, t, mpk) for i in B]

    def enc_all():
        out = []
        for i in range(1, n + 1):
            clear_hash_cache()  # every client hashes the label itself
            out.append(encrypt(x[i - 1], keys[i - 1], t, label, mpk))
        state["cts"] = out

    times["Enc"] = _time_ms(enc_all)
    cts = [state["cts"][i - 1] for i in B]
    expected = sum(x[i - 1] * y[i - 1] for i in B)
    dlog = DlogConfig()

    def dec():
        got = decrypt(B, y, pks, cts, label, dlog, mpk)
        if got != expected:
            raise AssertionError(f"bench decryption returned {got}, expected {expected}")

    times["Dec"] = _time_ms(dec)
    return times


def _collect(cases: Sequence[BenchCase], curve: str, rng: random.Random) -> list[dict[str, list[float]]]:
    ctx = init_pairing(curve)
    samples = [{a: [] for a in ALGORITHMS} for _ in cases]
    for case in cases:
        _bench_once(case, ctx, rng, -1)  # warm-up, discarded
    # repetition-major order: slow drift of the machine hits every case alike
    for rep in range(max(c.repetitions for c in cases)):
        for case, bucket in zip(cases, samples):
            if rep < case.repetitions:
                for alg, ms in _bench_once(case, ctx, rng, rep).items():
                    bucket[alg].append(ms)
    return samples


def run_bench(cases: Sequence[BenchCase], curve: str = DEFAULT_CURVE, seed: int = 0) -> BenchReport:
    """Time every algorithm on every case and fit each against its axis."""
    if not cases:
        raise ValueError("run_bench needs at least one case")
    # single worker for stable timings; only effective before the native
    # thread pool first spins up
    os.environ.setdefault("RAYON_NUM_THREADS", "1")
    rng = random.Random(seed)
    rows = []
    for case, samples in zip(cases, _collect(cases, curve, rng)):
        for alg in ALGORITHMS:
            vals = samples[alg]
            rows.append({
                "case": case.name,
                "algorithm": alg,
                "n": case.n,
                "t": case.t,
                "mean_ms": statistics.fmean(vals),
                "stddev_ms": statistics.stdev(vals) if len(vals) > 1 else 0.0,
            })
    fits = {}
    for alg in ALGORITHMS:
        pts = [(r[FIT_AXIS[alg]], r["mean_ms"]) for r in rows if r["algorithm"] == alg]
        fits[alg] = linear_fit([p[0] for p in pts], [p[1] for p in pts])
    header = {
        "curve": curve,
        "threads": os.environ.get("RAYON_NUM_THREADS"),
        "python": platform.python_version(),
        "note": "single worker thread requested; absolute timings are stack-specific",
    }
    return BenchReport(rows=rows, fits=fits, header=header)
