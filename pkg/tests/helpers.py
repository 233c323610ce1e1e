"""Builders shared by the test modules."""

import random

from ftmcfe.polynomial import ParticipationSet
from ftmcfe.scheme import client_init, encrypt, pkeygen, ta_setup


def make_system(ctx, n, seed=0, retain_gamma=False):
    """mpk plus one key pair per client, reproducible from ``seed``."""
    rng = random.Random(seed)
    mpk = ta_setup(n, ctx, rng, retain_gamma=retain_gamma)
    keys = {i: client_init(i, mpk, rng) for i in range(1, n + 1)}
    return mpk, keys


def issue(mpk, keys, members, x, y, t, label):
    """Ciphertexts and partial keys for every member of B."""
    B = ParticipationSet(mpk.n, members)
    cts = [encrypt(x[i - 1], keys[i], t, label, mpk) for i in B]
    pks = [pkeygen(B, keys[i], y, t, mpk) for i in B]
    return B, cts, pks


def random_instance(rng, max_n=8, low=0, high=100):
    n = rng.randint(1, max_n)
    t = rng.randint(1, n)
    members = sorted(rng.sample(range(1, n + 1), rng.randint(t, n)))
    x = [rng.randint(low, high) for _ in range(n)]
    y = [rng.randint(low, high) for _ in range(n)]
    return n, t, members, x, y
