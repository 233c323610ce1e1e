"""Flexible-threshold multi-client functional encryption for inner products."""

from .errors import FtmcfeError
from .pairing_core import (
    Diag,
    DiagScalar,
    Element,
    PairingContext,
    hash_h1,
    hash_h2,
    init_pairing,
    multi_pair,
    pair,
)
from .polynomial import ParticipationSet, vanishing_poly, verify_degree
from .scheme import (
    Ciphertext,
    ClientKeyPair,
    DlogConfig,
    MasterPublicKey,
    PartialFunctionalKey,
    bsgs_dlog,
    client_init,
    decrypt,
    encrypt,
    pkeygen,
    ta_setup,
    verify_partial_key,
)

__version__ = "0.1.0"

__all__ = [
    "Ciphertext",
    "ClientKeyPair",
    "Diag",
    "DiagScalar",
    "DlogConfig",
    "Element",
    "FtmcfeError",
    "MasterPublicKey",
    "PairingContext",
    "ParticipationSet",
    "PartialFunctionalKey",
    "bsgs_dlog",
    "client_init",
    "decrypt",
    "encrypt",
    "hash_h1",
    "hash_h2",
    "init_pairing",
    "multi_pair",
    "pair",
    "pkeygen",
    "ta_setup",
    "vanishing_poly",
    "verify_degree",
    "verify_partial_key",
]
