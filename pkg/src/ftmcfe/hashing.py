"""expand_message_xmd (RFC 9380, section 5.3.1) over SHA-256."""

import hashlib

_B_IN_BYTES = 32
_S_IN_BYTES = 64


def expand_message_xmd(msg: bytes, dst: bytes, len_in_bytes: int) -> bytes:
    ell = -(-len_in_bytes // _B_IN_BYTES)
    if ell > 255 or len_in_bytes > 65535 or len(dst) > 255:
        raise ValueError("expand_message_xmd: requested length or DST too long")
    dst_prime = dst + bytes([len(dst)])
    msg_prime = bytes(_S_IN_BYTES) + msg + len_in_bytes.to_bytes(2, "big") + b"\x00" + dst_prime
    b0 = hashlib.sha256(msg_prime).digest()
    b = [hashlib.sha256(b0 + b"\x01" + dst_prime).digest()]
    for i in range(2, ell + 1):
        mixed = bytes(x ^ y for x, y in zip(b0, b[-1]))
        b.append(hashlib.sha256(mixed + bytes([i]) + dst_prime).digest())
    return b"".join(b)[:len_in_bytes]


def hash_to_int(msg: bytes, dst: bytes, modulus: int, counter: int = 0) -> int:
    """Uniform-looking integer mod ``modulus`` (64 extra bits of slack before reduction)."""
    nbytes = (modulus.bit_length() + 7) // 8 + 8
    return int.from_bytes(expand_message_xmd(msg + bytes([counter]), dst, nbytes), "big") % modulus
