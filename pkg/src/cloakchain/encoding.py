"""Byte-level encodings fixed for the whole artifact.

Scalars are 32-byte big-endian, points 33-byte compressed SEC1 (handled in
``ec``), signatures 64-byte r||s.  Addresses and keys use base58check.
"""

from __future__ import annotations

import hashlib

from .errors import ChecksumMismatch
from .ripemd160 import ripemd160

B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(B58_ALPHABET)}


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def sha256d(data: bytes) -> bytes:
    return sha256(sha256(data))


def hash160(data: bytes) -> bytes:
    return ripemd160(sha256(data))


def ser256(value: int) -> bytes:
    return value.to_bytes(32, "big")


def ser32(value: int) -> bytes:
    return value.to_bytes(4, "big")


def b58_encode(payload: bytes) -> str:
    num = int.from_bytes(payload, "big")
    out = ""
    while num:
        num, rem = divmod(num, 58)
        out = B58_ALPHABET[rem] + out
    pad = len(payload) - len(payload.lstrip(b"\x00"))
    return "1" * pad + out


def b58_decode(text: str) -> bytes:
    num = 0
    for ch in text:
        if ch not in _B58_INDEX:
            raise ChecksumMismatch(f"invalid base58 character {ch!r}")
        num = num * 58 + _B58_INDEX[ch]
    raw = num.to_bytes((num.bit_length() + 7) // 8, "big")
    pad = len(text) - len(text.lstrip("1"))
    return b"\x00" * pad + raw


def b58check_encode(payload: bytes) -> str:
    return b58_encode(payload + sha256d(payload)[:4])


def b58check_decode(text: str) -> bytes:
    raw = b58_decode(text)
    if len(raw) < 5:
        raise ChecksumMismatch("payload too short")
    payload, check = raw[:-4], raw[-4:]
    if sha256d(payload)[:4] != check:
        raise ChecksumMismatch(f"bad checksum in {text!r}")
    return payload


def write_varint(value: int) -> bytes:
    if value < 0xFD:
        return bytes([value])
    if value <= 0xFFFF:
        return b"\xfd" + value.to_bytes(2, "little")
    if value <= 0xFFFFFFFF:
        return b"\xfe" + value.to_bytes(4, "little")
    return b"\xff" + value.to_bytes(8, "little")


def read_varint(data: bytes, offset: int) -> tuple[int, int]:
    """Returns (value, next_offset)."""
    first = data[offset]
    if first < 0xFD:
        return first, offset + 1
    if first == 0xFD:
        return int.from_bytes(data[offset + 1 : offset + 3], "little"), offset + 3
    if first == 0xFE:
        return int.from_bytes(data[offset + 1 : offset + 5], "little"), offset + 5
    return int.from_bytes(data[offset + 1 : offset + 9], "little"), offset + 9
