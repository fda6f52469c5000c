"""Hierarchical deterministic key management (BIP32-style).

The channel only ever uses hardened derivation; the non-hardened rule is
implemented so the published derivation test vectors can run end to end.
Public keys are compressed everywhere.
"""

from __future__ import annotations

import hmac
import hashlib
from dataclasses import dataclass

from . import ec
from .encoding import b58check_encode, b58check_decode, hash160, ser256, ser32
from .errors import BadPrefix, DerivationDegenerate, InvalidSeedScalar

HARDENED_OFFSET = 1 << 31

ADDR_VERSION = {"mainnet": 0x00, "testnet": 0x6F}
WIF_VERSION = {"mainnet": 0x80, "testnet": 0xEF}
_ADDR_NETWORK = {v: k for k, v in ADDR_VERSION.items()}
_WIF_NETWORK = {v: k for k, v in WIF_VERSION.items()}


@dataclass(frozen=True)
class ExtendedPrivateKey:
    sk: int
    chaincode: bytes

    def __post_init__(self):
        if not 0 < self.sk < ec.SECP256K1.n:
            raise InvalidSeedScalar("private key out of range")
        if len(self.chaincode) != 32:
            raise ValueError("chaincode must be 32 bytes")


@dataclass(frozen=True)
class DerivationIndex:
    index: int
    hardened: bool = True

    def __post_init__(self):
        if not 0 <= self.index < HARDENED_OFFSET:
            raise ValueError("index must fit in 31 bits")


@dataclass(frozen=True)
class Address:
    network: str
    hash160: bytes
    rendered: str


def master_from_seed(seed: bytes) -> ExtendedPrivateKey:
    if not 16 <= len(seed) <= 64:
        raise ValueError("seed length must be 16..64 bytes")
    raw = hmac.new(b"Bitcoin seed", seed, hashlib.sha512).digest()
    sk = int.from_bytes(raw[:32], "big")
    if sk == 0 or sk >= ec.SECP256K1.n:
        raise InvalidSeedScalar("master key derivation degenerate")
    return ExtendedPrivateKey(sk=sk, chaincode=raw[32:])


def derive_child(esk: ExtendedPrivateKey, index: int, hardened: bool = True) -> ExtendedPrivateKey:
    """One BIP32 derivation step.  The channel always passes hardened=True."""
    n = ec.SECP256K1.n
    if hardened:
        data = b"\x00" + ser256(esk.sk) + ser32(index + HARDENED_OFFSET)
    else:
        pk = ec.mul_g(ec.SECP256K1, esk.sk)
        data = ec.point_encode(ec.SECP256K1, pk) + ser32(index)
    raw = hmac.new(esk.chaincode, data, hashlib.sha512).digest()
    il = int.from_bytes(raw[:32], "big")
    child_sk = (il + esk.sk) % n
    if il >= n or child_sk == 0:
        raise DerivationDegenerate(f"index {index} unusable")
    return ExtendedPrivateKey(sk=child_sk, chaincode=raw[32:])


def derive_child_hardened(esk: ExtendedPrivateKey, index: DerivationIndex) -> ExtendedPrivateKey:
    if not index.hardened:
        raise ValueError("channel derivation requires the hardened flag")
    return derive_child(esk, index.index, hardened=True)


def addr_from_pk(pk, network: str = "testnet") -> Address:
    h160 = hash160(ec.point_encode(ec.SECP256K1, pk))
    rendered = b58check_encode(bytes([ADDR_VERSION[network]]) + h160)
    return Address(network=network, hash160=h160, rendered=rendered)


def addr_from_sk(sk: int, network: str = "testnet") -> Address:
    return addr_from_pk(ec.mul_g(ec.SECP256K1, sk), network)


def addr_parse(rendered: str) -> Address:
    payload = b58check_decode(rendered)
    if len(payload) != 21 or payload[0] not in _ADDR_NETWORK:
        raise BadPrefix(f"not a pay-to-pubkey-hash address: {rendered!r}")
    return Address(network=_ADDR_NETWORK[payload[0]], hash160=payload[1:], rendered=rendered)


def wif_encode(sk: int, network: str = "testnet") -> str:
    # trailing 0x01 marks a compressed public key
    return b58check_encode(bytes([WIF_VERSION[network]]) + ser256(sk) + b"\x01")


def wif_decode(wif: str) -> tuple[int, str]:
    payload = b58check_decode(wif)
    if len(payload) != 34 or payload[-1] != 0x01:
        raise BadPrefix("expected a compressed-key WIF")
    if payload[0] not in _WIF_NETWORK:
        raise BadPrefix(f"unknown WIF version byte {payload[0]:#x}")
    sk = int.from_bytes(payload[1:33], "big")
    if not 0 < sk < ec.SECP256K1.n:
        raise BadPrefix("WIF scalar out of range")
    return sk, _WIF_NETWORK[payload[0]]
