"""ECDSA with caller-controlled nonces, plus the two covert primitives:

* a two-signature leak that embeds the signer's private key into the second
  signature's nonce, recoverable only by a designated receiver, and
* nonce recovery from a single signature by anyone holding the signing key.

Signatures are NOT low-s normalized: canonicalizing s would map the embedded
nonce k to n-k and destroy half of all recovered payloads.  Verification
accepts both forms.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import ec
from .ec import CurveParams
from .errors import (
    DegenerateNonce,
    ExtractionFailed,
    IdentityPoint,
    InvalidSignature,
    NonceYieldsZero,
)
from .rng import byte_stream, rand_scalar


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: tuple

    def __post_init__(self):
        assert self.pk is not None


@dataclass(frozen=True)
class EcdsaSignature:
    r: int
    s: int

    def to_bytes(self) -> bytes:
        return self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "EcdsaSignature":
        if len(data) != 64:
            raise ValueError("signature must be 64 bytes")
        return cls(int.from_bytes(data[:32], "big"), int.from_bytes(data[32:], "big"))


def digest_to_scalar(curve: CurveParams, digest: bytes) -> int:
    """Big-endian integer reduced mod n; fixed convention for the artifact."""
    return int.from_bytes(digest, "big") % curve.n


def keypair_generate(curve: CurveParams = ec.SECP256K1, rng_seed: bytes | None = None) -> KeyPair:
    stream = byte_stream(rng_seed)
    sk = rand_scalar(stream, curve.n)
    return KeyPair(sk=sk, pk=ec.mul_g(curve, sk))


def ecdsa_sign_with_nonce(
    curve: CurveParams, sk: int, digest: bytes, nonce: int
) -> EcdsaSignature:
    if not 0 < nonce < curve.n:
        raise ValueError("nonce out of range")
    z = digest_to_scalar(curve, digest)
    R = ec.mul_g(curve, nonce)
    r = R[0] % curve.n
    if r == 0:
        raise NonceYieldsZero("nonce gives r = 0")
    s = pow(nonce, -1, curve.n) * (z + r * sk) % curve.n
    if s == 0:
        raise NonceYieldsZero("nonce gives s = 0")
    return EcdsaSignature(r, s)


def ecdsa_verify(curve: CurveParams, pk, digest: bytes, sig: EcdsaSignature) -> bool:
    if not (0 < sig.r < curve.n and 0 < sig.s < curve.n):
        return False
    if pk is None or not ec.on_curve(curve, pk):
        return False
    z = digest_to_scalar(curve, digest)
    sinv = pow(sig.s, -1, curve.n)
    u1 = z * sinv % curve.n
    u2 = sig.r * sinv % curve.n
    R = ec.add(curve, ec.mul_g(curve, u1), ec.mul(curve, u2, pk))
    if R is None:
        return False
    return R[0] % curve.n == sig.r


def _leak_nonce(curve: CurveParams, shared_point, counter: int) -> int:
    """Second-signature nonce: SHA256(SEC1(point) || counter byte) mod n."""
    enc = ec.point_encode(curve, shared_point)
    return int.from_bytes(hashlib.sha256(enc + bytes([counter])).digest(), "big") % curve.n


def klepto_sign_pair(
    curve: CurveParams,
    sk_sender: int,
    pk_receiver,
    digest1: bytes,
    digest2: bytes,
    rng_seed: bytes | None = None,
) -> tuple[EcdsaSignature, EcdsaSignature]:
    """Sign two digests; the second nonce leaks sk_sender to pk_receiver's owner.

    nonce2 = SHA256(SEC1(nonce1 * pk_receiver) || counter) mod n, counter
    starting at 0 and bumped on degenerate candidates.
    """
    stream = byte_stream(rng_seed)
    while True:
        k1 = rand_scalar(stream, curve.n)
        try:
            sig1 = ecdsa_sign_with_nonce(curve, sk_sender, digest1, k1)
            break
        except NonceYieldsZero:
            continue
    shared = ec.mul(curve, k1, pk_receiver)
    if shared is None:
        raise IdentityPoint("receiver key times nonce is the identity")
    for counter in range(256):
        k2 = _leak_nonce(curve, shared, counter)
        if k2 == 0:
            continue
        try:
            sig2 = ecdsa_sign_with_nonce(curve, sk_sender, digest2, k2)
        except NonceYieldsZero:
            continue
        return sig1, sig2
    raise DegenerateNonce("256 retry counters exhausted")


def klepto_extract(
    curve: CurveParams,
    sk_receiver: int,
    pk_sender,
    sig1: EcdsaSignature,
    sig2: EcdsaSignature,
    digest2: bytes,
) -> int:
    """Recover the sender's private key from a leak pair.

    Reconstructs the first signature's nonce point from sig1.r (both
    y-parities, plus r+n x-candidates when they fit the field), replays the
    counter schedule, and keeps the candidate whose public key matches.
    """
    z2 = digest_to_scalar(curve, digest2)
    r2_inv = pow(sig2.r, -1, curve.n)
    xs = [sig1.r]
    if sig1.r + curve.n < curve.p:
        xs.append(sig1.r + curve.n)
    shared_points = []
    for x in xs:
        pair = ec.lift_x(curve, x)
        if pair is None:
            continue
        for R1 in pair:
            S = ec.mul(curve, sk_receiver, R1)
            if S is not None:
                shared_points.append(S)
    for counter in range(256):
        for S in shared_points:
            k2 = _leak_nonce(curve, S, counter)
            if k2 == 0:
                continue
            sk = (sig2.s * k2 - z2) % curve.n * r2_inv % curve.n
            if sk and ec.mul_g(curve, sk) == pk_sender:
                return sk
    raise ExtractionFailed("no nonce candidate matches the sender's public key")


def subliminal_extract_nonce(
    curve: CurveParams, sk: int, digest: bytes, sig: EcdsaSignature
) -> int:
    """Recover the exact nonce of a signature, given the signing key."""
    if not (0 < sig.r < curve.n and 0 < sig.s < curve.n):
        raise InvalidSignature("r or s out of range")
    z = digest_to_scalar(curve, digest)
    k = pow(sig.s, -1, curve.n) * (z + sig.r * sk) % curve.n
    R = ec.mul_g(curve, k)
    # equivalent to full verification when sk is the signing key
    if R is None or R[0] % curve.n != sig.r:
        raise InvalidSignature("signature does not verify under this key")
    return k


def ecdh_chaincode(curve: CurveParams, sk_self: int, pk_peer) -> bytes:
    """Shared 32-byte secret: SHA256 of the DH point's x-coordinate."""
    shared = ec.mul(curve, sk_self, pk_peer)
    if shared is None:
        raise IdentityPoint("DH product is the identity")
    return hashlib.sha256(shared[0].to_bytes(32, "big")).digest()
