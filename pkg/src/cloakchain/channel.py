"""Covert-channel protocol: negotiation, transport, and reception.

Negotiation plants the initiator's private key into a two-transaction leak
pair on chain; both ends then hold the same extended key (initiator key +
DH-derived chaincode) and derive one fresh hardened child per message
segment.  Each covert transaction carries one 32-byte whitened segment per
input inside the input signature's nonce.  The receiver walks the derived
addresses in index order and stops at the first address with no
transactions.

All protocol constants are documented bit-exactly in protocol.md.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import ec
from .chain import ChainState
from .encoding import ser256, ser32
from .errors import (
    FeeNonPositive,
    FrameCorrupt,
    MalformedScriptSig,
    NegotiationNotFound,
    SegmentUnencodable,
    UnknownInput,
)
from .hdwallet import Address, ExtendedPrivateKey, addr_from_pk, addr_from_sk, derive_child
from .masquerade import FeatureSynthesizer, TxFeatureRecord
from .rng import byte_stream
from .sigs import (
    ecdh_chaincode,
    ecdsa_sign_with_nonce,
    klepto_extract,
    klepto_sign_pair,
    subliminal_extract_nonce,
)
from .tx import (
    OutPoint,
    attach_signatures,
    build_raw_tx,
    extract_signatures,
    p2pkh_script,
    sighash_all,
)

SEGMENT_BYTES = 32
FRAME_LEN_BYTES = 4
KEYSTREAM_HASH = hashlib.sha512

DEFAULT_NEGOTIATION_FEE = 1000


@dataclass(frozen=True)
class NegotiationResult:
    esk_ab: ExtendedPrivateKey
    txid1: bytes
    txid2: bytes


@dataclass
class SessionState:
    esk_ab: ExtendedPrivateKey
    role: str  # "sender" | "receiver"
    index_last: int = 0


@dataclass(frozen=True)
class MessageSegments:
    segments: tuple[bytes, ...]
    base_index: int


def negotiate_send(
    sk_a: int,
    pk_b,
    addr_c: Address,
    addr_d: Address,
    chain: ChainState,
    funding: tuple[OutPoint, OutPoint],
    fee: int = DEFAULT_NEGOTIATION_FEE,
    rng_seed: bytes | None = None,
) -> NegotiationResult:
    """Plant the key-leak transaction pair and derive the shared extended key."""
    addr_a = addr_from_sk(sk_a, "testnet")
    if addr_c.hash160 == addr_a.hash160 or addr_d.hash160 == addr_a.hash160:
        raise ValueError("bystander addresses must differ from the initiator's")
    spk_a = p2pkh_script(addr_a.hash160)
    if funding[0] == funding[1]:
        raise UnknownInput("the two funding outpoints must be distinct")
    spends = []
    for op in funding:
        if op not in chain.utxo_set:
            raise UnknownInput(f"funding outpoint {op.txid.hex()}:{op.vout} unavailable")
        value, spk = chain.utxo_set[op]
        if spk != spk_a:
            raise UnknownInput("funding outpoint not owned by the initiator")
        if value <= fee:
            raise FeeNonPositive(f"funding value {value} cannot cover fee {fee}")
        spends.append((op, value))
    tx1 = build_raw_tx([spends[0]], [(addr_c, spends[0][1] - fee)])
    tx2 = build_raw_tx([spends[1]], [(addr_d, spends[1][1] - fee)])
    d1 = sighash_all(tx1, 0, spk_a)
    d2 = sighash_all(tx2, 0, spk_a)
    sig1, sig2 = klepto_sign_pair(ec.SECP256K1, sk_a, pk_b, d1, d2, rng_seed)
    pk_a = ec.mul_g(ec.SECP256K1, sk_a)
    txid1 = chain.submit_tx(attach_signatures(tx1, [(sig1, pk_a)]))
    txid2 = chain.submit_tx(attach_signatures(tx2, [(sig2, pk_a)]))
    chaincode = ecdh_chaincode(ec.SECP256K1, sk_a, pk_b)
    return NegotiationResult(
        esk_ab=ExtendedPrivateKey(sk=sk_a, chaincode=chaincode),
        txid1=txid1,
        txid2=txid2,
    )


def negotiate_recv(sk_b: int, pk_a, chain: ChainState) -> NegotiationResult:
    """Recover the initiator's key from chain and derive the same extended key."""
    addr_a = addr_from_pk(pk_a, "testnet")
    txs = chain.get_tx_from_addr(addr_a)
    # keep only transactions the initiator sent (address owns an input)
    sent = []
    for tx in txs:
        try:
            sigs = extract_signatures(tx)
        except Exception:
            continue
        for sig, pk in sigs:
            if pk == pk_a:
                sent.append(tx)
                break
    if len(sent) < 2:
        raise NegotiationNotFound(f"{len(sent)} transactions at the initiator's address")
    tx1, tx2 = sent[0], sent[1]
    spk_a = p2pkh_script(addr_a.hash160)
    sig1 = extract_signatures(tx1)[0][0]
    sig2 = extract_signatures(tx2)[0][0]
    d2 = sighash_all(tx2, 0, spk_a)
    sk_a = klepto_extract(ec.SECP256K1, sk_b, pk_a, sig1, sig2, d2)
    chaincode = ecdh_chaincode(ec.SECP256K1, sk_b, pk_a)
    from . import tx as txm

    return NegotiationResult(
        esk_ab=ExtendedPrivateKey(sk=sk_a, chaincode=chaincode),
        txid1=txm.txid(tx1),
        txid2=txm.txid(tx2),
    )


def keystream_block(esk: ExtendedPrivateKey, index: int) -> bytes:
    """Whitening mask for one segment: SHA512(sk || chaincode || index)[:32]."""
    return KEYSTREAM_HASH(ser256(esk.sk) + esk.chaincode + ser32(index)).digest()[:SEGMENT_BYTES]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def msg_encode(esk: ExtendedPrivateKey, message: bytes, base_index: int) -> MessageSegments:
    """Frame (length prefix + zero padding) and whiten a message.

    Each whitened segment must land in [1, n) so it can ride as a nonce;
    the failure probability per segment is about 2^-128.
    """
    if len(message) >= 1 << 32:
        raise ValueError("message too long for the 4-byte frame header")
    frame = len(message).to_bytes(FRAME_LEN_BYTES, "big") + message
    if len(frame) % SEGMENT_BYTES:
        frame += b"\x00" * (SEGMENT_BYTES - len(frame) % SEGMENT_BYTES)
    segments = []
    n = ec.SECP256K1.n
    for k in range(len(frame) // SEGMENT_BYTES):
        block = frame[k * SEGMENT_BYTES : (k + 1) * SEGMENT_BYTES]
        whitened = _xor(block, keystream_block(esk, base_index + k))
        value = int.from_bytes(whitened, "big")
        if not 0 < value < n:
            raise SegmentUnencodable(f"segment {k} whitens outside [1, n)")
        segments.append(whitened)
    return MessageSegments(segments=tuple(segments), base_index=base_index)


def _split_amount(total: int, parts: int) -> list[int]:
    """Equal split, remainder on the first share."""
    share = total // parts
    first = total - share * (parts - 1)
    return [first] + [share] * (parts - 1)


def _fresh_output_addrs(count: int, stream) -> list[Address]:
    # receiver-side keys are generated and thrown away; nobody spends these
    from .rng import rand_scalar

    return [
        addr_from_pk(ec.mul_g(ec.SECP256K1, rand_scalar(stream, ec.SECP256K1.n)), "testnet")
        for _ in range(count)
    ]


def send_message(
    session: SessionState,
    message: bytes,
    chain: ChainState,
    synth: FeatureSynthesizer,
    sample_seed: int = 0,
    rng_seed: bytes | None = None,
) -> tuple[list[bytes], int]:
    """Transport a message over covert transactions with synthesized features.

    A transaction sampled with c inputs consumes c consecutive derivation
    indices, one segment per input.  Funding UTXOs are minted by the faucet
    at each derived address.  On a mid-message chain rejection the
    already-submitted transactions stand; the raised error reports the last
    completed index so the caller can resume.
    """
    if session.role != "sender":
        raise ValueError("only the sender side can transmit")
    encoded = msg_encode(session.esk_ab, message, session.index_last)
    segments = list(encoded.segments)
    stream = byte_stream(rng_seed)
    txids = []
    index = session.index_last
    ordinal = 0
    position = 0
    while position < len(segments):
        rec: TxFeatureRecord = synth.sample(1, seed=sample_seed, start_ordinal=ordinal)[0]
        ordinal += 1
        c = min(rec.input_cnt, len(segments) - position)
        in_values = _split_amount(rec.inputs_amount, c)
        out_cnt = min(rec.output_cnt, rec.outputs_amount)
        out_values = _split_amount(rec.outputs_amount, out_cnt)
        child_keys = [derive_child(session.esk_ab, index + k) for k in range(c)]
        spends = []
        try:
            for key, value in zip(child_keys, in_values):
                addr = addr_from_sk(key.sk, "testnet")
                spends.append((chain.faucet_fund(addr, value), value))
            recipients = [
                (addr, value)
                for addr, value in zip(_fresh_output_addrs(out_cnt, stream), out_values)
            ]
            tx = build_raw_tx(spends, recipients)
            sigs = []
            for k, key in enumerate(child_keys):
                spk = p2pkh_script(addr_from_sk(key.sk, "testnet").hash160)
                digest = sighash_all(tx, k, spk)
                nonce = int.from_bytes(segments[position + k], "big")
                sig = ecdsa_sign_with_nonce(ec.SECP256K1, key.sk, digest, nonce)
                sigs.append((sig, ec.mul_g(ec.SECP256K1, key.sk)))
            txids.append(chain.submit_tx(attach_signatures(tx, sigs)))
        except Exception as exc:
            raise type(exc)(
                f"{exc} (transport stopped; last completed index {index})"
            ) from exc
        index += c
        position += c
    session.index_last = index
    return txids, index


def receive_message(session: SessionState, chain: ChainState) -> tuple[bytes | None, int]:
    """Collect segments by walking derived addresses from the last index.

    Stops at the first derived address with no transactions.  Returns
    (message, next_index); message is None when nothing was found.
    """
    esk = session.esk_ab
    index = session.index_last
    collected = []
    while True:
        child = derive_child(esk, index)
        addr = addr_from_sk(child.sk, "testnet")
        txs = chain.get_tx_from_addr(addr)
        found = None
        for tx in txs:
            try:
                parsed = extract_signatures(tx)
            except MalformedScriptSig:
                continue  # faucet mints have empty script_sigs
            for pos, (sig, pk) in enumerate(parsed):
                if addr_from_pk(pk, "testnet").hash160 == addr.hash160:
                    found = (tx, pos, sig)
                    break
            if found:
                break
        if found is None:
            break
        tx, pos, sig = found
        spk = p2pkh_script(addr.hash160)
        digest = sighash_all(tx, pos, spk)
        nonce = subliminal_extract_nonce(ec.SECP256K1, child.sk, digest, sig)
        whitened = nonce.to_bytes(SEGMENT_BYTES, "big")
        collected.append(_xor(whitened, keystream_block(esk, index)))
        index += 1
    if not collected:
        return None, session.index_last
    data = b"".join(collected)
    length = int.from_bytes(data[:FRAME_LEN_BYTES], "big")
    if FRAME_LEN_BYTES + length > len(data):
        raise FrameCorrupt(
            f"frame claims {length} bytes, collected {len(data) - FRAME_LEN_BYTES}"
        )
    session.index_last = index
    return data[FRAME_LEN_BYTES : FRAME_LEN_BYTES + length], index
