"""Legacy pay-to-pubkey-hash transaction model.

Serialization follows the pre-SegWit layout (little-endian integers, varint
counts) with one deliberate deviation from the live wire format: signatures
inside script_sig are raw 64-byte r||s followed by the sighash flag byte,
not DER.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .encoding import read_varint, sha256d, write_varint
from .errors import (
    ArityMismatch,
    FeeNonPositive,
    IndexOutOfRange,
    MalformedScriptSig,
)
from .hdwallet import Address
from .sigs import EcdsaSignature
from . import ec

SIGHASH_ALL = 0x01


def p2pkh_script(h160: bytes) -> bytes:
    # OP_DUP OP_HASH160 <20 bytes> OP_EQUALVERIFY OP_CHECKSIG
    return b"\x76\xa9\x14" + h160 + b"\x88\xac"


def script_to_hash160(script: bytes) -> bytes | None:
    if len(script) == 25 and script[:3] == b"\x76\xa9\x14" and script[23:] == b"\x88\xac":
        return script[3:23]
    return None


@dataclass(frozen=True)
class OutPoint:
    txid: bytes
    vout: int


@dataclass(frozen=True)
class TxInput:
    outpoint: OutPoint
    script_sig: bytes = b""
    sequence: int = 0xFFFFFFFF


@dataclass(frozen=True)
class TxOutput:
    value: int
    script_pubkey: bytes


@dataclass(frozen=True)
class Transaction:
    inputs: tuple
    outputs: tuple
    version: int = 1
    locktime: int = 0


def build_raw_tx(
    spends: list[tuple[OutPoint, int]],
    recipients: list[tuple[Address, int]],
) -> Transaction:
    """Unsigned transaction; the fee is the input/output value difference."""
    if not spends or not recipients:
        raise ValueError("need at least one spend and one recipient")
    total_in = sum(v for _, v in spends)
    total_out = sum(v for _, v in recipients)
    if total_in <= total_out:
        raise FeeNonPositive(f"inputs {total_in} <= outputs {total_out}")
    inputs = tuple(TxInput(outpoint=op) for op, _ in spends)
    outputs = tuple(
        TxOutput(value=v, script_pubkey=p2pkh_script(addr.hash160))
        for addr, v in recipients
    )
    return Transaction(inputs=inputs, outputs=outputs)


def serialize(tx: Transaction) -> bytes:
    out = [tx.version.to_bytes(4, "little"), write_varint(len(tx.inputs))]
    for txin in tx.inputs:
        out.append(txin.outpoint.txid)
        out.append(txin.outpoint.vout.to_bytes(4, "little"))
        out.append(write_varint(len(txin.script_sig)))
        out.append(txin.script_sig)
        out.append(txin.sequence.to_bytes(4, "little"))
    out.append(write_varint(len(tx.outputs)))
    for txout in tx.outputs:
        out.append(txout.value.to_bytes(8, "little"))
        out.append(write_varint(len(txout.script_pubkey)))
        out.append(txout.script_pubkey)
    out.append(tx.locktime.to_bytes(4, "little"))
    return b"".join(out)


def deserialize(data: bytes) -> Transaction:
    version = int.from_bytes(data[0:4], "little")
    n_in, off = read_varint(data, 4)
    inputs = []
    for _ in range(n_in):
        txid = data[off : off + 32]
        vout = int.from_bytes(data[off + 32 : off + 36], "little")
        slen, off = read_varint(data, off + 36)
        script = data[off : off + slen]
        seq = int.from_bytes(data[off + slen : off + slen + 4], "little")
        off += slen + 4
        inputs.append(TxInput(OutPoint(txid, vout), script, seq))
    n_out, off = read_varint(data, off)
    outputs = []
    for _ in range(n_out):
        value = int.from_bytes(data[off : off + 8], "little")
        slen, off = read_varint(data, off + 8)
        outputs.append(TxOutput(value, data[off : off + slen]))
        off += slen
    locktime = int.from_bytes(data[off : off + 4], "little")
    if off + 4 != len(data):
        raise ValueError("trailing bytes after transaction")
    return Transaction(tuple(inputs), tuple(outputs), version, locktime)


def sighash_all(tx: Transaction, input_index: int, prev_script_pubkey: bytes) -> bytes:
    """Digest each input signs: all script_sigs blanked except the one being
    signed, which carries the spent output's locking script."""
    if not 0 <= input_index < len(tx.inputs):
        raise IndexOutOfRange(f"input {input_index} of {len(tx.inputs)}")
    masked = tuple(
        replace(txin, script_sig=prev_script_pubkey if i == input_index else b"")
        for i, txin in enumerate(tx.inputs)
    )
    preimage = serialize(replace(tx, inputs=masked)) + SIGHASH_ALL.to_bytes(4, "little")
    return sha256d(preimage)


def _push(data: bytes) -> bytes:
    assert len(data) < 0x4C
    return bytes([len(data)]) + data


def attach_signatures(
    tx: Transaction, sigs: list[tuple[EcdsaSignature, tuple]]
) -> Transaction:
    """Populate script_sigs: push(sig64 || flag) push(compressed pubkey)."""
    if len(sigs) != len(tx.inputs):
        raise ArityMismatch(f"{len(sigs)} signatures for {len(tx.inputs)} inputs")
    new_inputs = []
    for txin, (sig, pk) in zip(tx.inputs, sigs):
        script = _push(sig.to_bytes() + bytes([SIGHASH_ALL])) + _push(
            ec.point_encode(ec.SECP256K1, pk)
        )
        new_inputs.append(replace(txin, script_sig=script))
    return replace(tx, inputs=tuple(new_inputs))


def extract_signatures(tx: Transaction) -> list[tuple[EcdsaSignature, tuple]]:
    out = []
    for i, txin in enumerate(tx.inputs):
        script = txin.script_sig
        if len(script) != 1 + 65 + 1 + 33 or script[0] != 65 or script[66] != 33:
            raise MalformedScriptSig(f"input {i} script_sig does not parse")
        if script[65] != SIGHASH_ALL:
            raise MalformedScriptSig(f"input {i} has unexpected sighash flag")
        sig = EcdsaSignature.from_bytes(script[1:65])
        try:
            pk = ec.point_decode(ec.SECP256K1, script[67:100])
        except ValueError as exc:
            raise MalformedScriptSig(f"input {i}: {exc}") from exc
        out.append((sig, pk))
    return out


def txid(tx: Transaction) -> bytes:
    return sha256d(serialize(tx))


def txid_hex(tx: Transaction) -> str:
    """Display form: byte-reversed hex, as block explorers render it."""
    return txid(tx)[::-1].hex()
