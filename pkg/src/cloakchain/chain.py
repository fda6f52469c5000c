"""In-process UTXO ledger: mempool, block production, address index, faucet.

No proof-of-work, no reorgs, a single chain.  The faucet is the only value
source; faucet transactions are exempt from input validation, flagged, and
excluded from corpus export.  Mutations are serialized behind a lock so the
state can be shared between threads (single writer, many readers).
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass

from . import ec, tx as txm
from .encoding import hash160
from .errors import (
    BadSignature,
    CorruptFile,
    DoubleSpend,
    FeeNonPositive,
    UnknownInput,
)
from .hdwallet import Address
from .sigs import ecdsa_verify
from .tx import OutPoint, Transaction

FAUCET_TXID = b"\x00" * 32
FAUCET_VOUT = 0xFFFFFFFF

STATE_VERSION = 1


@dataclass(frozen=True)
class Block:
    height: int
    timestamp: int
    txids: tuple


class ChainState:
    def __init__(self):
        self.blocks: list[Block] = []
        self.mempool: list[bytes] = []
        self.txs: dict[bytes, Transaction] = {}
        self.tx_order: list[bytes] = []
        self.utxo_set: dict[OutPoint, tuple[int, bytes]] = {}
        self.addr_index: dict[bytes, list[bytes]] = {}
        self.faucet_txids: set[bytes] = set()
        self._faucet_counter = 0
        self._lock = threading.RLock()

    @property
    def height(self) -> int:
        return len(self.blocks)

    # --- mutation ---

    def submit_tx(self, tx: Transaction) -> bytes:
        """Validate and accept a fully signed transaction into the mempool."""
        with self._lock:
            tid = txm.txid(tx)
            if tid in self.txs:
                raise DoubleSpend("transaction already known")
            seen = set()
            total_in = 0
            sigs = txm.extract_signatures(tx)
            for i, txin in enumerate(tx.inputs):
                op = txin.outpoint
                if op in seen:
                    raise DoubleSpend(f"outpoint repeated within transaction: {op}")
                seen.add(op)
                if op not in self.utxo_set:
                    known = self.txs.get(op.txid)
                    if known is not None and op.vout < len(known.outputs):
                        raise DoubleSpend(f"output {op.txid.hex()}:{op.vout} already spent")
                    raise UnknownInput(f"no unspent output {op.txid.hex()}:{op.vout}")
                value, spk = self.utxo_set[op]
                sig, pk = sigs[i]
                expected_h160 = txm.script_to_hash160(spk)
                if expected_h160 is None or hash160(ec.point_encode(ec.SECP256K1, pk)) != expected_h160:
                    raise BadSignature(f"input {i}: key does not own the spent output")
                digest = txm.sighash_all(tx, i, spk)
                if not ecdsa_verify(ec.SECP256K1, pk, digest, sig):
                    raise BadSignature(f"input {i}: signature invalid")
                total_in += value
            total_out = sum(o.value for o in tx.outputs)
            if total_in <= total_out:
                raise FeeNonPositive(f"inputs {total_in} <= outputs {total_out}")
            self._accept(tid, tx)
            return tid

    def faucet_fund(self, addr: Address, value: int) -> OutPoint:
        """Mint a spendable output; stands in for external coin acquisition."""
        if value <= 0:
            raise ValueError("faucet value must be positive")
        with self._lock:
            # distinct sequence per mint keeps faucet txids unique
            marker = txm.TxInput(
                OutPoint(FAUCET_TXID, FAUCET_VOUT), sequence=self._faucet_counter
            )
            self._faucet_counter += 1
            tx = Transaction(
                inputs=(marker,),
                outputs=(txm.TxOutput(value, txm.p2pkh_script(addr.hash160)),),
            )
            tid = txm.txid(tx)
            self.faucet_txids.add(tid)
            self._accept(tid, tx)
            return OutPoint(tid, 0)

    def _accept(self, tid: bytes, tx: Transaction) -> None:
        faucet = tid in self.faucet_txids
        addresses = set()
        if not faucet:
            for txin in tx.inputs:
                _, spk = self.utxo_set.pop(txin.outpoint)
                addresses.add(txm.script_to_hash160(spk))
        for vout, out in enumerate(tx.outputs):
            self.utxo_set[OutPoint(tid, vout)] = (out.value, out.script_pubkey)
            h = txm.script_to_hash160(out.script_pubkey)
            if h is not None:
                addresses.add(h)
        self.txs[tid] = tx
        self.tx_order.append(tid)
        self.mempool.append(tid)
        for h in addresses:
            self.addr_index.setdefault(h, []).append(tid)

    def mine_block(self, timestamp: int | None = None) -> Block:
        with self._lock:
            block = Block(
                height=self.height,
                timestamp=int(time.time()) if timestamp is None else timestamp,
                txids=tuple(self.mempool),
            )
            self.blocks.append(block)
            self.mempool = []
            return block

    # --- queries ---

    def get_tx_from_addr(self, addr: Address, confirmed_only: bool = False) -> list[Transaction]:
        """All transactions touching the address, in submission order.

        With confirmed_only the mempool is invisible, modeling a receiver
        that waits for mining.
        """
        with self._lock:
            tids = self.addr_index.get(addr.hash160, [])
            if confirmed_only:
                pending = set(self.mempool)
                tids = [t for t in tids if t not in pending]
            return [self.txs[t] for t in tids]

    def utxos(self, addr: Address) -> list[tuple[OutPoint, int]]:
        with self._lock:
            spk = txm.p2pkh_script(addr.hash160)
            order = {tid: i for i, tid in enumerate(self.tx_order)}
            return sorted(
                (
                    (op, value)
                    for op, (value, s) in self.utxo_set.items()
                    if s == spk
                ),
                key=lambda item: (order[item[0].txid], item[0].vout),
            )

    def export_corpus_rows(self) -> list[dict]:
        """Feature rows for every non-faucet transaction, for corpus CSV."""
        with self._lock:
            height_of = {}
            ts_of = {}
            for block in self.blocks:
                for t in block.txids:
                    height_of[t] = block.height
                    ts_of[t] = block.timestamp
            spent_value = self._spent_values()
            rows = []
            for tid in self.tx_order:
                if tid in self.faucet_txids:
                    continue
                tx = self.txs[tid]
                inputs_amount = sum(spent_value[txin.outpoint] for txin in tx.inputs)
                outputs_amount = sum(o.value for o in tx.outputs)
                rows.append(
                    {
                        "txid": txm.txid_hex(tx),
                        "block_height": height_of.get(tid, -1),
                        "timestamp": ts_of.get(tid, 0),
                        "is_coinbase": 0,
                        "input_cnt": len(tx.inputs),
                        "output_cnt": len(tx.outputs),
                        "inputs_amount": inputs_amount,
                        "outputs_amount": outputs_amount,
                        "fee": inputs_amount - outputs_amount,
                    }
                )
            return rows

    def _spent_values(self) -> dict[OutPoint, int]:
        values = {}
        for tid, tx in self.txs.items():
            for vout, out in enumerate(tx.outputs):
                values[OutPoint(tid, vout)] = out.value
        return values

    # --- persistence ---

    def save(self, path: str) -> None:
        doc = {
            "version": STATE_VERSION,
            "faucet_counter": self._faucet_counter,
            "txs": [txm.serialize(self.txs[t]).hex() for t in self.tx_order],
            "faucet": sorted(t.hex() for t in self.faucet_txids),
            "mempool": [t.hex() for t in self.mempool],
            "blocks": [
                {"height": b.height, "timestamp": b.timestamp, "txids": [t.hex() for t in b.txids]}
                for b in self.blocks
            ],
        }
        data = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode() + b"\n"
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "ChainState":
        try:
            with open(path, "rb") as fh:
                doc = json.loads(fh.read())
            if doc.get("version") != STATE_VERSION:
                raise CorruptFile(f"unsupported state version {doc.get('version')}")
            state = cls()
            state._faucet_counter = doc["faucet_counter"]
            state.faucet_txids = {bytes.fromhex(t) for t in doc["faucet"]}
            for hexdata in doc["txs"]:
                tx = txm.deserialize(bytes.fromhex(hexdata))
                tid = txm.txid(tx)
                state._replay(tid, tx)
            state.mempool = [bytes.fromhex(t) for t in doc["mempool"]]
            state.blocks = [
                Block(b["height"], b["timestamp"], tuple(bytes.fromhex(t) for t in b["txids"]))
                for b in doc["blocks"]
            ]
            known = set(state.txs)
            for b in state.blocks:
                if not set(b.txids) <= known:
                    raise CorruptFile("block references unknown transaction")
            if not set(state.mempool) <= known:
                raise CorruptFile("mempool references unknown transaction")
            return state
        except CorruptFile:
            raise
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CorruptFile(f"cannot load chain state: {exc}") from exc

    def _replay(self, tid: bytes, tx: Transaction) -> None:
        """Rebuild indexes from stored transactions without re-verifying."""
        addresses = set()
        if tid not in self.faucet_txids:
            for txin in tx.inputs:
                if txin.outpoint not in self.utxo_set:
                    raise CorruptFile("stored transaction spends unknown output")
                _, spk = self.utxo_set.pop(txin.outpoint)
                addresses.add(txm.script_to_hash160(spk))
        for vout, out in enumerate(tx.outputs):
            self.utxo_set[OutPoint(tid, vout)] = (out.value, out.script_pubkey)
            h = txm.script_to_hash160(out.script_pubkey)
            if h is not None:
                addresses.add(h)
        self.txs[tid] = tx
        self.tx_order.append(tid)
        for h in addresses:
            self.addr_index.setdefault(h, []).append(tid)
