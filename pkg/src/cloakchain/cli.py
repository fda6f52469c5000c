"""Command-line surface for desk-scale experiments.

Single binary, subcommand style.  Every command prints one
machine-parseable result line (key=value pairs, or JSON with --json) and
exits nonzero with the error class name on failure.  State-mutating
commands take a lock file and write the chain atomically.
"""

from __future__ import annotations

import json
import os
import sys
from contextlib import contextmanager

import click

from . import ec
from .chain import ChainState
from .channel import (
    SessionState,
    negotiate_recv,
    negotiate_send,
    receive_message,
    send_message,
)
from .corpusgen import corpus_rows, make_corpus
from .errors import CloakchainError
from .evalcore import ari, kmeans2, mix_datasets, nmi
from .hdwallet import ExtendedPrivateKey, addr_from_sk, addr_parse, wif_decode, wif_encode
from .masquerade import (
    Corpus,
    FeatureSynthesizer,
    expected_capacity,
    read_corpus_csv,
    read_fake_csv,
    write_corpus_csv,
    write_fake_csv,
)
from .sigs import keypair_generate

DATA_DIR_ENV = "CLOAKCHAIN_DATA_DIR"


class Ctx:
    def __init__(self, data_dir, chain_path, wallet_path, seed, as_json):
        self.data_dir = data_dir
        self.chain_path = chain_path or os.path.join(data_dir, "chain.json")
        self.wallet_path = wallet_path or os.path.join(data_dir, "wallet.json")
        self.session_path = os.path.join(data_dir, "session.json")
        self.model_path = os.path.join(data_dir, "model.json")
        self.seed = seed
        self.as_json = as_json

    def seed_bytes(self) -> bytes | None:
        if self.seed is None:
            return None
        return int(self.seed).to_bytes(32, "big")

    def load_chain(self) -> ChainState:
        if os.path.exists(self.chain_path):
            return ChainState.load(self.chain_path)
        return ChainState()

    def save_chain(self, chain: ChainState) -> None:
        os.makedirs(os.path.dirname(self.chain_path) or ".", exist_ok=True)
        chain.save(self.chain_path)

    def load_wallet(self) -> dict:
        with open(self.wallet_path) as fh:
            return json.load(fh)

    def write_doc(self, path: str, doc: dict) -> None:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)

    def emit(self, **fields) -> None:
        if self.as_json:
            click.echo(json.dumps(fields, sort_keys=True))
        else:
            click.echo(" ".join(f"{k}={v}" for k, v in fields.items()))

    @contextmanager
    def chain_lock(self):
        os.makedirs(self.data_dir, exist_ok=True)
        lock_path = self.chain_path + ".lock"
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise CloakchainError(f"chain is locked by another process: {lock_path}")
        try:
            yield
        finally:
            os.close(fd)
            os.unlink(lock_path)


@click.group()
@click.option("--data-dir", default=None, help=f"Defaults to ${DATA_DIR_ENV} or ./cloakchain-data")
@click.option("--chain", "chain_path", default=None, type=click.Path())
@click.option("--wallet", "wallet_path", default=None, type=click.Path())
@click.option("--seed", default=None, type=int, help="Deterministic randomness for CI")
@click.option("--json", "as_json", is_flag=True, help="Machine output as JSON")
@click.pass_context
def main(ctx, data_dir, chain_path, wallet_path, seed, as_json):
    data_dir = data_dir or os.environ.get(DATA_DIR_ENV) or "./cloakchain-data"
    ctx.obj = Ctx(data_dir, chain_path, wallet_path, seed, as_json)


def _run(ctx_obj, fn):
    try:
        fn()
    except CloakchainError as exc:
        click.echo(f"error={exc.code} detail={exc}", err=True)
        sys.exit(1)


@main.command()
@click.pass_obj
def keygen(obj):
    """Create a wallet file with a fresh key and print its address."""
    def go():
        kp = keypair_generate(rng_seed=obj.seed_bytes())
        chaincode = os.urandom(32) if obj.seed is None else bytes(32)
        doc = {
            "network": "testnet",
            "wif": wif_encode(kp.sk, "testnet"),
            "chaincode": chaincode.hex(),
            "next_index": 0,
        }
        obj.write_doc(obj.wallet_path, doc)
        addr = addr_from_sk(kp.sk, "testnet")
        obj.emit(address=addr.rendered, wallet=obj.wallet_path)
    _run(obj, go)


@main.command()
@click.argument("address")
@click.argument("sats", type=int)
@click.pass_obj
def faucet(obj, address, sats):
    """Mint SATS to ADDRESS."""
    def go():
        with obj.chain_lock():
            chain = obj.load_chain()
            op = chain.faucet_fund(addr_parse(address), sats)
            obj.save_chain(chain)
        obj.emit(outpoint=f"{op.txid.hex()}:{op.vout}", value=sats)
    _run(obj, go)


@main.command()
@click.pass_obj
def mine(obj):
    """Drain the mempool into a new block."""
    def go():
        with obj.chain_lock():
            chain = obj.load_chain()
            block = chain.mine_block()
            obj.save_chain(chain)
        obj.emit(height=block.height, txs=len(block.txids))
    _run(obj, go)


def _wallet_key(obj) -> int:
    sk, _network = wif_decode(obj.load_wallet()["wif"])
    return sk


@main.command("negotiate-send")
@click.argument("peer_pk_hex")
@click.argument("bystander1")
@click.argument("bystander2")
@click.pass_obj
def negotiate_send_cmd(obj, peer_pk_hex, bystander1, bystander2):
    """Plant the key-leak pair toward two bystander addresses."""
    def go():
        sk_a = _wallet_key(obj)
        pk_b = ec.point_decode(ec.SECP256K1, bytes.fromhex(peer_pk_hex))
        with obj.chain_lock():
            chain = obj.load_chain()
            addr_a = addr_from_sk(sk_a, "testnet")
            utxos = chain.utxos(addr_a)
            if len(utxos) < 2:
                raise CloakchainError("need two funded outpoints at the wallet address")
            result = negotiate_send(
                sk_a,
                pk_b,
                addr_parse(bystander1),
                addr_parse(bystander2),
                chain,
                (utxos[0][0], utxos[1][0]),
                rng_seed=obj.seed_bytes(),
            )
            obj.save_chain(chain)
        obj.write_doc(
            obj.session_path,
            {
                "role": "sender",
                "wallet": obj.wallet_path,
                "index_last": 0,
                "peer_pk": peer_pk_hex,
            },
        )
        obj.emit(
            txid1=result.txid1[::-1].hex(),
            txid2=result.txid2[::-1].hex(),
            session=obj.session_path,
        )
    _run(obj, go)


@main.command("negotiate-recv")
@click.argument("peer_pk_hex")
@click.pass_obj
def negotiate_recv_cmd(obj, peer_pk_hex):
    """Recover the negotiated key material from chain."""
    def go():
        sk_b = _wallet_key(obj)
        pk_a = ec.point_decode(ec.SECP256K1, bytes.fromhex(peer_pk_hex))
        chain = obj.load_chain()
        result = negotiate_recv(sk_b, pk_a, chain)
        obj.write_doc(
            obj.session_path,
            {
                "role": "receiver",
                "wallet": obj.wallet_path,
                "index_last": 0,
                "peer_pk": peer_pk_hex,
            },
        )
        obj.emit(
            txid1=result.txid1[::-1].hex(),
            txid2=result.txid2[::-1].hex(),
            session=obj.session_path,
        )
    _run(obj, go)


def _session_esk(obj, session: dict, chain: ChainState) -> ExtendedPrivateKey:
    from .sigs import ecdh_chaincode

    sk_own = _wallet_key(obj)
    pk_peer = ec.point_decode(ec.SECP256K1, bytes.fromhex(session["peer_pk"]))
    if session["role"] == "sender":
        return ExtendedPrivateKey(sk=sk_own, chaincode=ecdh_chaincode(ec.SECP256K1, sk_own, pk_peer))
    return negotiate_recv(sk_own, pk_peer, chain).esk_ab


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.pass_obj
def send(obj, file):
    """Transmit FILE over covert transactions."""
    def go():
        with open(obj.session_path) as fh:
            session_doc = json.load(fh)
        with open(file, "rb") as fh:
            message = fh.read()
        synth = FeatureSynthesizer.load(obj.model_path)
        with obj.chain_lock():
            chain = obj.load_chain()
            esk = _session_esk(obj, session_doc, chain)
            session = SessionState(
                esk_ab=esk, role="sender", index_last=session_doc["index_last"]
            )
            txids, new_index = send_message(
                session,
                message,
                chain,
                synth,
                sample_seed=obj.seed or 0,
                rng_seed=obj.seed_bytes(),
            )
            obj.save_chain(chain)
        session_doc["index_last"] = new_index
        obj.write_doc(obj.session_path, session_doc)
        obj.emit(txs=len(txids), bytes=len(message), next_index=new_index)
    _run(obj, go)


@main.command()
@click.option("--out", type=click.Path(), default=None, help="Write the message here")
@click.pass_obj
def recv(obj, out):
    """Scan derived addresses and extract any pending message."""
    def go():
        with open(obj.session_path) as fh:
            session_doc = json.load(fh)
        chain = obj.load_chain()
        esk = _session_esk(obj, session_doc, chain)
        session = SessionState(
            esk_ab=esk, role="receiver", index_last=session_doc["index_last"]
        )
        message, new_index = receive_message(session, chain)
        if message is None:
            obj.emit(received=0, next_index=new_index)
            return
        session_doc["index_last"] = new_index
        obj.write_doc(obj.session_path, session_doc)
        if out:
            with open(out, "wb") as fh:
                fh.write(message)
            obj.emit(received=len(message), next_index=new_index, out=out)
        else:
            obj.emit(received=len(message), next_index=new_index, hex=message.hex())
    _run(obj, go)


@main.command("corpus-export")
@click.argument("out", type=click.Path())
@click.pass_obj
def corpus_export(obj, out):
    """Export all non-faucet chain transactions as a corpus CSV."""
    def go():
        chain = obj.load_chain()
        rows = chain.export_corpus_rows()
        write_corpus_csv(out, rows)
        obj.emit(rows=len(rows), out=out)
    _run(obj, go)


@main.command("make-corpus")
@click.argument("count", type=int)
@click.argument("out", type=click.Path())
@click.pass_obj
def make_corpus_cmd(obj, count, out):
    """Generate a synthetic real-transaction corpus CSV."""
    def go():
        corpus = make_corpus(count, seed=obj.seed or 0)
        write_corpus_csv(out, corpus_rows(corpus))
        obj.emit(rows=len(corpus.records), out=out)
    _run(obj, go)


@main.command()
@click.argument("corpus_csv", type=click.Path(exists=True))
@click.pass_obj
def fit(obj, corpus_csv):
    """Fit the feature synthesizer on a corpus CSV."""
    def go():
        corpus = read_corpus_csv(corpus_csv)
        synth = FeatureSynthesizer(random_state=obj.seed or 0).fit(corpus)
        os.makedirs(obj.data_dir, exist_ok=True)
        synth.save(obj.model_path)
        obj.emit(records=len(corpus.records), model=obj.model_path)
    _run(obj, go)


@main.command()
@click.argument("count", type=int)
@click.argument("sample_seed", type=int)
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def synth(obj, count, sample_seed, out):
    """Sample COUNT fake feature records from the fitted model."""
    def go():
        model = FeatureSynthesizer.load(obj.model_path)
        records = model.sample(count, seed=sample_seed)
        path = out or os.path.join(obj.data_dir, "fake.csv")
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        write_fake_csv(path, records, label="covert")
        obj.emit(rows=len(records), out=path)
    _run(obj, go)


@main.command("eval-blackbox")
@click.argument("real_csv", type=click.Path(exists=True))
@click.argument("fake_csv", type=click.Path(exists=True))
@click.pass_obj
def eval_blackbox(obj, real_csv, fake_csv):
    """Cluster a 50/50 real/fake mix and report agreement with the labels."""
    def go():
        corpus = read_corpus_csv(real_csv)
        fake = [rec for rec, _label in read_fake_csv(fake_csv)]
        seed = obj.seed or 0
        mixed = mix_datasets(corpus, fake, ratio=0.5, seed=seed)
        pred = kmeans2(mixed.features, seed=seed)
        score_ari = ari(list(pred), mixed.labels)
        score_nmi = nmi(list(pred), mixed.labels)
        n_covert = sum(1 for lab in mixed.labels if lab == "covert")
        obj.emit(
            ari=round(score_ari, 6),
            nmi=round(score_nmi, 6),
            n_real=len(mixed.labels) - n_covert,
            n_covert=n_covert,
            seed=seed,
        )
    _run(obj, go)


@main.command()
@click.argument("table_csv", type=click.Path(exists=True))
@click.pass_obj
def capacity(obj, table_csv):
    """Expected bits and fee per covert transaction from a proportion table.

    CSV columns: input_number, proportion, avg_fee (rows for counts 1..5).
    """
    def go():
        import csv as _csv

        with open(table_csv, newline="") as fh:
            rows = sorted(_csv.DictReader(fh), key=lambda r: int(r["input_number"]))
        props = [float(r["proportion"]) for r in rows]
        fees = [float(r["avg_fee"]) for r in rows]
        bits, fee = expected_capacity(props, fees)
        obj.emit(
            bits=round(bits),
            fee=round(fee),
            mean_inputs=round(bits / 256.0, 3),
        )
    _run(obj, go)


if __name__ == "__main__":
    main()
