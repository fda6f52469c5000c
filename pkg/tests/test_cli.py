import json
import re

import pytest
from click.testing import CliRunner

from cloakchain.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, data_dir, *args, **kwargs):
    result = runner.invoke(main, ["--data-dir", str(data_dir), *args], **kwargs)
    assert result.exit_code == 0, result.output
    return result.output.strip()


def fields(line):
    return dict(pair.split("=", 1) for pair in line.split())


class TestWalletAndChain:
    def test_keygen_is_seed_deterministic(self, runner, tmp_path):
        out1 = invoke(runner, tmp_path / "a", "--seed", "7", "keygen")
        out2 = invoke(runner, tmp_path / "b", "--seed", "7", "keygen")
        addr1 = fields(out1)["address"]
        addr2 = fields(out2)["address"]
        assert addr1 == addr2
        assert addr1[0] in "mn"

    def test_faucet_and_mine(self, runner, tmp_path):
        d = tmp_path / "d"
        addr = fields(invoke(runner, d, "--seed", "1", "keygen"))["address"]
        out = fields(invoke(runner, d, "faucet", addr, "50000"))
        assert out["value"] == "50000"
        assert re.fullmatch(r"[0-9a-f]{64}:\d+", out["outpoint"])
        mined = fields(invoke(runner, d, "mine"))
        assert mined == {"height": "0", "txs": "1"}

    def test_json_output_mode(self, runner, tmp_path):
        out = invoke(runner, tmp_path / "d", "--seed", "1", "--json", "keygen")
        doc = json.loads(out)
        assert set(doc) == {"address", "wallet"}

    def test_error_goes_to_stderr_with_code(self, runner, tmp_path):
        result = runner.invoke(
            main, ["--data-dir", str(tmp_path / "d"), "faucet", "notanaddress", "5"]
        )
        assert result.exit_code == 1
        assert "error=" in result.output


class TestModelPipeline:
    def test_fit_synth_eval(self, runner, tmp_path):
        d = tmp_path / "d"
        corpus_csv = str(tmp_path / "corpus.csv")
        fake_csv = str(tmp_path / "fake.csv")
        out = fields(invoke(runner, d, "--seed", "7", "make-corpus", "3000", corpus_csv))
        assert out["rows"] == "3000"
        out = fields(invoke(runner, d, "fit", corpus_csv))
        assert out["records"] == "3000"
        out = fields(invoke(runner, d, "synth", "800", "5", "--out", fake_csv))
        assert out["rows"] == "800"
        out = fields(invoke(runner, d, "eval-blackbox", corpus_csv, fake_csv))
        assert abs(float(out["ari"])) <= 0.05
        assert abs(float(out["nmi"])) <= 0.02
        assert out["n_covert"] == "800"

    def test_capacity_reference_table(self, runner, tmp_path):
        table = tmp_path / "table.csv"
        table.write_text(
            "input_number,proportion,avg_fee\n"
            "1,0.777,3144.32\n2,0.140,4373.07\n3,0.047,5785.43\n"
            "4,0.022,7241.43\n5,0.014,7393.79\n"
        )
        out = fields(invoke(runner, tmp_path / "d", "capacity", str(table)))
        assert out["bits"] == "347"
        assert abs(int(out["fee"]) - 3589) <= 1
        assert out["mean_inputs"] == "1.356"


class TestEndToEndWorkflow:
    def test_two_party_exchange(self, runner, tmp_path):
        chain_path = str(tmp_path / "chain.json")
        alice = tmp_path / "alice"
        bob = tmp_path / "bob"
        extra = tmp_path / "extra"

        def run(home, *args, seed=None):
            argv = ["--data-dir", str(home), "--chain", chain_path]
            if seed is not None:
                argv += ["--seed", str(seed)]
            result = runner.invoke(main, argv + list(args))
            assert result.exit_code == 0, result.output
            return fields(result.output.strip())

        a_addr = run(alice, "keygen", seed=11)["address"]
        run(bob, "keygen", seed=22)
        c_addr = run(extra, "keygen", seed=33)["address"]
        d_addr = run(extra, "keygen", seed=44)["address"]

        # bob's public key, needed by alice (and vice versa)
        from cloakchain import ec
        from cloakchain.hdwallet import wif_decode

        def pk_hex(home):
            wif = json.load(open(home / "wallet.json"))["wif"]
            sk, _ = wif_decode(wif)
            return ec.point_encode(ec.SECP256K1, ec.mul_g(ec.SECP256K1, sk)).hex()

        a_pk, b_pk = pk_hex(alice), pk_hex(bob)

        run(alice, "faucet", a_addr, "50000")
        run(alice, "faucet", a_addr, "60000")
        sent = run(alice, "negotiate-send", b_pk, c_addr, d_addr, seed=11)
        got = run(bob, "negotiate-recv", a_pk)
        assert (sent["txid1"], sent["txid2"]) == (got["txid1"], got["txid2"])

        # fit a model for the sender
        corpus_csv = str(tmp_path / "corpus.csv")
        run(alice, "make-corpus", "2000", corpus_csv, seed=9)
        run(alice, "fit", corpus_csv)

        secret = tmp_path / "secret.bin"
        secret.write_bytes(b"meet at dawn\x00\xff" * 10)
        out = run(alice, "send", str(secret), seed=11)
        assert int(out["bytes"]) == 140

        received = tmp_path / "received.bin"
        out = run(bob, "recv", "--out", str(received))
        assert int(out["received"]) == 140
        assert received.read_bytes() == secret.read_bytes()

        # nothing further pending
        out = run(bob, "recv")
        assert out["received"] == "0"

        # exported corpus covers negotiation + covert traffic, no faucet rows
        export_csv = str(tmp_path / "export.csv")
        out = run(alice, "corpus-export", export_csv)
        assert int(out["rows"]) >= 3
        header = open(export_csv).readline().strip().split(",")
        assert header[0] == "txid" and "fee" in header
