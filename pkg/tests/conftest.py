import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cloakchain import chain as chm
from cloakchain import hdwallet, sigs
from cloakchain.corpusgen import make_corpus
from cloakchain.masquerade import FeatureSynthesizer


@pytest.fixture
def fresh_chain():
    return chm.ChainState()


@pytest.fixture(scope="session")
def small_corpus():
    return make_corpus(5000, seed=7)


@pytest.fixture(scope="session")
def fitted_synth(small_corpus):
    return FeatureSynthesizer(random_state=0).fit(small_corpus)


@pytest.fixture(scope="session")
def keyring():
    """Deterministic keypairs for the recurring cast."""
    return {
        name: sigs.keypair_generate(rng_seed=bytes([i + 1]) * 32)
        for i, name in enumerate(["alice", "bob", "charlie", "dave"])
    }


@pytest.fixture
def funded_alice(fresh_chain, keyring):
    addr = hdwallet.addr_from_sk(keyring["alice"].sk)
    op1 = fresh_chain.faucet_fund(addr, 50_000)
    op2 = fresh_chain.faucet_fund(addr, 60_000)
    return fresh_chain, addr, (op1, op2)
