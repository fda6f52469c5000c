"""cloakchain: covert-channel toolkit over a simulated UTXO blockchain.

Subsystems:

* :mod:`cloakchain.ec`, :mod:`cloakchain.sigs` -- curve arithmetic, ECDSA
  with controlled nonces, key-leak pair signing, nonce recovery, ECDH.
* :mod:`cloakchain.hdwallet` -- hierarchical deterministic keys and
  addresses.
* :mod:`cloakchain.tx`, :mod:`cloakchain.chain` -- legacy P2PKH
  transactions and the in-process UTXO ledger.
* :mod:`cloakchain.masquerade`, :mod:`cloakchain.corpusgen` -- the
  transaction-feature synthesis pipeline and the synthetic corpus.
* :mod:`cloakchain.evalcore` -- black-box clustering evaluation.
* :mod:`cloakchain.channel` -- negotiation and message transport.
* :mod:`cloakchain.cli` -- operator command line.
"""

__version__ = "0.1.0"
