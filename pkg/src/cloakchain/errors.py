"""Exception hierarchy shared by all cloakchain modules.

Every error carries a stable ``code`` (its class name) so the CLI can map
failures to machine-parseable diagnostics.
"""


class CloakchainError(Exception):
    """Base class for all cloakchain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- elliptic curve / signatures ---

class NonceYieldsZero(CloakchainError):
    """The chosen nonce produced r = 0 or s = 0; pick another nonce."""


class DegenerateNonce(CloakchainError):
    """All leak-nonce retry counters exhausted (broken RNG or curve)."""


class ExtractionFailed(CloakchainError):
    """No candidate secret matched the expected public key."""


class InvalidSignature(CloakchainError):
    """Signature does not verify under the supplied key."""


class IdentityPoint(CloakchainError):
    """A point operation collapsed to the group identity."""


# --- HD wallet ---

class InvalidSeedScalar(CloakchainError):
    """Master-key derivation produced a zero or out-of-range scalar."""


class DerivationDegenerate(CloakchainError):
    """Child derivation produced an unusable scalar (negligible probability)."""


class ChecksumMismatch(CloakchainError):
    """Base58check payload failed its checksum."""


class BadPrefix(CloakchainError):
    """Encoded key or address carries an unexpected version byte."""


# --- transactions / chain ---

class FeeNonPositive(CloakchainError):
    """Transaction outputs meet or exceed its inputs."""


class IndexOutOfRange(CloakchainError):
    """Referenced input index does not exist."""


class ArityMismatch(CloakchainError):
    """Signature count does not match input count."""


class MalformedScriptSig(CloakchainError):
    """script_sig does not parse as push(sig || flag) push(pubkey)."""


class DoubleSpend(CloakchainError):
    """An input's outpoint is already spent."""


class BadSignature(CloakchainError):
    """An input's signature failed verification against its UTXO."""


class UnknownInput(CloakchainError):
    """An input references an outpoint not in the UTXO set."""


class CorruptFile(CloakchainError):
    """Persisted state failed to load or validate."""


# --- masquerading / evaluation ---

class EmptyAfterFilter(CloakchainError):
    """Ingestion filters removed every record."""


class SchemaError(CloakchainError):
    """A record violates the corpus schema or its invariants."""


class InsufficientData(CloakchainError):
    """Not enough records to fit the requested model."""


class ModelMismatch(CloakchainError):
    """A sampled feature tuple matched no trained bucket."""


class WeightSumError(CloakchainError):
    """Proportion weights do not sum to one."""


class DegenerateData(CloakchainError):
    """A feature column has zero variance."""


class LengthMismatch(CloakchainError):
    """Paired label vectors differ in length."""


# --- channel ---

class NegotiationNotFound(CloakchainError):
    """Fewer than two transactions found at the initiator's address."""


class SegmentUnencodable(CloakchainError):
    """A whitened segment fell outside the valid nonce range."""


class FrameCorrupt(CloakchainError):
    """Collected segments do not contain the full framed message."""
