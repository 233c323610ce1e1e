"""Exception types. Every error carries a stable machine-readable ``code``."""


class FtmcfeError(Exception):
    code = "ftmcfe-error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class UnsupportedCurve(FtmcfeError):
    code = "unsupported-curve"


class EmptyInput(FtmcfeError):
    code = "empty-input"


class MalformedEncoding(FtmcfeError):
    code = "malformed-encoding"


class WrongSubgroup(MalformedEncoding):
    code = "wrong-subgroup"


class DegreeExceedsSrs(FtmcfeError):
    code = "degree-exceeds-srs"


class IndexOutOfRange(FtmcfeError):
    code = "index-out-of-range"


class NotAMember(FtmcfeError):
    code = "not-a-member"


class QuorumTooSmall(FtmcfeError):
    code = "quorum-too-small"


class ThresholdOutOfRange(FtmcfeError):
    code = "threshold-out-of-range"


class PlaintextOutOfRange(FtmcfeError):
    code = "plaintext-out-of-range"


class MismatchedLabel(FtmcfeError):
    code = "mismatched-label"


class MismatchedThreshold(FtmcfeError):
    code = "mismatched-threshold"


class InconsistentInputs(FtmcfeError):
    """Keys/ciphertexts do not line up with the participation set or function vector."""

    code = "inconsistent-inputs"


class ComponentMismatch(FtmcfeError):
    code = "component-mismatch"


class DlogNotFound(FtmcfeError):
    code = "dlog-not-found"


class DuplicateCiphertext(FtmcfeError):
    code = "duplicate-ciphertext"


class CodecOverflow(FtmcfeError):
    code = "codec-overflow"


class VersionMismatch(FtmcfeError):
    code = "version-mismatch"


class CorruptKey(FtmcfeError):
    code = "corrupt-key"


class StoreIOError(FtmcfeError):
    code = "io-error"


class ConfigParseError(FtmcfeError):
    code = "config-parse-error"


class UsageError(FtmcfeError):
    code = "usage-error"
