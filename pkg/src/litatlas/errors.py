"""Exception types shared across the package."""


class LitatlasError(Exception):
    """Base class for all litatlas errors."""


class InvalidDocument(LitatlasError):
    def __init__(self, doc_id: str, reason: str):
        self.doc_id = doc_id
        self.reason = reason
        super().__init__(f"invalid document {doc_id!r}: {reason}")


class EmptyCorpus(LitatlasError):
    pass


class UnknownTerm(LitatlasError):
    def __init__(self, term: str):
        self.term = term
        super().__init__(f"term not in vocabulary: {term!r}")


class UnknownDocument(LitatlasError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"unknown document: {doc_id!r}")


class DimensionMismatch(LitatlasError):
    pass


class NumericalDivergence(LitatlasError):
    """Optimization produced non-finite coordinates; carries the trace so far."""

    def __init__(self, message: str, kl_trace=None):
        self.kl_trace = kl_trace
        super().__init__(message)


class RankDeficientWarning(UserWarning):
    """Requested more components than the matrix's numerical rank."""


class IoFailure(LitatlasError):
    def __init__(self, path, detail: str = ""):
        self.path = path
        super().__init__(f"I/O failure at {path}: {detail}")


class MissingSnapshot(LitatlasError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"no snapshot at {path}")


class CorruptSnapshot(LitatlasError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"corrupt snapshot: {detail}")


class TransportError(LitatlasError):
    def __init__(self, status, detail: str = ""):
        self.status = status
        super().__init__(f"transport failed (status={status}) {detail}".rstrip())


class MalformedResponse(LitatlasError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"malformed response: {detail}")
