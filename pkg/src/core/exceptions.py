# src/core/exceptions.py


class ApplicationError(Exception):
    """Base exception for all application errors."""

    def __init__(self, message: str, original_error: Exception | None = None):
        self.message = message
        self.original_error = original_error
        super().__init__(self.message)


class ContractError(ApplicationError):
    """A caller violated an operation's precondition."""

    BATCH_NOT_NORMALIZED = "Batch is not normalized against the graph: {edge}"
    EDGE_OUT_OF_RANGE = "Edge endpoint out of range: {edge} (n={n})"
    LEVEL_OUT_OF_RANGE = "Level {level} outside [0, {top})"
    NOT_VIOLATING = "Vertex {vertex} satisfies invariant 2, no desire level"
    ALREADY_MARKED = "Vertex {vertex} is already marked in batch {batch}"
    NOT_MARKED = "Vertex {vertex} is not marked"
    MARKED_REMAINING = "Cannot begin a batch: {count} descriptors still marked"
    WRONG_BATCH_KIND = "Expected a {expected} batch, got {actual}"
    GRAPH_MISMATCH = "Level state is bound to a different graph"


class GraphParseError(ApplicationError):
    """Edge-list input could not be parsed."""

    MALFORMED_LINE = "Malformed edge line {line_no}: {line!r}"
    EMPTY_INPUT = "Edge list contains no edges or vertex ids"


class ConfigError(ApplicationError):
    """Invalid configuration values."""

    NON_POSITIVE = "{field} must be positive, got {value}"
    TOO_FEW_VERTICES = "Vertex universe must have at least 2 vertices, got {n}"


class HistoryFormatError(ApplicationError):
    """Recorded history is malformed."""

    BAD_RECORD = "Malformed history record at line {line_no}: {reason}"
    BAD_INTERVAL = "Record has invoke_ts >= return_ts: {record}"
    UNKNOWN_BATCH = "Mover references unknown batch {batch_id}"
    TOO_LONG = "Exhaustive search supports at most {limit} operations, got {count}"


class WorkloadError(ApplicationError):
    """Invalid workload request."""

    EMPTY_STREAM = "Edge stream is empty"
    TOO_SMALL_CORE = "Adversarial climb needs n_core >= 3, got {n_core}"
    EMPTY_SAMPLES = "Cannot compute a percentile of an empty sample set"
    BAD_QUANTILE = "Quantile must lie in (0, 1), got {q}"
    NOT_POSITIVE = "{field} must be positive, got {value}"
    BAD_GNP = "G(n, p) needs n >= 2 and 0 < p <= 1, got n={n}, p={p}"
