"""Exception types shared across the package."""


class ChanselectError(Exception):
    """Base class for all errors raised by this package."""


# --- cost model / core ---

class EmptyCostList(ChanselectError):
    pass


class NonPositiveCost(ChanselectError):
    def __init__(self, index: int, value: float):
        super().__init__(f"raw cost at index {index} must be > 0, got {value!r}")
        self.index = index
        self.value = value


class DimensionMismatch(ChanselectError):
    pass


class ChannelCapExceeded(ChanselectError):
    pass


class PerformanceOutOfRange(ChanselectError):
    pass


class UnknownChannel(ChanselectError):
    def __init__(self, name: str):
        super().__init__(f"unknown channel name: {name!r}")
        self.name = name


# --- evaluators ---

class EvaluatorFailure(ChanselectError):
    pass


class ProtocolViolation(EvaluatorFailure):
    def __init__(self, line: str):
        super().__init__(f"unexpected line from external evaluator: {line!r}")
        self.line = line


class SubprocessExit(EvaluatorFailure):
    def __init__(self, code):
        super().__init__(f"external evaluator exited with code {code}")
        self.code = code


class EvaluatorTimeout(EvaluatorFailure):
    def __init__(self, seconds: float):
        super().__init__(f"external evaluator timed out after {seconds} s")
        self.seconds = seconds


class SingleClassDataset(ChanselectError):
    pass


class EmptySplit(ChanselectError):
    pass


# --- searches ---

class SearchSpaceTooLarge(ChanselectError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"exhaustive search over n={n} channels exceeds the cap of {cap}")
        self.n = n


class MalformedTrace(ChanselectError):
    pass


# --- ingest / windowing ---

class WindowLargerThanRecording(ChanselectError):
    pass


class NonPositiveStride(ChanselectError):
    pass


class MissingColumn(ChanselectError):
    def __init__(self, name: str):
        super().__init__(f"column {name!r} not found in file header")
        self.name = name


class NonNumericCell(ChanselectError):
    def __init__(self, row: int, col: str):
        super().__init__(f"non-numeric value at data row {row}, column {col!r}")
        self.row = row
        self.col = col


class EmptyFile(ChanselectError):
    pass


class EmptyWindowSet(ChanselectError):
    pass
