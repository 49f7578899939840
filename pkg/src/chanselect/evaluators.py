"""Performance functions: the pluggable evaluation contract plus four
implementations (synthetic monotone, lookup table, nearest-centroid
classifier, external subprocess) and a memoization wrapper.

Every evaluator maps a ChannelSet to a scalar and must be deterministic:
repeated evaluation of the same subset returns the identical value.
"""
from __future__ import annotations

import abc
import json
import os
import random
import select
import subprocess
import threading
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EvaluatorFailure,
    EvaluatorTimeout,
    ProtocolViolation,
    SingleClassDataset,
    SubprocessExit,
)
from .model import ChannelSet, Direction


class PerformanceFunction(abc.ABC):
    """Contract for subset evaluation.

    direction tells searches whether larger values are better; claims_monotone
    asserts that no subset outperforms a superset containing it, which is what
    licenses branch-and-bound pruning to be globally optimal.
    """

    direction: Direction = Direction.MAXIMIZE
    claims_monotone: bool = False

    @abc.abstractmethod
    def evaluate(self, s: ChannelSet) -> float:
        raise NotImplementedError


class SyntheticMonotoneFunction(PerformanceFunction):
    """f(S) = 1 - prod_{i in S} (1 - u_i) with utilities u_i in (0,1).

    Monotone by construction (each extra channel multiplies the remaining
    'miss' probability by a factor < 1), f(empty) = 0, and f(S) < 1, so the
    global optimum is brute-force checkable. Used as ground truth in tests.
    """

    claims_monotone = True

    def __init__(self, utilities: Sequence[float]):
        for i, u in enumerate(utilities):
            if not 0.0 < u < 1.0:
                raise ValueError(f"utility at index {i} must be in (0,1), got {u}")
        self.utilities = tuple(float(u) for u in utilities)
        self.n = len(self.utilities)

    @classmethod
    def random(cls, n: int, seed: int, low: float = 0.2, high: float = 0.9):
        rng = random.Random(seed)
        return cls([rng.uniform(low, high) for _ in range(n)])

    def evaluate(self, s: ChannelSet) -> float:
        if s.n != self.n:
            raise DimensionMismatch(f"subset over {s.n} channels, evaluator has {self.n}")
        miss = 1.0
        bits = s.bits
        i = 0
        while bits:
            if bits & 1:
                miss *= 1.0 - self.utilities[i]
            bits >>= 1
            i += 1
        return 1.0 - miss


class TableOracle(PerformanceFunction):
    """Replays precomputed subset evaluations from a lookup table."""

    def __init__(
        self,
        n: int,
        entries: Mapping[ChannelSet | int, float],
        default: float | None = None,
        direction: Direction = Direction.MAXIMIZE,
        claims_monotone: bool = False,
    ):
        self.n = n
        self.direction = direction
        self.claims_monotone = claims_monotone
        self.default = default
        table: dict[int, float] = {}
        for key, value in entries.items():
            bits = key.bits if isinstance(key, ChannelSet) else int(key)
            if bits < 0 or bits >> n:
                raise ValueError(f"table key {bits:#x} outside the {n}-channel universe")
            table[bits] = float(value)
        self._table = table

    def evaluate(self, s: ChannelSet) -> float:
        if s.n != self.n:
            raise DimensionMismatch(f"subset over {s.n} channels, table has {self.n}")
        value = self._table.get(s.bits, self.default)
        if value is None:
            raise EvaluatorFailure(f"no table entry for subset {sorted(s.indices())} and no default")
        return value


class MemoizedEvaluator(PerformanceFunction):
    """Caches evaluations so the inner evaluator runs at most once per subset.

    Safe for concurrent use: duplicate in-flight evaluations of the same
    subset may both call the inner evaluator, but determinism makes the
    last write benign. Errors are never cached.
    """

    def __init__(self, inner: PerformanceFunction):
        self.inner = inner
        self.direction = inner.direction
        self.claims_monotone = inner.claims_monotone
        self.hits = 0
        self.misses = 0
        self._cache: dict[int, float] = {}
        self._lock = threading.Lock()

    def evaluate(self, s: ChannelSet) -> float:
        key = s.bits
        with self._lock:
            if key in self._cache:
                self.hits += 1
                return self._cache[key]
        value = self.inner.evaluate(s)
        with self._lock:
            self._cache[key] = value
            self.misses += 1
        return value


def memoize(f: PerformanceFunction) -> MemoizedEvaluator:
    return MemoizedEvaluator(f)


def verify_monotone(f: PerformanceFunction, n: int, tol: float = 1e-12) -> bool:
    """Exhaustively certify monotonicity of f over all nonempty subsets.

    Checks every remove-one edge of the subset lattice; chains of such edges
    cover every subset/superset pair, so this is a complete certificate.
    Intended for small n (2^n evaluations).
    """
    if n > 20:
        raise ValueError("monotonicity certificate is exhaustive; keep n <= 20")
    sign = 1.0 if f.direction is Direction.MAXIMIZE else -1.0
    values = [0.0] * (1 << n)
    for bits in range(1, 1 << n):
        values[bits] = f.evaluate(ChannelSet(bits, n))
        parent = sign * values[bits]
        for i in range(n):
            if bits >> i & 1:
                child = bits & ~(1 << i)
                if child and sign * values[child] > parent + tol:
                    return False
    return True


def verify_table_monotone(oracle: TableOracle, tol: float = 1e-12) -> bool:
    """Certify monotonicity of a TableOracle as a total function.

    Checks every lattice edge incident to a stored entry; edges between two
    default-valued subsets are constant and trivially monotone, so this
    covers all edges without enumerating the full lattice.
    """
    sign = 1.0 if oracle.direction is Direction.MAXIMIZE else -1.0
    table = oracle._table
    default = oracle.default
    n = oracle.n

    def lookup(bits: int) -> float | None:
        return table.get(bits, default)

    for bits, value in table.items():
        v = sign * value
        for i in range(n):
            mask = 1 << i
            if bits & mask:
                below = lookup(bits & ~mask)
                if below is not None and sign * below > v + tol:
                    return False
            else:
                above = lookup(bits | mask)
                if above is not None and sign * above < v - tol:
                    return False
    return True


# --- nearest-centroid classifier over windowed features ---


class CentroidClassifier(PerformanceFunction):
    """Nearest-centroid accuracy on a held-out split of windowed features.

    Feature columns are grouped contiguously per channel, so restricting the
    evaluation to a channel subset is a column slice: no feature column of an
    excluded channel is ever read.
    """

    claims_monotone = False

    def __init__(
        self,
        centroids: np.ndarray,
        class_ids: np.ndarray,
        test_features: np.ndarray,
        test_labels: np.ndarray,
        n_channels: int,
        features_per_channel: int,
        train_size: int,
    ):
        self.centroids = centroids
        self.class_ids = class_ids
        self.test_features = test_features
        self.test_labels = test_labels
        self.n = n_channels
        self.features_per_channel = features_per_channel
        self.train_size = train_size

    def _columns(self, s: ChannelSet) -> np.ndarray:
        fpc = self.features_per_channel
        return np.concatenate([np.arange(i * fpc, (i + 1) * fpc) for i in s.indices()])

    def evaluate(self, s: ChannelSet) -> float:
        if s.n != self.n:
            raise DimensionMismatch(f"subset over {s.n} channels, classifier has {self.n}")
        if s.bits == 0:
            raise EvaluatorFailure("cannot classify with an empty channel subset")
        cols = self._columns(s)
        x = self.test_features[:, cols]
        c = self.centroids[:, cols]
        d2 = ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
        predicted = self.class_ids[np.argmin(d2, axis=1)]
        return float(np.mean(predicted == self.test_labels))


def train_centroid(dataset, split) -> CentroidClassifier:
    """Fit one centroid per class on the training split of a WindowedFeatureSet.

    The classifier keeps the test split so evaluate() reports held-out
    accuracy; which split produced the number is explicit by construction.
    """
    train_idx, test_idx = split.split(dataset.labels, dataset.segment_ids)
    y_train = dataset.labels[train_idx]
    class_ids = np.unique(y_train)
    if class_ids.size < 2:
        raise SingleClassDataset(f"training split has {class_ids.size} class(es); need >= 2")
    x_train = dataset.features[train_idx]
    centroids = np.stack([x_train[y_train == c].mean(axis=0) for c in class_ids])
    return CentroidClassifier(
        centroids=centroids,
        class_ids=class_ids,
        test_features=dataset.features[test_idx],
        test_labels=dataset.labels[test_idx],
        n_channels=dataset.n_channels,
        features_per_channel=dataset.features_per_channel,
        train_size=int(train_idx.size),
    )


# --- external evaluator over a line-delimited JSON subprocess protocol ---


@dataclass
class ExternalEvaluatorConfig:
    """How to reach an out-of-process evaluator.

    command is the argv to spawn; channel_names defines the universe (index
    order matters); timeout bounds each protocol read, default 300 s since a
    wrapped evaluator may train a real model per subset.
    """

    command: Sequence[str]
    channel_names: Sequence[str]
    task: str = ""
    timeout: float = 300.0
    direction: Direction = Direction.MAXIMIZE
    claims_monotone: bool = False


class _LineReader:
    """Buffered line reads from a pipe fd with a per-read timeout."""

    def __init__(self, fd: int, timeout: float):
        self.fd = fd
        self.timeout = timeout
        self.buf = b""

    def readline(self, on_eof) -> bytes:
        while True:
            pos = self.buf.find(b"\n")
            if pos >= 0:
                line = self.buf[:pos]
                self.buf = self.buf[pos + 1 :]
                return line
            ready, _, _ = select.select([self.fd], [], [], self.timeout)
            if not ready:
                raise EvaluatorTimeout(self.timeout)
            chunk = os.read(self.fd, 1 << 16)
            if not chunk:
                on_eof()
            self.buf += chunk


class ExternalEvaluator(PerformanceFunction):
    """Drives a child process speaking the JSON-lines evaluator protocol.

    handshake: -> {"type":"init","channels":[...],"task":...}  <- {"type":"ready"}
    request:   -> {"type":"eval","channels":[subset names]}    <- {"type":"result","performance":x}
    shutdown:  -> {"type":"shutdown"}, child exits 0.
    """

    # distinct result lines are few in practice; bound the cache anyway
    _REPLY_CACHE_CAP = 4096

    def __init__(self, config: ExternalEvaluatorConfig):
        self.config = config
        self.n = len(config.channel_names)
        self.direction = config.direction
        self.claims_monotone = config.claims_monotone
        self._proc: subprocess.Popen | None = None
        self._reader: _LineReader | None = None
        # request fragments and a raw-reply parse cache keep per-evaluation
        # overhead low when a search makes hundreds of thousands of calls
        self._name_frags = [json.dumps(str(nm)).encode() for nm in config.channel_names]
        self._reply_cache: dict[bytes, float] = {}

    # -- lifecycle --

    def _on_eof(self):
        code = self._proc.poll() if self._proc else None
        raise SubprocessExit(code)

    def start(self):
        if self._proc is not None:
            return
        try:
            self._proc = subprocess.Popen(
                list(self.config.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                bufsize=0,
            )
        except OSError as exc:
            raise EvaluatorFailure(f"could not spawn evaluator: {exc}") from exc
        self._reader = _LineReader(self._proc.stdout.fileno(), self.config.timeout)
        self._send(
            {
                "type": "init",
                "channels": list(self.config.channel_names),
                "task": self.config.task,
            }
        )
        reply = self._recv()
        if reply.get("type") != "ready":
            raise ProtocolViolation(json.dumps(reply))

    def close(self):
        if self._proc is None:
            return
        proc, self._proc, self._reader = self._proc, None, None
        try:
            if proc.poll() is None:
                proc.stdin.write(b'{"type":"shutdown"}\n')
                proc.stdin.flush()
                proc.stdin.close()
            code = proc.wait(timeout=10)
            if code != 0:
                raise SubprocessExit(code)
        except (BrokenPipeError, OSError):
            proc.kill()
            proc.wait()
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
            raise EvaluatorTimeout(10)

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc_info):
        self.close()
        return False

    # -- protocol --

    def _send(self, obj: dict):
        data = json.dumps(obj, separators=(",", ":")).encode() + b"\n"
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._on_eof()

    def _recv(self) -> dict:
        raw = self._reader.readline(self._on_eof)
        try:
            obj = json.loads(raw)
        except ValueError:
            raise ProtocolViolation(raw.decode(errors="replace")) from None
        if not isinstance(obj, dict):
            raise ProtocolViolation(raw.decode(errors="replace"))
        return obj

    def evaluate(self, s: ChannelSet) -> float:
        if s.n != self.n:
            raise DimensionMismatch(f"subset over {s.n} channels, evaluator has {self.n}")
        if self._proc is None:
            self.start()
        frags = self._name_frags
        bits = s.bits
        data = (
            b'{"type":"eval","channels":['
            + b",".join(frags[i] for i in range(self.n) if bits >> i & 1)
            + b"]}\n"
        )
        try:
            self._proc.stdin.write(data)
        except (BrokenPipeError, OSError):
            self._on_eof()
        raw = self._reader.readline(self._on_eof)
        cached = self._reply_cache.get(raw)
        if cached is not None:
            return cached
        try:
            reply = json.loads(raw)
        except ValueError:
            raise ProtocolViolation(raw.decode(errors="replace")) from None
        if not isinstance(reply, dict):
            raise ProtocolViolation(raw.decode(errors="replace"))
        kind = reply.get("type")
        if kind == "error":
            raise EvaluatorFailure(str(reply.get("detail")))
        if kind != "result" or not isinstance(reply.get("performance"), (int, float)):
            raise ProtocolViolation(json.dumps(reply))
        value = float(reply["performance"])
        if len(self._reply_cache) < self._REPLY_CACHE_CAP:
            self._reply_cache[raw] = value
        return value


def external_evaluate(config: ExternalEvaluatorConfig, s: ChannelSet) -> float:
    """One-shot evaluation: spawn, handshake, evaluate s, shut down."""
    with ExternalEvaluator(config) as ev:
        result = ev.evaluate(s)
    return result
