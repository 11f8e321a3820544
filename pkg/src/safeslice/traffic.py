"""Per-TTI packet arrival generation for the three slice services.

Video uses truncated Pareto interarrivals and sizes, VoNR uniform
interarrivals with constant 40 B packets, VR gaming replays a trace
(real or synthesized). User counts are Poisson.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class TraceError(ValueError):
    """A VR trace file is malformed or empty."""


@dataclass(frozen=True)
class PacketArrival:
    arrival_tti: int
    size_bytes: int
    user_id: int
    slice_id: int


# ---------------------------------------------------------------------------
# Truncated Pareto calibration.
#
# Family: Pareto(shape, scale) clamped at `maximum` (probability mass sits on
# the bound). Shape is fixed at the conventional 1.2; the scale is solved so
# the clamped mean hits the requested value. For the defaults this gives
# scale ~= 2.547 ms (interarrival, mean 6, max 12.5) and ~= 42.31 B
# (size, mean 100, max 250).


def truncated_pareto_mean(shape, scale, maximum):
    """E[min(Y, maximum)] for Y ~ Pareto(shape, scale), shape > 1."""
    if shape <= 1.0:
        raise ValueError("shape must exceed 1 for a finite mean")
    a = shape / (shape - 1.0)
    return a * scale - (scale**shape) * maximum ** (1.0 - shape) / (shape - 1.0)


def truncated_pareto_scale(mean, maximum, shape=1.2):
    """Solve for the Pareto scale whose clamped mean equals `mean`."""
    if not (0.0 < mean <= maximum):
        raise ValueError(f"need 0 < mean <= maximum, got mean={mean}, maximum={maximum}")
    lo, hi = 1e-12, maximum
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if truncated_pareto_mean(shape, mid, maximum) < mean:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class VideoModel:
    interarrival_mean_ms: float = 6.0
    interarrival_max_ms: float = 12.5
    size_mean_bytes: float = 100.0
    size_max_bytes: float = 250.0
    shape: float = 1.2

    def __post_init__(self):
        if self.interarrival_max_ms < self.interarrival_mean_ms:
            raise ValueError("interarrival truncation bound must be >= mean")
        if self.size_max_bytes < self.size_mean_bytes:
            raise ValueError("size truncation bound must be >= mean")
        object.__setattr__(
            self,
            "interarrival_scale",
            truncated_pareto_scale(self.interarrival_mean_ms, self.interarrival_max_ms, self.shape),
        )
        object.__setattr__(
            self,
            "size_scale",
            truncated_pareto_scale(self.size_mean_bytes, self.size_max_bytes, self.shape),
        )


@dataclass(frozen=True)
class VonrModel:
    interarrival_min_ms: float = 0.0
    interarrival_max_ms: float = 160.0
    size_bytes: int = 40

    def __post_init__(self):
        if self.interarrival_max_ms <= self.interarrival_min_ms:
            raise ValueError("interarrival max must exceed min")
        if self.size_bytes <= 0:
            raise ValueError("packet size must be positive")


@dataclass
class VrTrace:
    """Ordered (interarrival ms, size bytes) records replayed cyclically."""

    interarrival_ms: np.ndarray
    size_bytes: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        self.interarrival_ms = np.asarray(self.interarrival_ms, dtype=np.float64)
        self.size_bytes = np.asarray(self.size_bytes, dtype=np.int64)
        if len(self.interarrival_ms) == 0:
            raise TraceError("VR trace is empty")
        if len(self.interarrival_ms) != len(self.size_bytes):
            raise TraceError("VR trace columns have mismatched lengths")
        if np.any(self.interarrival_ms <= 0) or np.any(self.size_bytes <= 0):
            raise TraceError("VR trace values must be strictly positive")

    def __len__(self):
        return len(self.interarrival_ms)

    @property
    def stats(self):
        return float(self.interarrival_ms.mean()), float(self.size_bytes.mean())


@dataclass(frozen=True)
class VrTraceModel:
    trace: VrTrace


def load_vr_trace(path) -> VrTrace:
    """Read `interarrival_ms,size_bytes` CSV; line numbers reported on errors."""
    ias, sizes = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["interarrival_ms", "size_bytes"]:
            raise TraceError(f"{path}: expected header 'interarrival_ms,size_bytes'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                ia = float(row[0])
                size = int(float(row[1]))
            except (ValueError, IndexError):
                raise TraceError(f"{path}: malformed row at line {lineno}: {row!r}")
            ias.append(ia)
            sizes.append(size)
    if not ias:
        raise TraceError(f"{path}: trace has no data rows")
    return VrTrace(np.array(ias), np.array(sizes), source_label=str(path))


def save_vr_trace(trace: VrTrace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["interarrival_ms", "size_bytes"])
        for ia, size in zip(trace.interarrival_ms, trace.size_bytes):
            writer.writerow([repr(float(ia)), int(size)])


def synth_vr_trace(mean_interarrival_ms, mean_size_bytes, length, rng, cv=0.3) -> VrTrace:
    """Synthetic stand-in for real VR gaming traces.

    Lognormal interarrivals and sizes with coefficient of variation `cv`,
    rescaled so the empirical means match the requested targets.
    """
    if length < 1:
        raise TraceError("synthetic trace length must be >= 1")
    if mean_interarrival_ms <= 0 or mean_size_bytes <= 0:
        raise ValueError("trace means must be positive")
    sigma2 = np.log1p(cv * cv)
    mu = -0.5 * sigma2
    ias = rng.lognormal(mu, np.sqrt(sigma2), length)
    ias *= mean_interarrival_ms / ias.mean()
    sizes = rng.lognormal(mu, np.sqrt(sigma2), length)
    sizes *= mean_size_bytes / sizes.mean()
    sizes = np.maximum(1, np.rint(sizes)).astype(np.int64)
    return VrTrace(ias, sizes, source_label="synthetic")


def sample_user_count(mean, rng) -> int:
    """Poisson draw of the number of users attached to a slice."""
    if mean < 0:
        raise ValueError("user count mean must be >= 0")
    if mean == 0:
        return 0
    return int(rng.poisson(mean))


# ---------------------------------------------------------------------------
# Arrival streams.

_CHUNK = 64


class SliceTraffic:
    """Stateful per-slice arrival stream over consecutive windows.

    One independent packet process per user; value semantics via clone().
    Clocks track the absolute time of each user's next packet, so windows
    must be consumed consecutively.
    """

    def __init__(self, model, user_count, rng, tti_ms=1.0, slice_id=0):
        self.model = model
        self.user_count = int(user_count)
        self.rng = rng
        self.tti_ms = float(tti_ms)
        self.slice_id = slice_id
        self.next_tti = 0
        self._ia_bufs = [[] for _ in range(self.user_count)]
        self._sz_bufs = [[] for _ in range(self.user_count)]
        if isinstance(model, VrTraceModel):
            self._trace_ia = [float(v) for v in model.trace.interarrival_ms]
            self._trace_sz = [int(v) for v in model.trace.size_bytes]
            n = len(self._trace_ia)
            self._trace_pos = [int(rng.integers(0, n)) for _ in range(self.user_count)]
        else:
            self._trace_pos = None
        # absolute ms of each user's first packet
        self.clocks = []
        for u in range(self.user_count):
            self._refill(u)
            self.clocks.append(self._ia_bufs[u].pop())

    def _refill(self, u):
        m = self.model
        if isinstance(m, VideoModel):
            inv = -1.0 / m.shape
            ia = m.interarrival_scale * (1.0 - self.rng.random(_CHUNK)) ** inv
            np.minimum(ia, m.interarrival_max_ms, out=ia)
            sz = m.size_scale * (1.0 - self.rng.random(_CHUNK)) ** inv
            np.minimum(sz, m.size_max_bytes, out=sz)
            sz = np.maximum(1, np.rint(sz)).astype(np.int64)
            self._ia_bufs[u] = [float(v) for v in ia[::-1]]
            self._sz_bufs[u] = [int(v) for v in sz[::-1]]
        elif isinstance(m, VonrModel):
            ia = self.rng.uniform(m.interarrival_min_ms, m.interarrival_max_ms, _CHUNK)
            self._ia_bufs[u] = [float(v) for v in ia[::-1]]
            self._sz_bufs[u] = [m.size_bytes] * _CHUNK
        elif isinstance(m, VrTraceModel):
            pos = self._trace_pos[u]
            n = len(self._trace_ia)
            take = min(_CHUNK, n)
            idx = [(pos + i) % n for i in range(take)]
            self._trace_pos[u] = (pos + take) % n
            self._ia_bufs[u] = [self._trace_ia[i] for i in reversed(idx)]
            self._sz_bufs[u] = [self._trace_sz[i] for i in reversed(idx)]
        else:
            raise TypeError(f"unknown traffic model {type(m).__name__}")

    def arrivals(self, start_tti, n_ttis):
        """Arrivals for TTIs [start_tti, start_tti + n_ttis), bucketed by
        TTI offset as (size_bytes, user_id) pairs."""
        if start_tti != self.next_tti:
            raise ValueError(f"windows must be consecutive: expected {self.next_tti}, got {start_tti}")
        self.next_tti = start_tti + n_ttis
        buckets = [[] for _ in range(n_ttis)]
        end_ms = (start_tti + n_ttis) * self.tti_ms
        tti_ms = self.tti_ms
        for u in range(self.user_count):
            t = self.clocks[u]
            ia_buf = self._ia_bufs[u]
            sz_buf = self._sz_bufs[u]
            while t < end_ms:
                if not sz_buf:
                    self._refill(u)
                    ia_buf = self._ia_bufs[u]
                    sz_buf = self._sz_bufs[u]
                buckets[int(t / tti_ms) - start_tti].append((sz_buf.pop(), u))
                if not ia_buf:
                    self._refill(u)
                    ia_buf = self._ia_bufs[u]
                    sz_buf = self._sz_bufs[u]
                t += ia_buf.pop()
            self.clocks[u] = t
        return buckets

    def clone(self) -> "SliceTraffic":
        """Independent copy continuing the same deterministic stream."""
        dup = object.__new__(SliceTraffic)
        dup.model = self.model
        dup.user_count = self.user_count
        dup.tti_ms = self.tti_ms
        dup.slice_id = self.slice_id
        dup.next_tti = self.next_tti
        dup.clocks = list(self.clocks)
        dup._ia_bufs = [list(b) for b in self._ia_bufs]
        dup._sz_bufs = [list(b) for b in self._sz_bufs]
        if self._trace_pos is not None:
            dup._trace_ia = self._trace_ia
            dup._trace_sz = self._trace_sz
            dup._trace_pos = list(self._trace_pos)
        else:
            dup._trace_pos = None
        dup.rng = np.random.default_rng()
        dup.rng.bit_generator.state = self.rng.bit_generator.state
        return dup


def sample_arrivals(model, user_count, window, rng, tti_ms=1.0, slice_id=0):
    """Flat, TTI-sorted arrival list for one window; deterministic per rng."""
    start, end = window
    if end <= start:
        raise ValueError("window must be non-empty")
    if user_count < 0:
        raise ValueError("user_count must be >= 0")
    gen = SliceTraffic(model, user_count, rng, tti_ms=tti_ms, slice_id=slice_id)
    if start > 0:
        gen.arrivals(0, start)  # discard the lead-in
    buckets = gen.arrivals(start, end - start)
    out = []
    for off, bucket in enumerate(buckets):
        for size, user in bucket:
            out.append(PacketArrival(start + off, size, user, slice_id))
    return out
