"""Stationary arrival and increment processes behind one small interface.

Every process produces forward streams (Y_1, Y_2, ...), backward windows
(Y_0, Y_-1, ..., Y_-N+1), and ergodic mean estimates.  Backward windows for
the memoryless and Markov kinds are forward samples relabeled, which is
lawful because a stationary window read in either direction has the same
joint law (the two-state Markov chain is reversible).  The counter-driven
kind inverts its dynamics instead: lag j lives at counter value c + j, so a
backward window is literally a stretch of consecutive counters.

Determinism: all sampling goes through numpy Generators.  Replica r of a
seeded experiment uses SeedSequence(seed, spawn_key=(r,)), so adding
replicas never perturbs existing ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import odometer
from .lindley import QueueTrace, waiting_path

__all__ = [
    "ProcessError",
    "TraceError",
    "rng_for",
    "ensure_rng",
    "IIDBernoulli",
    "IIDTable",
    "BinaryMarkov",
    "TraceProcess",
    "OdometerProcess",
    "GG1System",
    "parse_process",
    "process_from_json",
]


class ProcessError(ValueError):
    """Invalid process parameters or an exhausted finite source."""


class TraceError(ProcessError):
    """A trace file failed to parse; carries the offending line number."""


def rng_for(seed: int, replica: int = 0) -> np.random.Generator:
    """Generator for one replica; independent streams per replica index."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))


def ensure_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class _ProcessBase:
    """Shared plumbing; concrete kinds implement ``forward``."""

    def forward(self, n: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward_window(
        self, n: int, rng: np.random.Generator | int | None = None
    ) -> np.ndarray:
        """(Y_0, Y_-1, ..., Y_-n+1): a forward sample relabeled."""
        return self.forward(n, rng)[::-1].copy()

    def mean_estimate(self, n: int, rng: np.random.Generator | int | None = None) -> float:
        """Time average over one realization of length n."""
        if n < 1:
            raise ProcessError("n must be positive")
        return float(np.mean(self.forward(n, rng)))

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class IIDBernoulli(_ProcessBase):
    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ProcessError(f"p must be in [0, 1], got {self.p}")

    def forward(self, n: int, rng=None) -> np.ndarray:
        rng = ensure_rng(rng)
        return (rng.random(n) < self.p).astype(np.float64)

    def describe(self) -> dict:
        return {"kind": "iid-bernoulli", "p": self.p}


@dataclass(frozen=True)
class IIDTable(_ProcessBase):
    """iid draws from a finite value table."""

    values: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probabilities)
        if len(vals) != len(probs) or not vals:
            raise ProcessError("values and probabilities must be equal-length and nonempty")
        if any(not math.isfinite(v) for v in vals):
            raise ProcessError("table values must be finite")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ProcessError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "probabilities", probs)

    def forward(self, n: int, rng=None) -> np.ndarray:
        rng = ensure_rng(rng)
        idx = rng.choice(len(self.values), size=n, p=self.probabilities)
        return np.asarray(self.values, dtype=np.float64)[idx]

    def describe(self) -> dict:
        return {
            "kind": "iid-table",
            "values": list(self.values),
            "probabilities": list(self.probabilities),
        }


@dataclass(frozen=True)
class BinaryMarkov(_ProcessBase):
    """Two-state 0/1 Markov chain started from its stationary law.

    p01 is the 0 -> 1 transition probability, p10 the 1 -> 0 one.  The
    stationary weight of state 1 is p01/(p01+p10); the chain satisfies
    detailed balance, so it reads the same forward and backward.
    """

    p01: float
    p10: float

    def __post_init__(self) -> None:
        for name, p in (("p01", self.p01), ("p10", self.p10)):
            if not 0.0 <= p <= 1.0:
                raise ProcessError(f"{name} must be in [0, 1], got {p}")

    @property
    def stationary_p1(self) -> float:
        total = self.p01 + self.p10
        # both-zero chain never moves; any start is stationary, pick fair
        return self.p01 / total if total > 0 else 0.5

    def forward(self, n: int, rng=None) -> np.ndarray:
        rng = ensure_rng(rng)
        u = rng.random(n + 1)
        out = np.empty(n, dtype=np.float64)
        state = 1 if u[0] < self.stationary_p1 else 0
        p01, p10 = self.p01, self.p10
        for k in range(n):
            if state == 1:
                if u[k + 1] < p10:
                    state = 0
            else:
                if u[k + 1] < p01:
                    state = 1
            out[k] = state
        return out

    def describe(self) -> dict:
        return {"kind": "binary-markov", "p01": self.p01, "p10": self.p10}


class TraceProcess(_ProcessBase):
    """One recorded realization, replayed verbatim.

    File format: one nonnegative decimal per line, UTF-8, LF line ends.
    Forward streams read from the top; backward windows read from the end,
    most recent last in file order.  Stationarity of the recording is the
    caller's assumption, not something a single path can certify.
    """

    def __init__(self, path: str | Path | None = None, values: Sequence[float] | None = None):
        if (path is None) == (values is None):
            raise ProcessError("provide exactly one of path or values")
        if path is not None:
            self.path = str(path)
            self.values = self._load(Path(path))
        else:
            self.path = None
            arr = np.asarray(values, dtype=np.float64)
            self._validate(arr, where="values")
            self.values = arr

    @staticmethod
    def _load(path: Path) -> np.ndarray:
        out = []
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise TraceError(f"cannot read trace {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(float(line))
            except ValueError:
                raise TraceError(f"{path}:{lineno}: not a number: {line!r}") from None
            if not math.isfinite(out[-1]) or out[-1] < 0:
                raise TraceError(f"{path}:{lineno}: value must be finite and nonnegative")
        return np.asarray(out, dtype=np.float64)

    @staticmethod
    def _validate(arr: np.ndarray, where: str) -> None:
        if arr.ndim != 1:
            raise TraceError(f"{where}: trace must be one-dimensional")
        if arr.size and ((~np.isfinite(arr)).any() or (arr < 0).any()):
            raise TraceError(f"{where}: values must be finite and nonnegative")

    def forward(self, n: int, rng=None) -> np.ndarray:
        if n > self.values.size:
            raise TraceError(
                f"trace exhausted: {n} values requested, {self.values.size} recorded"
            )
        return self.values[:n].copy()

    def backward_window(self, n: int, rng=None) -> np.ndarray:
        if n > self.values.size:
            raise TraceError(
                f"trace exhausted: window {n} exceeds {self.values.size} recorded values"
            )
        return self.values[self.values.size - n :][::-1].copy()

    def describe(self) -> dict:
        if self.path is not None:
            return {"kind": "trace", "path": self.path}
        return {"kind": "trace", "values": self.values.tolist()}


@dataclass(frozen=True)
class OdometerProcess(_ProcessBase):
    """0/1 arrivals read off the adding-machine orbit.

    A uniform point is drawn once per realization; Y at forward time k is
    the arrival-set indicator at counter c - k, so a backward window of
    width N is the indicator over counters c, c+1, ..., c+N-1.  Membership
    uses bands up to i_max (default: the deepest band the precision allows),
    giving a subset of the full arrival set with measure deficit at most
    2^-(i_max+2).
    """

    precision: int = odometer.DEFAULT_PRECISION
    i_max: int | None = None

    def __post_init__(self) -> None:
        cap = odometer.band_limit(self.precision)
        if self.i_max is not None and not 0 <= self.i_max <= cap:
            raise ProcessError(f"i_max must be in 0..{cap} for precision {self.precision}")

    @property
    def band_cap(self) -> int:
        return self.i_max if self.i_max is not None else odometer.band_limit(self.precision)

    def exact_mean_bounds(self) -> tuple[Fraction, Fraction]:
        """(exact E[Y] of this truncated process, upper bound for the full set).

        The first entry is the truncated arrival-set measure, which is the
        process mean exactly; the untruncated mean lies between the two.
        """
        lo = odometer.arrival_set_measure(self.band_cap)
        return lo, lo + Fraction(1, 1 << (self.band_cap + 2))

    def _draw_counter(self, rng: np.random.Generator, margin_low: int, width: int) -> int:
        # counters c with c - margin_low >= 0 and c + width <= 2**K
        while True:
            c = int(odometer.uniform_counters(rng, 1, self.precision, max(width, 1))[0])
            if c >= margin_low:
                return c

    def forward(self, n: int, rng=None) -> np.ndarray:
        rng = ensure_rng(rng)
        if n == 0:
            return np.empty(0, dtype=np.float64)
        c = self._draw_counter(rng, margin_low=n, width=1)
        counters = np.uint64(c) - np.arange(1, n + 1, dtype=np.uint64)
        return odometer.in_arrival_set_batch(counters, self.precision, self.i_max).astype(
            np.float64
        )

    def backward_window(self, n: int, rng=None) -> np.ndarray:
        rng = ensure_rng(rng)
        if n == 0:
            return np.empty(0, dtype=np.float64)
        if n > (1 << self.precision):
            raise ProcessError(f"window {n} exceeds representable orbit at K={self.precision}")
        c = self._draw_counter(rng, margin_low=0, width=n)
        p = odometer.DyadicPoint(c, self.precision)
        return odometer.membership_window(p, n, self.i_max).astype(np.float64)

    def window_counts(self, m: int, width: int, rng=None) -> np.ndarray:
        """Backward-window arrival totals for m independent realizations."""
        rng = ensure_rng(rng)
        cs = odometer.uniform_counters(rng, m, self.precision, width)
        return odometer.window_arrival_counts(cs, width, self.precision, self.i_max)

    def mean_estimate(self, n: int, rng=None) -> float:
        if n < 1:
            raise ProcessError("n must be positive")
        rng = ensure_rng(rng)
        c = self._draw_counter(rng, margin_low=0, width=n)
        count = odometer.window_arrival_counts([c], n, self.precision, self.i_max)[0]
        return float(count) / float(n)

    def describe(self) -> dict:
        return {"kind": "odometer", "precision": self.precision, "i_max": self.i_max}


@dataclass(frozen=True)
class GG1System:
    """Single server fed by a service process and an interarrival process."""

    service: _ProcessBase
    interarrival: _ProcessBase

    def waiting_trace(self, n: int, rng=None) -> QueueTrace:
        """Waiting times of customers 0..n; one rng drives both streams."""
        rng = ensure_rng(rng)
        services = self.service.forward(n, rng)
        gaps = self.interarrival.forward(n, rng)
        return waiting_path(services, gaps)

    def describe(self) -> dict:
        return {
            "kind": "gg1",
            "service": self.service.describe(),
            "interarrival": self.interarrival.describe(),
        }


# ---------------------------------------------------------------------------
# spec strings and JSON


def parse_process(text: str) -> _ProcessBase:
    """Parse a process spec string.

    Forms: ``iid-bernoulli:P``, ``iid-table:V1,V2,..@P1,P2,..``,
    ``binary-markov:P01,P10``, ``trace:PATH``, ``odometer[:K[,I_MAX]]``.
    """
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "iid-bernoulli":
            return IIDBernoulli(float(arg))
        if kind == "iid-table":
            vals, _, probs = arg.partition("@")
            return IIDTable(
                tuple(float(v) for v in vals.split(",")),
                tuple(float(p) for p in probs.split(",")),
            )
        if kind == "binary-markov":
            p01, p10 = (float(x) for x in arg.split(","))
            return BinaryMarkov(p01, p10)
        if kind == "trace":
            if not arg:
                raise ProcessError("trace needs a path")
            return TraceProcess(path=arg)
        if kind == "odometer":
            if not arg:
                return OdometerProcess()
            parts = [int(x) for x in arg.split(",")]
            if len(parts) == 1:
                return OdometerProcess(parts[0])
            if len(parts) == 2:
                return OdometerProcess(parts[0], parts[1])
            raise ProcessError("odometer takes at most precision,i_max")
    except ProcessError:
        raise
    except (TypeError, ValueError) as exc:
        raise ProcessError(f"bad process spec {text!r}: {exc}") from exc
    raise ProcessError(f"unknown process kind {kind!r}")


def process_from_json(data: dict) -> _ProcessBase:
    """Rebuild a process from its describe() dict."""
    kind = data.get("kind")
    if kind == "iid-bernoulli":
        return IIDBernoulli(data["p"])
    if kind == "iid-table":
        return IIDTable(tuple(data["values"]), tuple(data["probabilities"]))
    if kind == "binary-markov":
        return BinaryMarkov(data["p01"], data["p10"])
    if kind == "trace":
        if "path" in data and data["path"] is not None:
            return TraceProcess(path=data["path"])
        return TraceProcess(values=data["values"])
    if kind == "odometer":
        return OdometerProcess(data.get("precision", 64), data.get("i_max"))
    if kind == "gg1":
        return GG1System(
            process_from_json(data["service"]), process_from_json(data["interarrival"])
        )
    raise ProcessError(f"unknown process kind {kind!r}")
