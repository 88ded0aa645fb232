"""One-sided recursions of Lindley type and their backward-supremum solution.

The driving identity: starting the recursion x -> max(x + z, 0) from zero and
feeding increments oldest-first gives, after N steps, exactly the maximum of
the N+1 backward partial sums of those increments.  The maximum is monotone
in N, so running it over growing windows yields the stationary state from
below; two copies of the chain driven by the same increments and started at
different levels keep their order and merge permanently the first time the
upper one drains to the level of the lower.

Queue length and waiting time are the same map under substitution:
Q_{n+1} = (Q_n + Y_{n+1} - s)^+ and W_{n+1} = (W_n + S_n - T_{n+1})^+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "IncrementWindow",
    "QueueTrace",
    "LoynesResult",
    "CoupleResult",
    "lindley_step",
    "loynes_sup",
    "loynes_prefix_maxima",
    "run_recursion",
    "forward_couple",
    "queue_step",
    "queue_path",
    "waiting_step",
    "waiting_path",
    "tandem_output",
    "tandem_path",
]


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class IncrementWindow:
    """A finite backward sample of increments: values[0] is the most recent.

    values[j] is the increment at lag j (time 0, -1, ..., -N+1).  Partial
    sums start at zero and accumulate from the most recent entry backward.
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("window contains non-finite increments")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_iterable(cls, values: Iterable[float]) -> "IncrementWindow":
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    def partial_sums(self) -> np.ndarray:
        """V_0 = 0, V_n = sum of the n most recent increments."""
        out = np.zeros(len(self.values) + 1)
        if self.values:
            np.cumsum(self.values, out=out[1:])
        return out

    def prefix(self, n: int) -> "IncrementWindow":
        if not 0 <= n <= len(self.values):
            raise ValueError(f"prefix length {n} out of range")
        return IncrementWindow(self.values[:n])


@dataclass(frozen=True)
class LoynesResult:
    value: float
    argmax: int
    converged: bool

    def __iter__(self):
        # unpack as (value, argmax)
        return iter((self.value, self.argmax))


@dataclass
class QueueTrace:
    """States X_0..X_T with the increments that drove them."""

    states: np.ndarray
    increments: np.ndarray
    coupling_time: int | None = None

    def verify(self) -> None:
        """Check the defining recursion holds exactly at every step."""
        x = self.states
        z = self.increments
        if x.shape != (z.size + 1,):
            raise ValueError("states must be one longer than increments")
        if x.size and (x < 0).any():
            raise ValueError("negative state")
        for n in range(z.size):
            if x[n + 1] != max(x[n] + z[n], 0.0):
                raise ValueError(f"recursion violated at step {n}")

    def __len__(self) -> int:
        return int(self.states.size)


def lindley_step(x: float, z: float) -> float:
    """One step of the reflected random walk: max(x + z, 0)."""
    x = float(x)
    z = float(z)
    if not (math.isfinite(x) and math.isfinite(z)):
        raise ValueError("inputs must be finite")
    if x < 0:
        raise ValueError("state must be nonnegative")
    return max(x + z, 0.0)


def loynes_sup(
    window: IncrementWindow | Sequence[float], slack: float = 0.0
) -> LoynesResult:
    """Maximum backward partial sum, the stationary state built from below.

    Returns the max of V_0..V_N and the smallest maximizing index.  The value
    is nonnegative because V_0 = 0 participates.  ``converged`` reports a
    finite-window diagnostic, not a guarantee: the argmax is interior and the
    trailing sum has dropped at least ``slack`` below the max, so extending
    the window a little would not have changed the answer.
    """
    values = window.values if isinstance(window, IncrementWindow) else window
    v = 0.0
    best = 0.0
    arg = 0
    for n, z in enumerate(values, start=1):
        v += float(z)
        if v > best:
            best = v
            arg = n
    n_total = len(values)
    converged = arg < n_total and v < best - slack if n_total else False
    return LoynesResult(best, arg, converged)


def loynes_prefix_maxima(window: IncrementWindow | Sequence[float]) -> np.ndarray:
    """loynes_sup value over every prefix length 0..N; nondecreasing."""
    values = window.values if isinstance(window, IncrementWindow) else window
    arr = _as_float_array(values, "window")
    sums = np.zeros(arr.size + 1)
    np.cumsum(arr, out=sums[1:])
    return np.maximum.accumulate(np.maximum(sums, 0.0))


def run_recursion(x0: float, increments: Sequence[float]) -> QueueTrace:
    """Drive the recursion forward from x0, keeping the whole trajectory."""
    x0 = float(x0)
    if not math.isfinite(x0) or x0 < 0:
        raise ValueError("x0 must be finite and nonnegative")
    z = _as_float_array(increments, "increments")
    states = np.empty(z.size + 1)
    states[0] = x0
    x = x0
    for n in range(z.size):
        x = max(x + z[n], 0.0)
        states[n + 1] = x
    return QueueTrace(states=states, increments=z)


@dataclass(frozen=True)
class CoupleResult:
    coupling_time: int | None
    final_upper: float
    final_lower: float
    steps_run: int


def forward_couple(
    x0: float,
    increments: Sequence[float],
    horizon: int | None = None,
    absorption_check: int = 64,
) -> CoupleResult:
    """Run the chain from x0 and from 0 on the same increments until they meet.

    Returns the first index where the two chains are equal, or None within
    the horizon.  After meeting, continues for ``absorption_check`` steps
    verifying the chains stay equal (they must: same map, same input), then
    stops early.  Ordering X(x0) >= X(0) is asserted throughout.
    """
    x0 = float(x0)
    if x0 < 0 or not math.isfinite(x0):
        raise ValueError("x0 must be finite and nonnegative")
    z = _as_float_array(increments, "increments")
    n_steps = z.size if horizon is None else min(int(horizon), z.size)
    upper = x0
    lower = 0.0
    if upper == lower:
        return CoupleResult(0, upper, lower, 0)
    tau = None
    n = 0
    while n < n_steps:
        zn = z[n]
        upper = max(upper + zn, 0.0)
        lower = max(lower + zn, 0.0)
        n += 1
        if upper < lower:
            raise AssertionError("ordering violated (non-finite input?)")
        if upper == lower:
            tau = n
            break
    if tau is not None:
        for k in range(n, min(n + absorption_check, z.size)):
            zn = z[k]
            upper = max(upper + zn, 0.0)
            lower = max(lower + zn, 0.0)
            if upper != lower:
                raise AssertionError("absorption violated after coupling")
            n = k + 1
    return CoupleResult(tau, upper, lower, n)


def queue_step(q: float, y: float, s: float) -> float:
    """Queue-length update: serve s, admit y, clip at zero."""
    y = float(y)
    s = float(s)
    if y < 0 or not math.isfinite(y):
        raise ValueError("arrivals must be nonnegative and finite")
    if s <= 0 or not math.isfinite(s):
        raise ValueError("service rate must be positive and finite")
    return lindley_step(q, y - s)


def queue_path(arrivals: Sequence[float], s: float, q0: float = 0.0) -> QueueTrace:
    """Queue trajectory under constant service rate s."""
    y = _as_float_array(arrivals, "arrivals")
    if (y < 0).any():
        raise ValueError("arrivals must be nonnegative")
    s = float(s)
    if s <= 0 or not math.isfinite(s):
        raise ValueError("service rate must be positive and finite")
    return run_recursion(q0, y - s)


def waiting_step(w: float, service_prev: float, interarrival: float) -> float:
    """Waiting-time update: previous customer's service minus the gap."""
    service_prev = float(service_prev)
    interarrival = float(interarrival)
    if service_prev < 0 or interarrival < 0:
        raise ValueError("service and interarrival times must be nonnegative")
    return lindley_step(w, service_prev - interarrival)


def waiting_path(
    services: Sequence[float], interarrivals: Sequence[float], w0: float = 0.0
) -> QueueTrace:
    """Waiting times W_0..W_T; increment n is services[n] - interarrivals[n].

    services[n] is the service of customer n (the one ahead), interarrivals[n]
    the gap to customer n+1.
    """
    s_arr = _as_float_array(services, "services")
    t_arr = _as_float_array(interarrivals, "interarrivals")
    if s_arr.size != t_arr.size:
        raise ValueError("services and interarrivals must have equal length")
    if (s_arr < 0).any() or (t_arr < 0).any():
        raise ValueError("times must be nonnegative")
    return run_recursion(w0, s_arr - t_arr)


def tandem_output(q: float, y: float, q_next: float) -> float:
    """Work leaving a station in one slot: inflow plus backlog drop.

    With q_next produced by queue_step(q, y, s) this equals min(q + y, s).
    A negative result means the inputs do not belong to one queue step.
    """
    out = float(q) + float(y) - float(q_next)
    if out < 0:
        raise ValueError("inconsistent inputs: output would be negative")
    return out


def tandem_path(
    arrivals: Sequence[float], s_first: float, s_second: float, q0: float = 0.0
) -> tuple[QueueTrace, np.ndarray, QueueTrace]:
    """Two stations in series: departures of the first feed the second.

    Returns (first-station trace, per-slot outputs of the first station,
    second-station trace).  Outputs satisfy out[n] = min(Q_n + Y_{n+1}, s_first)
    exactly, and each station conserves work: cumulative inflow minus
    cumulative outflow equals the backlog change.
    """
    first = queue_path(arrivals, s_first, q0)
    q = first.states
    y = _as_float_array(arrivals, "arrivals")
    outputs = np.empty(y.size)
    for n in range(y.size):
        outputs[n] = tandem_output(q[n], y[n], q[n + 1])
    second = queue_path(outputs, s_second)
    return first, outputs, second
