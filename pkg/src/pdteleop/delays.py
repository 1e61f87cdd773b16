"""Bounded time-varying delay profiles and the timestamped position history.

A delay profile maps time to a delay d(t) guaranteed to stay inside
[0, dbar].  The history buffer stores (timestamp, sample) pairs and answers
`delayed_value(t - d(t))` queries by linear interpolation, which keeps the
delayed-signal error at integrator order for C^1 signals.  Before the first
sample the buffer returns the initial sample (the robots start at rest, so
this equals the true pre-run history).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import HistoryQueryError, InvalidInputError, StaleHistoryError

__all__ = ["DelayProfile", "HistoryBuffer", "delay_at", "push_sample", "delayed_value"]

KINDS = ("constant", "sinusoidal", "piecewise_random")


@dataclass(frozen=True)
class DelayProfile:
    """One direction's delay waveform.

    constant:         d(t) = dbar
    sinusoidal:       d(t) = (dbar/2)(1 + sin(2 pi freq t + phase))
    piecewise_random: uniform draw in [0, dbar] held for `hold` seconds,
                      deterministic in `seed` (jump discontinuities are
                      intentional; no bound on d-dot is assumed anywhere).
    """

    kind: str = "sinusoidal"
    dbar: float = 0.2
    freq: float = 0.5
    phase: float = 0.0
    hold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown delay kind {self.kind!r}; expected one of {KINDS}")
        if self.dbar < 0:
            raise InvalidInputError("dbar must be nonnegative")
        if self.kind == "piecewise_random" and self.hold <= 0:
            raise InvalidInputError("hold must be positive for piecewise_random")

    def packed(self) -> np.ndarray:
        return np.array([float(KINDS.index(self.kind)), self.dbar,
                         self.freq, self.phase, self.hold])


def delay_at(profile: DelayProfile, t: float) -> float:
    """Delay d(t); always in [0, dbar]."""
    if t < 0:
        raise InvalidInputError("delay profiles are defined for t >= 0")
    return float(_k.delay_eval(profile.packed(), profile.seed, t))


class HistoryBuffer:
    """Ordered (timestamp, vector) samples with interpolated delayed lookup.

    Samples older than `horizon` behind the newest timestamp are pruned
    lazily; the horizon must cover the largest delay bound plus one step.
    A single writer pushes strictly increasing timestamps.
    """

    def __init__(self, horizon: float, n: int = 2, max_gap: float | None = None):
        if horizon <= 0:
            raise InvalidInputError("horizon must be positive")
        self.horizon = float(horizon)
        self.max_gap = max_gap
        self._n = n
        self._ts: list[float] = []
        self._vals: list[np.ndarray] = []

    def __len__(self):
        return len(self._ts)

    @property
    def newest_time(self) -> float:
        if not self._ts:
            raise HistoryQueryError("history buffer is empty")
        return self._ts[-1]

    def push_sample(self, t: float, value) -> None:
        """Append a sample; timestamps must increase strictly."""
        value = np.asarray(value, dtype=float)
        if value.shape != (self._n,):
            raise InvalidInputError(f"expected sample of shape ({self._n},)")
        if self._ts and t <= self._ts[-1]:
            raise InvalidInputError(
                f"timestamps must increase strictly (got {t} after {self._ts[-1]})")
        self._ts.append(float(t))
        self._vals.append(value.copy())
        # lazy prune: keep at least the horizon behind the newest sample
        cutoff = t - self.horizon
        if self._ts[0] < cutoff - self.horizon:
            k = np.searchsorted(self._ts, cutoff, side="right") - 1
            if k > 0:
                del self._ts[:k]
                del self._vals[:k]

    def delayed_value(self, t_query: float, live: tuple[float, np.ndarray] | None = None
                      ) -> np.ndarray:
        """Sample at t_query by linear interpolation.

        Queries at or before the oldest retained timestamp return the
        oldest sample (initial-condition pre-history).  Queries beyond the
        newest stored sample are a contract violation unless a `live`
        (t, value) pair extends the buffer to the current instant, as the
        integrator substeps do.
        """
        if not self._ts:
            raise HistoryQueryError("history buffer is empty")
        ts = self._ts
        if t_query <= ts[0]:
            return self._vals[0].copy()
        if t_query > ts[-1]:
            if live is None:
                raise HistoryQueryError(
                    f"query t={t_query} beyond newest sample t={ts[-1]}")
            t_live, v_live = live
            v_live = np.asarray(v_live, dtype=float)
            if t_query > t_live:
                raise HistoryQueryError(
                    f"query t={t_query} beyond live sample t={t_live}")
            if t_live <= ts[-1]:
                return v_live.copy()
            self._check_gap(t_live - ts[-1])
            w = (t_query - ts[-1]) / (t_live - ts[-1])
            return (1.0 - w) * self._vals[-1] + w * v_live
        i = int(np.searchsorted(ts, t_query, side="left"))
        if ts[i] == t_query:
            return self._vals[i].copy()
        self._check_gap(ts[i] - ts[i - 1])
        w = (t_query - ts[i - 1]) / (ts[i] - ts[i - 1])
        return (1.0 - w) * self._vals[i - 1] + w * self._vals[i]

    def _check_gap(self, gap: float):
        if self.max_gap is not None and gap > self.max_gap:
            raise StaleHistoryError(
                f"bracketing samples {gap:.3g}s apart exceed max_gap={self.max_gap:.3g}s")

    def window_arrays(self):
        """(times, values) of everything retained, oldest first."""
        return np.array(self._ts), np.array(self._vals)


def push_sample(buf: HistoryBuffer, t: float, value) -> HistoryBuffer:
    buf.push_sample(t, value)
    return buf


def delayed_value(buf: HistoryBuffer, t_query: float, live=None) -> np.ndarray:
    return buf.delayed_value(t_query, live)
