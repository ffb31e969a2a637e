"""Residual bookkeeping shared by every verification suite."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

__all__ = ["ResidualEntry", "ResidualReport", "Status", "judge", "max_abs"]


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIPPED = "SKIPPED"
    PAPER_DEVIATION = "PAPER-DEVIATION"


# merge precedence: a single failing point fails the aggregated entry
_RANK = {Status.SKIPPED: 0, Status.PASS: 1, Status.PAPER_DEVIATION: 2, Status.FAIL: 3}


@dataclass
class ResidualEntry:
    equation: str
    status: Status
    tolerance: float
    max_residual: float | None = None
    mean_residual: float | None = None
    probes: int = 0
    rederived_residual: float | None = None
    reason: str = ""
    offending_terms: tuple[str, ...] = ()
    note: str = ""

    def __post_init__(self):
        if self.status is Status.SKIPPED and not self.reason:
            raise ValueError(f"{self.equation}: SKIPPED needs a reason")

    def merge(self, other: "ResidualEntry") -> "ResidualEntry":
        def mx(a, b):
            vals = [x for x in (a, b) if x is not None]
            return max(vals) if vals else None

        mean = None
        n = self.probes + other.probes
        if self.mean_residual is not None and other.mean_residual is not None and n:
            mean = (self.mean_residual * self.probes + other.mean_residual * other.probes) / n
        else:
            mean = self.mean_residual if other.mean_residual is None else other.mean_residual
        status = max(self.status, other.status, key=_RANK.__getitem__)
        reason = self.reason or other.reason
        if status is not Status.SKIPPED and self.status is Status.SKIPPED:
            reason = other.reason
        terms = tuple(dict.fromkeys(self.offending_terms + other.offending_terms))
        return ResidualEntry(
            equation=self.equation,
            status=status,
            tolerance=max(self.tolerance, other.tolerance),
            max_residual=mx(self.max_residual, other.max_residual),
            mean_residual=mean,
            probes=n,
            rederived_residual=mx(self.rederived_residual, other.rederived_residual),
            reason=reason if status is Status.SKIPPED else "",
            offending_terms=terms,
            note=self.note or other.note,
        )

    def to_dict(self) -> dict:
        return {
            "equation": self.equation,
            "status": self.status.value,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "rederived_residual": self.rederived_residual,
            "probes": self.probes,
            "tolerance": self.tolerance,
            "reason": self.reason,
            "offending_terms": list(self.offending_terms),
            "note": self.note,
        }


@dataclass
class ResidualReport:
    suite: str
    seed: int | None = None
    entries: list[ResidualEntry] = field(default_factory=list)
    observations: list[str] = field(default_factory=list)

    def add(self, entry: ResidualEntry) -> ResidualEntry:
        self.entries.append(entry)
        return entry

    def skip(self, equation: str, reason: str, tolerance: float = 0.0) -> ResidualEntry:
        return self.add(ResidualEntry(equation, Status.SKIPPED, tolerance, reason=reason))

    def check(self, equation: str, residuals, tolerance: float, note: str = "") -> ResidualEntry:
        """Plain identity check: PASS iff the largest residual is within tolerance."""
        per_probe = _per_probe(residuals)
        worst = float(per_probe.max()) if per_probe.size else 0.0
        status = Status.PASS if worst <= tolerance else Status.FAIL
        return self.add(
            ResidualEntry(equation, status, tolerance, worst, _mean(per_probe), int(per_probe.size), note=note)
        )

    def __getitem__(self, equation: str) -> ResidualEntry:
        for e in self.entries:
            if e.equation == equation:
                return e
        raise KeyError(equation)

    def __contains__(self, equation: str) -> bool:
        return any(e.equation == equation for e in self.entries)

    def merge(self, other: "ResidualReport") -> "ResidualReport":
        """Combine per-equation entries (order of first appearance is kept)."""
        merged: dict[str, ResidualEntry] = {}
        for e in self.entries + other.entries:
            merged[e.equation] = merged[e.equation].merge(e) if e.equation in merged else e
        obs = list(dict.fromkeys(self.observations + other.observations))
        return ResidualReport(self.suite, self.seed, list(merged.values()), obs)

    def counts(self) -> dict[str, int]:
        out = {s.value: 0 for s in Status}
        for e in self.entries:
            out[e.status.value] += 1
        return out

    @property
    def failed(self) -> bool:
        return any(e.status is Status.FAIL for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "entries": [e.to_dict() for e in self.entries],
            "observations": list(self.observations),
        }


def max_abs(x) -> float:
    a = np.asarray(x, dtype=float)
    return float(np.abs(a).max()) if a.size else 0.0


def _mean(a: np.ndarray) -> float:
    return float(a.sum()) / a.size if a.size else 0.0


def _per_probe(x) -> np.ndarray:
    a = np.abs(np.asarray(x, dtype=float))
    if a.ndim == 0:
        return a.reshape(1)
    if a.size == 0:
        return np.zeros(a.shape[0])
    return a.reshape(a.shape[0], -1).max(axis=1)


def judge(
    equation: str,
    lhs,
    printed: Mapping[str, object],
    rederived: Mapping[str, object] | None,
    tolerance: float,
    note: str = "",
    claim: bool = False,
) -> ResidualEntry:
    """Compare a displayed identity against its independently rederived form.

    ``printed`` and ``rederived`` map term labels to batched values (probe axis
    first).  Terms sharing a label are compared to identify the offending
    terms when the printed form disagrees with the rederived one.  With
    ``claim=True`` there is no rederived counterpart and a mismatch of the
    printed statement is reported as a deviation rather than a failure.
    """
    lhs = np.asarray(lhs, dtype=float)
    zero = np.zeros_like(lhs)
    total_p = sum((np.asarray(v, dtype=float) for v in printed.values()), zero)
    res_p = _per_probe(lhs - total_p)
    worst = float(res_p.max())
    res_r = None
    if rederived is not None:
        total_r = sum((np.asarray(v, dtype=float) for v in rederived.values()), zero)
        res_r = float(_per_probe(lhs - total_r).max())
    if worst <= tolerance:
        status, offending = Status.PASS, ()
    elif res_r is not None and res_r <= tolerance:
        status = Status.PAPER_DEVIATION
        offending = tuple(
            k
            for k in dict.fromkeys(list(printed) + list(rederived))
            if max_abs(np.asarray(printed.get(k, zero), float) - np.asarray(rederived.get(k, zero), float))
            > tolerance
        )
    elif claim:
        status, offending = Status.PAPER_DEVIATION, tuple(printed) or (equation,)
    else:
        status, offending = Status.FAIL, ()
    return ResidualEntry(
        equation,
        status,
        tolerance,
        worst,
        _mean(res_p),
        int(res_p.size),
        rederived_residual=res_r,
        offending_terms=offending,
        note=note,
    )
