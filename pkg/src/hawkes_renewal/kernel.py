"""Piecewise-constant signed reproduction kernels and their scalar summaries."""

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import cached_property

__all__ = ["SignedKernel", "KernelSummary", "decay_rate"]


def decay_rate(mass: float, support: float) -> float:
    """Cluster-length tail decay rate ``(m - log(m) - 1) / support``.

    ``mass`` is the branching mass of the (positive part of the) kernel and
    ``support`` the right end of its support.  Zero mass means there is no
    progeny at all, reported as ``+inf``.
    """
    if mass < 0.0:
        raise ValueError("branching mass must be nonnegative")
    if mass == 0.0:
        return math.inf
    if support <= 0.0:
        raise ValueError("support must be positive when the mass is positive")
    return (mass - math.log(mass) - 1.0) / support


@dataclass(frozen=True)
class KernelSummary:
    """Scalar summary of a kernel: masses, support, and tail decay rate."""

    l1_positive: float
    l1_total: float
    support_bound: float
    gamma: float
    subcritical: bool


@dataclass(frozen=True)
class SignedKernel:
    """Signed reproduction function, piecewise constant on ``(0, support_bound]``.

    ``pieces`` is a tuple of ``(start, end, value)`` triples covering
    contiguous half-open intervals ``(start, end]`` beginning at 0.  The zero
    kernel is the empty tuple.  Values may be negative (inhibition); outside
    the support the kernel is 0.
    """

    pieces: tuple = ()

    def __post_init__(self):
        for piece in self.pieces:
            if len(piece) != 3:
                raise ValueError("each piece must be a (start, end, value) triple")
            s, e, v = piece
            if not (math.isfinite(s) and math.isfinite(e) and math.isfinite(v)):
                raise ValueError("piece boundaries and values must be finite")
            if e <= s:
                raise ValueError(f"piece ({s}, {e}] must have positive width")
        if self.pieces:
            if self.pieces[0][0] != 0.0:
                raise ValueError("first piece must start at 0")
            for prev, cur in zip(self.pieces, self.pieces[1:]):
                if cur[0] != prev[1]:
                    raise ValueError(
                        f"pieces must be contiguous: ({prev[0]}, {prev[1]}] "
                        f"followed by ({cur[0]}, {cur[1]}]"
                    )

    @classmethod
    def from_pieces(cls, pieces) -> "SignedKernel":
        """Build a kernel from any iterable of (start, end, value) triples."""
        return cls(tuple((float(s), float(e), float(v)) for s, e, v in pieces))

    @classmethod
    def zero(cls) -> "SignedKernel":
        return cls(())

    @property
    def support_bound(self) -> float:
        """Right end of the support, 0 for the zero kernel."""
        return self.pieces[-1][1] if self.pieces else 0.0

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for _, _, v in self.pieces)

    @property
    def is_nonnegative(self) -> bool:
        return all(v >= 0.0 for _, _, v in self.pieces)

    @cached_property
    def _ends(self) -> list:
        return [e for _, e, _ in self.pieces]

    @cached_property
    def _values(self) -> list:
        return [v for _, _, v in self.pieces]

    def evaluate(self, t: float) -> float:
        """Kernel value at lag ``t``; 0 outside ``(0, support_bound]``."""
        if not self.pieces or t <= 0.0 or t > self.support_bound:
            return 0.0
        return self._values[bisect_left(self._ends, t)]

    def positive_part(self) -> "SignedKernel":
        """Pointwise positive part; zero-valued pieces are kept so the
        support bound (used for window sizing) is unchanged."""
        return SignedKernel(
            tuple((s, e, v if v > 0.0 else 0.0) for s, e, v in self.pieces)
        )

    @property
    def l1_positive(self) -> float:
        return sum((e - s) * v for s, e, v in self.pieces if v > 0.0)

    @property
    def l1_total(self) -> float:
        return sum((e - s) * abs(v) for s, e, v in self.pieces)

    @property
    def positive_support(self) -> float:
        """Right end of the support of the positive part (0 if none)."""
        return max((e for _, e, v in self.pieces if v > 0.0), default=0.0)

    def summarize(self) -> KernelSummary:
        """Masses, support bound and decay rate of the cluster-length tail.

        ``gamma`` is computed from the positive part of the kernel; it is
        ``+inf`` when the positive mass is zero.  ``subcritical`` records
        whether the positive mass is below 1.
        """
        m = self.l1_positive
        return KernelSummary(
            l1_positive=m,
            l1_total=self.l1_total,
            support_bound=self.support_bound,
            gamma=decay_rate(m, self.positive_support),
            subcritical=m < 1.0,
        )
