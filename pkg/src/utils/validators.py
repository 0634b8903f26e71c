"""Validation utilities for run configurations and command-line values."""

from typing import Optional, Sequence

from .errors import DomainError, PreconditionError


class ForceValidator:
    """Validate axial force input."""

    @staticmethod
    def resolve_forces(
        P: Optional[float], P1: Optional[float], P2: Optional[float]
    ) -> Optional[tuple[float, float]]:
        """
        Resolve the force pair from either P or (P1, P2).

        Args:
            P: Constant force
            P1: Force on [0, x0)
            P2: Force on (x0, 1]

        Returns:
            (P1, P2), or None if no force was given

        Raises:
            PreconditionError: If P is combined with P1/P2 or only one of P1, P2 is set
        """
        if P is not None:
            if P1 is not None or P2 is not None:
                raise PreconditionError("give either P or both P1 and P2, not both")
            return (P, P)
        if (P1 is None) != (P2 is None):
            raise PreconditionError("P1 and P2 must be given together")
        if P1 is None:
            return None
        return (P1, P2)  # type: ignore[return-value]


class ScheduleValidator:
    """Validate eps schedules."""

    @staticmethod
    def validate_decreasing(eps: Sequence[float]) -> tuple[float, ...]:
        """
        Check that every eps is positive and the list strictly decreases.

        Raises:
            PreconditionError: If the list is empty or not strictly decreasing
            DomainError: If an entry is not positive
        """
        values = tuple(float(e) for e in eps)
        if not values:
            raise PreconditionError("eps list is empty")
        for e in values:
            if not e > 0:
                raise DomainError(f"eps must be positive, got {e!r}")
        for prev, cur in zip(values, values[1:]):
            if not cur < prev:
                raise PreconditionError(f"eps list must be strictly decreasing ({prev!r}, {cur!r})")
        return values


class WindowValidator:
    """Validate tracing windows."""

    @staticmethod
    def validate_window(window: Sequence[float]) -> tuple[float, float, float, float]:
        """
        Check (s_min, s_max, t_min, t_max) for a zero-set trace.

        Raises:
            DomainError: If the window is not four numbers with min < max
        """
        if len(window) != 4:
            raise DomainError(f"window needs 4 values s_min,s_max,t_min,t_max, got {len(window)}")
        s_lo, s_hi, t_lo, t_hi = (float(v) for v in window)
        if not (s_lo < s_hi and t_lo < t_hi):
            raise DomainError(f"window bounds must be increasing, got {tuple(window)!r}")
        return (s_lo, s_hi, t_lo, t_hi)


class CompactSetValidator:
    """Validate compact sets away from the interface."""

    @staticmethod
    def validate_pieces(pieces: Sequence[Sequence[float]], x0: float) -> tuple[tuple[float, float], ...]:
        """
        Check closed intervals inside [0, 1] that avoid x0.

        Raises:
            DomainError: If a piece is empty, leaves [0, 1] or contains x0
        """
        out = []
        for piece in pieces:
            lo, hi = (float(v) for v in piece)
            if not 0.0 <= lo <= hi <= 1.0:
                raise DomainError(f"compact set piece [{lo!r}, {hi!r}] must satisfy 0 <= lo <= hi <= 1")
            if lo <= x0 <= hi:
                raise DomainError(f"compact set piece [{lo!r}, {hi!r}] contains x0 = {x0!r}")
            out.append((lo, hi))
        if not out:
            raise DomainError("compact set is empty")
        return tuple(out)
