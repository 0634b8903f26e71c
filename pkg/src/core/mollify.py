"""Delta nets, mollified pairings and model-product limits."""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from ..models.reports import LimitKind, ProductLimit
from ..utils.errors import DomainError, InconclusiveLimitError, PreconditionError
from ..utils.logger import get_logger
from .quadrature import integrate, panel_rule
from .test_functions import Bump

logger = get_logger(__name__)

TAIL_GRID = 2000
INNER_PANELS = 16
CONTRACTION_RATIO = 0.75
GROWTH_RATIO = 1.5
RICHARDSON_DEPTH = 5


class MollifierKind(str, Enum):
    """Model nets rescale one profile; strict nets may change shape with eps."""

    MODEL = "Model"
    STRICT = "Strict"


@lru_cache(maxsize=None)
def _bump_numerator(k: int) -> Polynomial:
    """N_k with d^k/dx^k exp(-1/q) = N_k·exp(-1/q)/q^(2k), q = 1 - x^2."""
    if k == 0:
        return Polynomial([1.0])
    q = Polynomial([1.0, 0.0, -1.0])
    dq = q.deriv()
    prev = _bump_numerator(k - 1)
    return dq * prev + q * q * prev.deriv() - 2 * (k - 1) * q * dq * prev


def _bump_raw(x: np.ndarray, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    q = np.where(inside, 1.0 - x * x, 1.0)
    values = _bump_numerator(k)(x) * np.exp(-1.0 / q) / q ** (2 * k)
    return np.where(inside, values, 0.0)


@dataclass(frozen=True)
class Profile:
    """Normalized mollifier profile phi with derivatives and tail T(z) = ∫_z^∞ phi."""

    name: str
    support: tuple[float, float]
    raw: Callable[[np.ndarray, int], np.ndarray]
    scale: float = 1.0
    _grid: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        lo, hi = self.support
        if not -1.0 <= lo < hi <= 1.0:
            raise DomainError(f"mollifier support {self.support!r} must lie in [-1, 1]")
        grid = np.linspace(lo, hi, TAIL_GRID + 1)
        pieces, _ = panel_rule(lambda x: self.derivative(x, 0), grid[:-1], grid[1:])
        cum = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        object.__setattr__(self, "_grid", grid)
        object.__setattr__(self, "_cum", cum)

    @property
    def integral(self) -> float:
        return float(self._cum[0])

    @property
    def reach(self) -> float:
        return max(abs(self.support[0]), abs(self.support[1]))

    def derivative(self, x: Any, k: int = 0) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (xs > lo) & (xs < hi)
        return np.where(inside, self.scale * self.raw(xs, k), 0.0)

    def __call__(self, x: Any) -> np.ndarray:
        return self.derivative(x, 0)

    def tail(self, z: Any) -> np.ndarray:
        zs = np.asarray(z, dtype=float)
        flat = zs.reshape(-1)
        lo, hi = self.support
        step = (hi - lo) / TAIL_GRID
        idx = np.clip(np.floor((flat - lo) / step).astype(int), 0, TAIL_GRID)
        start = self._grid[idx]
        partial, _ = panel_rule(lambda x: self.derivative(x, 0), start, np.clip(flat, lo, hi))
        out = self._cum[idx] - partial
        out = np.where(flat <= lo, self._cum[0], np.where(flat >= hi, 0.0, out))
        return out.reshape(zs.shape)

    def normalized(self) -> "Profile":
        return Profile(self.name, self.support, self.raw, self.scale / self.integral)


def symmetric_bump() -> Profile:
    """exp(-1/(1 - x^2)) on (-1, 1), normalized."""
    return Profile("bump", (-1.0, 1.0), _bump_raw).normalized()


def asymmetric_bump() -> Profile:
    """(1 + x)·bump((x - 0.2)/0.8) on (-0.6, 1), normalized."""
    center, radius = 0.2, 0.8

    def raw(x: np.ndarray, k: int) -> np.ndarray:
        y = (np.asarray(x, dtype=float) - center) / radius
        out = (1.0 + x) * _bump_raw(y, k) / radius**k
        if k:
            out = out + k * _bump_raw(y, k - 1) / radius ** (k - 1)
        return out

    return Profile("asymmetric-bump", (-0.6, 1.0), raw).normalized()


def polynomial_bump() -> Profile:
    """(1 - x^2)^4 on [-1, 1], normalized."""
    poly = Polynomial([1.0, 0.0, -1.0]) ** 4

    def raw(x: np.ndarray, k: int) -> np.ndarray:
        return poly.deriv(k)(x) if k else poly(x)

    return Profile("polynomial-bump", (-1.0, 1.0), raw).normalized()


@dataclass(frozen=True)
class MollifierSpec:
    """Delta net rho_eps(x) = phi_eps(x/eps)/eps, with phi_eps fixed for model nets."""

    kind: MollifierKind
    profile_at: Callable[[float], Profile]
    name: str = "mollifier"
    integral_one: bool = True

    @classmethod
    def model(cls, profile: Optional[Profile] = None) -> "MollifierSpec":
        profile = symmetric_bump() if profile is None else profile
        if abs(profile.integral - 1.0) > 1e-12:
            raise DomainError(f"model mollifier must integrate to 1, got {profile.integral!r}")
        return cls(kind=MollifierKind.MODEL, profile_at=lambda eps: profile, name=profile.name)

    def at(self, eps: float) -> Profile:
        if not eps > 0:
            raise DomainError(f"eps must be positive, got {eps!r}")
        return self.profile_at(eps)


def _mixture(first: Profile, second: Profile, w1: float, w2: float) -> Profile:
    def raw(x: np.ndarray, k: int) -> np.ndarray:
        return w1 * first.derivative(x, k) + w2 * second.derivative(x, k)

    lo = min(first.support[0], second.support[0])
    hi = max(first.support[1], second.support[1])
    return Profile(f"{first.name}+{second.name}", (lo, hi), raw)


def strict_net(first: Optional[Profile] = None, second: Optional[Profile] = None) -> MollifierSpec:
    """
    Signed mixture (1 + theta)·phi1 - theta·phi2 with theta(eps) = (1 + sin(1/eps))/2.

    Unit integral for every eps, L1 norm at most 3, and the shape keeps changing
    as eps -> 0, so the net is strict but not a model net.
    """
    first = symmetric_bump() if first is None else first
    second = polynomial_bump() if second is None else second

    def profile_at(eps: float) -> Profile:
        theta = 0.5 * (1.0 + np.sin(1.0 / eps))
        return _mixture(first, second, 1.0 + theta, -theta)

    return MollifierSpec(kind=MollifierKind.STRICT, profile_at=profile_at, name="strict-mixture")


@dataclass(frozen=True)
class StrictNetReport:
    """Measured strict-net conditions along a schedule."""

    support_radii: tuple[float, ...]
    integrals: tuple[float, ...]
    l1_norms: tuple[float, ...]
    valid: bool


def validate_strict_net(
    m: MollifierSpec, schedule: Sequence[float], l1_bound: float = 10.0
) -> StrictNetReport:
    """
    Check shrinking support, unit integral and bounded L1 norm of rho_eps.

    Args:
        m: Mollifier
        schedule: Decreasing eps values
        l1_bound: Admissible bound for ∫|rho_eps|

    Returns:
        StrictNetReport; valid when all three conditions hold
    """
    radii, integrals, norms = [], [], []
    for eps in schedule:
        profile = m.at(eps)
        lo, hi = profile.support
        radii.append(eps * profile.reach)
        integrals.append(profile.integral)
        grid = np.linspace(lo, hi, TAIL_GRID + 1)
        pieces, _ = panel_rule(lambda x: np.abs(profile(x)), grid[:-1], grid[1:])
        norms.append(float(np.sum(pieces)))
    final = radii[0] * schedule[-1] / schedule[0] * (1 + 1e-12)
    shrinking = all(b < a for a, b in zip(radii, radii[1:])) and radii[-1] <= final
    unit = all(abs(v - 1.0) <= 1e-12 for v in integrals)
    bounded = max(norms) <= l1_bound
    return StrictNetReport(tuple(radii), tuple(integrals), tuple(norms), shrinking and unit and bounded)


class DistKind(str, Enum):
    """Distribution descriptor kinds."""

    HEAVISIDE_MINUS = "HeavisideMinus"
    HEAVISIDE_PLUS = "HeavisidePlus"
    DELTA_DERIVATIVE = "DeltaDerivative"
    PIECEWISE_L1 = "PiecewiseL1"
    JUMP = "Jump"


@dataclass(frozen=True)
class DistDescriptor:
    """
    Distribution on [0, 1] anchored at x0.

    HeavisideMinus is the indicator of [0, x0), HeavisidePlus of (x0, 1],
    Jump is left·H- + right·H+, PiecewiseL1 restricts fn to [0, 1].
    """

    kind: DistKind
    anchor: float
    order: int = 0
    fn: Optional[Callable[[np.ndarray], Any]] = None
    breakpoints: tuple[float, ...] = ()
    left: float = 1.0
    right: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.anchor < 1.0:
            raise DomainError(f"anchor must lie in (0, 1), got {self.anchor!r}")
        if self.order < 0:
            raise DomainError(f"derivative order must be >= 0, got {self.order}")
        if self.kind is DistKind.PIECEWISE_L1 and self.fn is None:
            raise DomainError("PiecewiseL1 needs a function")

    @classmethod
    def heaviside_minus(cls, x0: float) -> "DistDescriptor":
        return cls(DistKind.HEAVISIDE_MINUS, x0)

    @classmethod
    def heaviside_plus(cls, x0: float) -> "DistDescriptor":
        return cls(DistKind.HEAVISIDE_PLUS, x0)

    @classmethod
    def delta(cls, x0: float, order: int = 0) -> "DistDescriptor":
        return cls(DistKind.DELTA_DERIVATIVE, x0, order=order)

    @classmethod
    def jump(cls, left: float, right: float, x0: float) -> "DistDescriptor":
        return cls(DistKind.JUMP, x0, left=left, right=right)

    @classmethod
    def piecewise_l1(
        cls, fn: Callable[[np.ndarray], Any], x0: float, breakpoints: Sequence[float] = ()
    ) -> "DistDescriptor":
        return cls(DistKind.PIECEWISE_L1, x0, fn=fn, breakpoints=tuple(breakpoints))

    @property
    def support(self) -> tuple[float, float]:
        if self.kind is DistKind.HEAVISIDE_MINUS:
            return (0.0, self.anchor)
        if self.kind is DistKind.HEAVISIDE_PLUS:
            return (self.anchor, 1.0)
        if self.kind is DistKind.DELTA_DERIVATIVE:
            return (self.anchor, self.anchor)
        return (0.0, 1.0)

    @property
    def kinks(self) -> tuple[float, ...]:
        if self.kind is DistKind.PIECEWISE_L1:
            return tuple(sorted({0.0, 1.0, *self.breakpoints}))
        return (0.0, self.anchor, 1.0)


def _restricted(fn: Callable[[np.ndarray], Any], x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape)
    inside = (x >= 0.0) & (x <= 1.0)
    if inside.any():
        out[inside] = np.asarray(fn(x[inside]), dtype=float)
    return out


def convolve(u: DistDescriptor, rho: Profile, eps: float) -> Callable[[np.ndarray], np.ndarray]:
    """x -> (u * rho_eps)(x); analytic except for PiecewiseL1."""
    x0 = u.anchor

    def h_minus(x: np.ndarray) -> np.ndarray:
        return rho.tail((x - x0) / eps) - rho.tail(x / eps)

    def h_plus(x: np.ndarray) -> np.ndarray:
        return rho.tail((x - 1.0) / eps) - rho.tail((x - x0) / eps)

    if u.kind is DistKind.HEAVISIDE_MINUS:
        return h_minus
    if u.kind is DistKind.HEAVISIDE_PLUS:
        return h_plus
    if u.kind is DistKind.JUMP:
        return lambda x: u.left * h_minus(x) + u.right * h_plus(x)
    if u.kind is DistKind.DELTA_DERIVATIVE:
        k = u.order
        return lambda x: rho.derivative((x - x0) / eps, k) / eps ** (k + 1)

    lo, hi = rho.support
    uniform = np.linspace(lo, hi, INNER_PANELS + 1)
    kinks = np.array(u.kinks)
    fn = u.fn

    def piecewise(x: np.ndarray) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        flat = xs.reshape(-1)
        # cut [lo, hi] where x - eps·z crosses a kink of fn
        cuts = np.clip((flat[:, None] - kinks[None, :]) / eps, lo, hi)
        base = np.broadcast_to(uniform, (flat.size, uniform.size))
        edges = np.sort(np.concatenate([base, cuts], axis=1), axis=1)
        starts, ends = edges[:, :-1].reshape(-1), edges[:, 1:].reshape(-1)
        owner = np.repeat(flat, edges.shape[1] - 1)

        def integrand(z: np.ndarray) -> np.ndarray:
            pts = owner[:, None] - eps * z
            return _restricted(fn, pts.reshape(-1)).reshape(z.shape) * rho(z)

        pieces, _ = panel_rule(integrand, starts, ends)
        return pieces.reshape(flat.size, -1).sum(axis=1).reshape(xs.shape)

    return piecewise


def _conv_support(u: DistDescriptor, rho: Profile, eps: float) -> tuple[float, float]:
    lo, hi = u.support
    return lo + eps * rho.support[0], hi + eps * rho.support[1]


def mollified_pairing(
    u: DistDescriptor, v: DistDescriptor, psi: Bump, m: MollifierSpec, eps: float
) -> float:
    """
    <(u * rho_eps)·(v * rho_eps), psi> over the intersection of supports.

    Args:
        u: First factor
        v: Second factor
        psi: Test function
        m: Mollifier
        eps: Regularization width

    Returns:
        Pairing value
    """
    rho = m.at(eps)
    cu, cv = convolve(u, rho, eps), convolve(v, rho, eps)
    su, sv = _conv_support(u, rho, eps), _conv_support(v, rho, eps)
    lo = max(su[0], sv[0], psi.support[0])
    hi = min(su[1], sv[1], psi.support[1])
    if hi <= lo:
        return 0.0
    cuts = sorted(
        {k + eps * e for k in (*u.kinks, *v.kinks) for e in (*rho.support, 0.0)}
    )

    def integrand(x: np.ndarray) -> np.ndarray:
        return cu(x) * cv(x) * psi(x)

    return float(integrate(integrand, lo, hi, breakpoints=cuts).value)


def _check_schedule(schedule: Sequence[float]) -> float:
    if len(schedule) < 5:
        raise PreconditionError(f"schedule needs at least 5 entries, got {len(schedule)}")
    ratios = [b / a for a, b in zip(schedule, schedule[1:])]
    q = ratios[0]
    if not 0 < q <= 0.5 or any(abs(r - q) > 1e-9 * q for r in ratios):
        raise PreconditionError(f"schedule must be geometric with ratio <= 1/2, got ratios {ratios!r}")
    return q


def richardson(values: Sequence[float], q: float) -> float:
    """Extrapolate V(eps) = L + c1·eps + c2·eps^2 + ... on a geometric schedule of ratio q."""
    table = list(values)
    for j in range(1, len(table)):
        factor = q**j
        table = [(table[i + 1] - factor * table[i]) / (1.0 - factor) for i in range(len(table) - 1)]
    return table[0]


def model_product_limit(
    u: DistDescriptor,
    v: DistDescriptor,
    psi: Bump,
    m: MollifierSpec,
    schedule: Sequence[float],
) -> ProductLimit:
    """
    Classify the eps -> 0 behavior of the mollified pairing.

    Converged when successive differences contract (ratio <= 0.75 over the last
    three steps), with a Richardson-extrapolated limit; Diverged when the values
    grow (ratio >= 1.5), with the exponent fitted on log-log axes.

    Raises:
        PreconditionError: If the schedule is too short or not geometric
        InconclusiveLimitError: If neither pattern fits
    """
    q = _check_schedule(schedule)
    values = np.array([mollified_pairing(u, v, psi, m, eps) for eps in schedule])
    eps = tuple(float(e) for e in schedule)
    magnitude = np.abs(values)
    diffs = np.abs(np.diff(values))
    floor = 1e-13 * (1.0 + magnitude.max())

    if np.all(diffs[-3:] <= floor):
        return ProductLimit(
            kind=LimitKind.CONVERGED, value=float(values[-1]), eps=eps, pairings=tuple(values)
        )

    contraction = diffs[1:] / np.where(diffs[:-1] > 0, diffs[:-1], np.inf)
    if np.all(contraction[-3:] <= CONTRACTION_RATIO):
        depth = min(RICHARDSON_DEPTH, values.size)
        limit = richardson(values[-depth:], q)
        rate = float(np.log(diffs[-2] / diffs[-1]) / np.log(1.0 / q)) if diffs[-1] > 0 else None
        logger.debug(f"pairing converged to {limit:.12g} (rate {rate})")
        return ProductLimit(
            kind=LimitKind.CONVERGED, value=float(limit), rate=rate, eps=eps, pairings=tuple(values)
        )

    growth = magnitude[1:] / np.where(magnitude[:-1] > 0, magnitude[:-1], np.inf)
    if np.all(growth[-3:] >= GROWTH_RATIO):
        slope = np.polyfit(np.log(np.array(eps)), np.log(magnitude), 1)[0]
        logger.debug(f"pairing diverges with exponent {-slope:.4f}")
        return ProductLimit(
            kind=LimitKind.DIVERGED, growth_exponent=float(-slope), eps=eps, pairings=tuple(values)
        )

    raise InconclusiveLimitError(
        f"pairings neither contract nor grow: {values.tolist()!r}",
        pairings=str(values.tolist()),
    )


def support_check(
    u: DistDescriptor, v: DistDescriptor, psi: Bump, m: MollifierSpec, eps: float
) -> float:
    """
    Pairing for a test function supported away from [0, 1]; zero by support.

    Raises:
        PreconditionError: If supp psi meets [0, 1] inflated by eps·reach(phi)
    """
    reach = eps * m.at(eps).reach
    lo, hi = psi.support
    if hi > -reach and lo < 1.0 + reach:
        raise PreconditionError(
            f"test function support [{lo!r}, {hi!r}] meets [0, 1] inflated by {reach!r}"
        )
    return mollified_pairing(u, v, psi, m, eps)
