"""Globally adaptive Gauss-Kronrod quadrature with integrable endpoint singularities."""

import heapq
import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from ..models.beam import ForcingTerm, Singularity
from ..models.config import get_settings
from ..utils.errors import QuadratureError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 constants)
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

_EPS = np.finfo(float).eps

# pieces closer than this many ulps to a singular point use a local power model
_TAIL_ULPS = 2.0**26


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value (scalar or vector), error estimate and panel count."""

    value: Any
    error: float
    panels: int


@dataclass(frozen=True)
class _Segment:
    """Integration segment in a (possibly substituted) variable tau."""

    origin: float
    direction: float
    power: float

    def to_x(self, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.power == 1.0:
            return self.origin + self.direction * tau, np.ones_like(tau)
        x = self.origin + self.direction * tau**self.power
        jac = self.power * tau ** (self.power - 1.0)
        return x, jac


@dataclass(frozen=True)
class _Tail:
    """
    Piece at distances [near, far] from a singular point, far within a few million ulps.

    Abscissae this close to the anchor cannot resolve the distance to it, so the
    integrand is modelled as c(d)·d^exponent with c linear in d, fitted from two
    samples whose distance is recomputed from the rounded abscissa.
    """

    anchor: float
    direction: float
    exponent: float
    near: float
    far: float

    def integrate(self, f: Callable[[np.ndarray], Any]) -> tuple[Any, float, float]:
        x = self.anchor + self.direction * np.array([0.5 * (self.near + self.far), self.far])
        d = np.abs(x - self.anchor)
        if not 0.0 < d[0] < d[1]:
            x, d = x[1:], d[1:]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            fx = np.asarray(f(x), dtype=float)
        if fx.shape[:1] != x.shape:
            fx = np.broadcast_to(fx, x.shape + fx.shape[1:] if fx.ndim else x.shape)
        if not np.all(np.isfinite(fx)):
            raise QuadratureError(
                f"non-finite integrand near x = {float(x[0])!r}; undeclared singularity?",
                at=float(x[0]),
            )
        shape = x.shape + (1,) * (fx.ndim - 1)
        c = fx * (d ** -self.exponent).reshape(shape)
        slope = (c[1] - c[0]) / (d[1] - d[0]) if d.size == 2 else np.zeros_like(c[0])
        base = c[0] - slope * d[0]
        p, q = 1.0 + self.exponent, 2.0 + self.exponent
        lead = base * (self.far**p - self.near**p) / p
        linear = slope * (self.far**q - self.near**q) / q
        value = lead + linear
        resabs = float(np.max(np.abs(lead) + np.abs(linear)))
        # next-order term, with the curvature scale taken from the unit interval
        err = float(np.max(np.abs(linear))) * self.far + 50.0 * _EPS * resabs
        return value, err, resabs


def _tail_width(anchor: float) -> float:
    return _TAIL_ULPS * float(np.spacing(max(abs(anchor), 1.0)))


def _panel(
    f: Callable[[np.ndarray], Any], seg: _Segment, lo: float, hi: float
) -> tuple[np.ndarray, float, float]:
    half = 0.5 * (hi - lo)
    center = 0.5 * (hi + lo)
    tau = center + half * NODES
    x, jac = seg.to_x(tau)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fx = np.asarray(f(x), dtype=float)
    if fx.shape[:1] != (15,):
        fx = np.broadcast_to(fx, (15,) + fx.shape[1:] if fx.ndim else (15,))
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx.reshape(15, -1)).all(axis=1)]
        raise QuadratureError(
            f"non-finite integrand near x = {float(bad[0])!r}; undeclared singularity?",
            at=float(bad[0]),
        )
    shape = (15,) + (1,) * (fx.ndim - 1)
    fj = fx * (jac * seg.direction).reshape(shape)
    wk = KRONROD_WEIGHTS.reshape(shape)
    wg = GAUSS_WEIGHTS.reshape(shape)
    kronrod = np.sum(wk * fj, axis=0) * half
    gauss = np.sum(wg * fj, axis=0) * half
    mean = kronrod / (2.0 * half) if half else kronrod
    resabs = np.sum(wk * np.abs(fj), axis=0) * abs(half)
    resasc = np.sum(wk * np.abs(fj - mean), axis=0) * abs(half)
    err = np.abs(kronrod - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = 200.0 * err / np.where(resasc > 0, resasc, 1.0)
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, ratio**1.5), err)
    scaled = np.maximum(scaled, 50.0 * _EPS * resabs)
    return kronrod, float(np.max(scaled)), float(np.max(resabs))


def panel_rule(
    f: Callable[[np.ndarray], np.ndarray], starts: np.ndarray, ends: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    One Gauss-Kronrod panel on each of many intervals at once.

    Args:
        f: Maps abscissae of shape (m, 15) to values of shape (m, 15) or (m, 15, k)
        starts: Interval starts, shape (m,)
        ends: Interval ends, shape (m,)

    Returns:
        (kronrod, error) with kronrod of shape (m,) or (m, k) and error of shape (m,)
    """
    half = 0.5 * (ends - starts)
    center = 0.5 * (ends + starts)
    x = center[:, None] + half[:, None] * NODES[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fx = np.asarray(f(x), dtype=float)
    extra = (1,) * (fx.ndim - 2)
    wk = KRONROD_WEIGHTS.reshape((1, 15) + extra)
    wg = GAUSS_WEIGHTS.reshape((1, 15) + extra)
    hs = half.reshape((-1,) + extra)
    kronrod = np.sum(wk * fx, axis=1) * hs
    gauss = np.sum(wg * fx, axis=1) * hs
    err = np.abs(kronrod - gauss)
    if err.ndim > 1:
        err = err.max(axis=tuple(range(1, err.ndim)))
    err = np.where(np.isfinite(err), err, np.inf)
    return kronrod, err


def _split_points(
    a: float, b: float, breakpoints: Iterable[float], singularities: Sequence[Singularity]
) -> tuple[list[float], dict[float, tuple[float, float]]]:
    anchors = {s.location: (s.location, s.exponent) for s in singularities if a <= s.location <= b}
    cuts = {a, b}
    cuts.update(p for p in breakpoints if a < p < b)
    cuts.update(anchors)
    # a singular point just outside [a, b] still governs the nearer end
    for s in singularities:
        if s.location < a and a - s.location < _tail_width(s.location):
            anchors.setdefault(a, (s.location, s.exponent))
        elif s.location > b and s.location - b < _tail_width(s.location):
            anchors.setdefault(b, (s.location, s.exponent))
    ordered = sorted(cuts)
    # an interval singular at both ends is split so each piece has one singular end
    refined = [ordered[0]]
    for left, right in zip(ordered[:-1], ordered[1:]):
        if left in anchors and right in anchors:
            refined.append(0.5 * (left + right))
        refined.append(right)
    return refined, anchors


def _pieces(
    cuts: list[float], anchors: dict[float, tuple[float, float]]
) -> tuple[list[tuple[_Segment, float, float]], list[_Tail]]:
    segments: list[tuple[_Segment, float, float]] = []
    tails: list[_Tail] = []
    for left, right in zip(cuts[:-1], cuts[1:]):
        if right <= left:
            continue
        if left in anchors:
            (anchor, exponent), direction = anchors[left], 1.0
            near, far = left - anchor, right - anchor
        elif right in anchors:
            (anchor, exponent), direction = anchors[right], -1.0
            near, far = anchor - right, anchor - left
        else:
            segments.append((_Segment(left, 1.0, 1.0), 0.0, right - left))
            continue
        width = _tail_width(anchor)
        if far <= 2.0 * width:
            tails.append(_Tail(anchor, direction, exponent, near, far))
            continue
        if near < width:
            tails.append(_Tail(anchor, direction, exponent, near, width))
        start = max(near, width)
        power = 1.0 / (1.0 + exponent)
        seg = _Segment(anchor, direction, power)
        lo, hi = start ** (1.0 / power), far ** (1.0 / power)
        # on a right-hand singular end tau runs from the regular end inwards
        segments.append((seg, lo, hi) if direction > 0 else (seg, hi, lo))
    return segments, tails


def integrate(
    f: Callable[[np.ndarray], Any],
    a: float,
    b: float,
    *,
    breakpoints: Iterable[float] = (),
    singularities: Sequence[Singularity] = (),
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
    max_subdivisions: Optional[int] = None,
) -> QuadratureResult:
    """
    Integrate a vectorized function over [a, b] by global adaptive bisection.

    Args:
        f: Maps an array of abscissae of shape (n,) to values of shape (n,) or (n, m)
        a: Lower limit (a > b flips the sign)
        b: Upper limit
        breakpoints: Mandatory split points
        singularities: Integrable power singularities removed by the substitution
            x = sigma +- tau^(1/(1+alpha)) on the adjacent panels; the last
            few million ulps next to sigma (or an end that close to it) use a
            local power model instead of abscissae that cannot resolve sigma
        abs_tol: Absolute tolerance (settings default)
        rel_tol: Relative tolerance (settings default)
        max_subdivisions: Bisection cap (settings default)

    Returns:
        QuadratureResult with the value and the summed error estimate

    Raises:
        QuadratureError: If the cap is exceeded or the integrand is not finite
    """
    if a == b:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            sample = np.asarray(f(np.array([a])), dtype=float)
        zero = np.zeros(sample.shape[1:]) if sample.ndim > 1 else 0.0
        return QuadratureResult(value=zero, error=0.0, panels=0)
    if a > b:
        res = integrate(
            f,
            b,
            a,
            breakpoints=breakpoints,
            singularities=singularities,
            abs_tol=abs_tol,
            rel_tol=rel_tol,
            max_subdivisions=max_subdivisions,
        )
        return QuadratureResult(value=-res.value, error=res.error, panels=res.panels)

    settings = get_settings()
    abs_tol = settings.quad_abs_tol if abs_tol is None else abs_tol
    rel_tol = settings.quad_rel_tol if rel_tol is None else rel_tol
    limit = settings.quad_max_subdivisions if max_subdivisions is None else max_subdivisions

    cuts, anchors = _split_points(a, b, breakpoints, singularities)
    segments, tails = _pieces(cuts, anchors)
    counter = itertools.count()
    heap: list = []
    total = None
    total_err = 0.0
    total_abs = 0.0
    # tails and exhausted panels cannot be refined; their error is reported only
    settled_err = 0.0

    for tail in tails:
        val, err, rabs = tail.integrate(f)
        total = val if total is None else total + val
        settled_err += err
        total_abs += rabs

    for seg, lo, hi in segments:
        val, err, rabs = _panel(f, seg, lo, hi)
        total = val if total is None else total + val
        total_err += err
        total_abs += rabs
        heapq.heappush(heap, (-err, next(counter), seg, lo, hi, val, err, rabs))

    if total is None:
        return QuadratureResult(value=0.0, error=0.0, panels=0)

    subdivisions = 0
    while True:
        magnitude = float(np.max(np.abs(total)))
        tol = max(abs_tol, rel_tol * magnitude, 100.0 * _EPS * total_abs)
        if total_err <= tol or not heap:
            break
        if subdivisions >= limit:
            raise QuadratureError(
                f"adaptive quadrature on [{a!r}, {b!r}] exceeded {limit} subdivisions "
                f"(error estimate {total_err:.3e} > {tol:.3e})",
                subdivisions=subdivisions,
            )
        _, _, seg, lo, hi, val, err, rabs = heapq.heappop(heap)
        total = total - val
        total_err -= err
        total_abs -= rabs
        mid = 0.5 * (lo + hi)
        if not (min(lo, hi) < mid < max(lo, hi)):
            # panel exhausted in floating point; keep its estimate as final
            total = total + val
            settled_err += err
            total_abs += rabs
            continue
        for sub_lo, sub_hi in ((lo, mid), (mid, hi)):
            sval, serr, sabs = _panel(f, seg, sub_lo, sub_hi)
            total = total + sval
            total_err += serr
            total_abs += sabs
            heapq.heappush(heap, (-serr, next(counter), seg, sub_lo, sub_hi, sval, serr, sabs))
        subdivisions += 1

    value = total if np.ndim(total) else float(total)
    if subdivisions:
        logger.debug(f"quadrature on [{a:.6g}, {b:.6g}] used {subdivisions} subdivisions")
    return QuadratureResult(value=value, error=total_err + settled_err, panels=len(heap))


def integrate_forcing(
    g: ForcingTerm,
    a: float,
    b: float,
    weight: Optional[Callable[[np.ndarray], Any]] = None,
    breakpoints: Iterable[float] = (),
) -> Any:
    """Integral of weight(x)·g(x) over [a, b], honoring g's singularities."""
    if weight is None:
        func = g
    else:

        def func(x: np.ndarray) -> Any:
            w = np.asarray(weight(x), dtype=float)
            gx = g(x)
            return w * (gx if w.ndim == 1 else gx[:, None])

    return integrate(func, a, b, breakpoints=breakpoints, singularities=g.singularities).value


def near_singularity(
    g: ForcingTerm, nodes: np.ndarray, h: float, cells: Optional[int] = None
) -> np.ndarray:
    """Mask of nodes within `cells` grid cells of a declared singularity of g."""
    cells = get_settings().singular_window_cells if cells is None else cells
    mask = np.zeros(nodes.shape, dtype=bool)
    for loc in g.singular_points:
        mask |= np.abs(nodes - loc) <= cells * h
    return mask


def hat_average(g: ForcingTerm, x: float, h: float) -> float:
    """(1/h)·∫ g(y)·(1 - |y - x|/h) dy over [x - h, x + h]."""
    left = integrate_forcing(g, x - h, x, weight=lambda y: (y - (x - h)) / h)
    right = integrate_forcing(g, x, x + h, weight=lambda y: ((x + h) - y) / h)
    return (left + right) / h


def sample_forcing(g: ForcingTerm, nodes: np.ndarray, h: float, cells: Optional[int] = None) -> np.ndarray:
    """
    Right-hand side samples for a three-point second-difference scheme.

    Point values away from singularities; hat-weighted cell averages on
    nodes inside the singular window.
    """
    values = np.zeros(nodes.shape)
    window = near_singularity(g, nodes, h, cells)
    regular = ~window
    if regular.any():
        values[regular] = g(nodes[regular])
    for i in np.flatnonzero(window):
        values[i] = hat_average(g, float(nodes[i]), h)
    if window.any():
        logger.debug(f"{int(window.sum())} nodes use hat-weighted forcing averages")
    if not np.all(np.isfinite(values)):
        raise QuadratureError("forcing term is not finite at a grid node outside declared singularities")
    return values
