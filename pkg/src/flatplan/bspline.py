"""Clamped uniform B-spline bases, curves, derivative matrices and inclusion tests.

Curves are evaluated on the half-open interval [first knot, last knot); the
left limit is substituted when a caller asks for the last knot itself, which
for clamped curves equals the final control point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterOutOfRangeError, UnsupportedOrderError

UNIFORMITY_RTOL = 1e-12


@dataclass(frozen=True)
class KnotVector:
    """Clamped, uniform knot vector with endpoint multiplicity degree+1.

    With knots tau_0..tau_nu and degree d, the spline has N+1 = nu-d control
    points.  Interior spacings must be equal to within 1e-12 relative.
    """

    degree: int
    knots: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=float))
        d, tau = self.degree, self.knots
        if d < 0:
            raise ValueError("degree must be nonnegative")
        if tau.ndim != 1:
            raise ValueError("knots must be a 1-D array")
        nu = len(tau) - 1
        if nu < 2 * d + 1:
            raise ValueError("knot vector too short: need at least one interior span")
        if np.any(np.diff(tau) < 0):
            raise ValueError("knots must be nondecreasing")
        if tau[0] != tau[d] or tau[nu - d] != tau[nu]:
            raise ValueError("knot vector is not clamped with multiplicity degree+1")
        spacings = np.diff(tau[d : nu - d + 1])
        if len(spacings) > 0:
            mean = np.mean(spacings)
            if mean <= 0:
                raise ValueError("domain has zero width")
            if np.max(np.abs(spacings - mean)) > UNIFORMITY_RTOL * max(mean, abs(tau[-1])):
                raise ValueError("interior knot spacings are not uniform")

    @staticmethod
    def clamped_uniform(degree: int, num_ctrl: int, start: float = 0.0, end: float = 1.0) -> "KnotVector":
        """Equally spaced interior knots, endpoints repeated degree+1 times."""
        if num_ctrl < degree + 1:
            raise ValueError("need at least degree+1 control points")
        if not end > start:
            raise ValueError("end must exceed start")
        n_spans = num_ctrl - degree
        interior = np.linspace(start, end, n_spans + 1)
        knots = np.concatenate([np.full(degree, start), interior, np.full(degree, end)])
        return KnotVector(degree, knots)

    @property
    def num_ctrl(self) -> int:
        return len(self.knots) - self.degree - 1

    @property
    def start(self) -> float:
        return float(self.knots[0])

    @property
    def end(self) -> float:
        return float(self.knots[-1])

    def basis_count(self, degree: int) -> int:
        """Number of basis functions of the given degree over these knots."""
        return len(self.knots) - 1 - degree


@dataclass(frozen=True)
class BSplineCurve:
    """B-spline curve with control points stored as an m x (N+1) matrix."""

    knots: KnotVector
    control: np.ndarray

    def __post_init__(self):
        ctrl = np.atleast_2d(np.asarray(self.control, dtype=float))
        object.__setattr__(self, "control", ctrl)
        if ctrl.shape[1] != self.knots.num_ctrl:
            raise ValueError(
                f"control matrix has {ctrl.shape[1]} columns, "
                f"knot vector expects {self.knots.num_ctrl}"
            )

    @property
    def dim(self) -> int:
        return self.control.shape[0]


@dataclass(frozen=True)
class DerivativeBasisMatrix:
    """Matrix mapping control points to virtual control points of order r."""

    order: int
    matrix: np.ndarray


def _find_spans(kv: KnotVector, ts: np.ndarray, allow_end: bool) -> np.ndarray:
    knots = kv.knots
    lo, hi = knots[0], knots[-1]
    at_end = ts == hi
    inside = (ts >= lo) & (ts < hi)
    ok = inside | at_end if allow_end else inside
    if not np.all(ok):
        bad = float(ts[~ok][0])
        raise ParameterOutOfRangeError(
            f"parameter {bad} outside [{lo}, {hi}" + ("]" if allow_end else ")")
        )
    spans = np.searchsorted(knots, ts, side="right") - 1
    if np.any(at_end):
        last_span = int(np.searchsorted(knots, hi, side="left")) - 1
        spans = np.where(at_end, last_span, spans)
    return spans


def basis_matrix(kv: KnotVector, degree: int, ts: np.ndarray, *, allow_end: bool = True) -> np.ndarray:
    """All basis values of the given degree at each parameter.

    Returns an array of shape (len(ts), basis_count(degree)).  Parameters
    equal to the last knot evaluate to the left limit when allow_end is set.
    """
    if degree < 0 or degree > kv.degree:
        raise UnsupportedOrderError(f"basis degree {degree} not in 0..{kv.degree}")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    knots = kv.knots
    spans = _find_spans(kv, ts, allow_end)
    n, p = len(ts), degree

    # Triangular Cox-de Boor scheme, vectorized across evaluation points.
    vals = np.zeros((n, p + 1))
    vals[:, 0] = 1.0
    left = np.empty((n, p + 1))
    right = np.empty((n, p + 1))
    for j in range(1, p + 1):
        left[:, j] = ts - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - ts
    for j in range(1, p + 1):
        saved = np.zeros(n)
        for rr in range(j):
            denom = right[:, rr + 1] + left[:, j - rr]
            temp = vals[:, rr] / denom
            vals[:, rr] = saved + right[:, rr + 1] * temp
            saved = left[:, j - rr] * temp
        vals[:, j] = saved

    out = np.zeros((n, kv.basis_count(degree)))
    cols = spans[:, None] - p + np.arange(p + 1)[None, :]
    out[np.arange(n)[:, None], cols] = vals
    return out


def eval_basis(kv: KnotVector, degree: int, t: float) -> np.ndarray:
    """Basis values of the given degree at one parameter in [tau_0, tau_nu)."""
    return basis_matrix(kv, degree, np.array([float(t)]), allow_end=False)[0]


def _difference_matrix(kv: KnotVector, deg: int) -> np.ndarray:
    """Coefficient map for differentiating a degree-deg spline over kv.knots.

    Maps basis_count(deg) coefficients to basis_count(deg-1) coefficients.
    Columns whose knot difference vanishes multiply identically-zero basis
    functions and stay zero.
    """
    knots = kv.knots
    rows = kv.basis_count(deg)
    cols = kv.basis_count(deg - 1)
    D = np.zeros((rows, cols))
    for k in range(cols):
        denom = knots[k + deg] - knots[k]
        if denom <= 0.0:
            continue
        coef = deg / denom
        if k < rows:
            D[k, k] += coef
        if k >= 1:
            D[k - 1, k] -= coef
    return D


def derivative_matrix(kv: KnotVector, r: int) -> DerivativeBasisMatrix:
    """Matrix B_r with P @ B_r the order-r virtual control points."""
    if r < 0 or r > kv.degree:
        raise UnsupportedOrderError(f"derivative order {r} not in 0..{kv.degree}")
    B = np.eye(kv.num_ctrl)
    for k in range(r):
        B = B @ _difference_matrix(kv, kv.degree - k)
    return DerivativeBasisMatrix(order=r, matrix=B)


def virtual_control_points(curve: BSplineCurve, r: int) -> np.ndarray:
    """Order-r virtual control points as an m x (N+r+1) matrix."""
    return curve.control @ derivative_matrix(curve.knots, r).matrix


def sample_curve(curve: BSplineCurve, r: int, ts: np.ndarray) -> np.ndarray:
    """r-th derivative of the curve at each parameter; shape (m, len(ts))."""
    vcp = virtual_control_points(curve, r)
    lam = basis_matrix(curve.knots, curve.knots.degree - r, ts)
    return vcp @ lam.T


def eval_curve(curve: BSplineCurve, r: int, t: float) -> np.ndarray:
    """r-th derivative at a single parameter; the last knot gives the left limit."""
    return sample_curve(curve, r, np.array([float(t)]))[:, 0]


def inclusion_certificate(curve: BSplineCurve, r: int, predicate: Callable[[np.ndarray], bool]) -> bool:
    """Sufficient convex-membership test for the whole derivative curve.

    True when every order-r virtual control point with index r..N satisfies
    the predicate; membership of the points then implies membership of
    the derivative curve on the half-open knot interval.  False certifies
    nothing (one-sided test).
    """
    vcp = virtual_control_points(curve, r)
    n_last = curve.knots.num_ctrl - 1
    return all(bool(predicate(vcp[:, j])) for j in range(r, n_last + 1))


def derivative_squared_gram(kv: KnotVector, r: int) -> np.ndarray:
    """Gram matrix Q with p^T Q p the integral of the squared r-th derivative.

    For a one-dimensional coefficient row p, integrating the squared r-th
    derivative of the spline over the full knot interval equals p Q p^T;
    multi-dimensional curves sum the quadratic form over coordinate rows.
    Per-span Gauss-Legendre with degree-d+1-r nodes is exact for the
    piecewise-polynomial integrand.
    """
    B = derivative_matrix(kv, r).matrix
    deg = kv.degree - r
    knots = kv.knots
    nodes_per_span = deg + 1
    xs, ws = np.polynomial.legendre.leggauss(nodes_per_span)

    params, weights = [], []
    for i in range(len(knots) - 1):
        a, b = knots[i], knots[i + 1]
        if b <= a:
            continue
        half = 0.5 * (b - a)
        params.append(a + half * (xs + 1.0))
        weights.append(ws * half)
    params = np.concatenate(params)
    weights = np.concatenate(weights)

    lam = basis_matrix(kv, deg, params)
    G = lam.T @ (weights[:, None] * lam)
    return B @ G @ B.T
