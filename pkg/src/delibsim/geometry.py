"""Metric primitives and constructive proposal geometry.

Points are coordinate tuples under Euclidean metrics and string ids under
explicit (matrix-backed) metrics.  Every function here is pure; callers own
all state.  Synthesized proposals must beat the status quo by at least
``APPROVAL_MARGIN`` so that downstream strict comparisons are float-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize

Coords = tuple[float, ...]
PointRef = Union[Coords, str]

MAX_DIMENSION = 8
APPROVAL_MARGIN = 1e-9
HULL_TOLERANCE = 1e-9
HULL_ITERATION_CAP = 10_000
MINMAX_TOLERANCE = 1e-7

_TRIANGLE_SLACK = 1e-12
_WEIGHT_FLOOR = 1e-14


class MetricError(ValueError):
    """Invalid metric definition or unresolvable point reference."""

    def __init__(self, message: str, clause: str = "metric"):
        super().__init__(message)
        self.clause = clause


class SolverError(RuntimeError):
    """A geometry solver failed to converge within its iteration budget."""


@dataclass(frozen=True)
class EuclideanMetric:
    """Euclidean distance over coordinate tuples of a fixed dimension."""

    dimension: int

    def __post_init__(self):
        if not isinstance(self.dimension, int) or not 1 <= self.dimension <= MAX_DIMENSION:
            raise MetricError(
                f"dimension must be an integer in 1..{MAX_DIMENSION}, got {self.dimension!r}",
                clause="space.dimension",
            )


@dataclass(frozen=True)
class ExplicitMetric:
    """Finite metric given as a symmetric distance matrix over named points.

    Validated on construction: square shape, zero diagonal, symmetry,
    strictly positive off-diagonal entries, and the triangle inequality
    checked exhaustively over all ordered triples.
    """

    ids: tuple[str, ...]
    matrix: tuple[tuple[float, ...], ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(self.ids)
        if len(ids) != len(set(ids)):
            raise MetricError("duplicate point ids in explicit metric", clause="metric.ids")
        k = len(ids)
        if k == 0:
            raise MetricError("explicit metric needs at least one point", clause="metric.ids")
        rows = tuple(tuple(float(x) for x in row) for row in self.matrix)
        if len(rows) != k or any(len(row) != k for row in rows):
            raise MetricError(f"distance matrix must be {k}x{k}", clause="metric.shape")
        for i in range(k):
            if rows[i][i] != 0.0:
                raise MetricError(
                    f"nonzero diagonal at {ids[i]!r}: {rows[i][i]}", clause="metric.diagonal"
                )
            for j in range(k):
                if not math.isfinite(rows[i][j]):
                    raise MetricError(
                        f"non-finite distance at ({ids[i]!r}, {ids[j]!r})", clause="metric.finite"
                    )
                if rows[i][j] != rows[j][i]:
                    raise MetricError(
                        f"asymmetric entries at ({ids[i]!r}, {ids[j]!r})", clause="metric.symmetry"
                    )
                if i != j and rows[i][j] <= 0.0:
                    raise MetricError(
                        f"non-positive distance between distinct points ({ids[i]!r}, {ids[j]!r})",
                        clause="metric.positivity",
                    )
        for i in range(k):
            for j in range(k):
                for l in range(k):
                    if rows[i][j] > rows[i][l] + rows[l][j] + _TRIANGLE_SLACK:
                        raise MetricError(
                            f"triangle inequality violated for ({ids[i]!r}, {ids[l]!r}, {ids[j]!r})",
                            clause="metric.triangle",
                        )
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "_index", {pid: i for i, pid in enumerate(ids)})

    def distance_between(self, a: str, b: str) -> float:
        try:
            return self.matrix[self._index[a]][self._index[b]]
        except KeyError as exc:
            raise MetricError(f"unknown point id {exc.args[0]!r}", clause="metric.unknown_id") from None


Metric = Union[EuclideanMetric, ExplicitMetric]


def _check_coords(p: Sequence[float], dimension: int) -> Coords:
    coords = tuple(float(c) for c in p)
    if len(coords) != dimension:
        raise MetricError(
            f"expected {dimension} coordinates, got {len(coords)}", clause="space.dimension"
        )
    if not all(math.isfinite(c) for c in coords):
        raise MetricError("non-finite coordinate", clause="space.coords")
    return coords


def distance(a: PointRef, b: PointRef, metric: Metric) -> float:
    """Distance between two points under the given metric."""
    if isinstance(metric, EuclideanMetric):
        if isinstance(a, str) or isinstance(b, str):
            raise MetricError("euclidean metric takes coordinate tuples, not ids", clause="metric.kind")
        return math.dist(_check_coords(a, metric.dimension), _check_coords(b, metric.dimension))
    if not isinstance(a, str) or not isinstance(b, str):
        raise MetricError("explicit metric takes point ids, not coordinates", clause="metric.kind")
    return metric.distance_between(a, b)


def approves(agent: PointRef, proposal: PointRef, status_quo: PointRef, metric: Metric) -> bool:
    """Strict approval: the proposal is closer to the agent than the status quo.

    Ties count as not approved; there is no epsilon in this comparison.
    """
    return distance(agent, proposal, metric) < distance(agent, status_quo, metric)


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of a joint-proposal search: a witness point and its margin.

    ``margin ==`` max over the target agents of (distance to witness minus
    distance to the status quo); the witness is a joint-approval proposal
    iff the margin is below ``-APPROVAL_MARGIN``.
    """

    witness: Coords
    margin: float

    @property
    def feasible(self) -> bool:
        return self.margin < -APPROVAL_MARGIN


def _point_rows(points: Iterable[Sequence[float]]) -> np.ndarray:
    rows = np.asarray([tuple(float(c) for c in p) for p in points], dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise MetricError("need a non-empty sequence of coordinate points", clause="space.coords")
    if not np.all(np.isfinite(rows)):
        raise MetricError("non-finite coordinate", clause="space.coords")
    return rows


def _affine_minimizer(active_rows: np.ndarray) -> np.ndarray:
    # Minimize ||sum_i w_i q_i|| subject to sum_i w_i = 1 via the KKT system.
    m = active_rows.shape[0]
    system = np.zeros((m + 1, m + 1))
    system[:m, :m] = active_rows @ active_rows.T
    system[:m, m] = 1.0
    system[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    try:
        sol = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(system, rhs, rcond=None)[0]
    return sol[:m]


def nearest_point_in_hull(
    target: Sequence[float], generators: Iterable[Sequence[float]]
) -> tuple[Coords, float]:
    """Nearest point of conv(generators) to the target, with its distance.

    Wolfe's minimum-norm-point scheme, the fully corrective conditional
    gradient method: major cycles add the generator most aligned with the
    descent direction, minor cycles re-solve the affine minimizer over the
    active set and drop generators whose weight would turn negative.  Ties
    break toward the lowest input index, so the result is deterministic in
    the generator order.  Terminates finitely in exact arithmetic; a cap of
    ``HULL_ITERATION_CAP`` major cycles guards float stalls.
    """
    pts = _point_rows(generators)
    tgt = np.asarray(tuple(float(c) for c in target), dtype=float)
    if tgt.shape != (pts.shape[1],):
        raise MetricError("target dimension does not match generators", clause="space.dimension")

    # Exact duplicates make the minor cycle degenerate; keep first occurrences.
    seen: dict[bytes, int] = {}
    keep = []
    for i in range(pts.shape[0]):
        key = pts[i].tobytes()
        if key not in seen:
            seen[key] = i
            keep.append(i)
    pts = pts[keep]

    q = pts - tgt
    sq_norms = np.einsum("ij,ij->i", q, q)
    scale = 1.0 + float(sq_norms.max())
    stop_tol = 1e-12 * scale

    active = [int(np.argmin(sq_norms))]
    weights = np.array([1.0])
    x = q[active[0]].copy()

    for _ in range(HULL_ITERATION_CAP):
        dots = q @ x
        candidate = int(np.argmin(dots))
        if dots[candidate] >= float(x @ x) - stop_tol:
            break
        if candidate in active:
            break
        active.append(candidate)
        weights = np.append(weights, 0.0)
        while True:
            alpha = _affine_minimizer(q[active])
            if np.all(alpha > _WEIGHT_FLOOR):
                weights = alpha
                break
            mask = alpha <= _WEIGHT_FLOOR
            denom = weights - alpha
            ratios = np.full(len(alpha), np.inf)
            ok = mask & (denom > 1e-300)
            ratios[ok] = weights[ok] / denom[ok]
            drop = int(np.argmin(ratios))
            theta = min(1.0, float(ratios[drop]))
            weights = theta * alpha + (1.0 - theta) * weights
            weights[drop] = 0.0
            weights[weights < _WEIGHT_FLOOR] = 0.0
            keep_mask = weights > 0.0
            if not np.any(keep_mask):
                keep_mask[drop] = True
                weights[drop] = 1.0
            active = [a for a, k in zip(active, keep_mask) if k]
            weights = weights[keep_mask]
            weights = weights / weights.sum()
            if len(active) == 1:
                break
        x = weights @ q[active]

    point = tuple(float(c) for c in (x + tgt))
    return point, float(np.linalg.norm(x))


def separated_proposal(
    agents: Iterable[Sequence[float]], status_quo: Sequence[float]
) -> Optional[Coords]:
    """Nearest hull point of the agents if it clears the status quo, else None.

    When the hull misses the status quo by more than ``APPROVAL_MARGIN`` the
    projection point q satisfies dist(v, r)^2 >= dist(v, q)^2 + dist(q, r)^2
    for every generator v, so every agent strictly approves q.
    """
    point, dist_to_hull = nearest_point_in_hull(status_quo, agents)
    if dist_to_hull > APPROVAL_MARGIN:
        return point
    return None


def _max_slack(pts: np.ndarray, radii: np.ndarray, p: np.ndarray) -> float:
    return float((np.linalg.norm(pts - p, axis=1) - radii).max())


def best_common_proposal(
    agents: Iterable[Sequence[float]], status_quo: Sequence[float]
) -> FeasibilityResult:
    """Minimize the worst approval slack max_v (dist(v, p) - dist(v, r)).

    The objective is convex (a max of norms minus constants), so the global
    margin is what the minimizer finds.  Solved in epigraph form
    (min s subject to dist(p, v_i) - rad_i <= s) with SLSQP from several
    deterministic starts: the status quo, each agent and the centroid; the
    best converged candidate wins, ties by start order.  The reported margin
    is recomputed exactly at the witness, so it is always a true upper bound
    on the optimum.  Raises ``SolverError`` if no start converges.
    """
    pts = _point_rows(agents)
    r = np.asarray(tuple(float(c) for c in status_quo), dtype=float)
    if r.shape != (pts.shape[1],):
        raise MetricError("status quo dimension does not match agents", clause="space.dimension")
    radii = np.linalg.norm(pts - r, axis=1)

    if pts.shape[0] == 1:
        return FeasibilityResult(tuple(float(c) for c in pts[0]), -float(radii[0]))

    d = pts.shape[1]
    objective_grad = np.zeros(d + 1)
    objective_grad[-1] = 1.0

    def constraint_values(z):
        p = z[:-1]
        return z[-1] - (np.linalg.norm(pts - p, axis=1) - radii)

    def constraint_jac(z):
        p = z[:-1]
        diffs = p - pts
        norms = np.linalg.norm(diffs, axis=1)
        norms = np.where(norms < 1e-12, 1.0, norms)
        jac = np.empty((pts.shape[0], d + 1))
        jac[:, :d] = -diffs / norms[:, None]
        jac[:, -1] = 1.0
        return jac

    starts = [r] + [pts[i] for i in range(pts.shape[0])] + [pts.mean(axis=0)]
    best_point: Optional[np.ndarray] = None
    best_value = math.inf
    messages = []
    for p0 in starts:
        z0 = np.append(p0, _max_slack(pts, radii, p0) + 1.0)
        result = minimize(
            lambda z: z[-1],
            z0,
            jac=lambda z: objective_grad,
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": constraint_values, "jac": constraint_jac}],
            options={"maxiter": 300, "ftol": 1e-12},
        )
        if not result.success:
            messages.append(str(result.message))
            continue
        candidate = result.x[:-1]
        value = _max_slack(pts, radii, candidate)
        if value < best_value - 0.0:
            best_value = value
            best_point = candidate
    if best_point is None:
        raise SolverError(f"joint-proposal solver failed from every start: {messages[:1]}")
    return FeasibilityResult(tuple(float(c) for c in best_point), best_value)
