"""Brute-force LP reference solver for small instances.

Enumerates candidate vertices of the feasible polyhedron (every N-subset of
active constraints), so its failure modes are independent of the fixed-point
machinery it is used to check.  Intended for N up to ~8 variables and a few
hundred thousand candidate subsets; a guard refuses anything larger.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .formulation import StandardLP

_FEAS_TOL = 1e-9
_TIE_TOL = 1e-9
_POINT_TOL = 1e-6
_MAX_SUBSETS = 500_000


@dataclass(frozen=True)
class OracleSolution:
    """status: optimal | infeasible | unbounded | degenerate (ties).

    x_star / objective are meaningful for optimal and degenerate (one of the
    tied optima is reported).
    """

    status: str
    x_star: np.ndarray | None = None
    objective: float | None = None


def solve_inequality_form(c: np.ndarray, A_ub: np.ndarray,
                          b_ub: np.ndarray) -> OracleSolution:
    """minimize c'y subject to A_ub y <= b_ub, y free.

    Assumes the feasible set is pointed (true whenever A_ub has full column
    rank on the active sets, e.g. after appending sign constraints), in which
    case a nonempty feasible set contains a vertex and a bounded problem
    attains its optimum at one.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    M, N = A.shape
    if comb(M, N) > _MAX_SUBSETS:
        raise ValueError(
            f"instance too large for enumeration: C({M},{N}) subsets"
        )

    scale = max(1.0, float(np.abs(b).max()))
    vertices: list[tuple[float, np.ndarray]] = []
    for rows in combinations(range(M), N):
        sub = A[list(rows)]
        try:
            x = np.linalg.solve(sub, b[list(rows)])
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if np.any(A @ x > b + _FEAS_TOL * scale):
            continue
        vertices.append((float(np.dot(c, x)), x))

    if not vertices:
        return OracleSolution(status="infeasible")

    if _has_improving_ray(c, A):
        return OracleSolution(status="unbounded")

    best_obj, best_x = min(vertices, key=lambda t: t[0])
    tie = any(
        abs(obj - best_obj) <= _TIE_TOL
        and np.linalg.norm(x - best_x) > _POINT_TOL
        for obj, x in vertices
    )
    if tie:
        return OracleSolution(status="degenerate", x_star=best_x, objective=best_obj)
    return OracleSolution(status="optimal", x_star=best_x, objective=best_obj)


def _has_improving_ray(c: np.ndarray, A: np.ndarray) -> bool:
    """True if some recession direction d (A d <= 0) has c'd < 0.

    Checks the extreme rays of the cone: nullspace directions of every
    (N-1)-subset of rows, both orientations, plus the full nullspace of A
    for non-pointed cones.
    """
    M, N = A.shape
    # lineality space: directions with A d = 0
    _, sv, vt = np.linalg.svd(A)
    null_mask = np.zeros(N, dtype=bool)
    null_mask[:len(sv)] = sv < 1e-10
    null_mask[len(sv):] = True
    for d in vt[null_mask]:
        if abs(np.dot(c, d)) > 1e-10:
            return True
    if N == 1:
        for d in (np.array([1.0]), np.array([-1.0])):
            if np.all(A @ d <= 1e-10) and np.dot(c, d) < -1e-10:
                return True
        return False
    for rows in combinations(range(M), N - 1):
        sub = A[list(rows)]
        _, sv, vt = np.linalg.svd(sub)
        small = sv < 1e-10
        ndirs = list(vt[len(sub):]) + [v for v, s in zip(vt[:len(sub)], small) if s]
        for d in ndirs:
            nd = np.linalg.norm(d)
            if nd < 1e-12:
                continue
            d = d / nd
            for sgn in (1.0, -1.0):
                dd = sgn * d
                if np.all(A @ dd <= 1e-9) and np.dot(c, dd) < -1e-9:
                    return True
    return False


def solve_vertex_enum(lp: StandardLP) -> OracleSolution:
    """Reference solution of a standard-form LP by vertex enumeration.

    Appends the sign constraints -x <= 0 and enumerates; the feasible set
    {A x <= b, x >= 0} is pointed, so the case analysis of
    solve_inequality_form applies directly.
    """
    M, N = lp.A.shape
    A_ub = np.vstack([lp.A, -np.eye(N)])
    b_ub = np.concatenate([lp.b, np.zeros(N)])
    return solve_inequality_form(lp.f, A_ub, b_ub)


def solve_chebyshev_reference(A: np.ndarray, b: np.ndarray) -> OracleSolution:
    """Reference inscribed-ball solution: minimize -r over
    [A | n][x; r] <= b, -r <= 0, with n the row norms of A.

    Returns y = [x_c..., r] in x_star.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    M, N = A.shape
    n = np.linalg.norm(A, axis=1)
    A_ub = np.vstack([
        np.hstack([A, n[:, None]]),
        np.concatenate([np.zeros(N), [-1.0]])[None, :],
    ])
    b_ub = np.concatenate([b, [0.0]])
    c = np.concatenate([np.zeros(N), [-1.0]])
    return solve_inequality_form(c, A_ub, b_ub)
