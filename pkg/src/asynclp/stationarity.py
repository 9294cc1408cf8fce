"""Stationarity system: orthogonal operator, memoryless maps, and affine reduction.

Optimality of the equality-constrained program is written as a fixed point of

    d = G c,    c = m(d),

where G is the orthogonal operator built from the constraint matrix B and m acts
coordinate-wise, its shape determined by each vector's kind and side:

    kind          input            output
    fixed         c = -d + 2 rho   c =  d - 2 rho
    linear_cost   c =  d - 2 rho   c = -d + 2 rho
    non_negative  c =  |d|         c = -|d|
    l1_cost       c =  m1(d)       c = -m1(d)

with m1 the saturating soft map: d+2 below -1, -d on [-1, 1], d-2 above 1.
At a fixed point the solution is read off as z1 = (d + c)/2 on input
coordinates and z2 = (d - c)/2 on output coordinates.

Affine coordinates (fixed / linear_cost) satisfy c = S d + h with diagonal
S (+-1) and constant h, so they can be eliminated, leaving a reduced system
over the nonlinear coordinates:

    d2 = G' m(d2) + e,   G' = G22 + G21 (I - S G11)^{-1} S G12,
                         e  = G21 (I - S G11)^{-1} h.

G' is again an isometry, which is what makes the iteration non-expansive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .formulation import AsyncFormProblem, Kind, Role, validate_async_form


class ReductionSingularError(RuntimeError):
    """Raised when the affine elimination is numerically singular."""


# condition-number ceiling for (I - S G11); beyond this the elimination is refused
_COND_LIMIT = 1e12


def build_R(B: np.ndarray) -> np.ndarray:
    """Skew-symmetric coupling [[0, -B'], [B, 0]] for a P x Q constraint matrix."""
    B = np.asarray(B, dtype=float)
    P, Q = B.shape
    R = np.zeros((Q + P, Q + P))
    R[:Q, Q:] = -B.T
    R[Q:, :Q] = B
    return R


def build_G(B: np.ndarray) -> np.ndarray:
    """Orthogonal operator (I + R)(I - R)^{-1} with R = build_R(B).

    The resolvent of a skew-symmetric R is always well defined (I - R has no
    zero eigenvalue), and the result is special orthogonal with no -1
    eigenvalue.  (I + R) commutes with (I - R)^{-1}, so a single solve suffices.
    """
    R = build_R(B)
    n = R.shape[0]
    return np.linalg.solve(np.eye(n) - R, np.eye(n) + R)


def build_G_factored(B: np.ndarray) -> np.ndarray:
    """Same operator via the factored form (I + R)^2 diag((I+B'B)^{-1}, (I+BB')^{-1}).

    Independent construction used to cross-check build_G: it exploits
    R^2 = -diag(B'B, BB') instead of inverting I - R directly.
    """
    B = np.asarray(B, dtype=float)
    P, Q = B.shape
    R = build_R(B)
    blk = np.zeros((Q + P, Q + P))
    blk[:Q, :Q] = np.linalg.inv(np.eye(Q) + B.T @ B)
    blk[Q:, Q:] = np.linalg.inv(np.eye(P) + B @ B.T)
    IR = np.eye(Q + P) + R
    return IR @ IR @ blk


def m1(d):
    """Saturating map for l1-cost coordinates: d+2 (d < -1), -d (|d| <= 1), d-2 (d > 1)."""
    d = np.asarray(d, dtype=float)
    return np.where(d < -1.0, d + 2.0, np.where(d > 1.0, d - 2.0, -d))


def apply_nonlinearity(kind: Kind, role: Role, d, rho=0.0, gamma: float = 1.0):
    """Coordinate-wise stationarity map for one (kind, side) pair.

    gamma scales only the non-affine kinds (non_negative, l1_cost); affine maps
    are always applied exactly.
    """
    kind = Kind(kind)
    role = Role(role)
    d = np.asarray(d, dtype=float)
    sign = 1.0 if role is Role.INPUT else -1.0
    if kind is Kind.FIXED:
        return -sign * d + sign * 2.0 * np.asarray(rho, dtype=float)
    if kind is Kind.LINEAR_COST:
        return sign * d - sign * 2.0 * np.asarray(rho, dtype=float)
    if kind is Kind.NON_NEGATIVE:
        return sign * (gamma * np.abs(d))
    if kind is Kind.L1_COST:
        return sign * (gamma * m1(d))
    raise ValueError(f"unknown kind {kind!r}")


def _coordinate_tables(problem: AsyncFormProblem):
    """Flatten variable declarations into per-coordinate arrays.

    Coordinates are ordered inputs-then-outputs, each group in declaration
    order.  Returns (kinds, is_input, rho) arrays over all Q+P coordinates.
    """
    kinds: list[Kind] = []
    is_input: list[bool] = []
    rho: list[float] = []
    for v in problem.specs():
        r = v.rho if v.rho is not None else np.zeros(v.length)
        for i in range(v.length):
            kinds.append(v.kind)
            is_input.append(v.role is Role.INPUT)
            rho.append(float(r[i]))
    return kinds, np.asarray(is_input), np.asarray(rho)


@dataclass
class StationaritySystem:
    """Reduced fixed-point system d2 = G' m(d2) + e plus recovery data.

    Attributes
    ----------
    problem : AsyncFormProblem
    G : ndarray           full orthogonal operator
    Gprime : ndarray      reduced isometry over the nonlinear coordinates
    e : ndarray           constant offset from the eliminated affine block
    s, h : ndarray        diagonal of S and offset h of the affine maps
    affine_idx, nonlinear_idx : ndarray
        full-space coordinate indices of the two partitions, declaration order.
    nl_sign : ndarray     +1 on input coordinates, -1 on output coordinates
    nl_is_l1 : ndarray    bool; True where the base map is m1 rather than | . |
    """

    problem: AsyncFormProblem
    G: np.ndarray
    Gprime: np.ndarray
    e: np.ndarray
    s: np.ndarray
    h: np.ndarray
    affine_idx: np.ndarray
    nonlinear_idx: np.ndarray
    nl_sign: np.ndarray
    nl_is_l1: np.ndarray
    G11: np.ndarray
    G12: np.ndarray
    G21: np.ndarray
    _recover_lu: tuple

    @property
    def n_nonlinear(self) -> int:
        return len(self.nonlinear_idx)

    @property
    def n_affine(self) -> int:
        return len(self.affine_idx)

    # -- nonlinearity over the reduced coordinates --------------------------

    def m(self, d2: np.ndarray, gamma: float = 1.0) -> np.ndarray:
        base = np.where(self.nl_is_l1, m1(d2), np.abs(d2))
        return (gamma * base) * self.nl_sign

    def m_scalar(self, k: int, d: float, gamma: float = 1.0) -> float:
        """Single-coordinate m, bit-identical to the vector path."""
        if self.nl_is_l1[k]:
            base = d + 2.0 if d < -1.0 else (d - 2.0 if d > 1.0 else -d)
        else:
            base = abs(d)
        return (gamma * base) * self.nl_sign[k]

    def operator(self, d2: np.ndarray, gamma: float = 1.0) -> np.ndarray:
        """T(d2) = G' m(d2) + e (gamma-scaled nonlinearity)."""
        return self.Gprime @ self.m(d2, gamma) + self.e

    def residual(self, d2: np.ndarray, gamma: float = 1.0) -> float:
        """||d2 - (G' m(d2) + e)||_2; convergence is judged at gamma = 1."""
        return float(np.linalg.norm(d2 - self.operator(d2, gamma)))

    # -- recovery ------------------------------------------------------------

    def recover_affine(self, c2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Eliminated coordinates from a nonlinear-coordinate state.

        d1 = (I - G11 S)^{-1} (G12 c2 + G11 h),  c1 = S d1 + h.
        """
        d1 = lu_solve(self._recover_lu, self.G12 @ c2 + self.G11 @ self.h)
        return d1, self.s * d1 + self.h

    def recover_variables(self, d2: np.ndarray, c2: np.ndarray) -> dict[str, np.ndarray]:
        """Per-variable values from the current reduced state.

        Assembles the full (d, c) pair and applies z1 = (d+c)/2 on inputs,
        z2 = (d-c)/2 on outputs.
        """
        d1, c1 = self.recover_affine(c2)
        n = self.n_affine + self.n_nonlinear
        d = np.empty(n)
        c = np.empty(n)
        d[self.affine_idx] = d1
        c[self.affine_idx] = c1
        d[self.nonlinear_idx] = d2
        c[self.nonlinear_idx] = c2
        out: dict[str, np.ndarray] = {}
        pos = 0
        for v in self.problem.specs():
            sl = slice(pos, pos + v.length)
            if v.role is Role.INPUT:
                out[v.name] = (d[sl] + c[sl]) / 2.0
            else:
                out[v.name] = (d[sl] - c[sl]) / 2.0
            pos += v.length
        return out

    def objective_at(self, d2: np.ndarray, c2: np.ndarray) -> float:
        return self.problem.objective_value(self.recover_variables(d2, c2))

    def dump(self, path) -> None:
        """Binary dump of the operator data (numpy .npz; see README for keys)."""
        np.savez(
            path,
            G=self.G,
            Gprime=self.Gprime,
            e=self.e,
            s=self.s,
            h=self.h,
            affine_idx=self.affine_idx,
            nonlinear_idx=self.nonlinear_idx,
        )


def reduce(G: np.ndarray, problem: AsyncFormProblem) -> StationaritySystem:
    """Eliminate the affine coordinates of a stationarity system.

    Parameters
    ----------
    G : ndarray
        Orthogonal operator for problem.B (typically build_G(problem.B)).
    problem : AsyncFormProblem
        Must be well-formed and contain at least one affine and one nonlinear
        coordinate.

    Raises
    ------
    ValueError
        On validation failures or an empty partition.
    ReductionSingularError
        When cond(I - S G11) exceeds 1e12.
    """
    errors = validate_async_form(problem)
    if errors:
        raise ValueError("invalid problem: " + "; ".join(errors))
    kinds, is_input, rho = _coordinate_tables(problem)
    n = len(kinds)
    if G.shape != (n, n):
        raise ValueError(f"G has shape {G.shape}, expected ({n}, {n})")

    affine_mask = np.asarray([k.is_affine for k in kinds])
    affine_idx = np.flatnonzero(affine_mask)
    nonlinear_idx = np.flatnonzero(~affine_mask)
    if len(affine_idx) == 0 or len(nonlinear_idx) == 0:
        raise ValueError(
            "reduction needs at least one affine and one nonlinear coordinate"
        )

    # affine maps c = S d + h, coordinate-wise
    s = np.empty(len(affine_idx))
    h = np.empty(len(affine_idx))
    for j, i in enumerate(affine_idx):
        fixed = kinds[i] is Kind.FIXED
        inp = bool(is_input[i])
        # fixed input and unconstrained output flip the sign; the other two keep it
        if fixed == inp:
            s[j] = -1.0
            h[j] = 2.0 * rho[i]
        else:
            s[j] = 1.0
            h[j] = -2.0 * rho[i]

    nl_sign = np.where(is_input[nonlinear_idx], 1.0, -1.0)
    nl_is_l1 = np.asarray([kinds[i] is Kind.L1_COST for i in nonlinear_idx])

    G11 = G[np.ix_(affine_idx, affine_idx)]
    G12 = G[np.ix_(affine_idx, nonlinear_idx)]
    G21 = G[np.ix_(nonlinear_idx, affine_idx)]
    G22 = G[np.ix_(nonlinear_idx, nonlinear_idx)]

    K1 = len(affine_idx)
    M_red = np.eye(K1) - s[:, None] * G11     # I - S G11
    if np.linalg.cond(M_red) > _COND_LIMIT:
        raise ReductionSingularError(
            "reduction singular: cond(I - S G11) exceeds 1e12"
        )
    W = np.linalg.inv(M_red)
    Gprime = G22 + G21 @ (W @ (s[:, None] * G12))
    e = G21 @ (W @ h)

    # recovery solves (I - G11 S) d1 = G12 c2 + G11 h repeatedly; cache the factor
    recover_lu = lu_factor(np.eye(K1) - G11 * s[None, :])

    return StationaritySystem(
        problem=problem,
        G=G,
        Gprime=Gprime,
        e=e,
        s=s,
        h=h,
        affine_idx=affine_idx,
        nonlinear_idx=nonlinear_idx,
        nl_sign=nl_sign,
        nl_is_l1=nl_is_l1,
        G11=G11,
        G12=G12,
        G21=G21,
        _recover_lu=recover_lu,
    )


def build_system(problem: AsyncFormProblem) -> StationaritySystem:
    """Convenience: build_G on problem.B followed by reduce."""
    return reduce(build_G(problem.B), problem)
