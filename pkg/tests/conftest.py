"""Shared generators for the test suite (plain helpers, imported by name)."""

from __future__ import annotations

import numpy as np

from asynclp import (
    AsyncFormProblem,
    Kind,
    Role,
    StandardLP,
    VariableSpec,
    gen_basis_pursuit,
    gen_chebyshev,
    basis_pursuit_encode,
    chebyshev_encode,
    to_asynchronous_form,
)


def random_standard_lp(rng: np.random.Generator, n_max: int = 6,
                       m_max: int = 8) -> StandardLP:
    """Random dense LP with the origin feasible (b > 0)."""
    N = int(rng.integers(2, n_max + 1))
    M = int(rng.integers(2, m_max + 1))
    A = rng.normal(size=(M, N))
    b = rng.uniform(0.5, 2.0, size=M)
    f = rng.normal(size=N)
    return StandardLP(f=f, A=A, b=b)


def random_async_problem(rng: np.random.Generator) -> AsyncFormProblem:
    """One of the three encodings, chosen at random."""
    pick = int(rng.integers(3))
    if pick == 0:
        return to_asynchronous_form(random_standard_lp(rng))
    if pick == 1:
        n = int(rng.integers(2, 5))
        return chebyshev_encode(gen_chebyshev(n, 2 * n + 2,
                                              seed=int(rng.integers(10_000))))
    n = int(rng.integers(8, 17))
    m = max(2, n // 2)
    s = int(rng.integers(1, max(2, m // 2)))
    return basis_pursuit_encode(gen_basis_pursuit(n, m, s,
                                                  seed=int(rng.integers(10_000))))


def mini_fixed_problem() -> AsyncFormProblem:
    """Scalar system with a known closed-form fixed point.

    B = [[1]], input u fixed at 1, output v >= 0.  The reduced system is
    d2 = -|d2| + 2 with unique fixed point d2* = 1, recovering u = v = 1.
    """
    return AsyncFormProblem(
        B=np.array([[1.0]]),
        inputs=(VariableSpec("u", Role.INPUT, Kind.FIXED, 1, rho=np.array([1.0])),),
        outputs=(VariableSpec("v", Role.OUTPUT, Kind.NON_NEGATIVE, 1),),
    )
