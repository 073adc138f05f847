"""Collective spin-j (Dicke) space: basis states, ladder/collective operators,
the nonlinear observable J^2 - Jz^2, and variances.

Basis convention, fixed globally: index k holds |j, m> with m = j - k, i.e.
m runs *descending* from +j at index 0 down to -j at the last index. All
serialization elsewhere in the package records this convention.
Half-integer j is supported (two_j odd); operations that need the m = 0 level
reject odd two_j with a clear error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import Operator, StateVector, expectation

VALID_KINDS = ("jz", "jplus", "jminus", "j2", "nonlinear")


@dataclass(frozen=True)
class SpinSpace:
    """Dimension bookkeeping for a spin-j multiplet, parametrized by 2j."""

    two_j: int

    def __post_init__(self):
        if self.two_j < 1:
            raise ValueError("two_j must be a positive integer")

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def m_values(self) -> np.ndarray:
        """m from +j down to -j, matching the index order."""
        return (self.two_j - 2 * np.arange(self.dim)) / 2.0

    def index_of(self, m: float) -> int:
        two_m = round(2 * m)
        if abs(2 * m - two_m) > 1e-9:
            raise ValueError(f"m = {m} is not a half-integer")
        if abs(two_m) > self.two_j or (self.two_j - two_m) % 2 != 0:
            raise ValueError(f"m = {m} not in the ladder for 2j = {self.two_j}")
        return (self.two_j - two_m) // 2


@dataclass(frozen=True)
class CollectiveObservable:
    space: SpinSpace
    kind: str
    matrix: Operator

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown collective operator kind {self.kind!r}")


def dicke_state(space: SpinSpace, m: float) -> StateVector:
    """Unit basis vector |j, m>."""
    return StateVector.basis(space.dim, space.index_of(m))


def superpose_dicke(space: SpinSpace, terms) -> StateVector:
    """Normalized superposition sum_k c_k |j, m_k>.

    Normalization divides by the real norm only, so the complex phase of the
    coefficients is preserved (a single term (m, 7i) yields amplitude i).
    """
    if not terms:
        raise ValueError("superpose_dicke needs at least one term")
    amps = np.zeros(space.dim, dtype=complex)
    for m, coeff in terms:
        amps[space.index_of(m)] += coeff
    nrm = np.linalg.norm(amps)
    if nrm == 0.0:
        raise ValueError("superposition coefficients sum to the zero vector")
    return StateVector(dim=space.dim, amplitudes=amps / nrm)


def collective_op(space: SpinSpace, kind: str) -> CollectiveObservable:
    """Collective operator of the requested kind.

    jz, j2 and the nonlinear observable are diagonal in the Dicke basis;
    jplus/jminus carry the usual ladder elements sqrt(j(j+1) - m(m+-1)).
    """
    j = space.j
    m = space.m_values()
    if kind == "jz":
        op = Operator.from_diagonal(m)
    elif kind == "j2":
        op = Operator.from_diagonal(np.full(space.dim, j * (j + 1)))
    elif kind == "nonlinear":
        op = Operator.from_diagonal(j * (j + 1) - m**2)
    elif kind in ("jplus", "jminus"):
        mat = np.zeros((space.dim, space.dim), dtype=complex)
        for k in range(1, space.dim):
            # |j,m> at index k maps to |j,m+1> at index k-1.
            mk = m[k]
            mat[k - 1, k] = np.sqrt(j * (j + 1) - mk * (mk + 1))
        if kind == "jminus":
            mat = mat.conj().T
        op = Operator(space.dim, mat, hermitian=False)
    else:
        raise ValueError(f"unknown collective operator kind {kind!r}")
    return CollectiveObservable(space=space, kind=kind, matrix=op)


def nonlinear_observable(space: SpinSpace) -> Operator:
    """J^2 - Jz^2: eigenvalue j(j+1) on |j,0>, j on |j,+-j>."""
    return collective_op(space, "nonlinear").matrix


def variance(op: Operator, state: StateVector) -> float:
    """<A^2> - <A>^2, clamped to zero against roundoff."""
    if not op.hermitian:
        raise ValueError("variance requires a Hermitian operator")
    if op.diagonal:
        d = np.diag(op.entries).real
        w = np.abs(state.amplitudes) ** 2
        mean = float(np.sum(w * d))
        second = float(np.sum(w * d**2))
    else:
        mean = expectation(op, state).real
        second = float(np.real(np.vdot(op.entries @ state.amplitudes,
                                       op.entries @ state.amplitudes)))
    return max(second - mean**2, 0.0)
