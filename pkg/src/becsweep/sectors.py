"""Conserved-sector Fock bases and the time-affine Hamiltonian pair.

A sector is fixed by the total pair/molecule number N and the per-channel
imbalances Q_k; its basis states are occupation tuples (n; m_1..m_K) with
n + sum(m_k) = N.  Both the driving Hamiltonian H(t) = A + tB and its
commuting partner H'(t) are narrow-banded in the canonical ordering, which
is pinned so small fixtures match hand-entered reference matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class CapacityError(ValueError):
    """Requested sector dimension exceeds the configured limit."""


DEFAULT_MAX_DIM = 200_000


@dataclass(frozen=True)
class SectorSpec:
    """Complete problem definition for one conserved sector.

    N: total pair/molecule number; Q: per-channel imbalance vector
    (Q_k = 1 encodes the single-atomic-mode channel); g: conversion
    coupling; beta: sweep rate (sign selects the association / dissociation
    convention); tau: energy-scale knob multiplying the channel energies;
    eps: channel energies, strictly increasing when K > 1.
    """

    N: int
    Q: tuple[int, ...]
    g: float
    beta: float
    tau: float = 0.0
    eps: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if len(self.Q) < 1:
            raise ValueError("need at least one channel")
        if len(self.eps) != len(self.Q):
            raise ValueError(f"eps has length {len(self.eps)}, expected {len(self.Q)}")
        if any(q < 0 or q != int(q) for q in self.Q):
            raise ValueError(f"channel imbalances must be non-negative integers, got {self.Q}")
        if not self.g > 0:
            raise ValueError(f"coupling g must be > 0, got {self.g}")
        if self.beta == 0:
            raise ValueError("sweep rate beta must be nonzero")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.K > 1:
            diffs = np.diff(self.eps)
            if np.any(diffs <= 0):
                raise ValueError(
                    f"channel energies must be strictly increasing, got {self.eps}"
                )

    @property
    def K(self) -> int:
        return len(self.Q)

    @classmethod
    def single_channel(cls, N: int, Q: int = 0, g: float = 1.0, beta: float = 1.0,
                       tau: float = 0.0, eps: float = 0.0) -> "SectorSpec":
        return cls(N=N, Q=(Q,), g=g, beta=beta, tau=tau, eps=(eps,))


@dataclass(frozen=True)
class BasisState:
    """Occupation configuration: n molecules, m_k atomic pairs per channel."""

    n: int
    m: tuple[int, ...]

    def total(self) -> int:
        return self.n + sum(self.m)


class SectorBasis:
    """Ordered sector basis: n ascending, then m lexicographically with m_1
    descending (fixture matrices depend on this order; do not change it)."""

    def __init__(self, states: Sequence[BasisState]):
        self.states = tuple(states)
        self._index = {s: i for i, s in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[BasisState]:
        return iter(self.states)

    def __getitem__(self, i: int) -> BasisState:
        return self.states[i]

    def index_of(self, state: BasisState) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise KeyError(f"{state} is not in this sector") from None

    def get(self, state: BasisState) -> int | None:
        return self._index.get(state)


def _compositions_desc(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Compositions of `total` into `parts` parts, lexicographically
    descending in the leading entry."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions_desc(total - first, parts - 1):
            yield (first,) + rest


def enumerate_basis(spec: SectorSpec, max_dim: int = DEFAULT_MAX_DIM) -> SectorBasis:
    """Enumerate the sector basis in canonical order.

    Size is C(N+K, K); a CapacityError protects against accidentally
    enormous multi-channel sectors.
    """
    size = math.comb(spec.N + spec.K, spec.K)
    if size > max_dim:
        raise CapacityError(
            f"sector dimension C({spec.N}+{spec.K},{spec.K}) = {size} exceeds limit {max_dim}"
        )
    states = []
    for n in range(spec.N + 1):
        for m in _compositions_desc(spec.N - n, spec.K):
            states.append(BasisState(n=n, m=m))
    basis = SectorBasis(states)
    assert len(basis) == size
    return basis


@dataclass
class AffineHamiltonian:
    """Sparse real-symmetric pair (A, B) representing H(t) = A + tB with B
    diagonal.  Off-diagonal structure is stored as symmetric COO (both
    triangles), row-major sorted, alongside the two diagonals."""

    dim: int
    a_diag: np.ndarray
    b_diag: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def matrix(self, t: float) -> np.ndarray:
        """Dense H(t)."""
        h = np.zeros((self.dim, self.dim))
        h[self.rows, self.cols] = self.vals
        h[np.diag_indices(self.dim)] = self.a_diag + t * self.b_diag
        return h

    def a_matrix(self) -> np.ndarray:
        return self.matrix(0.0)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Off-diagonal structure as (indptr, indices, data); rows are
        already sorted row-major."""
        indptr = np.zeros(self.dim + 1, dtype=np.int64)
        np.add.at(indptr, self.rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, self.cols.astype(np.int64), self.vals.astype(np.float64)

    def max_row_sum(self) -> float:
        """max_i sum_j |A_ij|, a cheap bound used for step-size checks."""
        sums = np.zeros(self.dim)
        np.add.at(sums, self.rows, np.abs(self.vals))
        return float(np.max(sums + np.abs(self.a_diag)))


def _sorted_coo(entries: dict[tuple[int, int], float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    keys = sorted(entries)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    vals = np.array([entries[k] for k in keys], dtype=np.float64)
    return rows, cols, vals


def build_hamiltonian(spec: SectorSpec, basis: SectorBasis) -> AffineHamiltonian:
    """Assemble H(t) = A + tB over the sector basis.

    Diagonal: -beta*t*n + sum_k tau*eps_k*(m_k + Q_k/2)  (the constant
    Q_k/2 offsets are pure gauge but kept so fixtures match the reference
    matrices literally).  Off-diagonal: the pair-to-molecule rule

        <n+1, m - e_k | H | n, m> = g * sqrt((n+1) * m_k * (m_k + Q_k)).
    """
    dim = len(basis)
    a_diag = np.zeros(dim)
    b_diag = np.zeros(dim)
    entries: dict[tuple[int, int], float] = {}
    for i, st in enumerate(basis):
        b_diag[i] = -spec.beta * st.n
        d = 0.0
        for k in range(spec.K):
            d += spec.eps[k] * (st.m[k] + 0.5 * spec.Q[k])
        a_diag[i] = spec.tau * d
        for k in range(spec.K):
            if st.m[k] == 0:
                continue
            m_new = list(st.m)
            m_new[k] -= 1
            j = basis.index_of(BasisState(n=st.n + 1, m=tuple(m_new)))
            v = spec.g * math.sqrt((st.n + 1) * st.m[k] * (st.m[k] + spec.Q[k]))
            entries[(i, j)] = v
            entries[(j, i)] = v
    rows, cols, vals = _sorted_coo(entries)
    return AffineHamiltonian(dim=dim, a_diag=a_diag, b_diag=b_diag,
                             rows=rows, cols=cols, vals=vals)


def build_commuting_partner(spec: SectorSpec, basis: SectorBasis) -> AffineHamiltonian:
    """Assemble the commuting partner H'(t) = A' + tB'.

    Four pieces: per-channel diagonal eps_k*(t + tau*eps_k/beta)*(2m_k+Q_k)/2,
    the molecular coupling scaled by eps_k/beta on the same sparsity pattern
    as H, the cross-channel pair exchange

        <n, m + e_i - e_j | H' | n, m>
            = (g^2/(beta*tau)) * sqrt(m_j (m_j + Q_j) (m_i + 1) (m_i + Q_i + 1)),

    and the diagonal -(g^2/(4*beta*tau)) * sum_{i != j} (2m_i+Q_i+1)(2m_j+Q_j+1).
    The exchange pieces carry 1/tau, so tau = 0 is rejected.
    """
    if spec.tau == 0:
        raise ValueError("the commuting partner requires tau > 0")
    dim = len(basis)
    a_diag = np.zeros(dim)
    b_diag = np.zeros(dim)
    entries: dict[tuple[int, int], float] = {}
    g2_bt = spec.g * spec.g / (spec.beta * spec.tau)
    for i, st in enumerate(basis):
        db = 0.0
        for k in range(spec.K):
            db += spec.eps[k] * (st.m[k] + 0.5 * spec.Q[k])
        b_diag[i] = db
        da = 0.0
        for k in range(spec.K):
            da += (spec.tau * spec.eps[k] ** 2 / spec.beta) * (st.m[k] + 0.5 * spec.Q[k])
        cross = 0.0
        for a in range(spec.K):
            for b in range(spec.K):
                if a == b:
                    continue
                cross += (2 * st.m[a] + spec.Q[a] + 1) * (2 * st.m[b] + spec.Q[b] + 1)
        a_diag[i] = da - 0.25 * g2_bt * cross
        for k in range(spec.K):
            if st.m[k] == 0:
                continue
            m_new = list(st.m)
            m_new[k] -= 1
            j = basis.index_of(BasisState(n=st.n + 1, m=tuple(m_new)))
            v = (spec.g * spec.eps[k] / spec.beta) * math.sqrt(
                (st.n + 1) * st.m[k] * (st.m[k] + spec.Q[k])
            )
            entries[(i, j)] = v
            entries[(j, i)] = v
        # pair exchange from channel b into channel a
        for a in range(spec.K):
            for b in range(spec.K):
                if a == b or st.m[b] == 0:
                    continue
                m_new = list(st.m)
                m_new[a] += 1
                m_new[b] -= 1
                j = basis.index_of(BasisState(n=st.n, m=tuple(m_new)))
                v = g2_bt * math.sqrt(
                    st.m[b] * (st.m[b] + spec.Q[b]) * (st.m[a] + 1) * (st.m[a] + spec.Q[a] + 1)
                )
                entries[(j, i)] = v
    rows, cols, vals = _sorted_coo(entries)
    return AffineHamiltonian(dim=dim, a_diag=a_diag, b_diag=b_diag,
                             rows=rows, cols=cols, vals=vals)


def tau_derivative_diag(spec: SectorSpec, basis: SectorBasis) -> np.ndarray:
    """Diagonal of dH/dtau, i.e. sum_k eps_k (m_k + Q_k/2) per state.

    Summed in the same channel order as the B' diagonal of the partner so
    the two agree bitwise, not merely to rounding.
    """
    out = np.zeros(len(basis))
    for i, st in enumerate(basis):
        d = 0.0
        for k in range(spec.K):
            d += spec.eps[k] * (st.m[k] + 0.5 * spec.Q[k])
        out[i] = d
    return out


def diabatic_levels(spec: SectorSpec, basis: SectorBasis, t: float) -> list[tuple[BasisState, float]]:
    """Diagonal of H(t) per basis state, for level-diagram diagnostics."""
    h = build_hamiltonian(spec, basis)
    levels = h.a_diag + t * h.b_diag
    return [(st, float(levels[i])) for i, st in enumerate(basis)]


@dataclass(frozen=True)
class IntegrabilityReport:
    """Machine check that H and H' commute and share the mixed derivative."""

    t_samples: tuple[float, ...]
    rel_commutator_by_t: tuple[float, ...]
    max_rel_commutator: float
    eq_mixed_derivative_residual: float


def verify_integrability(spec: SectorSpec, t_samples: Sequence[float],
                         basis: SectorBasis | None = None) -> IntegrabilityReport:
    """Report the relative Frobenius commutator residual

        ||H(t)H'(t) - H'(t)H(t)||_F / (||H(t)||_F ||H'(t)||_F)

    over the given times, plus the entrywise residual of dH/dtau = dH'/dt
    (expected exactly zero: both sides are assembled from identical sums).
    """
    if basis is None:
        basis = enumerate_basis(spec)
    h = build_hamiltonian(spec, basis)
    hp = build_commuting_partner(spec, basis)
    residuals = []
    for t in t_samples:
        ht = h.matrix(t)
        hpt = hp.matrix(t)
        comm = ht @ hpt - hpt @ ht
        denom = np.linalg.norm(ht) * np.linalg.norm(hpt)
        residuals.append(float(np.linalg.norm(comm) / denom) if denom > 0 else 0.0)
    dtau = tau_derivative_diag(spec, basis)
    eq_res = float(np.max(np.abs(dtau - hp.b_diag))) if len(basis) else 0.0
    return IntegrabilityReport(
        t_samples=tuple(float(t) for t in t_samples),
        rel_commutator_by_t=tuple(residuals),
        max_rel_commutator=max(residuals) if residuals else 0.0,
        eq_mixed_derivative_residual=eq_res,
    )


def hamiltonian_csv_rows(h: AffineHamiltonian) -> list[tuple[int, int, float, float]]:
    """(row, col, A_value, B_value) rows for fixture diffing: the diagonal
    first, then the sorted off-diagonal structure."""
    rows = [(i, i, float(h.a_diag[i]), float(h.b_diag[i])) for i in range(h.dim)]
    rows += [(int(r), int(c), float(v), 0.0) for r, c, v in zip(h.rows, h.cols, h.vals)]
    return rows


def basis_csv_rows(basis: SectorBasis) -> list[tuple]:
    return [(i, st.n, *st.m) for i, st in enumerate(basis)]
