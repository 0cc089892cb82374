"""Exact diagonalisation of the fermionised XXZ ring at half filling.

H = -1/2 sum_i (c_i^+ c_{i+1} + h.c.) + Delta sum_i n_i n_{i+1}, with
antiperiodic boundary conditions c_{N+1}^+ = -c_1^+.  Site i is bit i-1 of
an occupation word and fermionic order follows the site order.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .state import Basis, ManyBodyState

log = logging.getLogger(__name__)

MAX_SITES = 24
DENSE_MAX_DIM = 4000
LOW_GAP = 1e-8
CHECKPOINT_MAGIC = b"KSEGS\x00\x01\x00"


class SolverError(RuntimeError):
    pass


class DegeneracyError(ValueError):
    """Raised for N = 2 mod 4, where the half-filled APBC ground state is exactly degenerate."""


# --------------------------------------------------------------------------
# basis
# --------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _combinations(N: int, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros(1, dtype=np.int64)
    if n == N:
        return np.array([(1 << N) - 1], dtype=np.int64)
    low = _combinations(N - 1, n)
    high = _combinations(N - 1, n - 1) | np.int64(1 << (N - 1))
    return np.concatenate([low, high])


@dataclass(frozen=True)
class SectorBasis:
    N: int
    n_particles: int
    states: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.states.size)

    def index(self, words):
        """Ordinal of each word; raises KeyError for words outside the sector."""
        words = np.asarray(words, dtype=np.int64)
        pos = np.searchsorted(self.states, words)
        pos_c = np.minimum(pos, self.states.size - 1)
        if np.any(self.states[pos_c] != words):
            raise KeyError("word outside the sector")
        return pos_c


def sector_basis(N: int, n_particles: int) -> SectorBasis:
    if not 0 < N <= MAX_SITES:
        raise ValueError(f"N must lie in [1, {MAX_SITES}], got {N}")
    if not 0 <= n_particles <= N:
        raise ValueError(f"n_particles must lie in [0, N], got {n_particles}")
    states = _combinations(N, n_particles).copy()
    states.setflags(write=False)
    return SectorBasis(N, n_particles, states)


def _bitcount(w: np.ndarray) -> np.ndarray:
    w = w.astype(np.int64)
    c = np.zeros_like(w)
    while np.any(w):
        c += w & 1
        w = w >> 1
    return c


# --------------------------------------------------------------------------
# Hamiltonian
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianOperator:
    N: int
    delta: float
    basis: SectorBasis = field(repr=False)
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def __matmul__(self, v):
        return self.matrix @ v


def xxz_hamiltonian(N: int, delta: float, n_particles: int | None = None) -> HamiltonianOperator:
    """Sparse XXZ Hamiltonian on the fixed-particle-number sector (half filling by default)."""
    if N < 4 or N % 2:
        raise ValueError(f"N must be even and >= 4, got {N}")
    n = N // 2 if n_particles is None else n_particles
    basis = sector_basis(N, n)
    w = basis.states
    dim = w.size

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    rotated = ((w >> 1) | ((w & 1) << (N - 1)))  # bit i -> neighbour of site i+1
    vals = [float(delta) * _bitcount(w & rotated).astype(float)]

    middle = ((1 << N) - 1) ^ 1 ^ (1 << (N - 1))
    wrap_sign = -1.0 * (1 - 2 * (_bitcount(w & middle) & 1))
    for i in range(N):
        j = (i + 1) % N
        mask = (1 << i) | (1 << j)
        hop = ((w >> i) ^ (w >> j)) & 1 == 1
        src = np.nonzero(hop)[0]
        dst = basis.index(w[src] ^ mask)
        amp = np.full(src.size, -0.5)
        if j == 0:
            amp *= wrap_sign[src]
        rows.append(dst)
        cols.append(src)
        vals.append(amp)
    H = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    H.sum_duplicates()
    return HamiltonianOperator(N, float(delta), basis, H)


# --------------------------------------------------------------------------
# eigensolvers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    vector: np.ndarray = field(repr=False)
    residual: float
    gap: float
    iterations: int = 0
    low_gap: bool = False
    method: str = "lanczos"


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # threshold keeps symmetry-forbidden round-off from choosing the sign
    big = np.nonzero(np.abs(v) > 1e-6 * np.abs(v).max())[0]
    return -v if v[big[0]] < 0 else v


def lanczos_lowest(
    matvec,
    dim: int,
    v0: np.ndarray,
    tol: float = 1e-10,
    krylov_dim: int = 80,
    max_restarts: int = 100,
    deflate: np.ndarray | None = None,
):
    """Lowest eigenpair of a real symmetric operator by restarted Lanczos.

    Each cycle builds a Krylov space of up to ``krylov_dim`` vectors with full
    reorthogonalisation and restarts from the lowest Ritz vector.  Vectors in
    ``deflate`` (rows, orthonormal) are projected out throughout.

    Returns ``(theta, x, residual, second_ritz, matvecs)``.
    """
    m = min(krylov_dim, dim)

    def project(x):
        if deflate is not None:
            x = x - deflate.T @ (deflate @ x)
        return x

    x = project(np.asarray(v0, dtype=float))
    x /= np.linalg.norm(x)
    matvecs = 0
    history = []
    for cycle in range(max_restarts):
        V = np.empty((m + 1, dim))
        V[0] = x
        alpha = np.zeros(m)
        beta = np.zeros(m)
        k = m
        for j in range(m):
            w = project(matvec(V[j]))
            matvecs += 1
            alpha[j] = V[j] @ w
            # two Gram-Schmidt passes against the whole basis
            for _ in range(2):
                w = w - V[: j + 1].T @ (V[: j + 1] @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
                k = j + 1
                break
            V[j + 1] = w / beta[j]
        T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        evals, evecs = np.linalg.eigh(T)
        x = V[:k].T @ evecs[:, 0]
        x = project(x)
        x /= np.linalg.norm(x)
        Hx = project(matvec(x))
        matvecs += 1
        theta = float(x @ Hx)
        res = float(np.linalg.norm(Hx - theta * x))
        history.append(res)
        second = float(evals[1]) if k > 1 else np.inf
        if res <= tol or k < m:
            return theta, x, res, second, matvecs
    raise SolverError(
        f"Lanczos did not reach residual {tol:.1e} after {max_restarts} restarts "
        f"({matvecs} matvecs); last residuals {['%.2e' % r for r in history[-5:]]}"
    )


def _check_size(N: int) -> None:
    if N % 4 == 2:
        raise DegeneracyError(
            f"N={N} is 2 mod 4: the half-filled APBC ground state is exactly degenerate "
            "for every Delta; use N a multiple of 4"
        )


def ground_state(
    H: HamiltonianOperator,
    method: str = "lanczos",
    tol: float = 1e-10,
    seed: int = 0,
    krylov_dim: int = 80,
) -> GroundStateResult:
    _check_size(H.N)
    if method == "dense":
        if H.dim > DENSE_MAX_DIM:
            raise ValueError(f"dense method limited to dimension {DENSE_MAX_DIM}, got {H.dim}")
        evals, evecs = np.linalg.eigh(H.matrix.toarray())
        v = _fix_sign(evecs[:, 0])
        res = float(np.linalg.norm(H.matvec(v) - evals[0] * v))
        gap = float(evals[1] - evals[0]) if H.dim > 1 else np.inf
        return GroundStateResult(float(evals[0]), v, res, gap, 0, gap < LOW_GAP, "dense")
    if method != "lanczos":
        raise ValueError(f"unknown method {method!r}")

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(H.dim)
    e0, x, res, _, it0 = lanczos_lowest(H.matvec, H.dim, v0, tol, krylov_dim)
    if H.dim > 1:
        v1 = rng.standard_normal(H.dim)
        e1, _, _, _, it1 = lanczos_lowest(
            H.matvec, H.dim, v1, max(tol, 1e-7), krylov_dim, deflate=x[None, :]
        )
    else:
        e1, it1 = np.inf, 0
    gap = e1 - e0
    if gap < LOW_GAP:
        log.warning("N=%d Delta=%g: gap %.2e below %.0e, entropies unreliable", H.N, H.delta, gap, LOW_GAP)
    return GroundStateResult(e0, _fix_sign(x), res, float(gap), it0 + it1, gap < LOW_GAP, "lanczos")


def free_fermion_energy(N: int, n_particles: int | None = None) -> float:
    """Filled-sea energy of the Delta = 0 chain: the lowest -cos k over the APBC grid."""
    n = N // 2 if n_particles is None else n_particles
    k = np.pi * (2 * np.arange(-N // 2, N // 2) + 1) / N
    return float(np.sort(-np.cos(k))[:n].sum())


def neel_state(N: int) -> ManyBodyState:
    """(|1010...> + |0101...>)/sqrt(2) in the position basis."""
    if N < 2 or N % 2:
        raise ValueError(f"Neel state needs even N, got {N}")
    a = sum(1 << i for i in range(0, N, 2))
    amps = np.zeros(1 << N, dtype=complex)
    amps[a] = amps[a << 1] = 1 / np.sqrt(2)
    return ManyBodyState(N, Basis.POSITION, amps, N // 2)


def ground_state_many_body(N: int, delta: float, **kw) -> tuple[ManyBodyState, GroundStateResult]:
    H = xxz_hamiltonian(N, delta)
    gs = ground_state(H, **kw)
    return ManyBodyState.from_sector(N, H.basis.states, gs.vector, Basis.POSITION, N // 2), gs


# --------------------------------------------------------------------------
# checkpoint: magic(8) | N u32 | Delta f64 | dim u64 | dim x f64, little endian
# --------------------------------------------------------------------------

_HEADER = struct.Struct("<8sIdQ")


def save_ground_state(path, N: int, delta: float, vector: np.ndarray) -> None:
    vector = np.ascontiguousarray(vector, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CHECKPOINT_MAGIC, N, float(delta), vector.size))
        fh.write(vector.tobytes())


def load_ground_state(path) -> tuple[int, float, np.ndarray]:
    data = Path(path).read_bytes()
    magic, N, delta, dim = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a ground-state checkpoint")
    vec = np.frombuffer(data, dtype="<f8", count=dim, offset=_HEADER.size).copy()
    return N, delta, vec
