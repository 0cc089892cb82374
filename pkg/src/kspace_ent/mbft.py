"""Many-body change of single-particle basis on 2^N amplitude vectors.

New modes are ``b_j^+ = sum_i U_ji c_i^+``.  Re-expanding a state written in
the ``c`` modes amounts to substituting ``c_i^+ = sum_j conj(U_ji) b_j^+``, so
the amplitude map is the Fock lift of ``conj(U)``:

    B_m = sum_n det(conj(U)[m, n]) C_n

with rows picked by the occupied modes of ``m`` and columns by those of ``n``.
Two routes compute it: nearest-neighbour Givens rotations lifted word-pair by
word-pair (no Jordan-Wigner strings appear between adjacent modes), and the
determinant expansion above, kept as an oracle for small sectors.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ed import CHECKPOINT_MAGIC
from .modes import BC, MomentumGrid, build_grid, momentum_numerators, popcount
from .state import BASIS_CODES, Basis, ManyBodyState

log = logging.getLogger(__name__)

GIVENS_MAX_N = 22
DETERMINANT_MAX_N = 12

__all__ = [
    "SingleBodyUnitary",
    "GivensPlan",
    "fourier_matrix",
    "givens_decompose",
    "transform",
    "momentum_residual",
    "to_momentum",
    "save_state",
    "load_state",
]


@dataclass(frozen=True)
class SingleBodyUnitary:
    entries: np.ndarray = field(repr=False)
    source: Basis = Basis.POSITION
    target: Basis = Basis.INTERMEDIATE

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "SingleBodyUnitary":
        return SingleBodyUnitary(self.entries.conj().T.copy(), self.target, self.source)

    def unitarity_residual(self) -> float:
        U = self.entries
        return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def fourier_matrix(grid: MomentumGrid) -> SingleBodyUnitary:
    """U_jx = exp(-i k_j x) / sqrt(N) with sites x = 1..N, rows in grid order."""
    x = np.arange(1, grid.N + 1)
    U = np.exp(-1j * np.outer(grid.momenta, x)) / np.sqrt(grid.N)
    return SingleBodyUnitary(U, Basis.POSITION, Basis.MOMENTUM)


# --------------------------------------------------------------------------
# Givens decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GivensPlan:
    """``U = diag(phases) @ G_K @ ... @ G_1`` where ``rotations[i] = (p, G_{i+1})`` acts on modes (p, p+1)."""

    N: int
    rotations: list[tuple[int, np.ndarray]]
    phases: np.ndarray

    def matrix(self) -> np.ndarray:
        M = np.eye(self.N, dtype=complex)
        for p, g in self.rotations:
            M[p : p + 2] = g @ M[p : p + 2]
        return self.phases[:, None] * M

    def conj(self) -> "GivensPlan":
        return GivensPlan(self.N, [(p, g.conj()) for p, g in self.rotations], self.phases.conj())


def givens_decompose(U: SingleBodyUnitary | np.ndarray) -> GivensPlan:
    """Triangular sweep of nearest-neighbour column rotations.

    Rows are cleared bottom-up; row ``r`` has its entries left of the diagonal
    pushed rightwards by rotations on columns (c, c+1), c = 0..r-1.  What is left
    is diagonal.  At most N(N-1)/2 rotations; entries that are already zero are
    skipped, so the identity yields an empty plan.
    """
    M = np.array(U.entries if isinstance(U, SingleBodyUnitary) else U, dtype=complex)
    N = M.shape[0]
    res = np.abs(M.conj().T @ M - np.eye(N)).max()
    if res > 1e-8:
        raise ValueError(f"matrix is not unitary (residual {res:.2e})")
    applied = []
    for r in range(N - 1, 0, -1):
        for c in range(r):
            a, b = M[r, c], M[r, c + 1]
            if a == 0:
                continue
            rho = np.hypot(abs(a), abs(b))
            R = np.array([[b, np.conj(a)], [-a, np.conj(b)]]) / rho
            M[:, c : c + 2] = M[:, c : c + 2] @ R
            M[r, c] = 0.0
            applied.append((c, R))
    phases = np.diag(M).copy()
    # U R_1 ... R_K = D  =>  U = D R_K^+ ... R_1^+, so R_1^+ acts first
    rotations = [(c, R.conj().T) for c, R in applied]
    return GivensPlan(N, rotations, phases)


# --------------------------------------------------------------------------
# many-body lift
# --------------------------------------------------------------------------


def _apply_rotation(v: np.ndarray, N: int, p: int, g: np.ndarray) -> None:
    t = v.reshape(1 << (N - p - 2), 2, 2, 1 << p)  # axes: high, bit p+1, bit p, low
    a = t[:, 0, 1, :].copy()  # mode p occupied alone
    b = t[:, 1, 0, :]  # mode p+1 occupied alone
    t[:, 0, 1, :] = g[0, 0] * a + g[0, 1] * b
    t[:, 1, 0, :] = g[1, 0] * a + g[1, 1] * b
    t[:, 1, 1, :] *= g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]


def _phase_factors(N: int, phases: np.ndarray) -> np.ndarray:
    f = np.ones(1 << N, dtype=complex)
    for j, d in enumerate(phases):
        f.reshape(1 << (N - j - 1), 2, 1 << j)[:, 1, :] *= d
    return f


def lift_plan(plan: GivensPlan, amplitudes: np.ndarray, check: bool = False) -> np.ndarray:
    """Apply the Fock-space lift of ``plan.matrix()`` to an amplitude vector (returns a new array)."""
    N = plan.N
    v = np.array(amplitudes, dtype=complex)
    if check:
        counts = popcount(np.arange(1 << N))
    for p, g in plan.rotations:
        if check:
            before = np.linalg.norm(v)
            weights = np.bincount(counts, np.abs(v) ** 2, minlength=N + 1)
        _apply_rotation(v, N, p, g)
        if check:
            assert abs(np.linalg.norm(v) - before) < 1e-12
            assert np.allclose(np.bincount(counts, np.abs(v) ** 2, minlength=N + 1), weights, atol=1e-12)
    v *= _phase_factors(N, plan.phases)
    return v


def _determinant_lift(M: np.ndarray, state: ManyBodyState, max_elems: int = 1 << 22) -> np.ndarray:
    N = state.N
    n = state.sector
    words = np.arange(1 << N, dtype=np.int64)
    sector = words[popcount(words) == n]
    out = np.zeros(1 << N, dtype=complex)
    if n == 0:
        out[0] = state.amplitudes[0]
        return out
    C = state.amplitudes[sector]
    keep = C != 0
    C = C[keep]
    occ = np.array([[j for j in range(N) if w >> j & 1] for w in sector])
    occ_cols = occ[keep]
    chunk = max(1, max_elems // (occ_cols.shape[0] * n * n))
    for start in range(0, sector.size, chunk):
        rows = occ[start : start + chunk]
        sub = M[rows[:, None, :, None], occ_cols[None, :, None, :]]  # (m, n, i, j)
        out[sector[start : start + chunk]] = np.linalg.det(sub) @ C
    return out


def transform(
    state: ManyBodyState,
    U: SingleBodyUnitary,
    method: str = "givens",
    check: bool | None = None,
) -> ManyBodyState:
    """Re-express ``state`` in the modes ``b_j^+ = sum_i U_ji c_i^+``."""
    N = state.N
    if U.N != N:
        raise ValueError(f"unitary acts on {U.N} modes, state has {N}")
    if check is None:
        check = log.isEnabledFor(logging.DEBUG)
    if method == "givens":
        if N > GIVENS_MAX_N:
            raise ValueError(f"givens transform limited to N <= {GIVENS_MAX_N}")
        amps = lift_plan(givens_decompose(U).conj(), state.amplitudes, check)
    elif method == "determinant":
        if state.sector is None:
            raise ValueError("determinant transform needs a fixed particle-number sector")
        if N > DETERMINANT_MAX_N:
            raise ValueError(f"determinant transform limited to N <= {DETERMINANT_MAX_N}")
        amps = _determinant_lift(U.entries.conj(), state)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ManyBodyState(N, U.target, amps, state.sector)


def to_momentum(state: ManyBodyState, grid: MomentumGrid | None = None, method: str = "givens") -> ManyBodyState:
    grid = grid or build_grid(state.N, BC.APBC)
    return transform(state, fourier_matrix(grid), method)


def momentum_residual(state: ManyBodyState, grid: MomentumGrid | None = None) -> float:
    """Largest |B_m| over words whose total momentum is not 0 mod 2 pi."""
    if state.basis is not Basis.MOMENTUM:
        raise ValueError(f"momentum residual needs a momentum-basis state, got {state.basis.value}")
    grid = grid or build_grid(state.N, BC.APBC)
    q = momentum_numerators(np.arange(1 << state.N), grid)
    return float(np.abs(state.amplitudes[q != 0]).max(initial=0.0))


# --------------------------------------------------------------------------
# state file: ground-state checkpoint header with a basis byte and a sector
# field, amplitudes as (re, im) float64 pairs
# --------------------------------------------------------------------------

STATE_MAGIC = CHECKPOINT_MAGIC[:5] + b"\x01\x01\x00"
_STATE_HEADER = struct.Struct("<8sIdBiQ")


def save_state(path, state: ManyBodyState, delta: float = float("nan")) -> None:
    amps = np.ascontiguousarray(state.amplitudes, dtype="<c16")
    sector = -1 if state.sector is None else state.sector
    with open(path, "wb") as fh:
        fh.write(_STATE_HEADER.pack(STATE_MAGIC, state.N, float(delta), BASIS_CODES[state.basis], sector, amps.size))
        fh.write(amps.tobytes())


def load_state(path) -> tuple[ManyBodyState, float]:
    data = Path(path).read_bytes()
    magic, N, delta, code, sector, count = _STATE_HEADER.unpack_from(data)
    if magic != STATE_MAGIC:
        raise ValueError(f"{path}: not a state file")
    basis = {v: k for k, v in BASIS_CODES.items()}[code]
    amps = np.frombuffer(data, dtype="<c16", count=count, offset=_STATE_HEADER.size).copy()
    return ManyBodyState(N, basis, amps, None if sector < 0 else sector), delta
