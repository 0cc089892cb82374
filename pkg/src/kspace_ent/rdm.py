"""Entanglement of momentum-mode blocks computed from explicit many-body states.

Modes of the block are moved to the front of the fermionic ordering, each
word picking up the sign of the permutation of its occupied modes; the state
is then an ordinary 2^l x 2^(N-l) bipartite amplitude matrix.  States here have
definite particle number, so tracing after the signed reorder gives the
fermionic reduced density matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .entropy import EntropyResult, check_alphas, spectrum_entropy
from .modes import BC, Family, MomentumGrid, ModeBlock, build_grid, make_block
from .state import Basis, ManyBodyState

RDM_MAX_BLOCK = 14
SCHMIDT_MAX_CUT = 14
EXHAUSTIVE_MAX_N = 12

__all__ = [
    "EntropyProfile",
    "MinimaxResult",
    "NeelReference",
    "block_entropy_state",
    "entropy_scan",
    "minimax_entropy",
    "neel_reference",
    "neel_block_entropy",
    "reorder_modes",
]


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    for s in (32, 16, 8, 4, 2, 1):
        x ^= x >> s
    return x & 1


def reorder_modes(words: np.ndarray, order) -> tuple[np.ndarray, np.ndarray]:
    """Relabel modes so that old mode ``order[i]`` becomes mode ``i``.

    Returns the new words and the fermionic sign (+1/-1) of bringing each
    word's creation operators into the new order.
    """
    words = np.asarray(words, dtype=np.int64)
    N = len(order)
    newpos = np.empty(N, dtype=np.int64)
    newpos[np.asarray(order)] = np.arange(N)
    new = np.zeros_like(words)
    odd = np.zeros_like(words)
    for i in range(N):
        bit = (words >> i) & 1
        new |= bit << newpos[i]
        # occupied modes j > i that end up in front of i
        mask = 0
        for j in range(i + 1, N):
            if newpos[j] < newpos[i]:
                mask |= 1 << j
        if mask:
            odd ^= bit & _parity(words & mask)
    return new, 1 - 2 * odd


def _bipartite_matrix(state: ManyBodyState, block: ModeBlock) -> np.ndarray:
    N = state.N
    inside = set(block.indices)
    order = list(block.indices) + [j for j in range(N) if j not in inside]
    support = np.nonzero(state.amplitudes)[0]
    new, sign = reorder_modes(support, order)
    l = block.size
    M = np.zeros((1 << (N - l), 1 << l), dtype=complex)
    M[new >> l, new & ((1 << l) - 1)] = sign * state.amplitudes[support]
    return M


def block_entropy_state(
    state: ManyBodyState,
    block: ModeBlock,
    alphas=(),
    method: str = "schmidt",
) -> EntropyResult:
    """Von Neumann and Renyi entropies of a block of momentum modes.

    ``method="schmidt"`` takes singular values of the bipartite amplitude
    matrix; ``method="rdm"`` diagonalises the block's reduced density matrix.
    """
    if state.basis is not Basis.MOMENTUM:
        raise ValueError(f"block entropies need a momentum-basis state, got {state.basis.value}")
    alphas = check_alphas(alphas)
    block.check(state.N)
    l = block.size
    if abs(state.norm - 1.0) > 1e-10:
        raise ValueError(f"state is not normalised (norm {state.norm:.12f})")
    if method == "schmidt":
        if min(l, state.N - l) > SCHMIDT_MAX_CUT:
            raise ValueError(f"schmidt cut limited to {SCHMIDT_MAX_CUT} modes on the smaller side")
        sv = np.linalg.svd(_bipartite_matrix(state, block), compute_uv=False)
        p = sv[sv > 1e-12] ** 2
        return spectrum_entropy(p, alphas, cutoff=0.0)
    if method == "rdm":
        if l > RDM_MAX_BLOCK:
            raise ValueError(f"rdm method limited to blocks of {RDM_MAX_BLOCK} modes")
        M = _bipartite_matrix(state, block)
        rho = M.T @ M.conj()
        p = np.linalg.eigvalsh(rho)
        return spectrum_entropy(p, alphas, cutoff=1e-12)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------


@dataclass
class EntropyProfile:
    family: Family
    points: list[tuple[float, EntropyResult]] = field(default_factory=list)
    blocks: list[ModeBlock] = field(default_factory=list)

    @property
    def params(self) -> np.ndarray:
        return np.array([p for p, _ in self.points])

    @property
    def vn(self) -> np.ndarray:
        return np.array([r.vn for _, r in self.points])


def family_blocks(grid: MomentumGrid, family: Family | str, k_F: float = np.pi / 2) -> list[ModeBlock]:
    family = Family(family)
    if family is Family.P:
        return [make_block(grid, "P", n, k_F) for n in range(1, len(grid.positive()) + 1)]
    if family is Family.PAIR:
        return [make_block(grid, "pair", k=grid.momenta[j]) for j in grid.positive()]
    if family is Family.E:
        return [make_block(grid, "E", n, k_F) for n in range(1, grid.N + 1)]
    raise ValueError("scans cover the P, pair and E families")


def entropy_scan(
    state: ManyBodyState,
    family: Family | str,
    k_F: float = np.pi / 2,
    alphas=(),
    grid: MomentumGrid | None = None,
    method: str = "schmidt",
) -> EntropyProfile:
    grid = grid or build_grid(state.N, BC.APBC)
    profile = EntropyProfile(Family(family))
    for block in family_blocks(grid, family, k_F):
        profile.points.append((block.label, block_entropy_state(state, block, alphas, method)))
        profile.blocks.append(block)
    return profile


# --------------------------------------------------------------------------
# minimax entropy
# --------------------------------------------------------------------------


@dataclass
class MinimaxResult:
    n: int
    block: ModeBlock
    value: float
    per_size: list[tuple[int, ModeBlock, float]]
    heuristic: bool = False


def _greedy_min(state, start: list[int], N: int, tol: float = 1e-12):
    block = list(start)
    s = block_entropy_state(state, ModeBlock(tuple(block))).vn
    improved = True
    while improved:
        improved = False
        for i in range(len(block)):
            for out in range(N):
                if out in block:
                    continue
                trial = block.copy()
                trial[i] = out
                st = block_entropy_state(state, ModeBlock(tuple(trial))).vn
                if st < s - tol:
                    block, s, improved = trial, st, True
                    break
            if improved:
                break
    return tuple(sorted(block)), s


def minimax_entropy(
    state: ManyBodyState,
    n_max: int | None = None,
    heuristic: bool | None = None,
    restarts: int = 8,
    seed: int = 0,
    k_F: float = np.pi / 2,
) -> MinimaxResult:
    """max over n <= n_max of the minimum block entropy among all n-mode blocks.

    Exhaustive for N <= 12.  With ``heuristic=True`` each minimum is replaced by
    a greedy swap search (block mode <-> complement mode) from the E_n block and
    ``restarts - 1`` seeded random blocks, giving an upper bound on the minimum.
    """
    N = state.N
    n_max = N // 2 if n_max is None else n_max
    if not 1 <= n_max <= N:
        raise ValueError(f"n_max must lie in [1, {N}]")
    if heuristic is None:
        heuristic = False
    if not heuristic and N > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive minimax limited to N <= {EXHAUSTIVE_MAX_N}; pass heuristic=True")
    grid = build_grid(N, BC.APBC)
    per_size = []
    rng = np.random.default_rng(seed)
    for n in range(1, n_max + 1):
        if heuristic:
            seeds = [list(make_block(grid, "E", n, k_F).indices)]
            seeds += [list(rng.choice(N, n, replace=False)) for _ in range(restarts - 1)]
            best = None
            for s0 in seeds:
                cand = _greedy_min(state, s0, N)
                if best is None or cand[1] < best[1] - 1e-12:
                    best = cand
            idx, val = best
        else:
            idx, val = None, np.inf
            for comb in itertools.combinations(range(N), n):
                s = block_entropy_state(state, ModeBlock(comb)).vn
                if s < val - 1e-12:
                    idx, val = comb, s
        per_size.append((n, ModeBlock(tuple(idx), Family.CUSTOM), float(val)))
    n_best, block_best, value = per_size[0]
    for n, b, v in per_size[1:]:
        if v > value + 1e-12:
            n_best, block_best, value = n, b, v
    return MinimaxResult(n_best, block_best, value, per_size, heuristic)


# --------------------------------------------------------------------------
# Neel state in momentum space
# --------------------------------------------------------------------------

PRINTED_NEEL_CATALOGUE = {
    "P_n": "S(P_n)=n log 2 if n<=N-2",
    "P_half": "S(P_{N/2})=(N-1) log 2",
    "p_k": "log 2",
    "two_unequal": "2 log 2",
    "E_n": "log 2",
}


@dataclass
class NeelReference:
    N: int
    printed: ManyBodyState
    derived: ManyBodyState
    catalogue: dict[str, float]
    printed_catalogue: dict[str, str] = field(default_factory=lambda: dict(PRINTED_NEEL_CATALOGUE))


def _neel_printed(N: int) -> np.ndarray:
    # as printed: mode N-1-j carries the complement of mode j, weight
    # Even(sum_{i<=N/2} m_i) (-1)^{sum_p m_{2p}}
    h = N // 2
    amps = np.zeros(1 << N, dtype=complex)
    for ms in itertools.product((0, 1), repeat=h):
        if sum(ms) % 2:
            continue
        w = sum(m << i for i, m in enumerate(ms)) | sum((1 - m) << (N - 1 - i) for i, m in enumerate(ms))
        amps[w] = (-1) ** sum(ms[1::2])
    return amps / np.linalg.norm(amps)


def _neel_derived(N: int) -> np.ndarray:
    # mode j (k < 0) pairs with j + N/2 (k + pi); exactly one of each pair is
    # occupied, the number of occupied k > 0 modes is N/4 mod 2, and all
    # amplitudes are equal when the creation operators are ordered pair by
    # pair; the sign below converts to ascending mode order
    h = N // 2
    amps = np.zeros(1 << N, dtype=complex)
    for ms in itertools.product((0, 1), repeat=h):
        upper = h - sum(ms)
        if upper % 2 != (N // 4) % 2:
            continue
        w = sum(m << i for i, m in enumerate(ms)) | sum((1 - m) << (i + h) for i, m in enumerate(ms))
        inv = sum(1 for i in range(h) for j in range(i + 1, h) if ms[i] == 0 and ms[j] == 1)
        amps[w] = (-1) ** inv
    return amps / np.linalg.norm(amps)


def neel_block_entropy(N: int, block: ModeBlock) -> float:
    """Closed-form entropy of a momentum block in the Neel state (nats).

    With s pairs (k, k+pi) split by the block, f pairs fully inside and c fully
    outside: S / ln 2 = s + [f > 0 and c > 0] - [f = 0 and c = 0].
    """
    h = N // 2
    inside = set(block.indices)
    s = f = c = 0
    for j in range(h):
        a, b = j in inside, (j + h) in inside
        if a and b:
            f += 1
        elif a or b:
            s += 1
        else:
            c += 1
    bits = s + (1 if f and c else 0) - (1 if not f and not c else 0)
    return max(bits, 0) * np.log(2.0)


def neel_reference(N: int) -> NeelReference:
    """Closed-form momentum amplitudes of the Neel state and its entropy catalogue.

    ``printed`` follows the published expansion literally (opposite occupation
    of k and -k); ``derived`` is the expansion that the Fourier transform of
    the Neel state actually produces in this package's conventions (opposite
    occupation of k and k + pi).  The catalogue is evaluated on ``derived``.
    """
    if N < 4 or N % 4:
        raise ValueError(f"Neel reference needs N a multiple of 4, got {N}")
    grid = build_grid(N, BC.APBC)
    h = N // 2
    printed = ManyBodyState(N, Basis.MOMENTUM, _neel_printed(N), h)
    derived = ManyBodyState(N, Basis.MOMENTUM, _neel_derived(N), h)
    ln2 = np.log(2.0)
    pos = grid.positive()
    cat = {f"P_{n}": neel_block_entropy(N, make_block(grid, "P", n)) for n in range(1, h + 1)}
    cat.update({f"E_{n}": neel_block_entropy(N, make_block(grid, "E", n)) for n in range(1, N)})
    cat.update(
        {f"p_{grid.numerators[j]}pi/{N}": neel_block_entropy(N, make_block(grid, "pair", k=grid.momenta[j])) for j in pos}
    )
    cat["k_and_k_plus_pi"] = neel_block_entropy(N, ModeBlock((0, h)))
    cat["two_unequal"] = neel_block_entropy(N, ModeBlock((pos[0], pos[-1]))) if len(pos) > 1 else ln2
    return NeelReference(N, printed, derived, cat)
