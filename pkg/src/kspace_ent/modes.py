"""Momentum grids, occupation words and the block families used in the scans.

Grid indices are the only identity of a momentum mode; floating momenta are
carried along for arithmetic but never compared for equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "BC",
    "Family",
    "MomentumGrid",
    "ModeBlock",
    "build_grid",
    "make_block",
    "total_momentum",
    "wrap_momentum",
    "popcount",
]


class BC(str, Enum):
    PBC = "PBC"
    APBC = "APBC"


class Family(str, Enum):
    P = "P"
    PAIR = "pair"
    E = "E"
    CUSTOM = "custom"


@dataclass(frozen=True)
class MomentumGrid:
    """Allowed momenta of an ``N``-site ring, sorted ascending in (-pi, pi].

    ``numerators`` holds the integer ``q`` with ``k = q * pi / N``; all index
    arithmetic (pairing, sign tests) is done on these integers.
    """

    N: int
    bc: BC
    numerators: tuple[int, ...]

    @property
    def momenta(self) -> np.ndarray:
        return np.array(self.numerators, dtype=float) * np.pi / self.N

    def __len__(self) -> int:
        return self.N

    def index_of(self, numerator: int) -> int:
        """Grid index of the momentum ``numerator * pi / N`` (wrapped into the zone)."""
        q = _wrap_numerator(numerator, self.N)
        try:
            return self.numerators.index(q)
        except ValueError:
            raise ValueError(f"momentum {q}*pi/{self.N} is not on the {self.bc.value} grid") from None

    def partner(self, j: int) -> int:
        """Index of ``-k_j``; modes at 0 and pi are their own partners."""
        return self.index_of(-self.numerators[j])

    def positive(self) -> list[int]:
        """Indices with 0 < k < pi, ascending."""
        return [j for j, q in enumerate(self.numerators) if 0 < q < self.N]


def _wrap_numerator(q: int, N: int) -> int:
    # into (-N, N], i.e. k into (-pi, pi]
    q = q % (2 * N)
    return q - 2 * N if q > N else q


def build_grid(N: int, bc: BC | str = BC.APBC) -> MomentumGrid:
    """Momentum grid for ``N`` sites.

    APBC gives ``k = (2p+1) pi / N``; PBC gives ``k = 2 pi j / N`` with
    ``j = -N/2+1 ... N/2`` so that exactly ``N`` momenta appear.
    """
    bc = BC(bc)
    if not isinstance(N, (int, np.integer)) or N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")
    N = int(N)
    if bc is BC.APBC:
        nums = [2 * p + 1 for p in range(-N // 2, N // 2)]
    else:
        nums = [2 * j for j in range(-N // 2 + 1, N // 2 + 1)]
    return MomentumGrid(N, bc, tuple(nums))


@dataclass(frozen=True)
class ModeBlock:
    indices: tuple[int, ...]
    family: Family = Family.CUSTOM
    label: float | None = None

    def __post_init__(self):
        if len(self.indices) < 1:
            raise ValueError("a block needs at least one mode")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError(f"repeated mode in block {self.indices}")

    @property
    def size(self) -> int:
        return len(self.indices)

    def complement(self, N: int) -> "ModeBlock":
        s = set(self.indices)
        return ModeBlock(tuple(j for j in range(N) if j not in s), Family.CUSTOM)

    def check(self, N: int) -> None:
        if any(j < 0 or j >= N for j in self.indices):
            raise ValueError(f"block {self.indices} has modes outside [0, {N})")


def _e_order(grid: MomentumGrid, k_F: float) -> list[int]:
    k = grid.momenta
    q = np.array(grid.numerators)
    # distance from the Fermi surface, then smaller |k|, then k > 0 first
    key = [(abs(abs(k[j]) - k_F), abs(int(q[j])), -int(np.sign(q[j]))) for j in range(grid.N)]
    return sorted(range(grid.N), key=lambda j: key[j])


def make_block(
    grid: MomentumGrid,
    family: Family | str,
    n: int | None = None,
    k_F: float = np.pi / 2,
    k: float | None = None,
    indices=None,
) -> ModeBlock:
    """Build a block of one of the standard families.

    Parameters
    ----------
    family : {"P", "pair", "E", "custom"}
        ``P``: the ``n`` positive momenta closest to ``+k_F``.
        ``pair``: ``{k, -k}`` for the grid momentum nearest ``k`` (must lie on
        the grid to within 1e-9).
        ``E``: the ``n`` momenta minimising ``||k| - k_F|``, ties broken by
        smaller ``|k|`` then positive sign.
        ``custom``: the given ``indices``.
    """
    family = Family(family)
    N = grid.N
    if family is Family.CUSTOM:
        block = ModeBlock(tuple(int(j) for j in indices), Family.CUSTOM)
        block.check(N)
        return block
    if family is Family.PAIR:
        if k is None:
            raise ValueError("pair block needs a momentum k")
        qf = k * N / np.pi
        q = int(round(qf))
        if abs(qf - q) > 1e-9:
            raise ValueError(f"k={k} is not on the {grid.bc.value} grid for N={N}")
        j = grid.index_of(q)
        jm = grid.partner(j)
        idx = (j,) if jm == j else (j, jm)
        return ModeBlock(idx, Family.PAIR, label=float(grid.momenta[j]))

    if n is None:
        raise ValueError(f"family {family.value} needs a size n")
    if family is Family.P:
        pos = grid.positive()
        if not 1 <= n <= len(pos):
            raise ValueError(f"P block size must lie in [1, {len(pos)}], got {n}")
        k_all = grid.momenta
        order = sorted(pos, key=lambda j: (abs(k_all[j] - k_F), grid.numerators[j]))
        return ModeBlock(tuple(order[:n]), Family.P, label=float(n))
    if not 1 <= n <= N:
        raise ValueError(f"E block size must lie in [1, {N}], got {n}")
    return ModeBlock(tuple(_e_order(grid, k_F)[:n]), Family.E, label=float(n))


def popcount(words) -> np.ndarray:
    """Vectorised bit count of non-negative integer words."""
    w = np.asarray(words, dtype=np.uint64)
    c = np.zeros(w.shape, dtype=np.int64)
    while np.any(w):
        c += (w & np.uint64(1)).astype(np.int64)
        w = w >> np.uint64(1)
    return c


def wrap_momentum(k: float) -> float:
    """Reduce ``k`` mod 2 pi into (-pi, pi]."""
    r = float(np.mod(k + np.pi, 2 * np.pi) - np.pi)
    return np.pi if r == -np.pi else r


def total_momentum(config: int, grid: MomentumGrid) -> float:
    """Total momentum of occupation word ``config`` (bit j = mode j), in (-pi, pi].

    Summed on the integer numerators, so the result is exact up to the final
    multiplication by pi/N.
    """
    if config < 0 or config >> grid.N:
        raise ValueError(f"config {config:#x} does not fit in {grid.N} modes")
    q = sum(grid.numerators[j] for j in range(grid.N) if config >> j & 1)
    return _wrap_numerator(q, grid.N) * np.pi / grid.N


def momentum_numerators(words: np.ndarray, grid: MomentumGrid) -> np.ndarray:
    """Total-momentum numerators (mod 2N, in [0, 2N)) for an array of words."""
    words = np.asarray(words, dtype=np.int64)
    q = np.zeros(words.shape, dtype=np.int64)
    for j, num in enumerate(grid.numerators):
        q += ((words >> j) & 1) * num
    return np.mod(q, 2 * grid.N)
