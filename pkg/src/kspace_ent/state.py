"""Full Fock-space amplitude vectors over N fermionic modes.

Word bit ``j`` is the occupation of mode ``j`` (mode 0 = least significant bit)
and basis kets are ordered products ``(a_0^+)^{n_0} (a_1^+)^{n_1} ... |0>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modes import popcount


class Basis(str, Enum):
    POSITION = "position"
    MOMENTUM = "momentum"
    INTERMEDIATE = "intermediate"


BASIS_CODES = {Basis.POSITION: 0, Basis.MOMENTUM: 1, Basis.INTERMEDIATE: 2}


@dataclass
class ManyBodyState:
    N: int
    basis: Basis
    amplitudes: np.ndarray
    sector: int | None = None

    def __post_init__(self):
        self.basis = Basis(self.basis)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.N,):
            raise ValueError(f"expected {1 << self.N} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def from_sector(cls, N: int, words, vector, basis=Basis.POSITION, sector: int | None = None):
        amps = np.zeros(1 << N, dtype=complex)
        amps[np.asarray(words, dtype=np.int64)] = vector
        if sector is None:
            counts = np.unique(popcount(words))
            sector = int(counts[0]) if counts.size == 1 else None
        return cls(N, basis, amps, sector)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "ManyBodyState":
        return ManyBodyState(self.N, self.basis, self.amplitudes.copy(), self.sector)

    def occupations(self) -> np.ndarray:
        """<n_j> for every mode."""
        p = np.abs(self.amplitudes) ** 2
        words = np.arange(1 << self.N, dtype=np.int64)
        return np.array([p[(words >> j) & 1 == 1].sum() for j in range(self.N)])

    def sector_leak(self) -> float:
        """Largest |amplitude| outside the declared particle-number sector (0 if none declared)."""
        if self.sector is None:
            return 0.0
        outside = popcount(np.arange(1 << self.N)) != self.sector
        return float(np.abs(self.amplitudes[outside]).max(initial=0.0))
