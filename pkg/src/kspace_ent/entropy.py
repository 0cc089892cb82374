"""Entropy functionals shared by the analytic and the state-based paths. Natural log throughout."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

CUTOFF = 1e-12


@dataclass(frozen=True)
class EntropyResult:
    vn: float
    renyi: dict[float, float] = field(default_factory=dict)
    schmidt_count: int = 0


def binary_entropy(x):
    """H2(x) = -x ln x - (1-x) ln(1-x), with 0 ln 0 = 0."""
    x = np.asarray(x, dtype=float)
    return -(xlogy(x, x) + xlogy(1.0 - x, 1.0 - x))


def check_alphas(alphas) -> list[float]:
    out = []
    for a in alphas or ():
        a = float(a)
        if a <= 0 or a == 1.0:
            raise ValueError(f"Renyi order must be > 0 and != 1 (use the von Neumann value), got {a}")
        out.append(a)
    return out


def binary_renyi(x, alpha: float):
    x = np.asarray(x, dtype=float)
    return np.log(x**alpha + (1.0 - x) ** alpha) / (1.0 - alpha)


def spectrum_entropy(p, alphas=(), cutoff: float = CUTOFF) -> EntropyResult:
    """Entropies of a probability spectrum (eigenvalues of a reduced density matrix)."""
    alphas = check_alphas(alphas)
    p = np.asarray(p, dtype=float)
    p = p[p > cutoff]
    vn = float(-np.sum(p * np.log(p)))
    renyi = {a: float(np.log(np.sum(p**a)) / (1.0 - a)) for a in alphas}
    return EntropyResult(max(vn, 0.0), renyi, int(p.size))
