"""Analytic momentum-space entanglement of the XY / transverse-field Ising chain.

After Jordan-Wigner and Fourier transforms the chain is a set of independent
``(k, -k)`` pairs mixed by a Bogoliubov rotation; every block entropy is a sum
of binary entropies over the pairs the block breaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .entropy import EntropyResult, binary_entropy, binary_renyi, check_alphas
from .modes import BC, MomentumGrid, ModeBlock, build_grid, make_block

__all__ = [
    "QuadraticModel",
    "BogoliubovSolution",
    "ThetaState",
    "bogoliubov",
    "block_entropy_quadratic",
    "itf_pair_entropy",
    "mode_entropy_density",
    "thermo_entropy_per_site",
    "finite_entropy_per_site",
    "single_mode_approx",
    "scaling_collapse",
    "S0_ITF",
]

S0_ITF = np.log(2.0) - 0.5


@dataclass(frozen=True)
class QuadraticModel:
    J: float = 0.0
    gamma: float = 1.0


@dataclass(frozen=True)
class BogoliubovSolution:
    grid: MomentumGrid
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    u2: np.ndarray
    v2: np.ndarray

    @property
    def n_f(self) -> float:
        """Ground-state fermion number, sum of v_j^2."""
        return float(np.sum(self.v2))


@dataclass(frozen=True)
class ThetaState:
    """Occupations of the Bogoliubov modes; all zeros is the ground state."""

    theta: tuple[int, ...]
    even: bool = True

    @classmethod
    def ground(cls, N: int) -> "ThetaState":
        return cls((0,) * N, True)

    def check(self, grid: MomentumGrid) -> None:
        if len(self.theta) != grid.N:
            raise ValueError("theta length does not match grid")
        if self.even and any(self.theta[j] != self.theta[grid.partner(j)] for j in range(grid.N)):
            raise ValueError("theta flagged even but not symmetric under k -> -k")


def _coefficients(k, J: float, gamma: float):
    k = np.asarray(k, dtype=float)
    # J - cos k without cancellation near k = 0
    A = (J - 1.0) + 2.0 * np.sin(0.5 * k) ** 2
    B = -gamma * np.sin(k)
    return A, B, np.hypot(A, B)


def _u2(A, E):
    A = np.asarray(A, dtype=float)
    E = np.asarray(E, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        u2 = 0.5 * (1.0 + A / E)
    zero = E == 0
    u2[zero] = np.where(A[zero] > 0, 1.0, np.where(A[zero] < 0, 0.0, 0.5))
    return np.clip(u2, 0.0, 1.0)


def bogoliubov(model: QuadraticModel, grid: MomentumGrid) -> BogoliubovSolution:
    A, B, E = _coefficients(grid.momenta, model.J, model.gamma)
    u2 = _u2(A, E)
    return BogoliubovSolution(grid, A, B, E, u2, 1.0 - u2)


def _broken_modes(grid: MomentumGrid, block: ModeBlock) -> list[int]:
    inside = set(block.indices)
    return [j for j in block.indices if grid.partner(j) not in inside]


def block_entropy_quadratic(
    sol: BogoliubovSolution,
    block: ModeBlock,
    theta: ThetaState | None = None,
    alphas=(),
) -> EntropyResult:
    """Von Neumann and Renyi entropies of ``block`` in the Bogoliubov state ``theta``.

    Only modes whose partner ``-k`` lies outside the block contribute; each
    adds the binary entropy of ``lambda_j = u_j^2 theta_j + v_j^2 (1 - theta_{-j})``.
    """
    grid = sol.grid
    alphas = check_alphas(alphas)
    block.check(grid.N)
    theta = theta or ThetaState.ground(grid.N)
    theta.check(grid)
    broken = _broken_modes(grid, block)
    if not broken:
        return EntropyResult(0.0, {a: 0.0 for a in alphas}, 1)
    th = np.array(theta.theta, dtype=float)
    partner = np.array([grid.partner(j) for j in broken])
    lam = sol.u2[broken] * th[broken] + sol.v2[broken] * (1.0 - th[partner])
    vn = float(np.sum(binary_entropy(lam)))
    renyi = {a: float(np.sum(binary_renyi(lam, a))) for a in alphas}
    mixed = int(np.count_nonzero((lam > 1e-12) & (lam < 1 - 1e-12)))
    return EntropyResult(vn, renyi, 2**mixed)


def itf_pair_entropy(k, J: float):
    """Entropy carried by the pair (k, -k) in the Ising ground state (gamma = 1)."""
    return mode_entropy_density(k, J, 1.0)


def mode_entropy_density(k, J: float, gamma: float = 1.0):
    A, _, E = _coefficients(k, J, gamma)
    A = np.atleast_1d(A)
    out = binary_entropy(_u2(A, np.atleast_1d(E)))
    return out if np.ndim(k) else float(out[0])


def _mode_entropy_scalar(k: float, J: float, gamma: float) -> float:
    # plain-float copy of mode_entropy_density; quad calls it thousands of times
    A = (J - 1.0) + 2.0 * math.sin(0.5 * k) ** 2
    E = math.hypot(A, gamma * math.sin(k))
    if E == 0.0:
        u2 = 1.0 if A > 0 else 0.0 if A < 0 else 0.5
    else:
        u2 = min(max(0.5 * (1.0 + A / E), 0.0), 1.0)
    if u2 <= 0.0 or u2 >= 1.0:
        return 0.0
    return -u2 * math.log(u2) - (1.0 - u2) * math.log1p(-u2)


def thermo_entropy_per_site(J: float, gamma: float = 1.0, epsabs: float = 1e-10) -> float:
    """N -> infinity limit of S(P_{N/2}) / N: (1/2 pi) times the integral of the mode entropy over (0, pi)."""
    points = []
    if gamma == 1.0 and abs(J) < 1:
        points.append(float(np.arccos(J)))
    val, err = integrate.quad(
        _mode_entropy_scalar,
        0.0,
        np.pi,
        args=(J, gamma),
        points=points or None,
        epsabs=epsabs,
        epsrel=1e-12,
        limit=200,
    )
    if err > 1e-8:
        raise ArithmeticError(f"quadrature error estimate {err:.2e} above 1e-8")
    return val / (2.0 * np.pi)


def finite_entropy_per_site(J: float, N: int, gamma: float = 1.0, bc: BC | str = BC.APBC) -> float:
    """s_N(J) = S(P_{N/2}) / N for the ground state on an ``N``-site grid."""
    grid = build_grid(N, bc)
    k = grid.momenta[grid.positive()]
    return float(np.sum(mode_entropy_density(k, J, gamma))) / N


def single_mode_approx(J: float, N: int) -> float:
    """S(P_{N/2}) with the lowest momentum pi/N kept exactly and the rest replaced by an integral."""
    if N < 2 or N % 2:
        raise ValueError(f"N must be even, got {N}")
    lowest = mode_entropy_density(np.pi / N, J, 1.0)
    points = [float(np.arccos(J))] if 2 * np.pi / N < np.arccos(max(min(J, 1.0), -1.0)) < np.pi else None
    rest, _ = integrate.quad(
        _mode_entropy_scalar,
        2 * np.pi / N,
        np.pi,
        args=(J, 1.0),
        points=points,
        epsabs=1e-12,
        limit=200,
    )
    return float(lowest + N / (2 * np.pi) * rest)


def scaling_collapse(Ns, Js=None, scaled=None, gamma: float = 1.0):
    """Finite-size collapse table rows ``(N, J, Jt, s_N, s_tilde)``, sorted by (N, J).

    Either give the fields ``Js`` directly or the scaling variable values
    ``scaled`` (``Jt = N (J - 1)``), which are mapped to ``J = 1 + Jt / N`` per size.
    """
    if (Js is None) == (scaled is None):
        raise ValueError("give exactly one of Js or scaled")
    s0_cache: dict[float, float] = {}
    rows = []
    for N in sorted(set(int(n) for n in Ns)):
        if N % 2:
            raise ValueError(f"N must be even, got {N}")
        fields = [float(J) for J in Js] if Js is not None else [1.0 + float(t) / N for t in scaled]
        for J in sorted(fields):
            if J not in s0_cache:
                s0_cache[J] = thermo_entropy_per_site(J, gamma)
            sN = finite_entropy_per_site(J, N, gamma)
            rows.append((N, J, N * (J - 1.0), sN, sN - s0_cache[J]))
    return rows


def positive_block(grid: MomentumGrid) -> ModeBlock:
    return make_block(grid, "P", len(grid.positive()))
