"""Composite workflows shared by the CLI and the acceptance suite.

Each helper chains the library pieces (ED, momentum transform, block
entropies, fits) for one of the standard observables of the XXZ chain.
"""

from __future__ import annotations

import numpy as np

from .ed import ground_state_many_body, neel_state
from .fitkit import FitResult, fit_model
from .mbft import fourier_matrix, transform
from .modes import BC, MomentumGrid, build_grid, make_block
from .rdm import block_entropy_state, entropy_scan, neel_reference
from .state import ManyBodyState


def xxz_momentum_state(N: int, delta: float, method: str = "lanczos", tol: float = 1e-10, seed: int = 0) -> ManyBodyState:
    """Ground state of the XXZ ring expressed in the APBC momentum modes."""
    psi, _ = ground_state_many_body(N, delta, method=method, tol=tol, seed=seed)
    return transform(psi, fourier_matrix(build_grid(N, BC.APBC)))


def positive_half_entropy(state: ManyBodyState) -> float:
    grid = build_grid(state.N, BC.APBC)
    return block_entropy_state(state, make_block(grid, "P", state.N // 2)).vn


def energy_block_max(state: ManyBodyState, k_F: float = np.pi / 2) -> tuple[float, int]:
    """Largest S(E_n) over n = 1..N-1 and the n attaining it."""
    prof = entropy_scan(state, "E", k_F)
    vn = prof.vn[:-1]  # E_N is the whole system
    i = int(np.argmax(vn))
    return float(vn[i]), int(prof.params[i])


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - e^{i phi} b| with phi chosen from the overlap."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.abs(a - phase * b).max())


def occupation_exponent(occ: np.ndarray, grid: MomentumGrid, k_F: float = np.pi / 2) -> FitResult:
    """Power fit of |n_k - 1/2| against |k - k_F| over the modes k_F < k < pi.

    Particle-hole symmetry at half filling makes the k < k_F side a mirror
    image, so only one side enters (the fit needs distinct abscissae).
    """
    k = grid.momenta
    sel = (k > k_F + 1e-12) & (k < np.pi - 1e-12)
    x = k[sel] - k_F
    y = np.abs(np.asarray(occ)[sel] - 0.5)
    return fit_model(list(zip(x, y)), "power")


def pair_profile_points(k, S, k_F: float = np.pi / 2) -> list[tuple[float, float]]:
    """(|k - k_F|, S) with entries at equal distance averaged."""
    x = np.abs(np.asarray(k, dtype=float) - k_F)
    S = np.asarray(S, dtype=float)
    key = np.round(x, 12)
    return [(float(x[key == v][0]), float(S[key == v].mean())) for v in np.unique(key)]


def pair_profile_fit(profile, k_F: float = np.pi / 2) -> FitResult:
    return fit_model(pair_profile_points(profile.params, profile.vn, k_F), "exp_offset")


def delta_exponent(deltas, entropies) -> FitResult:
    """Power fit S ~ a |Delta|^b."""
    return fit_model([(abs(d), s) for d, s in zip(deltas, entropies)], "power")


def neel_check(N: int) -> dict:
    """Transform the Neel state and compare with both closed forms and the entropy catalogue."""
    ref = neel_reference(N)
    grid = build_grid(N, BC.APBC)
    m = transform(neel_state(N), fourier_matrix(grid))
    ent = {}
    h = N // 2
    pos = grid.positive()
    blocks = {f"P_{n}": make_block(grid, "P", n) for n in range(1, h + 1)}
    blocks.update({f"E_{n}": make_block(grid, "E", n) for n in range(1, N)})
    blocks.update({f"p_{grid.numerators[j]}pi/{N}": make_block(grid, "pair", k=grid.momenta[j]) for j in pos})
    for name, b in blocks.items():
        ent[name] = (block_entropy_state(m, b).vn, ref.catalogue[name])
    return {
        "entropies": ent,
        "mismatch_printed": phase_aligned_distance(m.amplitudes, ref.printed.amplitudes),
        "mismatch_derived": phase_aligned_distance(m.amplitudes, ref.derived.amplitudes),
        "nonzero_amplitudes": int(np.count_nonzero(np.abs(m.amplitudes) > 1e-12)),
    }
