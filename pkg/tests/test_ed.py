from functools import reduce

import numpy as np
import pytest

from kspace_ent.ed import (
    DegeneracyError,
    SolverError,
    free_fermion_energy,
    ground_state,
    lanczos_lowest,
    load_ground_state,
    neel_state,
    save_ground_state,
    sector_basis,
    xxz_hamiltonian,
)

I2 = np.eye(2)
Z = np.diag([1.0, -1.0])
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # annihilates the occupied state (index 1)


def _annihilator(i: int, N: int) -> np.ndarray:
    # Jordan-Wigner: strings on sites before i; site 1 is the least significant bit
    ops = [Z] * i + [LOWER] + [I2] * (N - i - 1)
    return reduce(np.kron, ops[::-1])


def _dense_reference(N: int, delta: float) -> np.ndarray:
    c = [_annihilator(i, N) for i in range(N)]
    n = [ci.T @ ci for ci in c]
    H = np.zeros((1 << N, 1 << N))
    for i in range(N):
        j = (i + 1) % N
        s = -1.0 if j == 0 else 1.0  # c_{N+1} = -c_1
        hop = s * c[i].T @ c[j]
        H += -0.5 * (hop + hop.T) + delta * n[i] @ n[j]
    return H


@pytest.mark.parametrize("delta", [0.0, 0.7, -0.4])
def test_matrix_matches_jordan_wigner_construction(delta):
    N = 8
    H = xxz_hamiltonian(N, delta)
    ref = _dense_reference(N, delta)
    w = H.basis.states
    np.testing.assert_allclose(H.matrix.toarray(), ref[np.ix_(w, w)], atol=1e-14)


def test_sector_basis():
    b = sector_basis(6, 3)
    assert len(b) == 20
    assert np.all(np.diff(b.states) > 0)
    assert b.index(b.states[7]) == 7
    with pytest.raises(KeyError):
        b.index([0b111111])
    with pytest.raises(ValueError):
        sector_basis(30, 3)


def test_hamiltonian_is_symmetric():
    H = xxz_hamiltonian(12, 0.3).matrix
    assert abs(H - H.T).max() == 0.0


@pytest.mark.parametrize("N", [4, 8, 12, 16])
def test_free_fermion_energy(N):
    gs = ground_state(xxz_hamiltonian(N, 0.0))
    assert gs.energy == pytest.approx(free_fermion_energy(N), abs=1e-10)
    assert gs.residual <= 1e-10


def test_free_fermion_energy_closed_form():
    # N = 4: two modes at k = +-pi/4
    assert free_fermion_energy(4) == pytest.approx(-np.sqrt(2))


@pytest.mark.parametrize("delta", [-0.5, 0.0, 0.5, 1.0, 3.0])
def test_lanczos_matches_dense(delta):
    H = xxz_hamiltonian(8, delta)
    a = ground_state(H, "lanczos")
    b = ground_state(H, "dense")
    assert a.energy == pytest.approx(b.energy, abs=1e-10)
    assert abs(abs(a.vector @ b.vector) - 1) < 1e-9
    assert a.gap == pytest.approx(b.gap, abs=1e-6)


def test_sign_convention_is_deterministic():
    H = xxz_hamiltonian(8, 0.5)
    v = ground_state(H, seed=3).vector
    w = ground_state(H, seed=11).vector
    np.testing.assert_allclose(v, w, atol=1e-9)
    first = v[np.abs(v) > 1e-6 * np.abs(v).max()][0]
    assert first > 0


def test_degenerate_sizes_rejected():
    with pytest.raises(DegeneracyError, match="multiple of 4"):
        ground_state(xxz_hamiltonian(10, 0.5))


def test_bad_sizes_rejected():
    with pytest.raises(ValueError):
        xxz_hamiltonian(5, 0.0)
    with pytest.raises(ValueError):
        ground_state(xxz_hamiltonian(8, 0.0), method="qr")


def test_lanczos_reports_non_convergence():
    rng = np.random.default_rng(0)
    A = np.diag(np.linspace(0, 1, 400))
    with pytest.raises(SolverError):
        lanczos_lowest(lambda x: A @ x, 400, rng.standard_normal(400), tol=1e-14, krylov_dim=3, max_restarts=2)


def test_checkpoint_round_trip(tmp_path):
    H = xxz_hamiltonian(8, 0.25)
    gs = ground_state(H)
    path = tmp_path / "gs.bin"
    save_ground_state(path, 8, 0.25, gs.vector)
    N, d, v = load_ground_state(path)
    assert (N, d) == (8, 0.25)
    np.testing.assert_array_equal(v, gs.vector)
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"x" * 64)
    with pytest.raises(ValueError):
        load_ground_state(bad)


def test_neel_state():
    s = neel_state(4)
    assert s.norm == pytest.approx(1.0)
    assert np.nonzero(s.amplitudes)[0].tolist() == [0b0101, 0b1010]
    with pytest.raises(ValueError):
        neel_state(5)


def test_large_delta_approaches_neel():
    H = xxz_hamiltonian(8, 200.0)
    v = ground_state(H).vector
    w = H.basis.states
    weight = sum(v[np.searchsorted(w, x)] ** 2 for x in (0b01010101, 0b10101010))
    assert weight > 0.99
