import functools

import numpy as np
import pytest

from kspace_ent.analysis import xxz_momentum_state
from kspace_ent.ed import ground_state_many_body
from kspace_ent.mbft import fourier_matrix, momentum_residual, transform
from kspace_ent.modes import build_grid
from kspace_ent.rdm import entropy_scan
from kspace_ent.state import Basis, ManyBodyState

_VERDICTS: list[str] = []


@functools.lru_cache(maxsize=None)
def xxz_summary(N: int, delta: float) -> dict:
    """Ground-state observables of the XXZ ring, computed once per session."""
    psi, gs = ground_state_many_body(N, delta)
    m = transform(psi, fourier_matrix(build_grid(N)))
    out = {
        "energy": gs.energy,
        "gap": gs.gap,
        "residual": momentum_residual(m),
        "occ": m.occupations(),
    }
    for fam in ("P", "pair", "E"):
        prof = entropy_scan(m, fam)
        out[fam] = prof.vn
        out[fam + "_params"] = prof.params
    return out


@functools.lru_cache(maxsize=8)
def xxz_state(N: int, delta: float):
    return xxz_momentum_state(N, delta)


def random_sector_state(N: int, n: int, rng, basis=Basis.MOMENTUM) -> ManyBodyState:
    words = np.array([w for w in range(1 << N) if bin(w).count("1") == n])
    vec = rng.standard_normal(words.size) + 1j * rng.standard_normal(words.size)
    vec /= np.linalg.norm(vec)
    return ManyBodyState.from_sector(N, words, vec, basis, n)


def record_verdict(number: int, title: str, checks: dict[str, bool]) -> None:
    """Print and remember one pass/fail line for an acceptance criterion, then assert."""
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
    if failed:
        line += "  [failed: " + "; ".join(failed) + "]"
    _VERDICTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
