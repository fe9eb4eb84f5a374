import numpy as np
import pytest

from finclone._accel import default_backend
from finclone.kernels import build_problem, solve


def test_env_flag(monkeypatch):
    monkeypatch.setenv("FINCLONE_BACKEND", "numpy")
    assert default_backend() == "numpy"
    monkeypatch.setenv("FINCLONE_BACKEND", "numba")
    assert default_backend() == "numba"
    monkeypatch.setenv("FINCLONE_BACKEND", "fortran")
    with pytest.raises(ValueError):
        default_backend()


def test_unconstrained_is_lexicographic(backend):
    p = build_problem(3, 2, [], [])
    rows = solve(p, backend)
    assert rows.shape == (8, 3)
    assert [tuple(r) for r in rows] == sorted(tuple(r) for r in rows)


def test_single_constraint(backend):
    # cell1 == NOT(cell0)
    p = build_problem(2, 2, [(1, np.array([1, 0]))], [(0, [1], [[0]])])
    assert solve(p, backend).tolist() == [[0, 1], [1, 0]]


def test_limit(backend):
    p = build_problem(4, 2, [], [])
    assert solve(p, backend, limit=5).tolist() == solve(p, backend)[:5].tolist()


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve(build_problem(1, 2, [], []), "cuda")
