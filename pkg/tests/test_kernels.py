import importlib

import numpy as np
import pytest

from raidd import kernels
from raidd.kernels import _pykernels


def _compiled():
    try:
        return importlib.import_module("raidd.kernels._ckernels")
    except ImportError:
        pytest.skip("compiled kernels not built")


def test_fallback_propagate():
    Phi = np.array([[0.5, 0.0], [0.1, 0.9]])
    Y = _pykernels.propagate(Phi, np.array([1.0, 2.0]), 3)
    ref = [np.array([1.0, 2.0])]
    for _ in range(3):
        ref.append(Phi @ ref[-1])
    np.testing.assert_allclose(Y, ref)


def test_fallback_disagreement():
    X = np.array([[1.0, 5.0, 2.0, 5.0, 4.0, 5.0, 9.0]])
    assert _pykernels.disagreement(X, 3, 2)[0] == 3.0
    assert _pykernels.disagreement(X, 1, 2)[0] == 0.0


def test_compiled_matches_fallback():
    ck = _compiled()
    rng = np.random.default_rng(3)
    Phi = rng.standard_normal((25, 25)) / 6
    x0 = rng.standard_normal(25)
    np.testing.assert_allclose(ck.propagate(Phi, x0, 200), _pykernels.propagate(Phi, x0, 200),
                               rtol=1e-12, atol=1e-12)
    X = rng.standard_normal((50, 30))
    np.testing.assert_array_equal(ck.disagreement(X, 5, 3), _pykernels.disagreement(X, 5, 3))
    np.testing.assert_array_equal(ck.disagreement(X, 1, 3), np.zeros(50))


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("RAIDD_KERNELS", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python" and mod.propagate is _pykernels.propagate
    finally:
        monkeypatch.delenv("RAIDD_KERNELS")
        importlib.reload(kernels)
