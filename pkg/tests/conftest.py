import numpy as np
import pytest


def fd_grad(f, x, eps=1e-6):
    """Central finite differences of scalar f() with respect to array x."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * eps)
        it.iternext()
    return g


def rel_err(a, b, floor=1e-12):
    """Relative error between gradient tensors, by norm."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return np.linalg.norm(a - b) / max(na, nb, floor)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
