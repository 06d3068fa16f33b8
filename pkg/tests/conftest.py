import numpy as np
import pytest

from qmedr.embedding import Dataset
from qmedr.linalg import spectral_norm


def make_blobs(seed=13, n=32, m=16, classes=2, spread=0.4):
    """Two (or more) Gaussian blobs with labels; centers mirrored for classes=2."""
    rng = np.random.default_rng(seed)
    if classes == 2:
        c0 = rng.normal(size=m)
        centers = np.stack([c0, -c0])
    else:
        centers = rng.normal(size=(classes, m))
    counts = [n // classes + (1 if i < n % classes else 0) for i in range(classes)]
    rows, labels = [], []
    for c, cnt in enumerate(counts):
        rows.append(centers[c] + spread * rng.normal(size=(cnt, m)))
        labels.extend([c] * cnt)
    return Dataset(X=np.vstack(rows), labels=np.array(labels))


def random_hermitian_in_window(rng, dim, kappa):
    """Random Hermitian matrix with spectrum inside [1/kappa, 1]."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    w = rng.uniform(1.0 / kappa, 1.0, size=dim)
    w[0] = 1.0 / kappa
    w[-1] = 1.0
    return (q * w) @ q.T


def random_contraction(rng, dim, scale=0.9):
    a = rng.normal(size=(dim, dim))
    return scale * a / spectral_norm(a)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
