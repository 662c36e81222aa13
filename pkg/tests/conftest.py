import os

import numpy as np
import pytest

from swalign.image import Image, Shift2D, gaussian_blob, normalize_to_probability, pad_to

MNIST_ENV = "SWALIGN_MNIST_DIR"


def mnist_paths():
    """(images, labels) paths for the 10k test set, or None if unavailable."""
    root = os.environ.get(MNIST_ENV)
    if not root:
        return None
    images = os.path.join(root, "t10k-images-idx3-ubyte")
    labels = os.path.join(root, "t10k-labels-idx1-ubyte")
    if os.path.exists(images) and os.path.exists(labels):
        return images, labels
    return None


needs_mnist = pytest.mark.skipif(
    mnist_paths() is None,
    reason=f"set {MNIST_ENV} to a directory with the MNIST t10k IDX files",
)


def two_blob_image(L, seed):
    """Smooth asymmetric probability image for property tests."""
    rng = np.random.default_rng(seed)
    data = gaussian_blob(L, Shift2D(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
                         rng.uniform(0.08, 0.15)).data
    data = data + rng.uniform(0.4, 0.9) * gaussian_blob(
        L, Shift2D(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
        rng.uniform(0.08, 0.15)).data
    return normalize_to_probability(Image(data))


def stroke_image(rng, L=39, inner=28):
    """Digit-like blob polyline padded into an L x L frame."""
    data = np.zeros((inner, inner))
    pos = rng.uniform(-0.35, 0.35, size=2)
    for _ in range(rng.integers(3, 6)):
        new = np.clip(pos + rng.uniform(-0.35, 0.35, size=2), -0.5, 0.5)
        for t in np.linspace(0.0, 1.0, 6):
            c = pos * (1 - t) + new * t
            data += gaussian_blob(inner, Shift2D(c[0], c[1]),
                                  rng.uniform(0.06, 0.1)).data
        pos = new
    img = pad_to(normalize_to_probability(Image(data)), L)
    return Image(img.data, probability=True)


@pytest.fixture(scope="session")
def stroke_corpus():
    rng = np.random.default_rng(505)
    return [stroke_image(rng) for _ in range(30)]
