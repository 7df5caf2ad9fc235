import numpy as np
import pytest

from facehr import kernels
from facehr._pykernels import _bilinear

try:
    from facehr import _ckernels  # noqa: F401

    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False

needs_ext = pytest.mark.skipif(not HAVE_EXT, reason="compiled kernels not built")


@needs_ext
@pytest.mark.parametrize("order", [1, 4, 8])
def test_nlms_backends_agree(rng, order):
    d = rng.standard_normal(2000)
    x = rng.standard_normal(2000)
    py = kernels.backend_module("python").nlms_filter(d, x, order, 0.5, 1e-6)
    cy = kernels.backend_module("cython").nlms_filter(d, x, order, 0.5, 1e-6)
    np.testing.assert_allclose(py[0], cy[0], rtol=0, atol=1e-10)
    np.testing.assert_allclose(py[1], cy[1], rtol=0, atol=1e-10)


@needs_ext
def test_lk_backends_agree(rng):
    from scipy import ndimage

    img = ndimage.gaussian_filter(rng.uniform(0, 255, (48, 48)), 1.5)
    nxt = np.roll(img, (1, 2), axis=(0, 1))
    gx = ndimage.correlate1d(img, [-0.5, 0, 0.5], axis=1, mode="nearest")
    gy = ndimage.correlate1d(img, [-0.5, 0, 0.5], axis=0, mode="nearest")
    pts = rng.uniform(12, 36, (20, 2))
    guess = np.zeros((20, 2))
    f_py, ok_py = kernels.backend_module("python").lk_level(img, gx, gy, nxt, pts, guess, 7, 30, 0.01)
    f_cy, ok_cy = kernels.backend_module("cython").lk_level(img, gx, gy, nxt, pts, guess, 7, 30, 0.01)
    np.testing.assert_array_equal(ok_py, ok_cy)
    np.testing.assert_allclose(f_py, f_cy, atol=1e-9)


def test_backend_name_is_known():
    assert kernels.BACKEND in ("python", "cython")
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


def test_bilinear_hits_grid_values():
    img = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(_bilinear(img, np.array([0.0, 3.0, 1.0]), np.array([0.0, 2.0, 1.0])),
                                  [0.0, 11.0, 5.0])
    assert _bilinear(img, np.array([0.5]), np.array([0.5]))[0] == pytest.approx(2.5)
    # clamped outside
    assert _bilinear(img, np.array([-3.0]), np.array([-1.0]))[0] == 0.0
