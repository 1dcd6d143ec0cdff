import importlib.util

import numpy as np
import pytest

from styleopt._kernels import _pykernels

HAS_C = importlib.util.find_spec("styleopt._kernels._ckernels") is not None
if HAS_C:
    from styleopt._kernels import _ckernels

needs_c = pytest.mark.skipif(not HAS_C, reason="compiled kernels not built")

LENGTHS = np.array([0.8, 1.1])
RNG = np.random.default_rng(70)


def random_stack(b=9, t=10, d=3):
    return RNG.uniform(-np.pi, np.pi, size=(b, t, d))


def mlp_params(d=3, seed=0):
    rng = np.random.default_rng(seed)
    return (
        rng.normal(size=(2 * d + 7, 42)),
        rng.normal(size=42),
        rng.normal(size=(42, 21)),
        rng.normal(size=21),
        rng.normal(size=(21, 21)),
        rng.normal(size=21),
    )


class TestWrapAngle:
    @pytest.mark.parametrize("kernels", [_pykernels] + ([_ckernels] if HAS_C else []))
    def test_edges_and_identity(self, kernels):
        wrap = kernels.wrap_angle
        assert wrap(np.pi) == np.pi
        assert wrap(-np.pi) == np.pi
        assert wrap(0.0) == 0.0
        assert wrap(3.0) == 3.0  # in-range values bit-preserved
        assert np.isclose(wrap(4.0), 4.0 - 2 * np.pi)
        assert np.isclose(wrap(-4.0), -4.0 + 2 * np.pi)
        vals = RNG.uniform(-10, 10, size=1000)
        wrapped = wrap(vals)
        assert np.all(wrapped > -np.pi) and np.all(wrapped <= np.pi)
        assert np.allclose(np.mod(wrapped - vals, 2 * np.pi), 0.0, atol=1e-9)


@needs_c
class TestBackendParity:
    def test_fk_batch(self):
        q = RNG.uniform(-np.pi, np.pi, size=(64, 3))
        pos_p, point_p = _pykernels.fk_batch(LENGTHS, 0.3, q)
        pos_c, point_c = _ckernels.fk_batch(LENGTHS, 0.3, q)
        assert np.allclose(pos_p, pos_c, rtol=1e-12, atol=1e-14)
        assert np.allclose(point_p, point_c, rtol=1e-12, atol=1e-14)

    def test_ssd_batch(self):
        x = random_stack()
        assert np.allclose(_pykernels.ssd_batch(x), _ckernels.ssd_batch(x), rtol=1e-12)

    def test_feature_batch(self):
        x = random_stack()
        ee_p, fv_p = _pykernels.feature_batch(LENGTHS, 0.1, x)
        ee_c, fv_c = _ckernels.feature_batch(LENGTHS, 0.1, x)
        assert np.allclose(ee_p, ee_c, rtol=1e-12, atol=1e-14)
        assert np.allclose(fv_p, fv_c, rtol=1e-12, atol=1e-14)

    def test_mlp_inputs_batch(self):
        x = random_stack()
        u_p = _pykernels.mlp_inputs_batch(LENGTHS, 0.0, x)
        u_c = _ckernels.mlp_inputs_batch(LENGTHS, 0.0, x)
        assert np.allclose(u_p, u_c, rtol=1e-12, atol=1e-14)

    def test_mlp_cost_batch(self):
        x = random_stack()
        params = mlp_params()
        c_p = _pykernels.mlp_cost_batch(LENGTHS, 0.0, x, *params)
        c_c = _ckernels.mlp_cost_batch(LENGTHS, 0.0, x, *params)
        assert np.allclose(c_p, c_c, rtol=1e-10)

    def test_non_contiguous_inputs(self):
        x = np.asfortranarray(random_stack())
        assert np.allclose(_pykernels.ssd_batch(x), _ckernels.ssd_batch(x), rtol=1e-12)

    def test_dof_mismatch_raises(self):
        with pytest.raises(ValueError):
            _ckernels.fk_batch(LENGTHS, 0.0, np.zeros((4, 5)))
