import numpy as np
import pytest

from netmimo.channel import PathLossParams, composite_channel, pairwise_distances, path_loss, sample_fading
from netmimo.errors import ParameterError


def test_path_loss_bounded_and_decreasing():
    p = PathLossParams()
    assert path_loss(0.0, p) == 1.0
    r = np.linspace(0, 1000, 50)
    g = path_loss(r, p)
    assert np.all(np.diff(g) < 0) and np.all(g <= 1)
    assert path_loss(p.d_o, p) == pytest.approx(2 ** -3.76)


def test_path_loss_validation():
    with pytest.raises(ParameterError):
        PathLossParams(alpha=2.0)
    with pytest.raises(ParameterError):
        path_loss(-1.0, PathLossParams())


def test_fading_is_unit_variance_circular(rng):
    h = sample_fading(4, rng, size=100_000)
    assert h.shape == (100_000, 4)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(h**2)) < 0.01


def test_composite_channel_block_scaling(rng):
    p = PathLossParams()
    bs = np.array([[10.0, 0.0], [0.0, 200.0], [-50.0, -50.0]])
    samples = np.array([composite_channel((0.0, 0.0), bs, 4, p, rng).coeffs for _ in range(20_000)])
    ch = composite_channel((0.0, 0.0), bs, 4, p, rng)
    beta = path_loss(pairwise_distances(np.zeros((1, 2)), bs)[0], p)
    assert np.allclose(ch.per_bs_pathloss, beta)
    power = np.mean(np.abs(samples) ** 2, axis=0).reshape(3, 4)
    assert np.allclose(power / beta[:, None], 1.0, atol=0.05)
