import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from netmimo import gamma_matching as gm
from netmimo.errors import ParameterError

positive = st.floats(1e-3, 1e3, allow_nan=False)


@settings(max_examples=300)
@given(st.lists(st.tuples(positive, positive), min_size=1, max_size=12))
def test_moment_match_preserves_mean_and_variance(comps):
    g = gm.moment_match(comps)
    m1 = sum(k * t for k, t in comps)
    m2 = sum(k * t * t for k, t in comps)
    assert g.mean == pytest.approx(m1, rel=1e-12)
    assert g.var == pytest.approx(m2, rel=1e-12)


@settings(max_examples=300)
@given(st.lists(st.floats(1e-12, 1.0), min_size=1, max_size=20), st.integers(1, 8))
def test_shape_at_most_MB_with_equality_iff_equal(beta, M):
    g = gm.intended_channel_params(beta, M)
    B = len(beta)
    assert g.shape <= M * B * (1 + 1e-12)
    equal = np.allclose(beta, beta[0], rtol=1e-9)
    if equal:
        assert g.shape == pytest.approx(M * B, rel=1e-9)
    elif np.ptp(beta) > 1e-3 * max(beta):
        assert g.shape < M * B * (1 - 1e-9)


def test_intended_params_match_moment_matching():
    beta = [0.9, 0.1, 1e-3]
    a = gm.intended_channel_params(beta, 5)
    b = gm.moment_match([(5, x) for x in beta])
    assert a.shape == pytest.approx(b.shape) and a.scale == pytest.approx(b.scale)


def test_single_bs_shape_is_M():
    g = gm.intended_channel_params([0.2], 4)
    assert g.shape == pytest.approx(4) and g.scale == pytest.approx(0.2)


def test_signal_and_interference_shapes():
    base = gm.GammaParams(10.0, 0.5)
    s = gm.signal_power_params(base, M=5, B_l=2, eta=0.6)
    assert s.shape == pytest.approx(10 * 5 / 10) and s.scale == 0.5
    i = gm.interference_beam_power_params(base, M=5, B_j=2, n_beams=6)
    assert i.shape == pytest.approx(0.6 * 10)
    assert gm.diversity_order(5, 2, 0.6) == pytest.approx(5)
    assert gm.signal_kappa_shape(5, 2, 0.6) == pytest.approx(2.5)


def test_validation():
    with pytest.raises(ParameterError):
        gm.GammaParams(0, 1)
    with pytest.raises(ParameterError):
        gm.moment_match([])
    with pytest.raises(ParameterError):
        gm.intended_channel_params([0.0, 0.5], 2)
    with pytest.raises(ParameterError):
        gm.signal_power_params(gm.GammaParams(1, 1), 5, 1, 0.0)


def test_sum_of_gammas_close_to_matched(rng):
    comps = [(3.0, 1.0), (2.0, 0.3), (4.0, 0.05)]
    x = sum(rng.gamma(k, t, 200_000) for k, t in comps)
    g = gm.moment_match(comps)
    assert x.mean() == pytest.approx(g.mean, rel=0.01)
    assert x.var() == pytest.approx(g.var, rel=0.03)
    assert stats.kstest(x, g.cdf).statistic < 0.02


def test_decomposed_surrogates_have_expected_means(rng):
    beta = np.array([0.5, 0.2, 0.05])
    for shared in (True, False):
        s = gm.decomposed_signal_surrogate(beta, 5, 2.0, 0.6, rng, size=200_000, shared=shared)
        assert s.mean() == pytest.approx(beta.sum() * 2.5, rel=0.01)
    i = gm.decomposed_interference_surrogate(beta, 5, 0.6, rng, size=200_000)
    assert i.mean() == pytest.approx(beta.sum() * 3, rel=0.01)
    p = gm.per_bs_signal_surrogate(beta, 5, 2, 0.6, rng, size=200_000)
    assert p.mean() == pytest.approx(beta.sum() * 2.5, rel=0.01)
