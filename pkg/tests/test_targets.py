import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from pathnorm.netcore import DomainError, StructuralError
from pathnorm.targets import (
    BarronMixture,
    NoiseModel,
    barron_norm_upper,
    gaussian_tail_bound,
    mixture_eval,
    random_mixture,
    sample_dataset,
    uniform_inputs,
)


def simplex_min_second_moment(a) -> float:
    """Minimize sqrt(sum a_j^2 / p_j) over the probability simplex numerically."""
    a = np.abs(np.asarray(a, dtype=float))
    K = a.size

    def obj(z):
        p = np.exp(z - z.max())
        p /= p.sum()
        return float(np.sum(a * a / p))

    best = min((minimize(obj, np.random.default_rng(s).normal(size=K), method="Nelder-Mead",
                         options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000}) for s in range(3)),
               key=lambda r: r.fun)
    return float(np.sqrt(best.fun))


def test_mixture_eval_examples():
    t = BarronMixture([0.5, -0.5], [[1.0, 0.0], [0.0, 1.0]])
    assert mixture_eval(t, np.array([1.0, 0.4])) == pytest.approx(0.3, abs=1e-15)
    assert mixture_eval(t, np.zeros(2)) == 0.0
    neg = BarronMixture(-t.a, t.omega)
    x = np.array([1.0, 0.7])
    assert mixture_eval(neg, x) == -mixture_eval(t, x)


def test_barron_upper_examples():
    assert barron_norm_upper(BarronMixture([0.5, -0.5], [[1.0, 0.0], [0.0, 1.0]])) == 1.0
    assert barron_norm_upper(BarronMixture([2.0], [[0.0, 1.0]])) == 2.0
    t = BarronMixture([1.0, 2.0, 3.0], np.eye(3))
    assert barron_norm_upper(t) == 6.0
    assert simplex_min_second_moment(t.a) == pytest.approx(6.0, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.05, 3.0), min_size=1, max_size=5), st.lists(st.booleans(), min_size=5, max_size=5))
def test_barron_upper_matches_simplex_oracle(mags, signs):
    a = np.array([m if s else -m for m, s in zip(mags, signs)])
    t = BarronMixture(a, np.eye(len(a), 2 + len(a))[:, : len(a)] if len(a) > 1 else [[1.0]])
    assert barron_norm_upper(t) == pytest.approx(simplex_min_second_moment(a), abs=1e-6)


def test_direction_normalization_enforced():
    with pytest.raises(DomainError):
        BarronMixture([1.0], [[0.5, 0.4]])
    with pytest.raises(StructuralError):
        BarronMixture([], np.zeros((0, 2)))


def test_random_mixture_properties():
    a = random_mixture(7, 4, seed=3)
    b = random_mixture(7, 4, seed=3)
    np.testing.assert_array_equal(a.a, b.a)
    np.testing.assert_array_equal(a.omega, b.omega)
    np.testing.assert_allclose(np.abs(a.omega).sum(axis=1), 1.0, atol=1e-12, rtol=0)
    assert np.all(np.abs(a.a) <= 1.0)


def test_rescaled_mixture_range():
    t = random_mixture(10, 3, coef_scale=5.0, seed=1, rescale=True)
    assert t.K == 11 and t.rescale is not None
    vals = mixture_eval(t, uniform_inputs(np.random.default_rng(99), 20000, 3))
    assert vals.min() >= 0.0 and vals.max() <= 1.0


def test_mixture_json_round_trip():
    t = random_mixture(3, 3, seed=0, rescale=True)
    u = BarronMixture.from_json(json.loads(json.dumps(t.to_json())))
    np.testing.assert_array_equal(t.a, u.a)
    np.testing.assert_array_equal(t.omega, u.omega)
    assert u.rescale == t.rescale


def test_noise_model_certificate():
    with pytest.raises(DomainError):
        NoiseModel("gaussian", 0.5, 1.0, 0.0)
    with pytest.raises(DomainError):
        NoiseModel("laplace")
    g = NoiseModel.gaussian(0.5)
    assert (g.c, g.tau) == (2.0, 0.0)


def test_sample_dataset_noiseless_exact():
    t = random_mixture(5, 3, seed=0)
    data = sample_dataset(t, 50, seed=4)
    np.testing.assert_array_equal(data.y, mixture_eval(t, data.x))
    again = sample_dataset(t, 50, seed=4)
    np.testing.assert_array_equal(data.x, again.x)
    np.testing.assert_array_equal(data.y, again.y)
    assert np.all(data.x[:, 0] == 1.0)


def test_gaussian_noise_mean():
    t = random_mixture(5, 3, seed=0)
    n, sigma = 10**5, 0.5
    data = sample_dataset(t, n, NoiseModel.gaussian(sigma), seed=1)
    eps = data.y - mixture_eval(t, data.x)
    assert abs(eps.mean()) <= 3 * sigma / np.sqrt(n)


def test_gaussian_tail_certificate():
    sigma, n = 0.5, 10**6
    eps = NoiseModel.gaussian(sigma).draw(np.random.default_rng(0), n)
    for t in (sigma, 2 * sigma, 3 * sigma):
        frac = float(np.mean(np.abs(eps) > t))
        p = min(float(gaussian_tail_bound(t, sigma)), 1.0)
        assert frac <= p + 3 * np.sqrt(p * (1 - p) / n)
