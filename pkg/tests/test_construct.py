import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathnorm.construct import (
    TwoLayerRep,
    build_fc,
    build_resnet,
    fc_layout,
    normalize_two_layer,
    subsample_two_layer,
    two_layer_eval,
)
from pathnorm.netcore import (
    CapacityError,
    DegenerateInputError,
    DomainError,
    StructuralError,
    fc_forward,
    resnet_forward,
)
from pathnorm.norms import weighted_path_norm
from pathnorm.targets import BarronMixture, mixture_eval, random_mixture, uniform_inputs


def reps(max_M=8, max_d=4):
    @st.composite
    def build(draw):
        M = draw(st.integers(1, max_M))
        d = draw(st.integers(2, max_d))
        seed = draw(st.integers(0, 2**32 - 1))
        rng = np.random.default_rng(seed)
        b = rng.uniform(-1, 1, (M, d))
        b[np.abs(b).sum(axis=1) == 0, 0] = 1.0
        return TwoLayerRep(rng.uniform(-2, 2, M), b)

    return build()


def test_normalize_examples():
    r = normalize_two_layer(TwoLayerRep([0.5, -0.5], [[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(r.a, [1.0, -1.0])
    np.testing.assert_array_equal(r.b, [[0.5, 0.0], [0.0, 0.5]])
    # 2 relu(3 x2) = 6 relu(x2): the unit-l1 direction is (0, 1)
    r = normalize_two_layer(TwoLayerRep([2.0], [[0.0, 3.0]]))
    np.testing.assert_array_equal(r.a, [6.0])
    np.testing.assert_array_equal(r.b, [[0.0, 1.0]])


def test_normalize_drops_dead_neurons():
    r = normalize_two_layer(TwoLayerRep([0.0, 1.0], [[1.0, 1.0], [0.0, 2.0]]))
    assert r.M == 1
    with pytest.raises(DegenerateInputError):
        normalize_two_layer(TwoLayerRep([0.0], [[1.0, 0.0]]))


@settings(max_examples=60, deadline=None)
@given(reps(), st.integers(0, 2**32 - 1))
def test_normalize_preserves_function_and_mass(rep, seed):
    r = normalize_two_layer(rep)
    T = rep.path_mass()
    np.testing.assert_allclose(np.abs(r.a), T, rtol=1e-14)
    assert np.abs(r.b).sum() == pytest.approx(1.0, rel=1e-12)
    X = uniform_inputs(np.random.default_rng(seed), 50, rep.d)
    np.testing.assert_allclose(two_layer_eval(r, X), two_layer_eval(rep, X), rtol=1e-12, atol=1e-12)
    again = normalize_two_layer(r)
    np.testing.assert_allclose(again.a, r.a, rtol=1e-14)
    np.testing.assert_allclose(again.b, r.b, rtol=1e-14, atol=1e-300)


def test_build_resnet_example():
    rep = TwoLayerRep([0.5, -0.5], [[1.0, 0.0], [0.0, 1.0]])
    p = build_resnet(rep, 2, 1)
    assert (p.arch.D, p.arch.L, p.arch.m) == (3, 2, 1)
    assert resnet_forward(p, np.array([1.0, 0.4])) == pytest.approx(0.3, abs=1e-15)
    assert weighted_path_norm(p) == pytest.approx(3.0 * rep.path_mass(), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(reps(), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_build_resnet_exact_with_padding(rep, L, seed):
    m = -(-rep.M // L) + 1
    p = build_resnet(rep, L, m)
    X = uniform_inputs(np.random.default_rng(seed), 40, rep.d)
    np.testing.assert_allclose(resnet_forward(p, X), two_layer_eval(rep, X), rtol=1e-12, atol=1e-12)
    assert weighted_path_norm(p) == pytest.approx(3.0 * rep.path_mass(), rel=1e-12)


def test_build_resnet_capacity():
    rep = TwoLayerRep(np.ones(5), np.ones((5, 2)))
    with pytest.raises(CapacityError):
        build_resnet(rep, 2, 2)


@settings(max_examples=60, deadline=None)
@given(reps(max_M=6, max_d=3), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_build_fc_exact(rep, L, seed):
    rep = normalize_two_layer(rep)
    d = rep.d
    m = d + 3
    while sum(fc_layout(d, m, L, 2)) < rep.M:
        m += 1
    p = build_fc(rep, L, m)
    assert len(p.W) == L
    rng = np.random.default_rng(seed)
    X = np.vstack([uniform_inputs(rng, 40, d), rng.uniform(0, 3, (10, d))])
    np.testing.assert_allclose(fc_forward(p, X), two_layer_eval(rep, X), rtol=1e-11, atol=1e-11)


def test_build_fc_errors():
    rep = normalize_two_layer(TwoLayerRep([1.0, -1.0], [[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(CapacityError):
        build_fc(rep, 3, 2)
    with pytest.raises(StructuralError):
        build_fc(rep, 1, 4)
    with pytest.raises(DomainError):
        build_fc(TwoLayerRep([1.0, 2.0], [[1.0, 0.0], [0.0, 1.0]]), 3, 4)
    many = normalize_two_layer(TwoLayerRep(np.ones(30), np.random.default_rng(0).uniform(0, 1, (30, 2))))
    with pytest.raises(CapacityError):
        build_fc(many, 3, 4)


def test_subsample_determinism_and_exact():
    t = random_mixture(6, 3, seed=2)
    a = subsample_two_layer(t, 10, seed=5)
    b = subsample_two_layer(t, 10, seed=5)
    np.testing.assert_array_equal(a.a, b.a)
    np.testing.assert_array_equal(a.b, b.b)
    assert np.abs(a.a).sum() == pytest.approx(np.abs(t.a).sum(), rel=1e-14)
    ex = subsample_two_layer(t, 6, seed=0, exact_if_fits=True)
    np.testing.assert_array_equal(ex.a, t.a)
    with pytest.raises(DomainError):
        subsample_two_layer(t, 0)
    with pytest.raises(DegenerateInputError):
        subsample_two_layer(BarronMixture([0.0], [[1.0, 0.0]]), 3)


def test_subsample_unbiased():
    t = random_mixture(8, 3, seed=4)
    x = uniform_inputs(np.random.default_rng(1), 1, 3)[0]
    vals = np.array([two_layer_eval(subsample_two_layer(t, 5, seed=s), x) for s in range(4000)])
    se = vals.std(ddof=1) / np.sqrt(vals.size)
    assert abs(vals.mean() - mixture_eval(t, x)) <= 4 * se
