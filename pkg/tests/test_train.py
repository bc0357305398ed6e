import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathnorm.construct import TwoLayerRep, build_resnet, two_layer_eval
from pathnorm.netcore import Dataset, DomainError, ResNetArch, ResNetParams
from pathnorm.norms import weighted_path_norm
from pathnorm.targets import random_mixture, sample_dataset, uniform_inputs
from pathnorm.train import (
    DivergenceError,
    TrainConfig,
    gradient,
    loss_grad,
    penalty_coefficient,
    regularized_objective,
    thresholds,
    train,
)
from pathnorm.verify import fd_check_point

from helpers import const_net, hand_net, nets


def test_threshold_examples():
    assert thresholds(2)[0] == pytest.approx(4.400374, abs=5e-7)
    assert thresholds(5)[0] == pytest.approx(4.310660, abs=5e-7)
    lam, B_min = thresholds(2, 2.0, sigma=0.5, n=100)
    assert lam == pytest.approx(4.0 + 2 * (thresholds(2)[0] - 4.0), rel=1e-14)
    assert B_min == pytest.approx(1.0 + 0.5 * math.sqrt(math.log(100)), rel=1e-14)
    assert thresholds(3, tau=2.0, n=10)[1] == 3.0
    with pytest.raises(DomainError):
        thresholds(1)


def test_objective_examples():
    data = Dataset(np.array([[1.0, 0.0]]), [0.3])
    assert regularized_objective(const_net(0.0), data, lam=5.0) == pytest.approx(0.09, abs=1e-15)
    data = Dataset(np.array([[1.0, 0.5], [1.0, 0.2]]), [0.0, 0.0])
    lam = 4.5
    expect = 1.0 + 3 * lam * math.sqrt(2 * math.log(4) / 2) * 14.0
    assert regularized_objective(hand_net(), data, lam) == pytest.approx(expect, rel=1e-14)
    assert penalty_coefficient(2, 2, lam, B=2.0) == pytest.approx(2 * penalty_coefficient(2, 2, lam), rel=1e-15)


def test_loss_grad_cap():
    loss, dl = loss_grad(np.array([0.5, 2.0, -1.0]), np.array([0.0, 0.0, 0.9]))
    np.testing.assert_allclose(loss, [0.25, 1.0, 0.81])
    np.testing.assert_allclose(dl, [1.0, 0.0, 0.0])
    loss, dl = loss_grad(np.array([0.5]), np.array([5.0]), B=2.0)
    assert loss[0] == 4.0 and dl[0] == 0.0


def test_zero_output_kills_inner_loss_gradient():
    p = hand_net().replace(u=np.zeros(2))
    data = Dataset(np.array([[1.0, 0.5], [1.0, 0.9]]), [0.3, 0.6])
    g = gradient(p, data, lam=0.0)
    assert not np.any(g.W) and not np.any(g.U) and not np.any(g.V)


def test_penalty_gradient_wrt_u():
    p = hand_net()
    g = gradient(p, Dataset(np.array([[1.0, 0.5]]), [0.0]), lam=1.0, with_loss=False)
    coef = penalty_coefficient(2, 1, 1.0)
    # the norm is linear in |u|: its u-derivative is sign(u_k) times the norm with u = e_k
    reach = [weighted_path_norm(p.replace(u=np.eye(2)[k])) for k in range(2)]
    np.testing.assert_allclose(g.u, coef * np.sign(p.u) * reach, rtol=1e-14)


def test_finite_differences():
    rng = np.random.default_rng(11)
    errs = [fd_check_point(rng) for _ in range(10)]
    assert max(errs) <= 1.0


def test_realizable_point_is_stationary_without_penalty():
    rep = TwoLayerRep([0.4, 0.3], [[0.2, 0.5, 0.1], [0.3, -0.2, 0.4]])
    p = build_resnet(rep, 2, 1)
    X = uniform_inputs(np.random.default_rng(0), 30, 3)
    y = two_layer_eval(rep, X)
    assert np.all((y > 0) & (y < 1))
    g = gradient(p, Dataset(X, y), lam=0.0)
    # residuals are rounding-level, so the gradient vanishes up to float noise
    assert np.max(np.abs(g.flat())) <= 1e-14


@settings(max_examples=40, deadline=None)
@given(nets(), st.floats(0.1, 10.0))
def test_penalty_direction_invariant_to_output_scale(p, c):
    data = Dataset(np.array([[1.0] + [0.5] * (p.arch.d - 1)]), [0.0])
    g1 = gradient(p, data, lam=1.0, with_loss=False)
    g2 = gradient(p.replace(u=c * p.u), data, lam=1.0, with_loss=False)
    np.testing.assert_allclose(g2.u, g1.u, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(g2.W, c * g1.W, rtol=1e-12, atol=1e-300)


def small_problem(n=64):
    target = random_mixture(4, 3, seed=0, rescale=True)
    return sample_dataset(target, n, seed=1)


def test_train_determinism():
    data = small_problem()
    arch = ResNetArch(3, 4, 3, 2)
    cfg = TrainConfig(lam=4.4, epochs=5, seed=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        p1, h1 = train(cfg, data, arch)
        p2, h2 = train(cfg, data, arch)
    np.testing.assert_array_equal(p1.flat(), p2.flat())
    assert h1.rows() == h2.rows()


def test_history_matches_checkpoints():
    data = small_problem()
    arch = ResNetArch(3, 4, 3, 2)
    cfg = TrainConfig(lam=4.4, epochs=6, seed=0, optimizer="adam", step_size=0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        best, h = train(cfg, data, arch, keep_checkpoints=True)
    assert len(h.checkpoints) == len(h.objective) == 7
    for ck, J, P in zip(h.checkpoints, h.objective, h.path_norm):
        assert regularized_objective(ck, data, cfg.lam) == pytest.approx(J, rel=1e-10)
        assert weighted_path_norm(ck) == pytest.approx(P, rel=1e-10)
    assert regularized_objective(best, data, cfg.lam) == pytest.approx(min(h.objective), rel=1e-10)


def test_below_threshold_warns():
    data = small_problem(16)
    with pytest.warns(RuntimeWarning, match="below the certified threshold"):
        train(TrainConfig(lam=0.5, epochs=1), data, ResNetArch(3, 4, 2, 1))


def test_divergence_detected():
    data = small_problem(16)
    arch = ResNetArch(3, 4, 4, 4)
    init = ResNetParams.random(arch, np.random.default_rng(0), 1e80)
    with pytest.raises(DivergenceError), np.errstate(all="ignore"):
        train(TrainConfig(lam=5.0, epochs=3, step_size=1e80), data, arch, init=init)


def test_train_config_validation():
    with pytest.raises(DomainError):
        TrainConfig(lam=1.0, epochs=0)
    with pytest.raises(DomainError):
        TrainConfig(lam=1.0, optimizer="lbfgs")
