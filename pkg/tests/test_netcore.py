import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathnorm.construct import TwoLayerRep, build_fc, build_resnet, normalize_two_layer, two_layer_eval
from pathnorm.io import config_hash, csv_text, dumps, fmt_float
from pathnorm.netcore import (
    Dataset,
    DomainError,
    FcParams,
    ModelFileError,
    ResNetArch,
    ResNetParams,
    StructuralError,
    augment_input,
    empirical_risk,
    fc_forward,
    load_model,
    params_from_json,
    params_to_json,
    population_risk_mc,
    resnet_forward,
    save_model,
    truncated_loss,
)
from pathnorm.targets import NoiseModel, constant_mixture, random_mixture, uniform_inputs

from helpers import const_net, hand_net, nets


# --- augment_input ------------------------------------------------------------


def test_augment_empty_payload():
    np.testing.assert_array_equal(augment_input([]), [1.0])


def test_augment_prepends_one():
    np.testing.assert_array_equal(augment_input([0.3, 0.7]), [1.0, 0.3, 0.7])


def test_augment_rejects_out_of_range():
    with pytest.raises(DomainError):
        augment_input([1.2])


def test_augment_rows():
    out = augment_input(np.array([[0.1, 0.2], [0.3, 0.4]]))
    np.testing.assert_array_equal(out[:, 0], [1.0, 1.0])


# --- forward ------------------------------------------------------------------


def test_zero_network_outputs_zero():
    p = ResNetParams.zeros(ResNetArch(3, 4, 2, 3))
    assert resnet_forward(p, np.array([1.0, 0.2, 0.9])) == 0.0


def test_hand_example_trace():
    f, tr = resnet_forward(hand_net(), np.array([1.0, 0.5]), want_trace=True)
    assert f == 4.5
    np.testing.assert_array_equal(tr.h[0], [1.0, 0.5])
    np.testing.assert_array_equal(tr.g[0], [1.5])
    np.testing.assert_array_equal(tr.h[1], [2.5, 2.0])


def test_forward_shape_mismatch():
    with pytest.raises(StructuralError):
        resnet_forward(hand_net(), np.array([1.0, 0.5, 0.2]))


def test_params_shape_validation():
    with pytest.raises(StructuralError):
        ResNetParams(ResNetArch(2, 2, 1, 1), np.eye(3), np.ones((1, 1, 2)), np.ones((1, 2, 1)), np.ones(2))
    with pytest.raises(StructuralError):
        ResNetParams(ResNetArch(2, 2, 1, 1), np.eye(2) * np.nan, np.ones((1, 1, 2)), np.ones((1, 2, 1)), np.ones(2))
    with pytest.raises(StructuralError):
        ResNetArch(0, 1, 1, 1)


def test_params_are_immutable():
    p = hand_net()
    with pytest.raises(ValueError):
        p.V[0, 0] = 5.0


def test_constructed_net_matches_rep():
    rng = np.random.default_rng(3)
    rep = TwoLayerRep(rng.uniform(-1, 1, 5), rng.uniform(-1, 1, (5, 3)))
    X = uniform_inputs(rng, 1000, 3)
    np.testing.assert_allclose(resnet_forward(build_resnet(rep, 2, 3), X), two_layer_eval(rep, X), atol=1e-12, rtol=0)


def test_fc_zero_and_hand():
    assert fc_forward(FcParams.zeros(2, 3, 3), np.array([1.0, 0.5])) == 0.0
    p = FcParams(2, 2, 2, (np.eye(2), np.array([[1.0, -1.0]])))
    assert fc_forward(p, np.array([0.2, 0.6])) == pytest.approx(-0.4, abs=1e-15)


def test_fc_constructed_matches_rep():
    rng = np.random.default_rng(4)
    rep = normalize_two_layer(TwoLayerRep(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, (2, 2))))
    X = uniform_inputs(rng, 1000, 2)
    np.testing.assert_allclose(fc_forward(build_fc(rep, 3, 3), X), two_layer_eval(rep, X), atol=1e-12, rtol=0)


def test_fc_shape_chain():
    with pytest.raises(StructuralError):
        FcParams(2, 3, 2, (np.zeros((3, 2)), np.zeros((1, 2))))
    with pytest.raises(StructuralError):
        FcParams(2, 3, 1, (np.zeros((1, 2)),))


@settings(max_examples=60, deadline=None)
@given(nets(), st.integers(0, 2**32 - 1))
def test_trace_consistency(p, seed):
    x = uniform_inputs(np.random.default_rng(seed), 1, p.arch.d)[0]
    f, tr = resnet_forward(p, x, want_trace=True)
    for l in range(p.arch.L):
        np.testing.assert_array_equal(tr.g[l], np.maximum(tr.preact[l], 0.0))
        np.testing.assert_array_equal(tr.h[l + 1], tr.h[l] + p.U[l] @ tr.g[l])
    assert f == pytest.approx(float(p.u @ tr.h[-1]), rel=1e-15, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(nets(), st.floats(0.01, 100.0), st.integers(0, 2**32 - 1))
def test_output_homogeneity(p, c, seed):
    X = uniform_inputs(np.random.default_rng(seed), 5, p.arch.d)
    q = p.replace(u=c * p.u)
    np.testing.assert_allclose(resnet_forward(q, X), c * resnet_forward(p, X), rtol=1e-13, atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(nets(), st.integers(0, 2**32 - 1))
def test_piecewise_linearity(p, seed):
    """Three collinear points in one activation region map to collinear outputs."""
    rng = np.random.default_rng(seed)
    x = uniform_inputs(rng, 1, p.arch.d)[0]
    direction = np.zeros(p.arch.d)
    direction[1:] = rng.normal(size=p.arch.d - 1)
    pts = [x + t * 1e-7 * direction for t in (0.0, 0.5, 1.0)]
    traces = [resnet_forward(p, pt, want_trace=True) for pt in pts]
    patterns = [tuple(np.concatenate([z > 0 for z in tr.preact]) if tr.preact else ()) for _, tr in traces]
    if len(set(patterns)) > 1:
        return
    f0, fm, f1 = (t[0] for t in traces)
    assert fm == pytest.approx(0.5 * (f0 + f1), rel=1e-9, abs=1e-12)


# --- losses -------------------------------------------------------------------


def test_truncated_loss_examples():
    x = np.array([1.0, 0.0])
    assert truncated_loss(x, 1.0, const_net(2.0)) == 0.0
    assert truncated_loss(x, 0.3, const_net(0.0)) == pytest.approx(0.09, abs=1e-15)
    assert truncated_loss(x, 3.0, const_net(0.0), B=2.0) == 4.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 1), st.floats(0.01, 10), st.floats(0, 5))
def test_truncation_bounds(f, y, B, extra):
    x = np.array([1.0, 0.0])
    p = const_net(f)
    assert 0.0 <= truncated_loss(x, y, p) <= 1.0
    yn = y * 20 - 10
    lb = truncated_loss(x, yn, p, B=B)
    assert 0.0 <= lb <= B * B
    assert truncated_loss(x, yn, p, B=B + extra) >= lb


def test_empirical_risk():
    p = const_net(0.0)
    x = np.array([[1.0, 0.2], [1.0, 0.4]])
    assert empirical_risk(Dataset(x, [0.0, 0.0]), p) == 0.0
    assert empirical_risk(Dataset(x, [0.3, 0.5]), p) == pytest.approx(0.17, abs=1e-15)
    with pytest.raises(DomainError):
        empirical_risk(Dataset(np.zeros((0, 2)), np.zeros(0)), p)


def test_dataset_validation():
    with pytest.raises(DomainError):
        Dataset(np.array([[0.5, 0.2]]), [0.0])
    with pytest.raises(DomainError):
        Dataset(np.array([[1.0, 1.2]]), [0.0])


def test_population_risk_exact_and_constant():
    target = random_mixture(4, 3, seed=1, rescale=True)
    p = build_resnet(TwoLayerRep.from_mixture(target), 2, 3)
    mean, se = population_risk_mc(target, NoiseModel(), p, 1000, seed=0)
    assert mean < 1e-28 and se < 1e-28
    mean, se = population_risk_mc(constant_mixture(0.3, 3), NoiseModel(), const_net(0.0, 3), 5000, seed=0)
    assert abs(mean - 0.09) <= max(3 * se, 1e-15)


def test_population_risk_determinism_and_domain():
    target = random_mixture(3, 2, seed=2)
    p = ResNetParams.random(ResNetArch(2, 3, 2, 2), np.random.default_rng(0), 0.5)
    a = population_risk_mc(target, NoiseModel.gaussian(0.2), p, 500, seed=7)
    b = population_risk_mc(target, NoiseModel.gaussian(0.2), p, 500, seed=7)
    assert a == b
    with pytest.raises(DomainError):
        population_risk_mc(target, NoiseModel(), p, 99, seed=0)


# --- model files --------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(nets())
def test_model_round_trip(p):
    q = params_from_json(json.loads(dumps(params_to_json(p))))
    for k in ("V", "W", "U", "u"):
        np.testing.assert_array_equal(getattr(p, k), getattr(q, k))
    assert q.arch == p.arch


def test_fc_model_round_trip(tmp_path):
    p = FcParams(2, 3, 2, (np.arange(6.0).reshape(3, 2) / 7, np.array([[0.1, -0.2, 1 / 3]])))
    save_model(p, tmp_path / "fc.json")
    q = load_model(tmp_path / "fc.json")
    for a, b in zip(p.W, q.W):
        np.testing.assert_array_equal(a, b)


def test_model_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "resnet",\n "arch": {')
    with pytest.raises(ModelFileError, match="line 2"):
        load_model(bad)
    obj = params_to_json(hand_net())
    del obj["u"]
    with pytest.raises(ModelFileError, match="u"):
        params_from_json(obj)
    obj = params_to_json(hand_net())
    obj["V"] = [[1.0, 0.0, 0.0]]
    with pytest.raises((StructuralError, ModelFileError)):
        params_from_json(obj)


# --- serialization helpers ------------------------------------------------------


def test_float_format_round_trips():
    rng = np.random.default_rng(0)
    for x in rng.normal(size=200) * 10.0 ** rng.integers(-20, 20, 200):
        assert float(fmt_float(x)) == x
    assert fmt_float(1.0) == "1.0"
    assert fmt_float(1e22) == "1e+22"


def test_dumps_and_hash_are_stable():
    obj = {"b": [1.0, 2.5], "a": {"x": None, "y": True}}
    assert dumps(obj) == dumps(json.loads(dumps(obj)))
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert len(config_hash({})) == 16


def test_csv_text_dialect():
    text = csv_text(["a", "b", "c"], [{"a": 0.1, "b": True, "c": None}])
    assert text == "a,b,c\n0.10000000000000001,true,\n"
