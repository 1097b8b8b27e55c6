import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isonet import model
from isonet.errors import DomainError, ScenarioError
from isonet.model import ChannelParams, NetworkScenario

from conftest import scenario


CH4 = ChannelParams(4, 1.0, 10.0, 0.0, 0.5)
CH2 = ChannelParams(2, 1.0, 10.0, 0.0, 0.5)


class TestPathLoss:
    def test_at_origin_is_inverse_c(self):
        assert model.path_loss(0.0, CH4) == 1.0

    def test_alpha2(self):
        assert model.path_loss(10.0, CH2) == pytest.approx(1 / 101, rel=1e-15)

    def test_alpha4(self):
        assert model.path_loss(10.0, CH4) == pytest.approx(1 / 10001, rel=1e-15)

    @given(st.floats(0, 1e4), st.floats(1e-6, 1e3))
    def test_strictly_decreasing_and_bounded(self, dist, step):
        for ch in (CH2, CH4):
            near, far = model.path_loss(dist, ch), model.path_loss(dist + step, ch)
            assert 0 < far <= near <= 1 / ch.c
            if step > 1e-3 * max(dist, 1):
                assert far < near

    def test_vectorized(self):
        out = model.path_loss(np.array([0.0, 1.0, 2.0]), CH2)
        np.testing.assert_allclose(out, [1.0, 0.5, 0.2])


class TestSinr:
    def test_noise_only(self):
        assert model.sinr(1.0, 0.0, CH2.replace(eta=0.1)) == pytest.approx(10.0)

    def test_zero_gain(self):
        assert model.sinr(0.0, 0.3, CH2.replace(eta=0.1)) == 0.0

    def test_interference(self):
        assert model.sinr(2.0, 0.001, CH2) == pytest.approx(2 / 0.101)

    def test_noiseless_interference_free_is_infinite(self):
        assert model.sinr(1.0, 0.0, CH2) == math.inf


class TestChannel:
    @pytest.mark.parametrize("field,value", [("alpha", 3), ("c", 0.0), ("d", -1.0),
                                             ("eta", -0.1), ("beta", 0.0)])
    def test_rejects_out_of_range(self, field, value):
        kwargs = dict(alpha=4, c=1.0, d=10.0, eta=0.0, beta=0.5)
        kwargs[field] = value
        with pytest.raises(DomainError):
            ChannelParams(**kwargs)

    def test_link_gain_inverse(self):
        assert CH4.link_gain_inverse == 10001.0

    def test_negative_lambda_rejected(self):
        with pytest.raises(DomainError):
            NetworkScenario(model.homogeneous(), -1.0, CH4)


class TestShapes:
    STOCK = [model.exp_power(100, 3), model.exponential(250), model.disk(50),
             model.homogeneous(), model.power_law(3.0, 10.0), model.power_law(1.5, 1.0),
             model.hotspot(), model.tabulated([0, 50, 100, 200], [1, 0.8, 0.3, 0.0])]

    @pytest.mark.parametrize("shape", STOCK, ids=lambda s: s.kind)
    def test_stock_shapes_pass_all_checks(self, shape):
        assert model.check_shape(shape) == []

    def test_disk_is_left_continuous(self):
        d = model.disk(50)
        assert d(50.0) == 1.0 and d(50.0 + 1e-9) == 0.0
        assert d.jumps == ((50.0, 1.0),)

    def test_wrong_derivative_is_flagged(self):
        good = model.exp_power(100, 3)
        bad = model.ShapeFunction(**{**good.__dict__, "deriv": lambda r: 0 * np.asarray(r)})
        assert [v.restriction for v in model.check_shape(bad)] == ["derivative"]

    def test_unnormalized_shape_is_flagged(self):
        good = model.exp_power(100, 3)
        bad = model.ShapeFunction(**{**good.__dict__, "eval": lambda r: 2 * good(r),
                                     "deriv": lambda r: 2 * good.deriv(r)})
        assert "normalization" in [v.restriction for v in model.check_shape(bad)]

    def test_wrong_tail_exponent_is_flagged(self):
        good = model.power_law(3.0, 10.0)
        bad = model.ShapeFunction(**{**good.__dict__, "tail_nu": 2.0})
        assert "tail" in [v.restriction for v in model.check_shape(bad)]

    def test_power_law_tail_limit(self):
        s = model.power_law(1.5, 1.0)
        r = 1e6
        assert s(r) * r**1.5 == pytest.approx(s.tail_limit, rel=1e-5)

    def test_cutoff(self):
        s = model.exp_power(100, 3)
        assert s(s.cutoff(1e-12)) == pytest.approx(1e-12, rel=1e-9)
        assert model.homogeneous().cutoff(1e-12) == math.inf

    def test_hotspot_profile(self):
        h = model.hotspot(70, 500)
        assert h(0) == 1 and h(70) == 1 and h(500) == pytest.approx(0, abs=1e-15) and h(600) == 0
        r = np.linspace(70, 500, 200)
        assert np.all(np.diff(h(r)) <= 0)


class TestValidation:
    def test_cubic_alpha2_clean(self):
        assert model.validate_scenario(scenario(alpha=2)) == []

    def test_homogeneous_alpha2_names_tail_condition(self):
        v = model.validate_scenario(scenario(model.homogeneous(), alpha=2))
        errs = model.errors_only(v)
        assert len(errs) == 1 and "tail condition" in errs[0].restriction
        assert "nu>0" in errs[0].message

    def test_homogeneous_alpha4_only_warns(self):
        v = model.validate_scenario(scenario(model.homogeneous()))
        assert model.errors_only(v) == []
        assert [x.restriction for x in v] == ["AST tail condition"]

    def test_empty_process_warns(self):
        v = model.validate_scenario(scenario(lam=0.0))
        assert [x.severity for x in v] == ["warning"]

    def test_idempotent(self):
        s = scenario(model.homogeneous(), alpha=2)
        assert model.validate_scenario(s) == model.validate_scenario(s)


class TestLevels:
    def test_db_suffix(self):
        assert model.parse_level("-8dB") == pytest.approx(10 ** -0.8)
        assert model.parse_level(" 3 db ") == pytest.approx(10 ** 0.3)

    def test_linear(self):
        assert model.parse_level("0.1") == 0.1 and model.parse_level(2) == 2.0

    def test_garbage(self):
        with pytest.raises(ValueError):
            model.parse_level("loud")

    def test_eta_reference_distance(self):
        assert model.eta_at_distance(0.2, 10.0, CH2) == pytest.approx(0.2)
        assert model.eta_at_distance(0.2, 20.0, CH2) == pytest.approx(0.2 * 401 / 101)

    def test_db_roundtrip(self):
        assert model.linear_to_db(model.db_to_linear(-14.0)) == pytest.approx(-14.0)


class TestScenarioFiles:
    def test_roundtrip(self, tmp_path):
        s = scenario(model.exponential(250), alpha=2, eta=0.1)
        p = tmp_path / "s.json"
        model.dump_scenario(s, p)
        back = model.load_scenario(p)
        assert back.to_dict() == s.to_dict()

    def test_db_values_in_file(self):
        d = scenario().to_dict()
        d["channel"]["eta"] = "-8dB"
        assert model.scenario_from_dict(d).channel.eta == pytest.approx(10 ** -0.8)

    @pytest.mark.parametrize("mutate,key", [
        (lambda d: d.pop("lambda"), "lambda"),
        (lambda d: d["channel"].pop("beta"), "channel.beta"),
        (lambda d: d["channel"].update(alpha=3), "channel"),
        (lambda d: d["channel"].update(c="x"), "channel.c"),
        (lambda d: d["shape"].update(kind="blob"), "shape.kind"),
        (lambda d: d["shape"]["params"].pop("scale"), "shape.params.scale"),
    ])
    def test_errors_name_the_key(self, mutate, key):
        d = json.loads(json.dumps(scenario().to_dict()))
        mutate(d)
        with pytest.raises(ScenarioError, match=key.replace(".", r"\.")):
            model.scenario_from_dict(d)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        with pytest.raises(ScenarioError, match="invalid JSON"):
            model.load_scenario(p)

    def test_shipped_scenarios_load(self):
        from pathlib import Path
        files = sorted((Path(__file__).parent.parent / "scenarios").glob("*.json"))
        assert files
        for f in files:
            model.load_scenario(f)
