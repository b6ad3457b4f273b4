from fractions import Fraction

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cat0_classify import EFBCBuilder, EFINBuilder, EVCBuilder, preset
from cat0_classify.validation import ConfigError


def test_params_round_trip():
    est = EVCBuilder(window_R=Fraction(3, 2), axes_bound=1)
    params = est.get_params()
    assert params["window_R"] == Fraction(3, 2) and params["axes_choice"] == "enumerated"
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(window_R=1)
    assert twin.window_R == 1 and est.window_R == Fraction(3, 2)
    assert "sphere_dim" in EFBCBuilder().get_params()


def test_unfitted_estimator_refuses():
    with pytest.raises(NotFittedError):
        EFINBuilder().predict()


def test_efin_fit_predict_transform_score():
    est = EFINBuilder(window_R=1).fit("p2")
    assert est.predict() == ["FIN", "FIN", "FBC_INF", "VC_INF_NOT_FBC", "NOT_VC"]
    fixed = est.transform("trivial,cyclic-2,Z^2")
    assert not fixed[0].is_empty and not fixed[1].is_empty and fixed[2].is_empty
    assert est.score() == 1.0
    assert est.fit_transform("p2", None)[0].f_vector() == fixed[0].f_vector()


def test_fit_accepts_group_objects():
    est = EFINBuilder(window_R=1).fit(preset("pg"))
    assert est.group_.name == "pg"


def test_invalid_parameters_raise_at_fit():
    with pytest.raises(ConfigError):
        EFINBuilder(window_R=0.5).fit("p1")
    with pytest.raises(ConfigError):
        EFINBuilder(window_R=1).fit("nope")
    with pytest.raises(ConfigError):
        EVCBuilder(window_R=1, axes_choice="sideways").fit("p1")
    with pytest.raises(ConfigError):
        EFINBuilder(window_R=1, divisor=0).fit("p1")


def test_evc_and_efbc_estimators():
    evc = EVCBuilder(window_R=1).fit("pm")
    assert evc.score("trivial,glide-Z,D_inf") == 1.0
    fu, fv = evc.transform("glide-Z")[0]
    assert fu.is_empty and not fv.is_empty
    fbc = EFBCBuilder(window_R=1, sphere_dim=2).fit("pm")
    (fu, cells), = fbc.transform("D_inf")
    assert fu.is_empty and not cells
    assert fbc.score("glide-Z,D_inf") == 1.0


def test_transform_defaults_to_the_battery():
    est = EFINBuilder(window_R=1).fit("p1")
    assert len(est.transform()) == len(est.predict())
