import math

import pytest

import odex


def test_bundled_tables():
    assert odex.model_names() == ["temperature", "velocity", "flame_width", "flame_intensity"]
    assert len(odex.initial_design()) == 30
    assert len(odex.reference_design()) == 4
    assert "bayes-D/pm10pm20" in odex.published_keys()


def test_fit_reproduces_temperature_intercept():
    m = odex.fit("temperature")
    assert abs(m["beta_hat"][0] - 1523.2627) < 1e-2
    assert m["n"] == 30 and m["gamma_hat"] is None


def test_fit_with_day_effect_and_predict():
    m = odex.fit("velocity", data=["ccd30", "reference"], day_effect=True)
    assert m["n"] == 34 and m["gamma_hat"] is not None
    center = odex.predict(m, [[0, 0, 0, 0]], day=0)[0]
    assert math.isclose(center, math.exp(m["beta_hat"][0]), rel_tol=1e-12)
    rmse = odex.prediction_error(m, "validation14", "rmse")
    mse = odex.prediction_error(m, "validation14", "mse")
    assert math.isclose(rmse * rmse, mse, rel_tol=1e-12)


def test_reference_efficiency():
    eff = odex.efficiency(odex.reference_design(), models=["temperature"])
    assert abs(100 * eff["temperature"] - 80.03) <= 1.0
    self_eff = odex.efficiency(odex.reference_design(), relative_to=odex.reference_design())
    assert all(v == 1.0 for v in self_eff.values())


def test_optimize_is_seeded_and_dominates_published():
    kwargs = dict(criterion="bayesD", seed=3, swarm=20, iterations=60, restarts=1)
    a = odex.optimize(**kwargs)
    b = odex.optimize(**kwargs)
    assert a == b
    published = odex.criterion_value("bayesD", odex.published_design("bayes-D/fixed"))
    assert a["value"] >= published - 1e-6
    assert len(a["design"]) == 4


def test_errors_carry_the_kind():
    with pytest.raises(odex.OdexError, match="Dimension"):
        odex.efficiency(odex.reference_design(), relative_to=odex.reference_design()[:3])
    with pytest.raises(odex.OdexError, match="InvalidArgument"):
        odex.efficiency(odex.reference_design(), flavor="X")
