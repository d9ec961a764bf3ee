import json

import numpy as np
import pytest

from homavg import (BochnerCorrelation, BoxAutocorrelation, BoxIndicator,
                    BoxSet, FrequencyBand, NestedIntervals, PointMass,
                    SelfSimilar, SpectralModel, TableDensity, Triangular,
                    TruncatedGaussian, Uniform, build_adversarial_measure,
                    cos_mode, convolve, geometric_spikes, golden_winding,
                    pell_winding, periodic_winding, rescale)
from homavg import serialize as ser

CANTOR = SelfSimilar((1 / 3, 1 / 3), (0.0, 2 / 3), (0.5, 0.5))


MEASURES = [
    Uniform(0, 1),
    Triangular(-1, 3),
    TruncatedGaussian(0.5, 0.2, 0.0, 1.0),
    TableDensity(0.0, 2.0, [1.0, 2.0, 0.5, 0.5]),
    CANTOR,
    NestedIntervals([[("1/8", "2/8"), ("5/8", "7/8")]]),
    convolve(Uniform(0, 1), CANTOR),
    rescale(CANTOR, 2.5),
    PointMass(0.25),
]


@pytest.mark.parametrize("measure", MEASURES, ids=lambda m: type(m).__name__)
def test_measure_round_trip(measure):
    doc = ser.measure_to_doc(measure)
    json.dumps(doc)  # must be JSON-representable
    back = ser.measure_from_doc(doc)
    assert back == measure
    assert ser.measure_to_doc(back) == doc


def test_round_trip_preserves_char_fn():
    m = convolve(rescale(CANTOR, 1.5), Uniform(0, 1))
    back = ser.measure_from_doc(ser.measure_to_doc(m))
    xi = np.linspace(-20, 20, 9)
    np.testing.assert_array_equal(back.char_fn(xi), m.char_fn(xi))


def test_flow_round_trip():
    for flow in (golden_winding(), pell_winding(), periodic_winding(3)):
        back = ser.flow_from_doc(ser.flow_to_doc(flow))
        assert back == flow


def test_spectral_round_trip():
    model = SpectralModel(atoms=((1.5, 0.25), (-1.5, 0.25)),
                          band=FrequencyBand(-2.0, 2.0, 0.5, (1.0, 3.0)))
    back = ser.spectral_from_doc(ser.spectral_to_doc(model))
    assert back == model


def test_correlation_round_trips():
    models = [
        BoxAutocorrelation(golden_winding(), BoxSet((0.5, 0.5))),
        BochnerCorrelation(SpectralModel(atoms=((2.0, 0.5), (-2.0, 0.5)))),
        geometric_spikes(),
    ]
    for model in models:
        back = ser.correlation_from_doc(ser.correlation_to_doc(model))
        assert back == model


def test_observable_round_trips():
    obs = cos_mode(2, 1)
    back = ser.observable_from_doc(ser.observable_to_doc(obs))
    assert back.coefficients == obs.coefficients
    ind = BoxIndicator(BoxSet((0.3, 0.4)))
    back = ser.observable_from_doc(ser.observable_to_doc(ind))
    assert back.box == ind.box


def test_plan_round_trip_with_exact_fields():
    plan = build_adversarial_measure(golden_winding(), BoxSet((0.5, 0.5)), 3)
    doc = ser.plan_to_doc(plan)
    json.dumps(doc)
    back = ser.plan_from_doc(doc)
    assert back.levels == plan.levels
    assert back.flow == plan.flow
    assert back.box == plan.box
    # the embedded measure document reloads as the identical tree and is a
    # regular weight measure: usable by any engine operation
    measure = ser.measure_from_doc(doc["measure"])
    assert measure == plan.measure()
    assert measure.char_fn(0.0) == pytest.approx(1.0, abs=1e-12)
    draws = measure.sample(500, 23)
    lo, hi = measure.support()
    assert np.all((draws >= lo) & (draws <= hi))
    from homavg import SpikeCorrelation, pair_correlation_integral
    flat = SpikeCorrelation(0.4)
    res = pair_correlation_integral(flat, measure, 3.0, method="sampling",
                                    n_samples=400, seed=24)
    assert res.value == pytest.approx(0.4, abs=1e-12)


def test_dumps_is_stable():
    doc = {"b": 1, "a": [1.5, 2.25]}
    assert ser.dumps(doc) == ser.dumps(dict(reversed(doc.items())))


def test_unknown_documents_rejected():
    from homavg import PresetError
    with pytest.raises(PresetError):
        ser.measure_from_doc({"type": "mystery"})
    with pytest.raises(PresetError):
        ser.correlation_from_doc({"type": "mystery"})
