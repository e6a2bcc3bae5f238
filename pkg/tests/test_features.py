import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import feature_mismatches, oracle_vectors
from rtclass.features import (
    FEATURE_NAMES,
    FeatureError,
    feature_vector,
    featurize,
    featurize_dataset,
)
from rtclass.trace_model import Label

IDX = {n: i for i, n in enumerate(FEATURE_NAMES)}

# statistics that move with location and scale
LOCATION = ("min", "max", "mean", "median", "q05", "q25", "q75", "q95", "kstat1", "tmean")
SPREAD = ("range", "std", "sem", "mad", "iqr")
SHAPE = ("skewness", "kurtosis")

vec = arrays(np.float64, st.integers(4, 60),
             elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False))


def f(x):
    return dict(zip(FEATURE_NAMES, featurize(x)))


def test_feature_order_and_count():
    assert len(FEATURE_NAMES) == 24
    assert FEATURE_NAMES[:4] == ("min", "max", "range", "mean")
    assert FEATURE_NAMES[-2:] == ("rms", "energy")


def test_worked_example_one_to_five():
    v = f([1.0, 2.0, 3.0, 4.0, 5.0])
    assert v["median"] == 3.0
    assert v["iqr"] == 2.0
    assert v["q05"] == pytest.approx(1.2, abs=1e-15)
    assert v["var"] == 2.0 and v["kstat2"] == 2.5
    assert v["skewness"] == 0.0
    assert v["energy"] == 11.0


def test_worked_example_one_to_four():
    v = f([1.0, 2.0, 3.0, 4.0])
    assert v["kstat2"] == pytest.approx(5 / 3, rel=1e-15)
    assert v["kstat3"] == pytest.approx(0.0, abs=1e-12)
    assert v["mad"] == 1.0
    # n=4: floor(0.4) = 0 values trimmed per tail
    assert v["tmean"] == 2.5 and v["tvar"] == pytest.approx(5 / 3)


def test_trimming_drops_ten_percent_per_tail():
    x = np.arange(20, dtype=float)
    x[0], x[-1] = -1000.0, 1000.0
    v = f(x)
    assert v["tmean"] == pytest.approx(np.mean(np.arange(2, 18)))


def test_constant_series_has_zero_shape_statistics():
    v = f(np.full(30, 0.7))
    for name in ("std", "var", "skewness", "kurtosis", "kstat2", "kstat3", "kstat4", "iqr", "mad"):
        assert v[name] == 0.0, name
    assert v["mean"] == pytest.approx(0.7)


@pytest.mark.parametrize("x", list(oracle_vectors(60, seed=99)), ids=lambda x: f"n{len(x)}")
def test_matches_reference_implementation(x):
    assert feature_mismatches(x, featurize(x)) == []


def test_rejects_short_and_nan():
    with pytest.raises(ValueError, match="at least 4"):
        featurize([1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="NaN"):
        featurize([1.0, 2.0, np.nan, 3.0])


@settings(max_examples=80)
@given(vec)
def test_permutation_invariant(x):
    r = np.random.default_rng(0).permutation(x)
    np.testing.assert_allclose(featurize(r), featurize(x), rtol=1e-9, atol=1e-9 * (1 + np.max(np.abs(x)) ** 4))


@settings(max_examples=80)
@given(vec, st.floats(0.1, 10), st.floats(-50, 50))
def test_affine_equivariance(x, a, b):
    if np.std(x) < 1e-3 * (1 + np.max(np.abs(x))):
        return
    u, v = featurize(x), featurize(a * x + b)
    tol = 1e-7 * (1 + np.max(np.abs(a * x + b)))
    for n in LOCATION:
        assert abs(v[IDX[n]] - (a * u[IDX[n]] + b)) <= tol, n
    for n in SPREAD:
        assert abs(v[IDX[n]] - a * u[IDX[n]]) <= tol, n
    for n in SHAPE:
        assert abs(v[IDX[n]] - u[IDX[n]]) <= 1e-6, n


@settings(max_examples=60)
@given(vec)
def test_orderings_hold(x):
    v = f(x)
    assert v["min"] <= v["q05"] <= v["q25"] <= v["median"] <= v["q75"] <= v["q95"] <= v["max"]
    assert v["min"] <= v["mean"] <= v["max"]
    assert v["std"] >= 0 and v["var"] >= 0 and v["energy"] >= 0
    assert v["kurtosis"] >= -2.0 - 1e-9


def test_feature_vector_dict():
    fv = feature_vector([1.0, 2.0, 3.0, 4.0], "t", "FC", Label.IDLE)
    assert list(fv.values) == list(FEATURE_NAMES)


def test_featurize_dataset(uwb_binary):
    fm = featurize_dataset(uwb_binary, "FPP/CIR", "f1")
    assert fm.X.shape == (40, 24) and fm.parameter == "FC"
    assert fm.classes == (Label.IDLE, Label.BICYCLE)
    assert sorted(set(fm.y.tolist())) == [0, 1]
    # scaled series: the extremes are exactly 0 and 1
    assert np.all(fm.X[:, IDX["min"]] == 0.0) and np.all(fm.X[:, IDX["max"]] == 1.0)
    lines = fm.to_csv().splitlines()
    assert lines[0].split(",")[:3] == ["trace_id", "label", "min"] and len(lines) == 41


def test_featurize_dataset_unknown_parameter(uwb_binary):
    with pytest.raises(FeatureError, match="RSSI"):
        featurize_dataset(uwb_binary, "RSSI")


@settings(max_examples=60)
@given(vec, st.floats(0.1, 10), st.floats(-50, 50))
def test_higher_moments_scale_with_powers_of_gain(x, a, b):
    if np.std(x) < 1e-2 * (1 + np.max(np.abs(x))):
        return
    u, v = f(x), f(a * x + b)
    for name, power in (("var", 2), ("kstat2", 2), ("tvar", 2), ("kstat3", 3), ("kstat4", 4)):
        scale = max(abs(a ** power * u[name]), np.std(a * x) ** power)
        assert abs(v[name] - a ** power * u[name]) <= 1e-7 * scale, name
