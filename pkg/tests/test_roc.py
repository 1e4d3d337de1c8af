import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ailiability.errors import DomainError, ValidationError
from ailiability.mathkernel import adaptive_simpson, gaussian_q, gaussian_q_inv
from ailiability.roc import (
    EmpiricalRoc,
    OperatingPoint,
    RocModel,
    accuracy,
    auc,
    auc_empirical,
    binormal_auc,
    fair_threshold_errors,
    format_roc_csv,
    load_roc_csv,
    model_curve,
    parse_roc_csv,
    roc_point,
)


def test_zero_separation_is_chance_diagonal():
    assert roc_point(RocModel(1.0), 0, 0.7).p_f == pytest.approx(0.7, abs=1e-15)


def test_median_threshold_gives_q_of_d():
    assert roc_point(RocModel(2.0), 1, 0.5).p_f == pytest.approx(gaussian_q(2.0), abs=1e-15)
    assert gaussian_q(2.0) == pytest.approx(0.02275, abs=1e-5)


@given(st.floats(0.01, 5), st.floats(0.01, 0.99))
def test_curve_above_diagonal(d, p_t):
    assert roc_point(RocModel(d), 1, p_t).p_f < p_t


def test_boundaries_exact():
    assert roc_point(RocModel(1), 1, 0.0) == OperatingPoint(0, 0)
    assert roc_point(RocModel(1), 1, 1.0) == OperatingPoint(1, 1)


@given(st.floats(0.05, 0.95), st.floats(0.1, 3))
def test_more_samples_fewer_false_alarms(p_t, d_const):
    m = RocModel(d_const)
    values = [roc_point(m, n, p_t).p_f for n in (0, 0.5, 1, 1.5, 2)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_fair_point_examples():
    assert fair_threshold_errors(RocModel(1), 0) == OperatingPoint(0.5, 0.5)
    op = fair_threshold_errors(RocModel(1.2816), 1)
    assert op.p_f == pytest.approx(0.1, abs=1e-4)
    assert op.p_m == pytest.approx(0.1, abs=1e-4)
    far = fair_threshold_errors(RocModel(40), 1)
    assert far.p_f < 1e-300 and far.p_t == 1.0


@given(st.floats(0, 6))
def test_fair_point_lies_on_curve_of_doubled_separation(d):
    # the symmetric point of the curve with separation 2d is (Q(d), 1 - Q(d))
    p = fair_threshold_errors(RocModel(1.0), d)
    if 0 < p.p_t < 1:
        on_curve = roc_point(RocModel(2.0), d, p.p_t)
        assert on_curve.p_f == pytest.approx(p.p_f, abs=1e-9)


@given(st.floats(0, 6))
def test_fair_point_accuracy(d):
    assert accuracy(fair_threshold_errors(RocModel(1.0), d)) == pytest.approx(1 - gaussian_q(d), abs=1e-15)


def test_auc_chance_and_binormal():
    assert auc(RocModel(1), 0) == 0.5
    assert auc(RocModel(2), 1) == pytest.approx(binormal_auc(2), abs=1e-9)
    assert binormal_auc(2) == pytest.approx(0.9214, abs=1e-4)


def test_auc_quadrature_of_raw_curve_agrees():
    # independent route: integrate p_t(p_f) directly using the inverse Q
    d = 1.0
    raw = lambda pf: gaussian_q(gaussian_q_inv(pf) - d) if 0 < pf < 1 else pf
    assert adaptive_simpson(raw, 0.0, 1.0, abs_tol=1e-9) == pytest.approx(auc(RocModel(d), 1), abs=1e-6)


def test_auc_increasing_and_bounded():
    values = [auc(RocModel(0.7), n) for n in np.linspace(0, 6, 25)]
    assert values[0] == 0.5
    assert all(a < b for a, b in zip(values, values[1:]))
    assert all(0.5 <= v < 1 for v in values)


@pytest.mark.parametrize("d", [0.3, 1.0, 2.0, 3.5])
def test_sampled_model_curve_area(d):
    curve = model_curve(RocModel(d), 1, 1000)
    assert auc_empirical(curve) == pytest.approx(auc(RocModel(d), 1), abs=1e-3)


def test_empirical_auc_examples():
    assert auc_empirical(EmpiricalRoc.from_pairs([(0, 0), (1, 1)])) == 0.5
    assert auc_empirical(EmpiricalRoc.from_pairs([(0, 0), (0, 1), (1, 1)])) == 1.0
    assert auc_empirical(EmpiricalRoc.from_pairs([(0.1, 0.9)])) == pytest.approx(0.9, abs=1e-15)


def test_empirical_roc_rejects_unsorted():
    with pytest.raises(ValidationError):
        EmpiricalRoc.from_pairs([(0.5, 0.6), (0.2, 0.9)])
    with pytest.raises(ValidationError):
        EmpiricalRoc((OperatingPoint(0, 0),))


def test_empirical_interpolation():
    roc = EmpiricalRoc.from_pairs([(0.1, 0.9)])
    assert roc.true_positive_at(0.05) == pytest.approx(0.45)
    assert roc.true_positive_at(0.55) == pytest.approx(0.95)


def test_accuracy_examples():
    assert accuracy(OperatingPoint(0.1, 0.9)) == pytest.approx(0.9)
    assert accuracy(OperatingPoint(0.5, 0.5)) == 0.5
    assert accuracy(OperatingPoint(0, 1)) == 1


def test_operating_point_range():
    with pytest.raises(ValidationError):
        OperatingPoint(-0.1, 0.5)
    with pytest.raises(DomainError):
        roc_point(RocModel(1), 1, 1.5)
    with pytest.raises(ValidationError):
        RocModel(0.0)


def test_csv_round_trip(tmp_path):
    roc = EmpiricalRoc.from_pairs([(0.05, 0.6), (0.2, 0.85), (0.5, 0.97)])
    path = tmp_path / "roc.csv"
    path.write_text(format_roc_csv(roc, ["source=test"]))
    assert load_roc_csv(path) == roc


@pytest.mark.parametrize(
    "text, line",
    [
        ("p_f,p_t\n0.1,0.5\n0.05,0.7\n", 3),
        ("p_f,p_t\n0.1,abc\n", 2),
        ("p_f,p_t\n0.1,0.5,0.2\n", 2),
        ("fpr,tpr\n0.1,0.5\n", 1),
        ("p_f,p_t\n0.1,1.5\n", 2),
    ],
)
def test_csv_errors_cite_line(text, line):
    with pytest.raises(ValidationError, match=f"roc.csv:{line}:"):
        parse_roc_csv(text, "roc.csv")
