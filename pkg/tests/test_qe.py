"""The quantum-ergodicity variance statistic: brute-force equivalence,
exact invariances, and the quantitative bound."""

import math

import numpy as np
import pytest

from hyplab.errors import NoMesh, GramDeviationTooLarge
from hyplab.trace import EigenData
from hyplab.synthetic import flat_mesh_eigendata
from hyplab.qe import (matrix_elements, qe_variance, quantitative_bound,
                       qe_report)


@pytest.fixture(scope="module")
def mesh_data():
    return flat_mesh_eigendata(50, 18, volume=2.0, seed=7, lam_scale=4.0)


def observable(E):
    return np.sin(3.0 * E.mesh_points[:, 0]) + 0.25


def test_matrix_elements_brute_force(mesh_data):
    E = mesh_data
    a = observable(E)
    fast = matrix_elements(E, a)
    slow = np.array([
        sum(E.mesh_weights[i] * a[i] * E.mesh_values[j, i] ** 2
            for i in range(len(a)))
        for j in range(E.mesh_values.shape[0])])
    assert np.max(np.abs(fast - slow)) < 1e-12


def test_variance_brute_force(mesh_data):
    E = mesh_data
    a = observable(E)
    rep = qe_variance(E, a, (0.3, 4.0))
    W = E.mesh_weights
    mean_a = float((W * a).sum() / W.sum())
    brute = 0.0
    count = 0
    for j, lam in enumerate(E.eigenvalues):
        if 0.3 <= lam <= 4.0:
            diag = float((W * a * E.mesh_values[j] ** 2).sum())
            brute += (diag - mean_a) ** 2
            count += 1
    assert rep.variance_sum == pytest.approx(brute, abs=1e-12)
    assert rep.count == count
    assert len(rep.per_term) == count


def test_constant_observable_zero_variance(mesh_data):
    E = mesh_data
    rep = qe_variance(E, np.full(50, 3.7), (0.0, 10.0))
    # constants are exact eigenvectors of the quadrature: zero deviation
    assert rep.variance_sum < 1e-12 * max(rep.count, 1)


def test_constant_shift_invariance(mesh_data):
    E = mesh_data
    a = observable(E)
    r1 = qe_variance(E, a, (0.0, 10.0))
    r2 = qe_variance(E, a + 5.0, (0.0, 10.0))
    assert r1.variance_sum == pytest.approx(r2.variance_sum, abs=1e-10)


def test_callable_observable(mesh_data):
    E = mesh_data
    a_vals = observable(E)
    r1 = qe_variance(E, a_vals, (0.0, 10.0))
    r2 = qe_variance(E, lambda p: math.sin(3.0 * p[0]) + 0.25,
                     (0.0, 10.0))
    assert r1.variance_sum == pytest.approx(r2.variance_sum, rel=1e-12)


def test_no_mesh_raises():
    E = EigenData(volume=1.0, eigenvalues=np.array([0.0, 1.0]))
    with pytest.raises(NoMesh):
        matrix_elements(E, np.array([1.0]))
    with pytest.raises(NoMesh):
        qe_variance(E, np.array([1.0]), (0.0, 2.0))


def test_gram_deviation_warning(mesh_data):
    E = mesh_data
    bad = EigenData(volume=E.volume, eigenvalues=E.eigenvalues,
                    mesh_points=E.mesh_points,
                    mesh_weights=E.mesh_weights * 1.5,
                    mesh_values=E.mesh_values)
    with pytest.warns(GramDeviationTooLarge):
        qe_variance(bad, observable(E), (0.0, 10.0))


def test_quantitative_bound_values():
    main, rem = quantitative_bound(a_l2=2.0, a_sup=1.5, R=2.0,
                                   ell_min=3.0, rho_gap=0.5,
                                   thin_volume=0.1)
    assert main == pytest.approx(4.0 / (0.25 * 2.0))
    assert rem == pytest.approx(math.exp(8.0) / 3.0 * 0.1 * 2.25)
    # empty thin part: only the main term survives
    _, rem0 = quantitative_bound(2.0, 1.5, 2.0, 3.0, 0.5, 0.0)
    assert rem0 == 0.0
    for bad in ({"R": -1.0}, {"ell_min": 0.0}, {"rho_gap": 0.0},
                {"thin_volume": -0.1}):
        kw = dict(a_l2=2.0, a_sup=1.5, R=2.0, ell_min=3.0, rho_gap=0.5,
                  thin_volume=0.1)
        kw.update(bad)
        with pytest.raises(ValueError):
            quantitative_bound(**kw)


def test_qe_report_combines(mesh_data, tmp_path):
    E = mesh_data
    rep = qe_report(E, observable(E), (0.3, 4.0), R=2.0, ell_min=3.0,
                    rho_gap=0.5, thin_volume=0.0)
    assert rep.bound_main > 0.0
    assert rep.bound_remainder == 0.0
    assert rep.parameters["a_l2"] > 0.0
    text = rep.to_json(tmp_path / "rep.json")
    assert (tmp_path / "rep.json").read_text() == text
    assert "variance_sum" in text
