import numpy as np
import pytest

from sasakiverify.report import Status
from sasakiverify.sasakian_ambient import (
    check_axioms,
    fundamental_form,
    get_ambient,
    perturb_phi,
    standard_sasakian,
    with_flat_metric,
)

AXIOMS = ["1.1", "1.2", "1.3a", "1.3b", "1.3c", "1.4", "1.5", "1.6", "1.7", "1.8", "1.9", "1.10"]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_standard_model_satisfies_every_axiom(n):
    S = standard_sasakian(n)
    rng = np.random.default_rng(n)
    for p in rng.uniform(-1, 1, size=(5, 2 * n + 1)):
        rep = check_axioms(S, p, seed=3)
        assert [e.equation for e in rep.entries] == AXIOMS
        assert not rep.failed, [(e.equation, e.max_residual) for e in rep.entries]
        assert max(e.max_residual for e in rep.entries) < 1e-12


def test_reeb_field_and_contact_form_at_origin():
    a = standard_sasakian(1).at([0.0, 0.0, 0.0])
    np.testing.assert_allclose(a.xi, [0, 0, 2])
    np.testing.assert_allclose(a.eta, [0, 0, 0.5])
    np.testing.assert_allclose(a.g, np.diag([0.25, 0.25, 0.25]))


def test_fundamental_form_is_skew():
    S = standard_sasakian(2)
    p = [0.1, -0.3, 0.7, 0.2, 0.5]
    X, Y = np.eye(5)[0], np.eye(5)[2]
    assert fundamental_form(S, X, Y, p) == pytest.approx(-fundamental_form(S, Y, X, p))
    assert fundamental_form(S, X, Y, p) != 0.0


@pytest.mark.parametrize("row, col", [(0, 1), (2, 1), (1, 2)])
def test_perturbed_phi_is_detected(row, col):
    rep = check_axioms(perturb_phi(standard_sasakian(1), row, col, 1e-4), [0.2, 0.4, -0.1])
    assert rep.failed
    failing = {e.equation for e in rep.entries if e.status is Status.FAIL}
    assert failing & {"1.2", "1.4", "1.6"}


def test_flat_metric_breaks_compatibility_and_sasakian_conditions():
    rep = check_axioms(with_flat_metric(standard_sasakian(1)), [0.3, 0.1, 0.0])
    assert rep["1.4"].status is Status.FAIL
    assert rep["1.6"].status is Status.FAIL
    assert rep["1.2"].status is Status.PASS


def test_unknown_model_name():
    with pytest.raises(ValueError):
        get_ambient("nearly-kenmotsu", 1)
    with pytest.raises(ValueError):
        standard_sasakian(0)
