import numpy as np
import pytest

from sasakiverify.algebraic_models import (
    PROFILES,
    check_corollary41,
    check_structure,
    check_theorem41,
    check_theorem42_corollary42,
    check_theorem43_corollary43,
    check_theorems44_45_46,
    defect_u,
    defect_v,
    formal_nablas,
    random_instance,
    verify_algebraic,
    verify_instance,
)
from sasakiverify.report import Status


# loop-built tensors straight from the substituted derivative formulas, in coordinates:
#   (nabla_Y phi)X = v(X)Y - g(X,Y)V - h(X,Y)U - u(X)HY
#   (nabla_Y u)(X) = -h(phiX,Y) - u(X)w(Y) - lambda g(X,Y)
#   (nabla_Y v)(X) = g(phiY,X) + lambda h(X,Y)
def _oracle_tensors(inst):
    d = inst.dim
    g, h, H, phi = inst.g, inst.h, inst.H, inst.phi
    u, v, w, U, V, lam = inst.u, inst.v, inst.w, inst.U, inst.V, inst.lam
    Nphi = np.zeros((d, d, d))  # [i, X-index j, Y-index k]
    Nu = np.zeros((d, d))  # [X-index j, Y-index k]
    Nv = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            for k in range(d):
                Nphi[i, j, k] = (v[j] * (i == k) - g[j, k] * V[i] - h[j, k] * U[i] - u[j] * H[i, k])
    for j in range(d):
        for k in range(d):
            Nu[j, k] = -sum(phi[m, j] * h[m, k] for m in range(d)) - u[j] * w[k] - lam * g[j, k]
            Nv[j, k] = sum(phi[m, k] * g[m, j] for m in range(d)) + lam * h[j, k]
    return Nphi, Nu, Nv


def _oracle_bracket(Nphi, X, Y):
    # (nabla_X phi)Y - (nabla_Y phi)X
    return np.einsum("ijk,j,k->i", Nphi, Y, X) - np.einsum("ijk,j,k->i", Nphi, X, Y)


def _oracle_defect(inst, form, N, X, Y):
    Nphi = _oracle_tensors(inst)[0]
    pX, pY = inst.phi @ X, inst.phi @ Y
    return form @ _oracle_bracket(Nphi, X, Y) - (Y @ N @ pX - pY @ N @ X)


def _random_pairs(inst, k, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((k, inst.dim)), rng.standard_normal((k, inst.dim))


# generator


@pytest.mark.parametrize("profile", PROFILES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_generator_soundness(profile, n):
    for seed in range(40):
        inst = random_instance(n, seed, profile)
        rep = check_structure(inst, seed=seed)
        assert not rep.failed, [(e.equation, e.max_residual) for e in rep.entries if e.status is Status.FAIL]


def test_spot_values_of_invariant_forms():
    inst = random_instance(2, 7)
    lam = inst.lam
    assert inst.u @ inst.U == pytest.approx(1 - lam**2, abs=1e-12)
    assert inst.v @ inst.V == pytest.approx(1 - lam**2, abs=1e-12)
    assert inst.u @ inst.V == pytest.approx(0.0, abs=1e-12)
    assert inst.v @ inst.U == pytest.approx(0.0, abs=1e-12)
    X = np.random.default_rng(0).standard_normal((20, 4))
    lhs = X @ inst.phi.T @ inst.phi.T + X - np.outer(X @ inst.u, inst.U) - np.outer(X @ inst.v, inst.V)
    assert np.abs(lhs).max() < 1e-12


def test_norm_constraint_example():
    inst = random_instance(2, 1, "quasi-umbilical", lam=0.5, alpha=1.0, beta=-2.0)
    assert (inst.q @ inst.U) ** 2 == pytest.approx(0.375, abs=1e-12)


def test_quasi_umbilical_profile_annihilates_U():
    inst = random_instance(3, 2)
    Y = np.random.default_rng(1).standard_normal((10, 6))
    assert np.abs(formal_nablas(inst).h(np.broadcast_to(inst.U, Y.shape), Y)).max() < 1e-12


def test_instances_are_seed_deterministic_and_rotated():
    a, b = random_instance(2, 9, "cylindrical"), random_instance(2, 9, "cylindrical")
    np.testing.assert_array_equal(a.phi, b.phi)
    np.testing.assert_array_equal(a.w, b.w)
    assert np.count_nonzero(np.abs(a.U) > 1e-8) > 1


@pytest.mark.parametrize(
    "profile, kw",
    [("quasi-umbilical", {"alpha": 1.0, "beta": 1.0}), ("cylindrical", {"alpha": 1.0}),
     ("totally-umbilical", {"beta": 1.0}), ("quasi-umbilical", {"lam": 1.0}), ("nope", {}),
     ("quasi-umbilical", {"mu": 1.0})],
)
def test_generator_rejects_invalid_combinations(profile, kw):
    with pytest.raises(ValueError):
        random_instance(2, 0, profile, **kw)


def test_with_reuses_frame_and_changes_only_requested_scalar():
    inst = random_instance(2, 3)
    other = inst.with_(dl_U=0.25)
    np.testing.assert_array_equal(other.g, inst.g)
    np.testing.assert_array_equal(other.phi, inst.phi)
    assert other.dlambda @ other.U == pytest.approx(0.25)


# formal derivatives


def test_nabla_v_without_second_fundamental_form():
    inst = random_instance(2, 4, "unconstrained", alpha=0.0, beta=0.0)
    X, Y = _random_pairs(inst, 8, 2)
    nb = formal_nablas(inst)
    expected = np.einsum("bi,ij,bj->b", Y @ inst.phi.T, inst.g, X)
    np.testing.assert_allclose(nb.nabla_v(Y, X), expected, atol=1e-13)


def test_nabla_V_at_lambda_zero():
    inst = random_instance(2, 4, lam=0.0)
    Y = np.random.default_rng(0).standard_normal((6, 4))
    np.testing.assert_allclose(formal_nablas(inst).nabla_V(Y), Y @ inst.phi.T, atol=1e-13)


@pytest.mark.parametrize("profile", PROFILES)
def test_formal_nablas_match_loop_oracle(profile):
    inst = random_instance(2, 8, profile)
    Nphi, Nu, Nv = _oracle_tensors(inst)
    nb = formal_nablas(inst)
    X, Y = _random_pairs(inst, 6, 3)
    np.testing.assert_allclose(nb.nabla_phi(Y, X), np.einsum("ijk,bj,bk->bi", Nphi, X, Y), atol=1e-12)
    np.testing.assert_allclose(nb.nabla_u(Y, X), np.einsum("jk,bj,bk->b", Nu, X, Y), atol=1e-12)
    np.testing.assert_allclose(nb.nabla_v(Y, X), np.einsum("jk,bj,bk->b", Nv, X, Y), atol=1e-12)


def test_bracket_vanishes_on_the_diagonal():
    inst = random_instance(3, 5)
    X = np.random.default_rng(2).standard_normal((5, 6))
    nb = formal_nablas(inst)
    assert np.abs(nb.nabla_phi(X, X) - nb.nabla_phi(X, X)).max() == 0.0
    np.testing.assert_allclose(_oracle_bracket(_oracle_tensors(inst)[0], X[0], X[0]), 0.0, atol=1e-14)


# defects and theorem lines


@pytest.mark.parametrize("profile", PROFILES + ("unconstrained",))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_defects_match_loop_oracle(profile, n):
    for seed in range(5):
        inst = random_instance(n, seed, profile)
        _, Nu, Nv = _oracle_tensors(inst)
        X, Y = _random_pairs(inst, 4, seed)
        du, dv = defect_u(inst, X, Y), defect_v(inst, X, Y)
        for k in range(4):
            assert du[k] == pytest.approx(_oracle_defect(inst, inst.u, Nu, X[k], Y[k]), abs=1e-11)
            assert dv[k] == pytest.approx(_oracle_defect(inst, inst.v, Nv, X[k], Y[k]), abs=1e-11)


@pytest.mark.parametrize("profile", PROFILES + ("unconstrained",))
def test_u_and_v_brackets_against_closed_forms(profile):
    for seed in range(20):
        inst = random_instance(1 + seed % 3, seed, profile)
        Nphi = _oracle_tensors(inst)[0]
        X, Y = _random_pairs(inst, 3, seed)
        qU, qV, a, b = inst.q @ inst.U, inst.q @ inst.V, inst.alpha, inst.beta
        for x, y in zip(X, Y):
            br = _oracle_bracket(Nphi, x, y)
            uX, uY, vX, vY, qX, qY = x @ inst.u, y @ inst.u, x @ inst.v, y @ inst.v, x @ inst.q, y @ inst.q
            assert inst.u @ br == pytest.approx(vY * uX - vX * uY + b * qU * (uX * qY - qX * uY), abs=1e-11)
            assert inst.v @ br == pytest.approx(a * (uX * vY - uY * vX) + b * qV * (uX * qY - uY * qX), abs=1e-11)


@pytest.mark.parametrize("profile", PROFILES)
def test_theorem_41_chain(profile):
    for seed in range(10):
        rep = check_theorem41(random_instance(2, seed, profile), seed=seed)
        assert rep["4.4"].status is Status.PASS
        assert rep["4.4-4.5-equivalence"].status is Status.PASS
        assert rep["4.5"].rederived_residual < 1e-12
        assert rep["4.3"].rederived_residual < 1e-12


def test_printed_conclusion_flags_named_terms():
    rep = check_theorem41(random_instance(2, 0), seed=0)
    e = rep["4.3"]
    assert e.status is Status.PAPER_DEVIATION
    assert "beta u(X)q(Y)" in e.offending_terms


def test_printed_lemma_line_passes_when_q_of_V_vanishes():
    inst = random_instance(2, 0)  # q is along u, so q(V) = 0
    assert abs(inst.q @ inst.V) < 1e-12
    assert check_theorem41(inst)["4.5"].status is Status.PASS
    rep = check_theorem41(random_instance(2, 0, "unconstrained"))
    assert rep["4.5"].status is Status.PAPER_DEVIATION
    assert rep["4.5"].offending_terms == ("beta v(Y)q(V)q(X)",)


# roots


def test_uniform_root_of_first_corollary():
    for seed in range(10):
        inst = random_instance(2, seed)
        rep = check_corollary41(inst)
        assert rep["4.6"].status is Status.PASS
        assert rep["4.6-substitution"].max_residual < 1e-12
    # independent root by least squares on several values of U lambda
    inst = random_instance(3, 4)
    s = np.linspace(-1, 1, 5)
    f = [defect_u(inst.with_(dl_U=x), inst.U, inst.V)[0] for x in s]
    slope, icpt = np.polyfit(s, f, 1)
    assert -icpt / slope == pytest.approx(2 * inst.lam**2, abs=1e-10)


def test_first_corollary_skips_at_lambda_zero():
    rep = check_corollary41(random_instance(2, 0, lam=0.0))
    assert rep["4.6"].status is Status.SKIPPED
    assert rep["4.6"].reason == "lambda=0"


def test_cylindrical_root_is_zero():
    for n in (1, 2, 3):
        inst = random_instance(n, 12, "cylindrical")
        rep = check_theorem42_corollary42(inst)
        assert rep["4.8"].status is Status.PASS
        assert rep["4.9-trace"].status is Status.PASS
        assert rep["4.9"].status is Status.PASS
        assert rep.observations
    base = random_instance(2, 12, "cylindrical")
    base = base.with_(dl_U=2 * base.lam**2)
    s = np.array([-0.5, 0.0, 0.7])
    f = [defect_u(base.with_(dl_V=x), base.V, base.V)[0] for x in s]
    slope, icpt = np.polyfit(s, f, 1)
    assert abs(icpt / slope) < 1e-10


def test_cylindrical_check_requires_cylindrical_instance():
    with pytest.raises(ValueError):
        check_theorem42_corollary42(random_instance(2, 0))
    with pytest.raises(ValueError):
        check_theorem43_corollary43(random_instance(2, 0))


def test_totally_umbilical_alpha_root_example():
    inst = random_instance(2, 6, "totally-umbilical", lam=0.5, dl_V=-0.15)
    a = np.array([-1.0, 0.0, 2.0])
    f = [defect_u(inst.with_(alpha=x), inst.U, inst.U)[0] for x in a]
    slope, icpt = np.polyfit(a, f, 1)
    assert -icpt / slope == pytest.approx(0.12, abs=1e-10)
    rep = check_theorem43_corollary43(inst)
    assert rep["4.11"].status is Status.PASS
    assert rep["4.11-closed-form"].status is Status.PASS


def test_inverted_alpha_root_kills_defect_along_U():
    inst = random_instance(2, 6, "totally-umbilical", lam=0.4)
    inst = inst.with_(dl_U=2 * inst.lam**2, dl_V=-inst.alpha * (1 + inst.lam**2))
    Y = np.random.default_rng(4).standard_normal((10, 4))
    assert np.abs(defect_u(inst, np.broadcast_to(inst.U, Y.shape), Y)).max() < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_trace_root(n):
    inst = random_instance(n, 20 + n, "totally-umbilical")
    lam, Vl = inst.lam, inst.dl_V
    at_root = inst.with_(alpha=Vl / (1 - lam**2 - 2 * n))
    E = at_root.frame.T
    assert abs(float(np.sum(defect_u(at_root, E, E)))) < 1e-10
    rep = check_theorem43_corollary43(inst)
    for eq in ("4.10", "4.12", "4.12-closed-form"):
        assert rep[eq].status in (Status.PASS, Status.PAPER_DEVIATION), eq
    assert rep["4.12"].status is Status.PASS
    assert rep["4.10"].rederived_residual < 1e-12


def test_totally_umbilical_checks_skip_at_lambda_zero():
    rep = check_theorem43_corollary43(random_instance(2, 1, "totally-umbilical", lam=0.0))
    assert rep["4.11"].status is Status.SKIPPED
    assert rep["4.12"].status is Status.SKIPPED


# v-analyticity


@pytest.mark.parametrize("profile", PROFILES)
def test_v_chain(profile):
    for seed in range(10):
        rep = check_theorems44_45_46(random_instance(1 + seed % 3, seed, profile), seed=seed)
        assert rep["4.14"].rederived_residual < 1e-12
        assert rep["4.15"].rederived_residual < 1e-12
        assert rep["4.14-4.15-equivalence"].status is Status.PASS
        assert not rep.failed


def test_cylindrical_exclusion_is_generic():
    rep = check_theorems44_45_46(random_instance(2, 3, "cylindrical"))
    assert rep["4.16"].status in (Status.PASS, Status.PAPER_DEVIATION)
    assert rep["4.16-exclusion"].status is Status.PASS
    assert "-2 lambda v(phiY)" in rep["4.16-exclusion"].note


def test_totally_umbilical_exclusion():
    inst = random_instance(2, 3, "totally-umbilical")
    rep = check_theorems44_45_46(inst)
    assert rep["4.17-exclusion"].status is Status.PASS
    line = rep["4.17-X=U-line"]
    assert line.status is Status.PAPER_DEVIATION
    assert line.offending_terms == ("lambda alpha v(Y)",)


# aggregation


def test_aggregated_suite_is_deterministic():
    a = verify_algebraic("quasi-umbilical", 2, range(6))
    b = verify_algebraic("quasi-umbilical", 2, range(6))
    assert a.to_dict() == b.to_dict()
    assert not a.failed
    devs = {e.equation for e in a.entries if e.status is Status.PAPER_DEVIATION}
    assert devs == {"3.5", "4.3"}
    for e in a.entries:
        if e.status is Status.PAPER_DEVIATION:
            assert e.offending_terms
            assert "on 6/6 instances (first seed 0)" in e.note


@pytest.mark.parametrize("profile", PROFILES)
def test_lambda_zero_instances_skip_but_do_not_fail(profile):
    rep = verify_instance(random_instance(2, 5, profile, lam=0.0))
    assert not rep.failed
    assert any(e.status is Status.SKIPPED for e in rep.entries)
    assert all(e.reason for e in rep.entries if e.status is Status.SKIPPED)


def test_lambda_zero_pins_derivatives_of_lambda():
    inst = random_instance(2, 5, "cylindrical", lam=0.0)
    assert inst.dl_U == pytest.approx(1.0, abs=1e-14)
    assert inst.dl_V == pytest.approx(-(inst.V @ inst.h @ inst.V), abs=1e-14)
    assert not check_structure(inst).failed
    with pytest.raises(ValueError):
        random_instance(2, 5, "cylindrical", lam=0.0, dl_U=0.3)
