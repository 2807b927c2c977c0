import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lieherm.catalog_io import builtin, to_algebra
from lieherm.errors import StructuralError
from lieherm.lie_structure import (
    CDTensors,
    RealLieAlgebra,
    UnitaryFrame,
    abelian_complex_structure_check,
    bracket_reconstruction_residual,
    build_unitary_frame,
    change_frame,
    change_real_basis,
    check_jacobi_cd,
    extract_structure_constants,
    nilpotency_class,
    random_unitary,
    realify,
    validate_cd,
    validate_real_algebra,
)
from lieherm.metric_search import MetricParams, metric_algebra

from conftest import real_form
from oracles import lower_central_dims, nijenhuis_bruteforce, real_jacobi_bruteforce

S2 = 1 / np.sqrt(2)


def std_J(n):
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i + 1, 2 * i], J[2 * i, 2 * i + 1] = 1, -1
    return J


def solvable_2d():
    f = np.zeros((2, 2, 2))
    f[0, 1, 1], f[1, 0, 1] = 1, -1
    return RealLieAlgebra(f, std_J(1), np.eye(2), "aff")


def u2():
    """R + su(2) with J t = y1, J y2 = y3 (the Hopf surface structure)."""
    f = np.zeros((4, 4, 4))
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        f[a, b, c], f[b, a, c] = 1, -1
    return RealLieAlgebra(f, std_J(2), np.eye(4), "u2")


def sl2c():
    """sl(2, C) as a real 6-dimensional algebra with its complex-group J."""
    # complex basis H, X, Y with [H,X] = 2X, [H,Y] = -2Y, [X,Y] = H
    cb = np.zeros((3, 3, 3), complex)
    for a, b, c, v in ((0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)):
        cb[a, b, c], cb[b, a, c] = v, -v
    f = np.zeros((6, 6, 6))
    # real basis 2a <-> Z_a, 2a+1 <-> i Z_a
    for a in range(3):
        for b in range(3):
            for pa, za in ((0, 1), (1, 1j)):
                for pb, zb in ((0, 1), (1, 1j)):
                    w = za * zb * cb[a, b]
                    for c in range(3):
                        f[2 * a + pa, 2 * b + pb, 2 * c] += w[c].real
                        f[2 * a + pa, 2 * b + pb, 2 * c + 1] += w[c].imag
    return RealLieAlgebra(f, std_J(3), np.eye(6), "sl2c")


# --- validate_real_algebra -------------------------------------------------

def test_abelian_validates_with_zero_residuals():
    rep = validate_real_algebra(to_algebra(builtin("abelian_2")))
    assert rep.overall
    assert all(c.max_residual == 0 for c in rep.checks)


def test_kodaira_thurston_validates(kt):
    rep = validate_real_algebra(kt)
    assert rep.overall
    assert [c.name for c in rep.checks] == [
        "bracket_antisymmetry", "jacobi", "J_squared", "g_symmetric",
        "g_positive_definite", "g_J_compatible", "integrability",
    ]


def test_non_integrable_J_on_kodaira_thurston(kt):
    # J x1 = x3, J x2 = x4
    J = np.zeros((4, 4))
    J[2, 0], J[0, 2], J[3, 1], J[1, 3] = 1, -1, 1, -1
    bad = RealLieAlgebra(kt.f, J, np.eye(4))
    rep = validate_real_algebra(bad)
    assert not rep.overall
    assert rep.failed() == ["integrability"]
    assert rep["integrability"].max_residual == pytest.approx(1.0, abs=1e-15)
    assert rep["integrability"].max_residual == pytest.approx(nijenhuis_bruteforce(bad.f, J), abs=1e-15)


def test_broken_jacobi_is_reported(rng):
    f = rng.standard_normal((4, 4, 4))
    f = f - f.transpose(1, 0, 2)
    alg = RealLieAlgebra(f, std_J(2), np.eye(4))
    rep = validate_real_algebra(alg)
    assert "jacobi" in rep.failed()
    assert rep["jacobi"].max_residual == pytest.approx(real_jacobi_bruteforce(f), rel=1e-12)


def test_metric_failures():
    alg = to_algebra(builtin("abelian_1"))
    assert "g_positive_definite" in validate_real_algebra(alg.with_metric(-np.eye(2))).failed()
    assert "g_J_compatible" in validate_real_algebra(alg.with_metric(np.diag([1.0, 2.0]))).failed()


@pytest.mark.parametrize("shape", [(3, 3, 3), (4, 4, 3)])
def test_structural_errors(shape):
    with pytest.raises(StructuralError):
        RealLieAlgebra(np.zeros(shape), np.eye(shape[0]), np.eye(shape[0]))


def test_J_shape_mismatch():
    with pytest.raises(StructuralError):
        RealLieAlgebra(np.zeros((4, 4, 4)), np.eye(2), np.eye(4))


# --- nilpotency_class ------------------------------------------------------

def test_nilpotency_examples(kt):
    assert nilpotency_class(to_algebra(builtin("abelian_2"))) == 1
    assert nilpotency_class(kt) == 2
    assert nilpotency_class(solvable_2d()) is None
    assert nilpotency_class(real_form("iwasawa_real6")) == 2
    assert nilpotency_class(u2()) is None


def test_nilpotency_matches_rank_oracle(kt):
    assert lower_central_dims(kt.f) == [4, 1, 0]
    assert lower_central_dims(solvable_2d().f) == [2, 1, 1]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["abelian_2", "kodaira_thurston", "iwasawa_real6", "complex_heisenberg"]),
       st.integers(0, 2**32 - 1))
def test_nilpotency_invariant_under_basis_change(name, seed):
    alg = real_form(name)
    rng = np.random.default_rng(seed)
    P = np.eye(alg.dim_real) + 0.3 * rng.standard_normal((alg.dim_real,) * 2)
    changed = change_real_basis(alg, P)
    assert validate_real_algebra(changed, 1e-9).overall
    assert nilpotency_class(changed) == nilpotency_class(alg)


# --- frames ----------------------------------------------------------------

def test_frame_r2():
    frame = build_unitary_frame(to_algebra(builtin("abelian_1")))
    np.testing.assert_allclose(frame.E, [[S2, -1j * S2]], atol=1e-15)


def test_frame_kodaira_thurston(kt):
    E = build_unitary_frame(kt).E
    expected = np.array([[S2, -1j * S2, 0, 0], [0, 0, S2, -1j * S2]])
    np.testing.assert_allclose(E, expected, atol=1e-15)
    h = E @ kt.g @ E.conj().T
    np.testing.assert_allclose(h, np.eye(2), atol=1e-15)


@pytest.mark.parametrize("name", ["abelian_3", "kodaira_thurston", "iwasawa_real6", "complex_heisenberg"])
def test_frame_invariants_under_random_metrics(name, rng):
    alg = real_form(name)
    for _ in range(5):
        params = MetricParams.from_vector(0.5 * rng.standard_normal(alg.n ** 2), alg.n)
        a = metric_algebra(alg, params)
        E = build_unitary_frame(a).E
        np.testing.assert_allclose(E @ a.J.T, 1j * E, atol=1e-12)   # J row = i row
        np.testing.assert_allclose(E @ a.g @ E.conj().T, np.eye(a.n), atol=1e-12)


def test_frame_rejects_degenerate_metric():
    alg = to_algebra(builtin("abelian_2")).with_metric(np.zeros((4, 4)))
    with pytest.raises(StructuralError):
        build_unitary_frame(alg)


# --- extraction ------------------------------------------------------------

def test_extract_abelian():
    alg = to_algebra(builtin("abelian_2"))
    cd = extract_structure_constants(alg, build_unitary_frame(alg))
    assert np.all(cd.C == 0) and np.all(cd.D == 0)


def test_extract_kodaira_thurston(kt_cd):
    assert np.all(kt_cd.C == 0)
    expected = np.zeros((2, 2, 2), complex)
    expected[0, 1, 0] = -1j * S2         # D^1_{21}
    np.testing.assert_allclose(kt_cd.D, expected, atol=1e-15)


def test_extract_iwasawa_matches_complex_heisenberg(heis_cd):
    alg = real_form("iwasawa_real6")
    cd = extract_structure_constants(alg, build_unitary_frame(alg))
    np.testing.assert_allclose(cd.C, heis_cd.C, atol=1e-15)
    assert np.max(np.abs(cd.D)) == 0


def test_extraction_dimension_mismatch(kt):
    with pytest.raises(StructuralError):
        extract_structure_constants(kt, UnitaryFrame(np.zeros((1, 2))))


ALGEBRAS = {
    "kodaira_thurston": lambda: real_form("kodaira_thurston"),
    "iwasawa_real6": lambda: real_form("iwasawa_real6"),
    "u2": u2,
    "sl2c": sl2c,
}


@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_extraction_round_trip_and_jacobi(name, rng):
    alg = ALGEBRAS[name]()
    assert validate_real_algebra(alg).overall
    for _ in range(5):
        params = MetricParams.from_vector(0.4 * rng.standard_normal(alg.n ** 2), alg.n)
        a = metric_algebra(alg, params)
        frame = build_unitary_frame(a)
        cd = extract_structure_constants(a, frame)
        assert np.array_equal(cd.C, -cd.C.transpose(0, 2, 1))
        assert bracket_reconstruction_residual(a, frame, cd) <= 1e-10
        assert check_jacobi_cd(cd).overall


def test_u2_has_both_tensors_nonzero():
    alg = u2()
    cd = extract_structure_constants(alg, build_unitary_frame(alg))
    assert np.max(np.abs(cd.C)) > 0.1 and np.max(np.abs(cd.D)) > 0.1


# --- Jacobi at the C/D level ----------------------------------------------

def test_jacobi_zero_tensors():
    rep = check_jacobi_cd(CDTensors.zeros(3))
    assert rep.overall and all(c.max_residual == 0 for c in rep.checks)


def test_jacobi_kodaira_thurston(kt_cd):
    assert all(c.max_residual == 0 for c in check_jacobi_cd(kt_cd).checks)


def test_jacobi_perturbed_kodaira_thurston_regression(kt_cd):
    D = np.array(kt_cd.D)
    D[0, 1, 0] += 0.1
    rep = check_jacobi_cd(CDTensors(kt_cd.C, D))
    assert rep["jacobi_CD"].max_residual == 0
    assert rep["jacobi_CDbar"].max_residual == 0


def test_jacobi_detects_random_garbage(rng):
    from oracles import random_cd
    C, D = random_cd(3, rng)
    assert not check_jacobi_cd(CDTensors(C, D)).overall


def test_validate_cd_reports_antisymmetry():
    C = np.zeros((2, 2, 2), complex)
    C[0, 0, 1] = 1
    rep = validate_cd(CDTensors(C, np.zeros_like(C)))
    assert rep.failed()[0] == "C_antisymmetry"


# --- abelian complex structures -------------------------------------------

def test_abelian_check(kt_cd, heis_cd):
    rep = abelian_complex_structure_check(kt_cd)
    assert rep.overall
    assert [c.max_residual for c in rep.checks] == [0.0, 0.0, 0.0]
    rep = abelian_complex_structure_check(heis_cd)
    assert not rep.overall and rep["abelian"].max_residual == 1.0
    assert abelian_complex_structure_check(CDTensors.zeros(2)).overall


def test_commutativity_holds_for_abelian_structures_under_random_metrics(kt, rng):
    for _ in range(5):
        a = metric_algebra(kt, MetricParams.from_vector(rng.standard_normal(4), 2))
        cd = extract_structure_constants(a, build_unitary_frame(a))
        assert abelian_complex_structure_check(cd).overall


# --- change_frame ----------------------------------------------------------

def test_change_frame_identity(kt_cd):
    out = change_frame(kt_cd, np.eye(2))
    np.testing.assert_array_equal(out.D, kt_cd.D)


def test_change_frame_zero(rng):
    out = change_frame(CDTensors.zeros(3), random_unitary(3, rng))
    assert np.all(out.C == 0) and np.all(out.D == 0)


def test_change_frame_diag_phase_matches_reextraction(kt, kt_cd):
    U = np.diag([1j, 1.0])
    frame = build_unitary_frame(kt).rotate(U)
    expected = extract_structure_constants(kt, frame)
    out = change_frame(kt_cd, U)
    np.testing.assert_allclose(out.D, expected.D, atol=1e-15)
    # D'^1_{21} = conj(U_11) U_22 U_11 D^1_{21} = D^1_{21} for this U
    assert out.D[0, 1, 0] == pytest.approx(-1j * S2)


def test_change_frame_rejects_non_unitary(kt_cd):
    with pytest.raises(StructuralError):
        change_frame(kt_cd, np.diag([2.0, 1.0]))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_frame_covariance(name, seed):
    alg = ALGEBRAS[name]()
    rng = np.random.default_rng(seed)
    frame = build_unitary_frame(alg)
    U = random_unitary(alg.n, rng)
    direct = extract_structure_constants(alg, frame.rotate(U))
    law = change_frame(extract_structure_constants(alg, frame), U)
    np.testing.assert_allclose(law.C, direct.C, atol=1e-10)
    np.testing.assert_allclose(law.D, direct.D, atol=1e-10)
    back = change_frame(law, U.conj().T)
    np.testing.assert_allclose(back.D, extract_structure_constants(alg, frame).D, atol=1e-10)


# --- realify ---------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_realify_round_trip(name, rng):
    alg = ALGEBRAS[name]()
    cd = change_frame(extract_structure_constants(alg, build_unitary_frame(alg)), random_unitary(alg.n, rng))
    real = realify(cd)
    assert validate_real_algebra(real).overall
    back = extract_structure_constants(real, build_unitary_frame(real))
    np.testing.assert_allclose(back.C, cd.C, atol=1e-12)
    np.testing.assert_allclose(back.D, cd.D, atol=1e-12)
    assert nilpotency_class(real) == nilpotency_class(alg)
