import numpy as np
import pytest

from conftest import bloch_state, random_cptp

from chan_atlas.channels import (
    ChoiForm,
    CqForm,
    DirectSumForm,
    EcqForm,
    KrausForm,
    NotCptpError,
    choi_channel,
    compose,
    conjugate,
    constant_channel,
    cq_channel,
    dephasing_channel,
    depolarizing_channel,
    direct_sum,
    ecq_channel,
    identity_channel,
    kraus_channel,
    linear_map_channel,
    map_distance,
    povm_channel,
    tensor,
    trine_channel,
    unital_qubit_diag,
)
from chan_atlas.linalg import herm, random_density, random_hermitian


def test_identity_channel():
    t = identity_channel(3)
    rho = random_density(np.random.default_rng(0), 3)
    np.testing.assert_allclose(t.apply(rho), rho, atol=1e-12)
    assert t.verify_cptp().is_cptp


def test_constant_channel_ignores_input():
    sigma = random_density(np.random.default_rng(1), 2)
    t = constant_channel(sigma, d_in=3)
    rho = random_density(np.random.default_rng(2), 3)
    np.testing.assert_allclose(t.apply(rho), sigma, atol=1e-12)
    assert (t.d_in, t.d_out) == (3, 2)


def test_dephasing_kills_offdiagonals():
    t = dephasing_channel(3)
    rho = random_density(np.random.default_rng(3), 3)
    np.testing.assert_allclose(t.apply(rho), np.diag(np.diag(rho)), atol=1e-12)
    assert isinstance(t.form, CqForm)


def test_depolarizing_action_and_spectra():
    r = 0.37
    t = depolarizing_channel(r)
    rho = random_density(np.random.default_rng(4), 2)
    np.testing.assert_allclose(t.apply(rho), r * rho + (1 - r) * np.eye(2) / 2, atol=1e-12)
    # transfer spectrum {1, r, r, r}; Choi spectrum {(1+3r)/4, (1-r)/4 x3}
    w = np.sort(np.abs(np.linalg.eigvals(t.natural_matrix())))
    np.testing.assert_allclose(w, [r, r, r, 1.0], atol=1e-12)
    jw = np.sort(np.linalg.eigvalsh(t.to_choi()))
    np.testing.assert_allclose(jw, [(1 - r) / 4] * 3 + [(1 + 3 * r) / 4], atol=1e-12)


def test_depolarizing_rejects_non_cp_parameters():
    with pytest.raises(ValueError, match="completely positive range"):
        depolarizing_channel(-0.5)
    with pytest.raises(ValueError, match="completely positive range"):
        depolarizing_channel(1.01)
    depolarizing_channel(-1 / 3)  # the boundary itself is fine


def test_unital_qubit_diag_bloch_action():
    lams = (0.5, -0.3, 0.2)
    t = unital_qubit_diag(lams)
    rho = bloch_state(0.2, 0.5, -0.1)
    out = t.apply(rho)
    np.testing.assert_allclose(out, bloch_state(0.1, -0.15, -0.02), atol=1e-12)


@pytest.mark.parametrize("lams,min_eig", [
    ((0.9, 0.9, 0.1), -0.175),
    ((0.6, 0.6, 0.1), -0.025),
    ((0.5, 0.5, 0.0), 0.0),
])
def test_unital_qubit_diag_choi_boundary(lams, min_eig):
    v = unital_qubit_diag(lams).verify_cptp()
    assert v.min_choi_eigenvalue == pytest.approx(min_eig, abs=1e-12)
    assert v.is_cp == (min_eig >= 0)
    assert v.is_tp


def test_require_cptp_raises_with_verdict():
    t = unital_qubit_diag((0.9, 0.9, 0.1))
    with pytest.raises(NotCptpError) as exc:
        t.require_cptp()
    assert exc.value.verdict.min_choi_eigenvalue == pytest.approx(-0.175, abs=1e-12)


def test_trine_channel_on_basis_state():
    t = trine_channel()
    e0 = np.zeros((2, 2), dtype=complex)
    e0[0, 0] = 1.0
    np.testing.assert_allclose(t.apply(e0), np.diag([1 / 6, 1 / 6, 2 / 3]), atol=1e-12)
    assert t.verify_cptp().is_cptp


def test_representation_round_trips():
    rng = np.random.default_rng(5)
    t = random_cptp(rng, 3, 2)
    j = t.to_choi()
    t2 = choi_channel(j, 3, 2)
    assert map_distance(t, t2) < 1e-10
    t3 = kraus_channel(t.kraus_operators())
    assert map_distance(t, t3) < 1e-10
    rho = random_density(rng, 3)
    np.testing.assert_allclose(t.apply(rho), t2.apply(rho), atol=1e-10)


def test_choi_channel_rejects_non_trace_preserving():
    j = np.eye(4, dtype=complex) / 4
    j[0, 0] = 0.5  # marginal no longer maximally mixed
    with pytest.raises(ValueError):
        choi_channel(j, 2, 2)


def test_dual_is_the_heisenberg_adjoint():
    rng = np.random.default_rng(6)
    t = random_cptp(rng, 3, 4)
    rho = random_density(rng, 3)
    h = random_hermitian(rng, 4)
    lhs = np.trace(h @ t.apply(rho))
    rhs = np.trace(t.dual_apply(h) @ rho)
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)
    # unitality of the dual encodes trace preservation
    np.testing.assert_allclose(t.dual_apply(np.eye(4)), np.eye(3), atol=1e-10)


def test_compose_applies_left_argument_first():
    rng = np.random.default_rng(7)
    t1 = random_cptp(rng, 2, 3)
    t2 = random_cptp(rng, 3, 2)
    both = compose(t1, t2)
    assert (both.d_in, both.d_out) == (2, 2)
    rho = random_density(rng, 2)
    np.testing.assert_allclose(both.apply(rho), t2.apply(t1.apply(rho)), atol=1e-11)


def test_tensor_on_product_inputs():
    rng = np.random.default_rng(8)
    t1 = random_cptp(rng, 2, 3)
    t2 = random_cptp(rng, 2, 2)
    tt = tensor(t1, t2)
    assert (tt.d_in, tt.d_out) == (4, 6)
    a = random_density(rng, 2)
    b = random_density(rng, 2)
    np.testing.assert_allclose(tt.apply(np.kron(a, b)),
                               np.kron(t1.apply(a), t2.apply(b)), atol=1e-11)
    assert tt.verify_cptp().is_cptp


def test_conjugate_by_unitary():
    rng = np.random.default_rng(9)
    t = depolarizing_channel(0.5)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u = np.linalg.qr(g)[0]
    tc = conjugate(t, u)
    rho = random_density(rng, 2)
    np.testing.assert_allclose(
        tc.apply(rho), u @ t.apply(rho) @ u.conj().T, atol=1e-11)


def test_direct_sum_drops_offdiagonal_blocks():
    t1 = dephasing_channel(2)
    t2 = constant_channel(np.diag([0.25, 0.75]).astype(complex), d_in=1)
    t = direct_sum(t1, t2)
    assert (t.d_in, t.d_out) == (3, 2)
    rho = random_density(np.random.default_rng(10), 3)
    want = t1.apply(rho[:2, :2]) + t2.apply(rho[2:, 2:])
    np.testing.assert_allclose(t.apply(rho), herm(want), atol=1e-12)
    assert t.verify_cptp().is_cptp


def test_direct_sum_flattens_and_validates():
    t1 = dephasing_channel(2)
    nested = direct_sum(direct_sum(t1, t1), t1)
    assert isinstance(nested.form, DirectSumForm)
    assert len(nested.form.blocks) == 3
    with pytest.raises(ValueError, match="share the output dimension"):
        direct_sum(t1, dephasing_channel(3))


def test_povm_channel_validation():
    eye = np.eye(2, dtype=complex)
    sig = random_density(np.random.default_rng(11), 2)
    with pytest.raises(ValueError):
        povm_channel([eye, eye], [sig, sig])  # effects sum to 2I
    t = povm_channel([eye / 2, eye / 2], [sig, sig])
    np.testing.assert_allclose(t.apply(sig), sig, atol=1e-12)


def test_cq_channel_requires_orthonormal_basis():
    sig = random_density(np.random.default_rng(12), 2)
    bad = np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(ValueError):
        cq_channel(bad, [sig, sig])


def test_ecq_channel_validation():
    e0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0, 0.0], dtype=complex)
    z = np.zeros((3, 3), dtype=complex)
    m = z.copy()
    m[2, 2] = 1.0
    sig = [np.diag([0.5, 0.5]).astype(complex), np.diag([0.9, 0.1]).astype(complex)]
    t = ecq_channel([e0, e1], [m, z], sig)
    assert isinstance(t.form, EcqForm)
    assert t.verify_cptp().is_cptp
    effects = t.form.effects()
    np.testing.assert_allclose(sum(effects), np.eye(3), atol=1e-12)
    with pytest.raises(ValueError, match="orthonormal"):
        ecq_channel([e0, e0], [z, z], sig)
    with pytest.raises(ValueError, match="supported away"):
        bad = z.copy()
        bad[0, 0] = 0.5
        ecq_channel([e0, e1], [bad, z], sig)


def test_linear_map_channel_wraps_callables():
    t = linear_map_channel(lambda x: x.T, 2, 2)  # transpose map, not CP
    v = t.verify_cptp()
    assert v.is_tp and not v.is_cp
    assert isinstance(t.form, (KrausForm, ChoiForm)) or t.form is not None


def test_map_distance_separates_channels():
    assert map_distance(dephasing_channel(2), dephasing_channel(2)) < 1e-14
    d = map_distance(dephasing_channel(2), identity_channel(2))
    assert d > 0.1


def test_kraus_channel_infers_dimensions():
    k = np.zeros((3, 2), dtype=complex)
    k[0, 0] = k[1, 1] = 1.0
    t = kraus_channel([k])
    assert (t.d_in, t.d_out) == (2, 3)
