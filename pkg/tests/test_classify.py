import numpy as np
import pytest

from conftest import bloch_state, ecq_fixture

from chan_atlas.channels import (
    NotCptpError,
    compose,
    cq_channel,
    dephasing_channel,
    depolarizing_channel,
    direct_sum,
    identity_channel,
    kraus_channel,
    map_distance,
    trine_channel,
    unital_qubit_diag,
)
from chan_atlas.classify import (
    INDETERMINATE,
    NO,
    YES,
    eb_direct_sum_consistency,
    is_cq,
    is_entanglement_breaking,
    is_universally_image_additive,
    reconstruct_ecq,
    retraction_channel,
)
from chan_atlas.linalg import op_norm


def pinching_channel():
    """Kraus pinching with one coherent 2x2 block; not EB, not CQ."""
    p1 = np.diag([1.0, 1.0, 0.0]).astype(complex)
    p2 = np.diag([0.0, 0.0, 1.0]).astype(complex)
    return kraus_channel([p1, p2])


def disc_fixture():
    square = [bloch_state(0.8, 0, 0), bloch_state(-0.8, 0, 0),
              bloch_state(0, 0.8, 0), bloch_state(0, -0.8, 0)]
    return direct_sum(cq_channel(np.eye(4, dtype=complex), square),
                      unital_qubit_diag((0.5, 0.5, 0.0))), square


def test_eb_depolarizing_threshold():
    assert is_entanglement_breaking(depolarizing_channel(1 / 3 - 1e-6)).status == YES
    v = is_entanglement_breaking(depolarizing_channel(1 / 3 + 1e-6))
    assert v.status == NO
    assert v.witness["min_pt_eigenvalue"] < 0


def test_eb_pt_witness_value():
    v = is_entanglement_breaking(depolarizing_channel(0.5))
    assert v.status == NO
    assert v.witness["min_pt_eigenvalue"] == pytest.approx(-1 / 8, abs=1e-12)
    assert v.witness["pt_eigenvector"].shape == (4,)


def test_eb_ppt_exact_regime():
    v = is_entanglement_breaking(trine_channel())  # (2, 3): PPT decides
    assert v.status == YES
    assert v.witness.get("ppt_exact_regime")


def test_eb_separable_pairs_reconstruct_choi():
    t = dephasing_channel(4)  # (4, 4): needs the constructive certificate
    v = is_entanglement_breaking(t)
    assert v.status == YES
    j = sum(np.kron(s, m) for s, m in v.witness["separable_pairs"])
    np.testing.assert_allclose(j, t.to_choi(), atol=1e-12)


def test_eb_direct_sum_recursion():
    t = direct_sum(dephasing_channel(2), dephasing_channel(2))
    v = is_entanglement_breaking(t)
    assert v.status == YES
    assert [b.status for b in v.witness["blocks"]] == [YES, YES]


def test_eb_pinching_with_coherent_block_is_not_eb():
    v = is_entanglement_breaking(pinching_channel())
    assert v.status == NO


def test_eb_indeterminate_without_certificate():
    # same map as a bare Kraus channel: PPT in (3,3) proves nothing
    t = dephasing_channel(3)
    bare = kraus_channel(t.kraus_operators())
    v = is_entanglement_breaking(bare)
    assert v.status == INDETERMINATE
    assert "PPT holds" in v.reason


def test_eb_requires_cptp():
    with pytest.raises(NotCptpError):
        is_entanglement_breaking(unital_qubit_diag((0.9, 0.9, 0.1)))


def test_verdict_refuses_truthiness():
    v = is_entanglement_breaking(dephasing_channel(2))
    with pytest.raises(TypeError, match="three-valued"):
        bool(v)


def test_eb_direct_sum_consistency_decisive():
    rep = eb_direct_sum_consistency(dephasing_channel(2), dephasing_channel(2))
    assert rep.consistent is True
    assert rep.direct.status == YES
    rep = eb_direct_sum_consistency(identity_channel(2), dephasing_channel(2))
    assert rep.consistent is True
    assert rep.direct.status == NO and rep.first.status == NO


def test_is_cq_on_cq_channels():
    assert is_cq(dephasing_channel(3)).status == YES
    u = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    sig = [bloch_state(0.3, 0, 0.4), bloch_state(-0.2, 0.1, 0)]
    assert is_cq(cq_channel(u, sig)).status == YES


@pytest.mark.parametrize("t", [trine_channel(), depolarizing_channel(0.5)])
def test_is_cq_rejects_round_images(t):
    assert is_cq(t).status == NO


def test_is_cq_rejects_coherent_pinching():
    assert is_cq(pinching_channel()).status == NO


def test_reconstruct_ecq_accepts_fixture():
    t, vectors, tilde, sig = ecq_fixture(3)
    rec = reconstruct_ecq(t, sig)
    assert rec.status == YES
    cert = rec.certificate
    assert max(abs(x - 1.0) for x in cert.norms) < 1e-9
    np.testing.assert_allclose(sum(cert.effects), np.eye(t.d_in), atol=1e-9)
    s = retraction_channel(cert, t.d_in)
    assert map_distance(compose(s, t), t) < 1e-9


def test_reconstruct_ecq_rejects_wrong_vertices():
    t = dephasing_channel(2)
    wrong = [bloch_state(0.5, 0, 0), bloch_state(-0.5, 0, 0)]
    rec = reconstruct_ecq(t, wrong)
    assert rec.status == NO
    assert "reproduction" in rec.witness["failed"] or "unit_norms" in rec.witness["failed"]


def test_reconstruct_ecq_dilation_obstruction():
    t, square = disc_fixture()
    rec = reconstruct_ecq(t, square)
    assert rec.status == NO
    assert rec.witness["dilated_pt_min"] < -1e-4 or rec.witness["dilated_choi_min"] < -1e-4
    assert "no POVM prepares" in rec.reason


def test_reconstruct_ecq_dependent_vertices_stay_open_for_true_cq():
    # genuinely CQ with four coplanar mixed vertices: the dilation stays
    # measure-and-prepare, so no obstruction may fire
    square = [bloch_state(0.8, 0, 0), bloch_state(-0.8, 0, 0),
              bloch_state(0, 0.8, 0), bloch_state(0, -0.8, 0)]
    t = cq_channel(np.eye(4, dtype=complex), square)
    rec = reconstruct_ecq(t, square)
    assert rec.status == INDETERMINATE
    assert "affinely dependent" in rec.reason


def test_uia_yes_on_cq():
    v = is_universally_image_additive(dephasing_channel(2))
    assert v.status == YES
    s = v.witness["retraction"]
    assert map_distance(compose(s, dephasing_channel(2)), dephasing_channel(2)) < 1e-9


def test_uia_yes_on_ecq_fixture():
    t, *_ = ecq_fixture(5)
    assert is_universally_image_additive(t).status == YES


def test_uia_no_on_round_image():
    v = is_universally_image_additive(depolarizing_channel(0.5))
    assert v.status == NO


def test_uia_no_on_disc_fixture():
    t, _ = disc_fixture()
    v = is_universally_image_additive(t)
    assert v.status == NO
    assert "no unit-norm POVM" in v.reason


def test_ecq_channel_is_eb_via_certificate():
    t, *_ = ecq_fixture(7)
    if (t.d_in, t.d_out) in {(2, 2), (2, 3), (3, 2)}:
        pytest.skip("fixture landed in the PPT-exact regime")
    v = is_entanglement_breaking(t)
    assert v.status == YES
    j = sum(np.kron(s, m) for s, m in v.witness["separable_pairs"])
    assert op_norm(j - t.to_choi()) < 1e-9
