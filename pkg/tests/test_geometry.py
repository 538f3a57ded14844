import numpy as np
import pytest

from conftest import assembled_polytopic_fixture, bloch_state

from chan_atlas.channels import (
    constant_channel,
    cq_channel,
    dephasing_channel,
    depolarizing_channel,
    direct_sum,
    identity_channel,
    trine_channel,
    unital_qubit_diag,
)
from chan_atlas.geometry import (
    bloch_image_spectrum,
    bloch_map,
    default_plane,
    dimension_bound_check,
    find_vertices,
    fujiwara_algoet_check,
    image_boundary_2d,
    polytopic_decompose,
    support_function,
)
from chan_atlas.linalg import subspace_distance, trace_norm


def test_support_function_on_trine():
    t = trine_channel()
    h = np.diag([1.0, 0.0, 0.0]).astype(complex)
    sv = support_function(t, h)
    assert sv.value == pytest.approx(2 / 3, abs=1e-12)
    # the maximizer attains the value
    w = t.apply(np.outer(sv.maximizer, np.conj(sv.maximizer)))
    assert np.trace(h @ w).real == pytest.approx(2 / 3, abs=1e-12)
    with pytest.raises(ValueError, match="Hermitian"):
        support_function(t, np.array([[0, 1], [0, 0]], dtype=complex))


def test_bloch_map_of_diagonal_channel():
    m = bloch_map(unital_qubit_diag((0.5, -0.3, 0.2)))
    np.testing.assert_allclose(m.linear, np.diag([0.5, -0.3, 0.2]), atol=1e-12)
    np.testing.assert_allclose(m.shift, 0.0, atol=1e-12)
    axes, center = bloch_image_spectrum(m)
    np.testing.assert_allclose(np.sort(axes), [0.2, 0.3, 0.5], atol=1e-12)
    np.testing.assert_allclose(center, 0.0, atol=1e-12)


def test_bloch_map_shift_of_nonunital_channel():
    sigma = bloch_state(0.0, 0.0, 0.6)
    m = bloch_map(constant_channel(sigma, d_in=2))
    np.testing.assert_allclose(m.linear, 0.0, atol=1e-12)
    np.testing.assert_allclose(m.shift, [0.0, 0.0, 0.6], atol=1e-12)


def test_bloch_map_requires_qubit_spaces():
    with pytest.raises(ValueError, match="qubit"):
        bloch_map(trine_channel())


@pytest.mark.parametrize("lams,cp", [
    ((1.0, 1.0, 1.0), True),       # identity
    ((0.5, 0.5, 0.0), True),       # boundary
    ((0.9, 0.9, 0.1), False),
    ((0.6, 0.6, 0.1), False),
    ((0.0, 0.0, 0.0), True),
])
def test_fujiwara_algoet_matches_choi(lams, cp):
    rep = fujiwara_algoet_check(lams)
    assert rep.is_cp == cp
    choi_eigs = np.linalg.eigvalsh(unital_qubit_diag(lams).to_choi())
    np.testing.assert_allclose(np.sort(rep.margins / 4), choi_eigs, atol=1e-12)


def test_fujiwara_algoet_boundary_band():
    eps = 1e-10  # inside the default band: still counts as CP
    assert fujiwara_algoet_check((0.5 + eps, 0.5 + eps, 0.0)).is_cp
    assert not fujiwara_algoet_check((0.5 + 1e-6, 0.5 + 1e-6, 0.0)).is_cp


def test_trine_boundary_circle():
    rows = image_boundary_2d(trine_channel(), n_points=64)
    assert rows.shape == (64, 3)
    radii = np.hypot(rows[:, 1], rows[:, 2])
    np.testing.assert_allclose(radii, 1 / np.sqrt(6), atol=1e-9)
    assert rows[0, 1] == pytest.approx(0.408248290464, abs=1e-9)


def test_identity_qubit_boundary_is_the_equator():
    rows = image_boundary_2d(identity_channel(2), n_points=32)
    theta = rows[:, 0]
    np.testing.assert_allclose(rows[:, 1], np.cos(theta), atol=1e-9)
    np.testing.assert_allclose(rows[:, 2], np.sin(theta), atol=1e-9)


def test_default_plane_axes_are_orthogonal_traceless():
    # qubit axes are the Paulis (Bloch normalization, HS norm sqrt(2));
    # higher dimensions use unit Hilbert-Schmidt norm
    for d, sq in ((2, 2.0), (3, 1.0), (5, 1.0)):
        a, b = default_plane(d)
        assert abs(np.trace(a)) < 1e-12 and abs(np.trace(b)) < 1e-12
        assert np.trace(a @ a).real == pytest.approx(sq, abs=1e-12)
        assert np.trace(b @ b).real == pytest.approx(sq, abs=1e-12)
        assert abs(np.trace(a @ b)) < 1e-12


def test_find_vertices_of_dephasing():
    records = find_vertices(dephasing_channel(3), n_directions=200, seed=1)
    assert len(records) == 3
    want = [np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0]), np.diag([0, 0, 1.0])]
    for w in want:
        dists = [trace_norm(r.state - w) for r in records]
        i = int(np.argmin(dists))
        assert dists[i] < 1e-8
        assert records[i].preimage_basis.shape == (3, 1)
        assert subspace_distance(records[i].preimage_basis, w.astype(complex)[:, [np.argmax(np.diag(w))]]) < 1e-8
        assert records[i].hit_count > 0


def test_polytopic_decompose_pure_cq():
    dec = polytopic_decompose(dephasing_channel(3), seed=2)
    assert dec.verdict == "polytopic"
    assert len(dec.vertices) == 3
    assert dec.w_basis.shape == (3, 0)
    assert dec.t2 is None
    assert dec.n_dof == 2
    rep = dimension_bound_check(dec)
    assert rep.ok and rep.n_dof == 2 and rep.k == 3 and rep.d_in == 3


def test_polytopic_decompose_planted_block_sum():
    sig = [bloch_state(0.8, 0, 0), bloch_state(-0.8, 0, 0), bloch_state(0, 0.8, 0)]
    interior = bloch_state(0.05, 0.1, 0.0)
    t = direct_sum(cq_channel(np.eye(3, dtype=complex), sig),
                   constant_channel(interior, d_in=1))
    dec = polytopic_decompose(t, seed=3)
    assert dec.verdict == "polytopic"
    assert len(dec.vertices) == 3
    assert dec.w_basis.shape == (4, 1)
    # the residual-space compression reproduces the planted interior state
    np.testing.assert_allclose(dec.t2.apply(np.ones((1, 1), dtype=complex)),
                               interior, atol=1e-8)
    # each vertex preimage sits on the matching coordinate axis
    eye = np.eye(4, dtype=complex)
    for s, col in zip(sig, range(3)):
        dists = [trace_norm(r.state - s) for r in dec.vertices]
        i = int(np.argmin(dists))
        assert dists[i] < 1e-7
        assert subspace_distance(dec.vertices[i].preimage_basis, eye[:, [col]]) < 1e-7


def test_polytopic_decompose_assembled_fixture():
    t, sig, k, n, w = assembled_polytopic_fixture(17)
    dec = polytopic_decompose(t, seed=17)
    assert dec.verdict == "polytopic"
    assert len(dec.vertices) == k


@pytest.mark.parametrize("channel", [depolarizing_channel(0.7), trine_channel()])
def test_round_image_is_not_polytopic(channel):
    dec = polytopic_decompose(channel, n_directions=200, seed=4)
    assert dec.verdict == "not_polytopic"
    assert not dimension_bound_check(dec).ok
    assert dec.witness.get("excess_direction") is not None or "direction" in dec.witness
