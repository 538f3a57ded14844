"""Quantum channels and their interchangeable representations.

A channel is a linear map ``T: M_{d_in} -> M_{d_out}``.  Several concrete
forms are supported (Kraus, Choi, measure-and-prepare variants, direct sums);
every operation accepts any form.  The Choi matrix is normalized to trace one,
``J(T) = (T (x) id)(psi psi*)`` with ``psi`` the maximally entangled unit
vector, so the input marginal of a trace-preserving channel is ``I/d_in``.

Non-CPTP linear maps are representable (as ``ChoiForm`` containers) so that
complete positivity can be *checked* rather than assumed; see
:func:`Channel.verify_cptp`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    TOL_PSD,
    TOL_TRACE,
    PAULIS,
    check_density_matrix,
    check_povm,
    check_unitary,
    dag,
    herm,
    is_hermitian,
    matrix_units,
    op_norm,
    partial_trace,
    unvec,
    vec,
)


@dataclass
class KrausForm:
    """Completely positive map ``rho -> sum_k K_k rho K_k*``."""

    operators: list


@dataclass
class ChoiForm:
    """Linear map stored by its (trace-normalized) Choi matrix, output (x) input."""

    matrix: np.ndarray
    d_in: int
    d_out: int


@dataclass
class PovmForm:
    """Measure-and-prepare map ``rho -> sum_i Tr(M_i rho) sigma_i``."""

    effects: list
    states: list


@dataclass
class EcqForm:
    """POVM form with effects ``e_i e_i* + Mt_i``, the e_i orthonormal.

    The remainders satisfy ``Tr(Mt_i e_j e_j*) = 0`` for all i, j, which makes
    every effect attain operator norm one.
    """

    vectors: list
    tilde_effects: list
    states: list

    def effects(self):
        return [np.outer(e, np.conj(e)) + m for e, m in zip(self.vectors, self.tilde_effects)]


@dataclass
class CqForm:
    """Classical-quantum map: dephase in a basis, then prepare states.

    ``basis`` holds the orthonormal input basis as columns; ``states[i]`` is
    prepared with probability ``<e_i, rho e_i>``.
    """

    basis: np.ndarray
    states: list


@dataclass
class DirectSumForm:
    """Input-block direct sum: off-diagonal input blocks are discarded."""

    blocks: list  # channels with a common output dimension


class Channel:
    """A linear map between matrix spaces, in one of the concrete forms."""

    def __init__(self, form, d_in, d_out):
        self.form = form
        self.d_in = int(d_in)
        self.d_out = int(d_out)
        self._natural = None
        self._choi = None
        self._kraus = None

    def __repr__(self):
        return f"Channel({type(self.form).__name__}, {self.d_in}->{self.d_out})"

    # -- evaluation -----------------------------------------------------

    def apply(self, rho):
        """Evaluate ``T(rho)`` for an arbitrary (not necessarily PSD) matrix."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.d_in, self.d_in):
            raise ValueError(f"input has shape {rho.shape}, expected {(self.d_in, self.d_in)}")
        f = self.form
        if isinstance(f, KrausForm):
            out = np.zeros((self.d_out, self.d_out), dtype=complex)
            for k in f.operators:
                out += k @ rho @ dag(k)
            return out
        if isinstance(f, ChoiForm):
            j = f.matrix.reshape(self.d_out, self.d_in, self.d_out, self.d_in)
            return self.d_in * np.einsum("aibk,ik->ab", j, rho)
        if isinstance(f, (PovmForm, EcqForm)):
            effects = f.effects() if isinstance(f, EcqForm) else f.effects
            out = np.zeros((self.d_out, self.d_out), dtype=complex)
            for m, s in zip(effects, f.states):
                out += np.trace(m @ rho) * s
            return out
        if isinstance(f, CqForm):
            out = np.zeros((self.d_out, self.d_out), dtype=complex)
            for i, s in enumerate(f.states):
                e = f.basis[:, i]
                out += (np.conj(e) @ rho @ e) * s
            return out
        if isinstance(f, DirectSumForm):
            out = np.zeros((self.d_out, self.d_out), dtype=complex)
            off = 0
            for blk in f.blocks:
                sl = slice(off, off + blk.d_in)
                out += blk.apply(rho[sl, sl])
                off += blk.d_in
            return out
        raise TypeError(f"unknown form {type(f).__name__}")

    def natural_matrix(self):
        """The matrix ``N`` with ``vec(T(rho)) = N vec(rho)`` (row-major vec)."""
        if self._natural is None:
            n = np.zeros((self.d_out ** 2, self.d_in ** 2), dtype=complex)
            for (i, j), e in matrix_units(self.d_in):
                n[:, i * self.d_in + j] = vec(self.apply(e))
            self._natural = n
        return self._natural

    def dual_apply(self, h):
        """Adjoint action on observables: ``Tr(h T(rho)) = Tr(T*(h) rho)``."""
        h = np.asarray(h, dtype=complex)
        if h.shape != (self.d_out, self.d_out):
            raise ValueError(f"observable has shape {h.shape}, expected {(self.d_out, self.d_out)}")
        n = self.natural_matrix()
        return unvec(dag(n) @ vec(h), self.d_in)

    def dual(self):
        return DualMap(self)

    # -- representation changes ----------------------------------------

    def to_choi(self):
        """Trace-normalized Choi matrix on C^{d_out} (x) C^{d_in}."""
        if self._choi is None:
            n = self.natural_matrix()
            m, d = self.d_out, self.d_in
            j = n.reshape(m, m, d, d).transpose(0, 2, 1, 3).reshape(m * d, m * d)
            self._choi = herm(j / d) if is_hermitian(j / d, tol=1e-9) else j / d
        return self._choi

    def kraus_operators(self, tol=1e-9):
        """Kraus operators extracted from the Choi eigendecomposition.

        The number of operators equals the numerical rank of the Choi matrix
        at ``tol``; raises for maps that are not completely positive.
        """
        if isinstance(self.form, KrausForm):
            return list(self.form.operators)
        if self._kraus is None:
            j = self.to_choi()
            if not is_hermitian(j, tol=1e-9):
                raise ValueError("Choi matrix is not Hermitian; map has no Kraus form")
            w, u = np.linalg.eigh(herm(j))
            if w[0] < -tol:
                raise ValueError(f"Choi matrix is not PSD (min eig {w[0]:.3e}); no Kraus form")
            ops = []
            for lam, v in zip(w, u.T):
                if lam > tol:
                    ops.append(np.sqrt(self.d_in * lam) * v.reshape(self.d_out, self.d_in))
            self._kraus = ops
        return list(self._kraus)

    # -- verification ---------------------------------------------------

    def verify_cptp(self, tol_psd=TOL_PSD, tol_trace=TOL_TRACE):
        """Check complete positivity (Choi PSD) and trace preservation.

        Maps that fail to preserve hermiticity (non-Hermitian Choi) are
        reported as non-CP with the hermiticity defect folded into the
        eigenvalue bound.
        """
        j = self.to_choi()
        defect = op_norm(j - dag(j)) / 2
        min_eig = float(np.linalg.eigvalsh(herm(j))[0]) - defect
        marg = partial_trace(self.to_choi(), (self.d_out, self.d_in), keep=1)
        dev = op_norm(marg - np.eye(self.d_in) / self.d_in)
        is_cp = min_eig >= -tol_psd
        is_tp = dev <= tol_trace
        return CptpVerdict(
            is_cp=is_cp,
            is_tp=is_tp,
            is_cptp=is_cp and is_tp,
            min_choi_eigenvalue=min_eig,
            marginal_deviation=float(dev),
            tol_psd=tol_psd,
            tol_trace=tol_trace,
        )

    def require_cptp(self, tol_psd=TOL_PSD, tol_trace=TOL_TRACE):
        v = self.verify_cptp(tol_psd=tol_psd, tol_trace=tol_trace)
        if not v.is_cptp:
            raise NotCptpError(v)
        return v


@dataclass
class CptpVerdict:
    is_cp: bool
    is_tp: bool
    is_cptp: bool
    min_choi_eigenvalue: float
    marginal_deviation: float
    tol_psd: float
    tol_trace: float


class NotCptpError(ValueError):
    """Raised when an operation requires a CPTP map but verification fails."""

    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__(
            "map is not CPTP: min Choi eigenvalue "
            f"{verdict.min_choi_eigenvalue:.3e}, marginal deviation {verdict.marginal_deviation:.3e}"
        )


class DualMap:
    """The adjoint ``T*`` acting on output observables."""

    def __init__(self, channel):
        self.channel = channel
        self.d_in = channel.d_out
        self.d_out = channel.d_in

    def apply(self, h):
        return self.channel.dual_apply(h)

    def natural_matrix(self):
        return dag(self.channel.natural_matrix())


# -- constructors -------------------------------------------------------


def kraus_channel(operators):
    ops = [np.asarray(k, dtype=complex) for k in operators]
    if not ops:
        raise ValueError("need at least one Kraus operator")
    m, d = ops[0].shape
    for k in ops:
        if k.shape != (m, d):
            raise ValueError("Kraus operators must share a common shape")
    return Channel(KrausForm(ops), d_in=d, d_out=m)


def choi_channel(j, d_in, d_out, tol=1e-8):
    """Channel from a trace-normalized Choi matrix; rejects non-PSD input."""
    j = np.asarray(j, dtype=complex)
    if j.shape != (d_in * d_out, d_in * d_out):
        raise ValueError(f"Choi matrix has shape {j.shape}, expected {(d_in * d_out,) * 2}")
    if not is_hermitian(j, tol=1e-9):
        raise ValueError("Choi matrix is not Hermitian")
    if np.linalg.eigvalsh(herm(j))[0] < -tol:
        raise ValueError("Choi matrix is not positive semidefinite")
    marg = partial_trace(j, (d_out, d_in), keep=1)
    if op_norm(marg - np.eye(d_in) / d_in) > tol:
        raise ValueError("Choi input marginal is not identity/d_in")
    return Channel(ChoiForm(herm(j), d_in, d_out), d_in=d_in, d_out=d_out)


def linear_map_channel(apply_fn, d_in, d_out):
    """Container for an arbitrary linear map given by a callback (no CPTP check)."""
    n = np.zeros((d_out ** 2, d_in ** 2), dtype=complex)
    for (i, j), e in matrix_units(d_in):
        n[:, i * d_in + j] = vec(np.asarray(apply_fn(e), dtype=complex))
    j_mat = n.reshape(d_out, d_out, d_in, d_in).transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in) / d_in
    ch = Channel(ChoiForm(j_mat, d_in, d_out), d_in=d_in, d_out=d_out)
    ch._natural = n
    return ch


def povm_channel(effects, states, validate=True):
    if len(effects) != len(states):
        raise ValueError("need one prepared state per effect")
    effects = [np.asarray(m, dtype=complex) for m in effects]
    states = [np.asarray(s, dtype=complex) for s in states]
    d = effects[0].shape[0]
    n = states[0].shape[0]
    if validate:
        effects = check_povm(effects, d=d)
        states = [check_density_matrix(s, name=f"state {i}") for i, s in enumerate(states)]
    return Channel(PovmForm(effects, states), d_in=d, d_out=n)


def cq_channel(basis, states, validate=True):
    basis = np.asarray(basis, dtype=complex)
    states = [np.asarray(s, dtype=complex) for s in states]
    d = basis.shape[0]
    if basis.shape != (d, d) or len(states) != d:
        raise ValueError("CQ form needs a full orthonormal basis and one state per basis vector")
    if validate:
        basis = check_unitary(basis)
        states = [check_density_matrix(s, name=f"state {i}") for i, s in enumerate(states)]
    return Channel(CqForm(basis, states), d_in=d, d_out=states[0].shape[0])


def ecq_channel(vectors, tilde_effects, states, validate=True, tol=1e-8):
    vectors = [np.asarray(e, dtype=complex).reshape(-1) for e in vectors]
    tilde_effects = [np.asarray(m, dtype=complex) for m in tilde_effects]
    states = [np.asarray(s, dtype=complex) for s in states]
    d = vectors[0].size
    if not len(vectors) == len(tilde_effects) == len(states):
        raise ValueError("vectors, remainders and states must align")
    if validate:
        for i, e in enumerate(vectors):
            for jj, f in enumerate(vectors):
                want = 1.0 if i == jj else 0.0
                if abs(np.vdot(e, f) - want) > 1e-9:
                    raise ValueError("the e_i are not orthonormal")
        for i, m in enumerate(tilde_effects):
            if np.linalg.eigvalsh(herm(m))[0] < -tol:
                raise ValueError(f"remainder {i} is not positive semidefinite")
            for jj, e in enumerate(vectors):
                if abs(np.conj(e) @ m @ e) > tol:
                    raise ValueError(f"remainder {i} is not supported away from the e_j")
        total = sum(np.outer(e, np.conj(e)) + m for e, m in zip(vectors, tilde_effects))
        if op_norm(total - np.eye(d)) > tol:
            raise ValueError("eCQ effects do not sum to the identity")
        states = [check_density_matrix(s, name=f"state {i}") for i, s in enumerate(states)]
    return Channel(EcqForm(vectors, tilde_effects, states), d_in=d, d_out=states[0].shape[0])


def direct_sum(*channels):
    """Direct-sum channel on block-diagonal inputs; off-diagonal blocks are dropped."""
    blocks = []
    for c in channels:
        if isinstance(c.form, DirectSumForm):
            blocks.extend(c.form.blocks)
        else:
            blocks.append(c)
    if not blocks:
        raise ValueError("need at least one block")
    n = blocks[0].d_out
    if any(b.d_out != n for b in blocks):
        raise ValueError("direct-sum blocks must share the output dimension")
    return Channel(DirectSumForm(blocks), d_in=sum(b.d_in for b in blocks), d_out=n)


def identity_channel(d):
    return kraus_channel([np.eye(d, dtype=complex)])


def constant_channel(sigma, d_in=None):
    sigma = check_density_matrix(sigma, name="constant output")
    d = sigma.shape[0] if d_in is None else int(d_in)
    return povm_channel([np.eye(d, dtype=complex)], [sigma], validate=False)


def dephasing_channel(d):
    eye = np.eye(d, dtype=complex)
    return cq_channel(eye, [np.outer(eye[:, i], eye[:, i]) for i in range(d)], validate=False)


def depolarizing_channel(r):
    """Qubit map ``rho -> r rho + (1-r) Tr(rho) I/2``; CP exactly for r in [-1/3, 1]."""
    if not -1 / 3 - 1e-12 <= r <= 1 + 1e-12:
        raise ValueError("depolarizing parameter outside the completely positive range [-1/3, 1]")
    c0 = (1 + 3 * r) / 4
    c1 = (1 - r) / 4
    ops = []
    if c0 > 0:
        ops.append(np.sqrt(c0) * np.eye(2, dtype=complex))
    for p in PAULIS:
        if c1 > 0:
            ops.append(np.sqrt(c1) * p.astype(complex))
    return kraus_channel(ops)


def unital_qubit_diag(lams):
    """Unital qubit map with diagonal Bloch action, possibly non-CP.

    ``rho = (I + w.sigma)/2`` maps to ``(I + (lam*w).sigma)/2``.  Stored as a
    ``ChoiForm`` so that signed compressions outside the CP region remain
    representable; use :func:`Channel.verify_cptp` to test them.
    """
    l1, l2, l3 = (float(x) for x in lams)
    eye = np.eye(2, dtype=complex)
    j = np.kron(eye, eye).astype(complex)
    for lam, p in zip((l1, l2, l3), PAULIS):
        j = j + lam * np.kron(p, p.T)
    return Channel(ChoiForm(j / 4, 2, 2), d_in=2, d_out=2)


def trine_channel():
    """The 2 -> 3 map with effects (2/3) P_j onto three coplanar unit vectors
    at mutual angle 2*pi/3; its image is a filled disc inside the probability
    simplex of the three output levels."""
    effects = []
    states = []
    for j in (1, 2, 3):
        a = 2 * np.pi * j / 3
        u = np.array([np.cos(a), np.sin(a)], dtype=complex)
        effects.append((2 / 3) * np.outer(u, np.conj(u)))
        e = np.zeros(3, dtype=complex)
        e[j - 1] = 1.0
        states.append(np.outer(e, np.conj(e)))
    return povm_channel(effects, states, validate=False)


# -- combinators --------------------------------------------------------


def tensor(t1, t2):
    """Tensor product channel on ``M_{d1 d2} -> M_{n1 n2}``."""
    f1, f2 = t1.form, t2.form
    if isinstance(f1, KrausForm) and isinstance(f2, KrausForm):
        ops = [np.kron(a, b) for a in f1.operators for b in f2.operators]
        return kraus_channel(ops)
    n = _tensor_natural(
        t1.natural_matrix(), (t1.d_out, t1.d_in), t2.natural_matrix(), (t2.d_out, t2.d_in)
    )
    ch = Channel(
        ChoiForm(_choi_from_natural(n, t1.d_in * t2.d_in, t1.d_out * t2.d_out),
                 t1.d_in * t2.d_in, t1.d_out * t2.d_out),
        d_in=t1.d_in * t2.d_in,
        d_out=t1.d_out * t2.d_out,
    )
    ch._natural = n
    return ch


def compose(t1, t2):
    """Composite ``rho -> T2(T1(rho))`` (T1 acts first)."""
    if t1.d_out != t2.d_in:
        raise ValueError(f"inner dimensions differ: {t1.d_out} vs {t2.d_in}")
    f1, f2 = t1.form, t2.form
    if isinstance(f1, KrausForm) and isinstance(f2, KrausForm):
        return kraus_channel([b @ a for a in f1.operators for b in f2.operators])
    n = t2.natural_matrix() @ t1.natural_matrix()
    ch = Channel(ChoiForm(_choi_from_natural(n, t1.d_in, t2.d_out), t1.d_in, t2.d_out),
                 d_in=t1.d_in, d_out=t2.d_out)
    ch._natural = n
    return ch


def conjugate(t, u):
    """Output rotation ``rho -> U T(rho) U*``."""
    u = check_unitary(u)
    if u.shape[0] != t.d_out:
        raise ValueError("unitary dimension does not match the output space")
    if isinstance(t.form, KrausForm):
        return kraus_channel([u @ k for k in t.form.operators])
    n = np.kron(u, np.conj(u)) @ t.natural_matrix()
    ch = Channel(ChoiForm(_choi_from_natural(n, t.d_in, t.d_out), t.d_in, t.d_out),
                 d_in=t.d_in, d_out=t.d_out)
    ch._natural = n
    return ch


def _choi_from_natural(n, d_in, d_out):
    j = n.reshape(d_out, d_out, d_in, d_in).transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in)
    return j / d_in


def _tensor_natural(n1, dims1, n2, dims2):
    m1, d1 = dims1
    m2, d2 = dims2
    k = np.kron(n1, n2)
    t = k.reshape(m1, m1, m2, m2, d1, d1, d2, d2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape((m1 * m2) ** 2, (d1 * d2) ** 2)


def map_distance(t1, t2):
    """Largest operator-norm discrepancy over the matrix-unit input basis."""
    if (t1.d_in, t1.d_out) != (t2.d_in, t2.d_out):
        raise ValueError("maps act between different spaces")
    diff = t1.natural_matrix() - t2.natural_matrix()
    worst = 0.0
    for col in range(diff.shape[1]):
        worst = max(worst, op_norm(unvec(diff[:, col], t1.d_out)))
    return worst
