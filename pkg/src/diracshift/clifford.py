"""Anticommuting Hermitian matrix families and the Dirac symbol diagonalizer.

A representation in spatial dimension ``n`` consists of ``n + 1`` Hermitian
``N x N`` matrices ``alpha_1 .. alpha_{n+1}`` with

    alpha_j alpha_k + alpha_k alpha_j = 2 delta_{jk} I_N,

where ``N = 2**floor((n+1)/2)`` and the last matrix plays the role of the
mass/chirality matrix ``beta``.  The construction below is a fixed tensor
recursion over Pauli matrices, so all entries lie in {0, +-1, +-i} and the
algebra closes exactly in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CliffordRep",
    "build_clifford",
    "dirac_symbol",
    "diagonalizer",
    "conjugate_rep",
    "check_relations",
]

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class CliffordRep:
    """Immutable bundle of anticommuting generators.

    Attributes
    ----------
    n : int
        Spatial dimension.
    N : int
        Matrix size, ``2**floor((n+1)/2)``.
    alphas : tuple of ndarray
        The ``n + 1`` Hermitian generators; ``alphas[-1]`` is ``beta``.
    """

    n: int
    N: int
    alphas: tuple = field(repr=False)

    @property
    def beta(self):
        return self.alphas[-1]


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=complex)
    a.flags.writeable = False
    return a


def build_clifford(n):
    """Return the fixed representation for spatial dimension ``n >= 2``.

    The recursion starts from the Pauli triple for ``n = 2`` and maps an
    ``(n, N)`` family to ``(n + 2, 2N)`` by embedding every old generator
    off-diagonally (tensoring with sigma_x) and appending ``sigma_y x I`` and
    ``sigma_z x I``.  Odd dimensions drop one spatial generator from the next
    even family, keeping the diagonal ``beta``.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"spatial dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    n_even = n if n % 2 == 0 else n + 1
    mats = [_SX, _SY, _SZ]
    for _ in range((n_even - 2) // 2):
        eye = np.eye(mats[0].shape[0], dtype=complex)
        mats = [np.kron(_SX, a) for a in mats] + [np.kron(_SY, eye), np.kron(_SZ, eye)]
    if n % 2 == 1:
        # keep alpha_1..alpha_n and beta, drop the surplus spatial generator
        mats = mats[:n] + [mats[-1]]
    alphas = tuple(_freeze(a) for a in mats)
    return CliffordRep(n=n, N=alphas[0].shape[0], alphas=alphas)


def dirac_symbol(rep, p):
    """Momentum symbol ``sum_j p_j alpha_j`` (beta excluded).

    Eigenvalues are ``+-|p|``, each with multiplicity ``N / 2``.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (rep.n,):
        raise ValueError(f"momentum must be a real {rep.n}-vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("momentum must be finite")
    out = np.zeros((rep.N, rep.N), dtype=complex)
    for pj, aj in zip(p, rep.alphas[: rep.n]):
        out += pj * aj
    return out


def _as_direction(rep, omega):
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (rep.n,):
        raise ValueError(f"direction must be a real {rep.n}-vector")
    if abs(np.linalg.norm(omega) - 1.0) > 1e-14:
        raise ValueError("direction must have unit norm (within 1e-14)")
    return omega


def _beta_basis(rep):
    """Unitary U with beta = U diag(-I, I) U*, computed from beta exactly
    when beta is diagonal (the built-in construction) and by a Hermitian
    eigensolve otherwise."""
    beta = rep.beta
    d = np.diagonal(beta)
    if np.count_nonzero(beta - np.diag(d)) == 0 and np.all(np.isin(d.real, (-1.0, 1.0))):
        order = np.concatenate([np.flatnonzero(d.real < 0), np.flatnonzero(d.real > 0)])
        return np.eye(rep.N, dtype=complex)[:, order]
    _, u = np.linalg.eigh(beta)  # ascending eigenvalues: -1 block first
    return u


def diagonalizer(rep, omega):
    """Unitary ``T~`` with ``T~* (alpha . omega) T~ = diag(-I, +I)``.

    Built as ``T(omega) U`` where ``T(omega) = (beta + alpha . omega)/sqrt(2)``
    is Hermitian and unitary, and ``U`` brings beta to ``diag(-I, I)``.
    """
    omega = _as_direction(rep, omega)
    t = (rep.beta + dirac_symbol(rep, omega)) / np.sqrt(2.0)
    return t @ _beta_basis(rep)


def conjugate_rep(rep, W):
    """Representation with every generator replaced by ``W alpha W*``."""
    W = np.asarray(W, dtype=complex)
    if W.shape != (rep.N, rep.N):
        raise ValueError("unitary size mismatch")
    if np.linalg.norm(W @ W.conj().T - np.eye(rep.N)) > 1e-12:
        raise ValueError("conjugation matrix is not unitary")
    alphas = tuple(_freeze(W @ a @ W.conj().T) for a in rep.alphas)
    return CliffordRep(n=rep.n, N=rep.N, alphas=alphas)


def check_relations(rep):
    """Exact relation audit; returns maximal residuals as plain floats."""
    herm = 0.0
    anti = 0.0
    eye2 = 2.0 * np.eye(rep.N)
    for j, aj in enumerate(rep.alphas):
        herm = max(herm, float(np.abs(aj - aj.conj().T).max()))
        for k, ak in enumerate(rep.alphas):
            acomm = aj @ ak + ak @ aj
            if j == k:
                acomm = acomm - eye2
            anti = max(anti, float(np.abs(acomm).max()))
    return {
        "n": rep.n,
        "N": rep.N,
        "size_ok": rep.N == 2 ** ((rep.n + 1) // 2),
        "hermiticity_residual": herm,
        "anticommutation_residual": anti,
    }
