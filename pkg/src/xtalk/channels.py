"""Low-level density-matrix kernels.

All functions accept states of shape ``(..., 2**n, 2**n)``; leading axes are a
batch (one entry per trajectory) and are carried through untouched. Qubit 0 is
the most significant bit of the computational-basis index.
"""
from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, PX, PY, PZ)


def num_qubits(rho: np.ndarray) -> int:
    d = rho.shape[-1]
    n = d.bit_length() - 1
    if 1 << n != d or rho.shape[-2] != d:
        raise ValueError(f"not a qubit density matrix: shape {rho.shape}")
    return n


def _as_tensor(rho: np.ndarray, n: int) -> np.ndarray:
    return rho.reshape(rho.shape[:-2] + (2,) * (2 * n))


def _from_tensor(t: np.ndarray, n: int) -> np.ndarray:
    d = 1 << n
    return t.reshape(t.shape[: t.ndim - 2 * n] + (d, d))


def _contract(t: np.ndarray, m: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_unitary(rho: np.ndarray, u: np.ndarray, qubits) -> np.ndarray:
    """Return U rho U^dagger with ``u`` acting on ``qubits`` (in order)."""
    n = num_qubits(rho)
    k = len(qubits)
    b = rho.ndim - 2
    t = _as_tensor(rho, n)
    ut = u.reshape((2,) * (2 * k))
    t = _contract(t, ut, [b + q for q in qubits])
    t = _contract(t, ut.conj(), [b + n + q for q in qubits])
    return _from_tensor(t, n)


def superop_from_kraus(kraus) -> np.ndarray:
    """Single-qubit superoperator as a (2,2,2,2) tensor L[i,j,k,l]: rho'_ij = sum L_ijkl rho_kl."""
    lam = np.zeros((2, 2, 2, 2), dtype=complex)
    for k in kraus:
        lam += np.einsum("ik,jl->ijkl", k, k.conj())
    return lam


def superop_from_ptm(ptm: np.ndarray) -> np.ndarray:
    """Convert a real 4x4 Pauli transfer matrix (basis I, X, Y, Z) to a superoperator."""
    lam = np.zeros((2, 2, 2, 2), dtype=complex)
    for nu in range(4):
        for mu in range(4):
            if ptm[nu, mu] != 0:
                lam += 0.5 * ptm[nu, mu] * np.einsum("ij,lk->ijkl", PAULIS[nu], PAULIS[mu])
    return lam


def ptm_from_superop(lam: np.ndarray) -> np.ndarray:
    ptm = np.zeros((4, 4))
    for nu in range(4):
        for mu in range(4):
            out = np.einsum("ijkl,kl->ij", lam, PAULIS[mu])
            ptm[nu, mu] = 0.5 * np.real(np.trace(PAULIS[nu] @ out))
    return ptm


def compose(*lams: np.ndarray) -> np.ndarray:
    """Compose superoperators; the first argument acts first."""
    out = np.eye(4, dtype=complex)
    for lam in lams:
        out = lam.reshape(4, 4) @ out
    return out.reshape(2, 2, 2, 2)


def is_completely_positive(lam: np.ndarray, tol: float = 1e-12) -> bool:
    choi = np.transpose(lam, (2, 0, 3, 1)).reshape(4, 4)
    return bool(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min() >= -tol)


def apply_superop(rho: np.ndarray, lam: np.ndarray, q: int) -> np.ndarray:
    n = num_qubits(rho)
    b = rho.ndim - 2
    t = _as_tensor(rho, n)
    out = np.tensordot(lam, t, axes=([2, 3], [b + q, b + n + q]))
    out = np.moveaxis(out, [0, 1], [b + q, b + n + q])
    return _from_tensor(out, n)


_FULL_DEPOL = None


def trace_out_and_replace(rho: np.ndarray, qubits, p: float) -> np.ndarray:
    """(1 - p) rho + p * (maximally mixed on ``qubits``) (x) Tr_qubits(rho)."""
    global _FULL_DEPOL
    if p == 0:
        return rho
    if _FULL_DEPOL is None:
        _FULL_DEPOL = superop_from_ptm(np.diag([1.0, 0.0, 0.0, 0.0]))
    mixed = rho
    for q in qubits:
        mixed = apply_superop(mixed, _FULL_DEPOL, q)
    return (1 - p) * rho + p * mixed


def probabilities(rho: np.ndarray) -> np.ndarray:
    return np.clip(np.real(np.diagonal(rho, axis1=-2, axis2=-1)), 0.0, None)


def prob_one(rho: np.ndarray, q: int) -> np.ndarray:
    """Probability of reading 1 on qubit ``q`` (per batch entry)."""
    n = num_qubits(rho)
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    diag = diag.reshape(diag.shape[:-1] + (2,) * n)
    return np.take(diag, 1, axis=diag.ndim - n + q).reshape(diag.shape[:-n] + (-1,)).sum(-1)


def project(rho: np.ndarray, q: int, bits: np.ndarray) -> np.ndarray:
    """Project qubit ``q`` onto ``bits`` (one bit per batch entry) without renormalising."""
    n = num_qubits(rho)
    b = rho.ndim - 2
    t = _as_tensor(rho, n).copy()
    bits = np.asarray(bits).reshape(rho.shape[:-2])
    for value in (0, 1):
        mask = bits != value
        if not mask.any():
            continue
        sl_row = [slice(None)] * t.ndim
        sl_row[b + q] = value
        sl_col = [slice(None)] * t.ndim
        sl_col[b + n + q] = value
        # zero the rows and columns belonging to the discarded outcome
        sub = t[tuple(sl_row)]
        sub[mask] = 0
        t[tuple(sl_row)] = sub
        sub = t[tuple(sl_col)]
        sub[mask] = 0
        t[tuple(sl_col)] = sub
    return _from_tensor(t, n)


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    n = num_qubits(rho)
    keep = sorted(keep)
    b = rho.ndim - 2
    t = _as_tensor(rho, n)
    drop = [q for q in range(n) if q not in keep]
    cur_n = n
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=b + q, axis2=b + cur_n + q)
        cur_n -= 1
    return _from_tensor(t, len(keep))


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def clip_to_physical(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Clip negative eigenvalues and renormalise the trace (batched)."""
    rho = hermitize(rho)
    w, v = np.linalg.eigh(rho)
    if w.min() >= -tol:
        return rho
    w = np.clip(w, 0.0, None)
    w = w / w.sum(axis=-1, keepdims=True)
    return (v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
