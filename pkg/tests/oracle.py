"""Independent statevector oracle.

Builds every gate as a full 2**n matrix from Kronecker products (qubit 0 is
the most significant bit) and never touches the xtalk simulator internals.
"""
import numpy as np

I2 = np.eye(2, dtype=complex)
_S2 = 1 / np.sqrt(2)
ONE_Q = {
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(0.25j * np.pi)]),
    "tdg": np.diag([1, np.exp(-0.25j * np.pi)]),
    "sx": np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2,
    "idle": I2,
}


def rotation(kind, theta):
    axis = {"rx": ONE_Q["x"], "ry": ONE_Q["y"], "rz": ONE_Q["z"]}[kind]
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * axis


def embed(u, q, n):
    out = np.array([[1.0 + 0j]])
    for k in range(n):
        out = np.kron(out, u if k == q else I2)
    return out


def cnot_matrix(c, t, n):
    dim = 2 ** n
    m = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = int("".join(map(str, bits)), 2)
        m[j, i] = 1
    return m


def statevector(circuit):
    n = circuit.num_qubits
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    for g in circuit.gates:
        if g.kind == "measure":
            continue
        if g.kind == "cnot":
            psi = cnot_matrix(*g.qubits, n) @ psi
        elif g.kind in ("rx", "ry", "rz"):
            psi = embed(rotation(g.kind, g.angle), g.qubits[0], n) @ psi
        else:
            psi = embed(ONE_Q[g.kind], g.qubits[0], n) @ psi
    return psi


def projector(psi):
    return np.outer(psi, psi.conj())
