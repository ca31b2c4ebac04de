"""Dense reference semantics used by tests and by the synthesizer's
soundness gate."""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate

TOL = 1e-9
MAX_QUBITS = 10

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(letters: str) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for ch in letters.upper():
        m = np.kron(m, _PAULI[ch])
    return m


def embed(gate: Gate, n: int) -> np.ndarray:
    """Full ``2^n`` matrix of a gate placed on its qubits (qubit 0 most
    significant)."""
    u = gate.float_matrix()
    k = gate.arity
    qs = list(gate.qubits)
    rest = [q for q in range(n) if q not in qs]
    # act on a tensor with axes ordered (qs..., rest...), then permute back
    t = np.eye(1 << n, dtype=complex).reshape([2] * n + [1 << n])
    perm = qs + rest
    t = np.transpose(t, perm + [n]).reshape(1 << k, -1)
    t = (u @ t).reshape([2] * n + [1 << n])
    inv = np.argsort(perm).tolist()
    return np.transpose(t, inv + [n]).reshape(1 << n, 1 << n)


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n > MAX_QUBITS:
        raise ValueError("oracle is limited to %d qubits" % MAX_QUBITS)
    u = np.eye(1 << c.n, dtype=complex)
    for layer in c.layers:
        for g in layer:
            u = embed(g, c.n) @ u
    return u


def as_unitary(x) -> np.ndarray:
    """Dense matrix of a circuit or an array-like unitary."""
    if isinstance(x, Circuit):
        return circuit_unitary(x)
    return np.asarray(x, dtype=complex)


def pauli_coefficient(u, p_in: str, p_out: str) -> float:
    """``tr(P_out U P_in U^dag) / 2^n``."""
    u = as_unitary(u)
    n = u.shape[0].bit_length() - 1
    if len(p_in) != n or len(p_out) != n:
        raise ValueError("Pauli string width does not match the unitary")
    c = np.trace(pauli(p_out) @ u @ pauli(p_in) @ u.conj().T) / (1 << n)
    if abs(c.imag) > TOL:
        raise ValueError("Pauli coefficient is not real: %r" % c)
    return float(c.real)


def jamiolkowski_fidelity(u, v) -> float:
    """``|tr(U^dag V)|^2 / 4^n`` clamped to ``[0, 1]``."""
    u, v = as_unitary(u), as_unitary(v)
    if u.shape != v.shape:
        raise ValueError("unitaries act on different qubit counts")
    t = np.trace(u.conj().T @ v)
    fid = float(abs(t) ** 2) / float(u.shape[0] ** 2)
    return min(max(fid, 0.0), 1.0)


def global_phase(u, v) -> complex | None:
    """``lam`` with ``U ~ lam V`` taken at V's largest entry, or None if V
    vanishes there."""
    u, v = as_unitary(u), as_unitary(v)
    idx = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[idx]) < TOL:
        return None
    lam = u[idx] / v[idx]
    if abs(lam) < TOL:
        return None
    return lam / abs(lam)


def equal_up_to_phase(u, v, tol: float = TOL) -> bool:
    u, v = as_unitary(u), as_unitary(v)
    if u.shape != v.shape:
        return False
    lam = global_phase(u, v)
    if lam is None:
        return False
    return bool(np.max(np.abs(u - lam * v)) <= tol)


def state_vector(letters: str) -> np.ndarray:
    """Product state from letters ``0 1 + - A``."""
    vecs = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
        "A": np.array([1, np.exp(1j * np.pi / 4)], dtype=complex) / np.sqrt(2),
    }
    psi = np.ones(1, dtype=complex)
    for ch in letters.upper():
        psi = np.kron(psi, vecs[ch])
    return psi


def max_entangled_vector(n: int) -> np.ndarray:
    """``sum_i |i>|i> / sqrt(2^m)`` on ``n = 2m`` qubits."""
    m = n // 2
    psi = np.zeros(1 << n, dtype=complex)
    for i in range(1 << m):
        psi[(i << m) | i] = 1.0
    return psi / np.sqrt(1 << m)


def state_pauli_coefficient(psi: np.ndarray, letters: str) -> float:
    """``tr(P |psi><psi|) / 2^n``."""
    n = len(letters)
    rho = np.outer(psi, psi.conj())
    c = np.trace(pauli(letters) @ rho) / (1 << n)
    return float(c.real)
