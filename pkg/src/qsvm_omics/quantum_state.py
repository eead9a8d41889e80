"""Dense statevector simulation of the data embeddings.

Layout convention: qubit 0 is the most significant bit of the amplitude
index, so ``amplitudes.reshape([2] * n)`` has qubit ``k`` on axis ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

NORM_TOL = 1e-9
ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be positive, got {self.num_qubits}")
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got shape {amps.shape}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (squared norm {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self):
        return self.amplitudes.shape[0]


@dataclass(frozen=True)
class ReducedDensityMatrixSet:
    """One 2x2 reduced density matrix per qubit, stacked as ``(n, 2, 2)``."""

    per_qubit: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.per_qubit, dtype=np.complex128)
        if rho.ndim != 3 or rho.shape[1:] != (2, 2):
            raise ValueError(f"expected shape (n, 2, 2), got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "per_qubit", rho)

    @property
    def num_qubits(self) -> int:
        return self.per_qubit.shape[0]

    def __getitem__(self, k):
        return self.per_qubit[k]

    def __len__(self):
        return self.num_qubits


@dataclass(frozen=True)
class ZzMapConfig:
    """Structure of the ZZ feature map; entanglement is a linear chain."""

    repetitions: int = 2

    def __post_init__(self):
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ValueError(f"repetitions must be a positive integer, got {self.repetitions}")


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    return x


def amplitude_qubits(n_features: int) -> int:
    """Qubits needed to hold ``n_features`` amplitudes (at least one)."""
    return max(1, int(np.ceil(np.log2(n_features))))


def encode_amplitude(x) -> StateVector:
    """Write ``x / ||x||`` into the amplitudes, zero-padded to a power of two.

    Raises:
        ValueError: if ``x`` is identically zero ("unnormalizable amplitude vector").
    """
    x = _as_vector(x)
    peak = np.max(np.abs(x))
    if peak == 0.0:
        raise ValueError("unnormalizable amplitude vector")
    # Divide by the peak first so tiny or huge inputs do not under/overflow.
    x = x / peak
    n = amplitude_qubits(x.shape[0])
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[: x.shape[0]] = x / np.linalg.norm(x)
    return StateVector(n, amps)


def _check_angles(x: np.ndarray) -> np.ndarray:
    if np.any(x < -ANGLE_TOL) or np.any(x > np.pi + ANGLE_TOL):
        raise ValueError("angle out of range")
    return np.clip(x, 0.0, np.pi)


def _kron_all(factors) -> np.ndarray:
    out = np.ones(1, dtype=np.complex128)
    for f in factors:
        out = np.kron(out, f)
    return out


def encode_angle(x) -> StateVector:
    """Product state with ``cos(x_i/2)|0> + sin(x_i/2)|1>`` on qubit ``i``.

    Entries must lie in ``[0, pi]``; values within ``1e-9`` of the bounds are
    clamped, anything farther raises ``ValueError("angle out of range")``.
    """
    x = _check_angles(_as_vector(x))
    qubits = np.stack([np.cos(x / 2.0), np.sin(x / 2.0)], axis=1)
    return StateVector(x.shape[0], _kron_all(qubits))


@lru_cache(maxsize=32)
def _z_eigenvalues(n: int) -> tuple:
    """Z eigenvalues per qubit, ``(n, 2**n)``, and their adjacent-pair products."""
    idx = np.arange(2**n)
    bits = (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    s = 1.0 - 2.0 * bits
    pairs = s[:-1] * s[1:]
    s.setflags(write=False)
    pairs.setflags(write=False)
    return s, pairs


def _hadamard_all(psi: np.ndarray, n: int) -> np.ndarray:
    out = psi.astype(np.complex128, copy=True)
    for k in range(n):
        t = out.reshape(2**k, 2, 2 ** (n - k - 1))
        a = t[:, 0, :].copy()
        t[:, 0, :] += t[:, 1, :]
        t[:, 1, :] *= -1.0
        t[:, 1, :] += a
    return out * 2.0 ** (-n / 2.0)


def zz_phases(x) -> np.ndarray:
    """Diagonal of one repetition's phase layer, as a complex vector.

    ``RZ(2 x_i)`` on each qubit and ``CX . RZ(2 (pi - x_k)(pi - x_{k+1})) . CX``
    on each chain pair are all diagonal in the computational basis; the CX
    sandwich applies the rotation to the parity ``z_k xor z_{k+1}``.
    """
    x = _as_vector(x)
    n = x.shape[0]
    s, pairs = _z_eigenvalues(n)
    angle = x @ s
    if n > 1:
        angle += ((np.pi - x[:-1]) * (np.pi - x[1:])) @ pairs
    return np.exp(-1j * angle)


def encode_zz(x, config: ZzMapConfig | None = None) -> StateVector:
    """Second-order ZZ feature map with linear entanglement applied to ``|0...0>``.

    Each repetition applies a Hadamard layer followed by the diagonal phase
    layer from :func:`zz_phases`.
    """
    config = config or ZzMapConfig()
    x = _as_vector(x)
    n = x.shape[0]
    phases = zz_phases(x)
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    for _ in range(config.repetitions):
        psi = phases * _hadamard_all(psi, n)
    # Unitary evolution; renormalize only to scrub accumulated round-off.
    psi = psi / np.linalg.norm(psi)
    return StateVector(n, psi)


def state_inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b> = sum_i conj(a_i) b_i``."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def reduced_density_matrices(s: StateVector) -> ReducedDensityMatrixSet:
    """Partial trace of ``|s><s|`` down to each single qubit."""
    n = s.num_qubits
    t = s.amplitudes.reshape([2] * n)
    rdms = np.empty((n, 2, 2), dtype=np.complex128)
    for k in range(n):
        m = np.moveaxis(t, k, 0).reshape(2, -1)
        rdms[k] = m @ m.conj().T
    return ReducedDensityMatrixSet(rdms)
