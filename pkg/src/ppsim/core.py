"""Operator algebra for small ensembles of spin-1/2 nuclei.

Conventions used throughout the package:

- Basis states are labeled by bit strings with spin 1 as the most
  significant bit.  Energy levels are numbered from 1, so for two spins
  |00> -> 1, |01> -> 2, |10> -> 3, |11> -> 4.
- Spin operators are one-half the Pauli matrices (eigenvalues +-1/2).
- A deviation matrix is the traceless part of a density matrix, in the
  units where thermal equilibrium reads sum_i gamma_i * sigma_z(spin i).
  The uniform background is invisible to every readout modeled here and
  is dropped everywhere.
- Angles are radians inside the package; degrees appear only at file and
  command-line boundaries.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractError, InputError, NotPseudoPureError

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

#: Supported crusher idealizations, see :func:`crush`.
CRUSH_MODES = ("all_off_diagonal", "coherence_order")

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class SpinSystem:
    """A static description of the spin ensemble.

    gamma: relative gyromagnetic ratio per spin (dimensionless, nonzero).
    larmor_mhz: carrier frequency per spin, used only to label readout.
    j_hz: symmetric scalar-coupling matrix with zero diagonal.
    labels: optional per-spin names ("C", "H", ...).
    """

    gamma: tuple[float, ...]
    larmor_mhz: tuple[float, ...] | None = None
    j_hz: tuple[tuple[float, ...], ...] | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        n = len(self.gamma)
        if n < 1:
            raise InputError("a spin system needs at least one spin")
        if not all(np.isfinite(g) and g != 0 for g in self.gamma):
            raise InputError(f"gamma must be finite and nonzero, got {self.gamma}")
        if self.larmor_mhz is not None:
            object.__setattr__(self, "larmor_mhz", tuple(float(v) for v in self.larmor_mhz))
            if len(self.larmor_mhz) != n:
                raise InputError("larmor_mhz length does not match gamma")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
            if len(self.labels) != n:
                raise InputError("labels length does not match gamma")
        if self.j_hz is not None:
            j = tuple(tuple(float(v) for v in row) for row in self.j_hz)
            object.__setattr__(self, "j_hz", j)
            if len(j) != n or any(len(row) != n for row in j):
                raise InputError("j_hz must be an n x n matrix")
            for a in range(n):
                if j[a][a] != 0:
                    raise InputError("j_hz diagonal must be zero")
                for b in range(n):
                    if j[a][b] != j[b][a]:
                        raise InputError("j_hz must be symmetric")

    @property
    def n_spins(self) -> int:
        return len(self.gamma)

    @property
    def dim(self) -> int:
        return 2**self.n_spins

    def label(self, i: int) -> str:
        """Name of spin i (1-based), generated if none was given."""
        if not 1 <= i <= self.n_spins:
            raise InputError(f"spin index {i} out of range 1..{self.n_spins}")
        return self.labels[i - 1] if self.labels else f"S{i}"

    def to_dict(self) -> dict:
        out: dict = {"gamma": list(self.gamma)}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        if self.larmor_mhz is not None:
            out["larmor_mhz"] = list(self.larmor_mhz)
        if self.j_hz is not None:
            out["j_hz"] = [list(row) for row in self.j_hz]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SpinSystem":
        if not isinstance(data, dict) or "gamma" not in data:
            raise InputError("spin system JSON must be an object with a 'gamma' array")
        try:
            return cls(
                gamma=tuple(data["gamma"]),
                larmor_mhz=tuple(data["larmor_mhz"]) if data.get("larmor_mhz") is not None else None,
                j_hz=tuple(tuple(r) for r in data["j_hz"]) if data.get("j_hz") is not None else None,
                labels=tuple(data["labels"]) if data.get("labels") is not None else None,
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed spin system: {exc}") from exc


# ---------------------------------------------------------------------------
# level bookkeeping

def level_of(bits: str) -> int:
    """1-based energy level for a basis label, e.g. '01' -> 2."""
    if not bits or any(c not in "01" for c in bits):
        raise InputError(f"basis label must be a nonempty bit string, got {bits!r}")
    return 1 + int(bits, 2)


def bits_of(level: int, n_spins: int) -> str:
    """Basis label for a 1-based level, e.g. (2, 2) -> '01'."""
    if not 1 <= level <= 2**n_spins:
        raise InputError(f"level {level} out of range 1..{2**n_spins}")
    return format(level - 1, f"0{n_spins}b")


def _check_level(level: int, n_spins: int) -> int:
    if not 1 <= level <= 2**n_spins:
        raise InputError(f"level {level} out of range 1..{2**n_spins}")
    return level


def _pauli(axis: str) -> np.ndarray:
    try:
        return PAULI[axis]
    except KeyError:
        raise InputError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None


# ---------------------------------------------------------------------------
# operators

def spin_op(i: int, axis: str, n_spins: int) -> np.ndarray:
    """Spin operator sigma_axis/2 on spin i (1-based), identity elsewhere."""
    if not 1 <= i <= n_spins:
        raise InputError(f"spin index {i} out of range 1..{n_spins}")
    sig = _pauli(axis)
    op = np.eye(2 ** (i - 1), dtype=complex)
    op = np.kron(op, sig / 2)
    return np.kron(op, np.eye(2 ** (n_spins - i), dtype=complex))


def projector(i: int, sign: str, n_spins: int) -> np.ndarray:
    """Projector onto spin i up ('+', bit 0) or down ('-', bit 1)."""
    if sign not in ("+", "-"):
        raise InputError(f"sign must be '+' or '-', got {sign!r}")
    s = 1.0 if sign == "+" else -1.0
    return 0.5 * (np.eye(2**n_spins, dtype=complex) + 2 * s * spin_op(i, "z", n_spins))


def transition_op(m: int, k: int, axis: str, n_spins: int) -> np.ndarray:
    """Single-transition operator acting only in the two-level subspace (m, k).

    The 2x2 block between levels m and k is sigma_axis/2 with the block rows
    ordered (m, k); every other entry is zero.  Levels are 1-based and need
    not be adjacent or single-quantum here; selection rules are the caller's
    concern.
    """
    _check_level(m, n_spins)
    _check_level(k, n_spins)
    if m == k:
        raise InputError(f"transition needs two distinct levels, got ({m}, {k})")
    sig = _pauli(axis)
    dim = 2**n_spins
    out = np.zeros((dim, dim), dtype=complex)
    a, b = m - 1, k - 1
    out[a, a] = sig[0, 0] / 2
    out[a, b] = sig[0, 1] / 2
    out[b, a] = sig[1, 0] / 2
    out[b, b] = sig[1, 1] / 2
    return out


def thermal_deviation(system: SpinSystem) -> np.ndarray:
    """High-temperature equilibrium deviation, sum_i gamma_i * sigma_z(i)."""
    n = system.n_spins
    out = np.zeros((system.dim, system.dim), dtype=complex)
    for i, g in enumerate(system.gamma, start=1):
        out += 2 * g * spin_op(i, "z", n)
    return out


def generator(pulses, n_spins: int) -> np.ndarray:
    """Hermitian generator for simultaneous single-transition pulses.

    pulses: iterable of ((m, k), axis, angle_rad).  The returned matrix is
    sum_j angle_j * transition_op(m_j, k_j, axis_j); exponentiate with
    :func:`expm_unitary` to get the pulse propagator.
    """
    out = np.zeros((2**n_spins, 2**n_spins), dtype=complex)
    for (m, k), axis, angle in pulses:
        out += float(angle) * transition_op(m, k, axis, n_spins)
    return out


def expm_unitary(hermitian: np.ndarray) -> np.ndarray:
    """exp(-i H) for Hermitian H, via the spectral decomposition.

    H is diagonalized once with eigh, so the result is unitary to machine
    precision regardless of the norm of H.
    """
    H = np.asarray(hermitian, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InputError(f"generator must be a square matrix, got shape {H.shape}")
    if not is_hermitian(H, tol=HERMITICITY_TOL):
        raise ContractError("generator is not Hermitian to 1e-10")
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w)) @ V.conj().T


def evolve(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Conjugate a state by a propagator: rho -> U rho U+."""
    rho = np.asarray(rho, dtype=complex)
    U = np.asarray(U, dtype=complex)
    if rho.shape != U.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InputError(f"shape mismatch: state {rho.shape} vs propagator {U.shape}")
    return U @ rho @ U.conj().T


def coherence_order(j: int, k: int, n_spins: int) -> int:
    """Net spin-flip number between levels j and k (popcount difference)."""
    _check_level(j, n_spins)
    _check_level(k, n_spins)
    return (k - 1).bit_count() - (j - 1).bit_count()


def crush(rho: np.ndarray, mode: str = "all_off_diagonal") -> np.ndarray:
    """Idealized crusher gradient.

    'all_off_diagonal' keeps only populations.  'coherence_order' keeps
    every element whose coherence order is zero, which also preserves
    zero-quantum terms; gradients cannot dephase those.
    """
    rho = np.asarray(rho, dtype=complex)
    if mode not in CRUSH_MODES:
        raise InputError(f"crush mode must be one of {CRUSH_MODES}, got {mode!r}")
    if mode == "all_off_diagonal":
        return np.diag(np.diagonal(rho)).astype(complex)
    pc = np.array([lev.bit_count() for lev in range(rho.shape[0])])
    keep = pc[:, None] == pc[None, :]
    return np.where(keep, rho, 0.0)


# ---------------------------------------------------------------------------
# diagnostics

class PurePart(NamedTuple):
    uniform_coeff: float
    pure_coeff: float
    target: int


def pure_part(rho: np.ndarray, tol: float = 1e-6) -> PurePart:
    """Split a diagonal state into uniform background plus one basis state.

    Succeeds when all but one diagonal entry agree within tol; returns the
    repeated value, the excess at the distinct level, and that level.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    off = rho - np.diag(np.diagonal(rho))
    worst_off = float(np.max(np.abs(off))) if dim > 1 else 0.0
    if worst_off > tol:
        raise NotPseudoPureError(
            f"state has off-diagonal content {worst_off:.3e} beyond tol {tol:.1e}"
        )
    d = np.real(np.diagonal(rho))
    # The lone distinct entry is the farthest from the median, which always
    # lies in the repeated group for dim >= 3.
    target_idx = int(np.argmax(np.abs(d - np.median(d))))
    rest = np.delete(d, target_idx)
    spread = float(rest.max() - rest.min())
    if spread > tol:
        raise NotPseudoPureError(
            f"non-target populations spread {spread:.3e} beyond tol {tol:.1e}"
        )
    uniform = float(rest.mean())
    pure = float(d[target_idx] - uniform)
    if abs(pure) <= tol:
        raise NotPseudoPureError("no level stands out from the uniform background")
    return PurePart(uniform, pure, target_idx + 1)


def max_rel_error(a: np.ndarray, b: np.ndarray, symmetric: bool = False) -> float:
    """max |a - b| over entries, normalized by the largest magnitude in b.

    With symmetric=True the normalization is the larger of the two maxima,
    making the metric independent of argument order.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    scale = float(np.max(np.abs(b)))
    if symmetric:
        scale = max(scale, float(np.max(np.abs(a))))
    if scale == 0.0:
        raise ContractError("relative error undefined: reference matrix is zero")
    return float(np.max(np.abs(a - b))) / scale


def is_hermitian(A: np.ndarray, tol: float = 1e-12) -> bool:
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and bool(
        np.max(np.abs(A - A.conj().T)) <= tol
    )


def is_unitary(U: np.ndarray, tol: float = 1e-12) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))) <= tol)
