"""Truncated Fock-space linear algebra.

Dense complex operators, kets and density matrices on single- or
multi-mode truncated Fock spaces, plus the standard bosonic constructors
(annihilation, parity, displacement, squeezing, coherent and even-cat
states) and the multilinear plumbing (tensor products, partial trace,
expectation values, matrix exponential) used by the rest of the package.

Conventions
-----------
* Fock index n is the excitation number, ascending from 0.
* Multi-mode tensor ordering is fixed by the caller; the protocol layer
  uses (cavity x mechanics).
* Everything is dense: at the dimensions this package targets
  (<= 40 per mechanical mode, <= 6 per cavity mode) dense BLAS beats
  sparse formats and keeps matrix exponentials simple.

All objects are immutable after construction (arrays are marked
read-only), so they can be shared freely across threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import prod

import numpy as np
from scipy.linalg import expm as _expm

from .errors import DimensionError

__all__ = [
    "HilbertSpace",
    "Operator",
    "Ket",
    "DensityMatrix",
    "annihilation",
    "creation",
    "number",
    "identity",
    "parity",
    "displacement",
    "squeeze",
    "fock",
    "coherent",
    "cat_even",
    "tensor",
    "partial_trace",
    "dagger",
    "expect",
    "matrix_exponential",
    "truncated",
]

# Construction-time invariant tolerances for DensityMatrix.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
EIGENVALUE_TOL = 1e-6


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated Fock space, one truncation dimension per mode."""

    mode_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"invalid mode dimensions {self.mode_dims!r}")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def total_dim(self) -> int:
        return prod(self.mode_dims)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix acting on a HilbertSpace."""

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match space dim {d}")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same_space(self, other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_space(self, other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_space(self, other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)


@dataclass(frozen=True)
class Ket:
    """Unit-norm state vector on a HilbertSpace."""

    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.amplitudes, dtype=complex)
        if v.shape != (self.space.total_dim,):
            raise DimensionError(
                f"amplitude shape {v.shape} does not match space dim {self.space.total_dim}"
            )
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("cannot construct a ket from the zero vector")
        if abs(norm - 1.0) > 1e-12:
            v = v / norm
        object.__setattr__(self, "amplitudes", _freeze(v))

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator.

    Construction enforces hermiticity within 1e-10 (max elementwise),
    trace 1 within 1e-8 and smallest eigenvalue >= -1e-6.
    """

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match space dim {d}")
        herm = np.abs(m - m.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not hermitian: max |rho - rho^+| = {herm:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} deviates from 1 beyond {TRACE_TOL}")
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < -EIGENVALUE_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.space.total_dim


def _check_same_space(a, b) -> None:
    if a.space.mode_dims != b.space.mode_dims:
        raise DimensionError(f"space mismatch: {a.space.mode_dims} vs {b.space.mode_dims}")


def _single_mode(dim: int) -> HilbertSpace:
    return HilbertSpace((int(dim),))


def annihilation(dim: int) -> Operator:
    """Bosonic annihilation operator b: entries (n-1, n) = sqrt(n)."""
    if dim < 2:
        raise DimensionError(f"annihilation needs dim >= 2, got {dim}")
    m = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    return Operator(_single_mode(dim), m)


def creation(dim: int) -> Operator:
    return annihilation(dim).dagger()


def number(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"number needs dim >= 1, got {dim}")
    return Operator(_single_mode(dim), np.diag(np.arange(dim, dtype=complex)))


def identity(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"identity needs dim >= 1, got {dim}")
    return Operator(_single_mode(dim), np.eye(dim, dtype=complex))


def parity(dim: int) -> Operator:
    """Photon-number parity (-1)^(b^+ b), diagonal entries (-1)^n."""
    if dim < 1:
        raise DimensionError(f"parity needs dim >= 1, got {dim}")
    return Operator(_single_mode(dim), np.diag((-1.0 + 0j) ** np.arange(dim)))


def displacement(alpha: complex, dim: int) -> Operator:
    """D(alpha) = exp(alpha b^+ - alpha* b), unitary up to truncation.

    The caller is responsible for picking dim large enough that the
    displaced support fits the truncation (|alpha|^2 << dim).
    """
    b = annihilation(dim).matrix
    gen = alpha * b.conj().T - np.conj(alpha) * b
    return Operator(_single_mode(dim), _expm(gen))


def squeeze(s: complex, dim: int) -> Operator:
    """S(s) = exp[(s/2) (b^+)^2 - (s*/2) b^2]."""
    b = annihilation(dim).matrix
    b2 = b @ b
    gen = (s / 2.0) * b2.conj().T - (np.conj(s) / 2.0) * b2
    return Operator(_single_mode(dim), _expm(gen))


def fock(n: int, dim: int) -> Ket:
    if not 0 <= n < dim:
        raise DimensionError(f"Fock level {n} outside truncation 0..{dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return Ket(_single_mode(dim), v)


def _coherent_amplitudes(beta: complex, dim: int) -> np.ndarray:
    # e^{-|b|^2/2} b^n / sqrt(n!), built by stable recursion
    v = np.empty(dim, dtype=complex)
    v[0] = np.exp(-0.5 * abs(beta) ** 2)
    for n in range(1, dim):
        v[n] = v[n - 1] * beta / np.sqrt(n)
    return v


def _check_support(beta: complex, dim: int, what: str) -> None:
    need = abs(beta) ** 2 + 4.0 * abs(beta) + 4.0
    if need > dim:
        warnings.warn(
            f"{what}(|beta|={abs(beta):.3g}) support ~{need:.0f} exceeds truncation {dim}; "
            "amplitudes renormalized over the kept levels",
            stacklevel=3,
        )


def coherent(beta: complex, dim: int) -> Ket:
    """Coherent state |beta>, renormalized over the truncated basis."""
    if dim < 1:
        raise DimensionError(f"coherent needs dim >= 1, got {dim}")
    _check_support(beta, dim, "coherent")
    return Ket(_single_mode(dim), _coherent_amplitudes(beta, dim))


def cat_even(beta: complex, dim: int) -> Ket:
    """Even Schrodinger cat (|beta> + |-beta>)/N.

    Odd Fock amplitudes are exactly zero by construction; the mean
    excitation number is |beta|^2 tanh(|beta|^2).
    """
    if dim < 1:
        raise DimensionError(f"cat_even needs dim >= 1, got {dim}")
    _check_support(beta, dim, "cat_even")
    v = _coherent_amplitudes(beta, dim)
    v[1::2] = 0.0
    return Ket(_single_mode(dim), v)


def tensor(a, b):
    """Kronecker product of two Operators or two DensityMatrices.

    The combined space concatenates the mode lists in argument order.
    """
    space = HilbertSpace(a.space.mode_dims + b.space.mode_dims)
    m = np.kron(a.matrix, b.matrix)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(space, m)
    return Operator(space, m)


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Trace out every mode except ``keep``.

    Exactly trace-preserving: the reduced diagonal is a plain sum over
    the traced indices.
    """
    dims = rho.space.mode_dims
    if not 0 <= keep < len(dims):
        raise DimensionError(f"mode index {keep} out of range for {dims}")
    t = rho.matrix.reshape(dims + dims)
    n = len(dims)
    for m in reversed(range(n)):
        if m == keep:
            continue
        # trace over axis pair (m, m+current mode count)
        t = np.trace(t, axis1=m, axis2=m + (t.ndim // 2))
    return DensityMatrix(HilbertSpace((dims[keep],)), np.ascontiguousarray(t))


def dagger(a: Operator) -> Operator:
    return a.dagger()


def expect(rho, op: Operator) -> complex:
    """Tr[rho A] for a DensityMatrix, or <psi|A|psi> for a Ket."""
    if isinstance(rho, Ket):
        return complex(rho.amplitudes.conj() @ (op.matrix @ rho.amplitudes))
    _check_same_space(rho, op)
    return complex(np.einsum("ij,ji->", rho.matrix, op.matrix))


def matrix_exponential(a: Operator) -> Operator:
    """exp(A) via scaling-and-squaring (scipy), ~1e-13 relative accuracy."""
    return Operator(a.space, _expm(a.matrix))


def truncated(rho: DensityMatrix, dim: int) -> DensityMatrix:
    """Project a single-mode state onto the lowest ``dim`` Fock levels.

    The projected matrix is renormalized; warns if the discarded mass
    exceeds 1e-8. Used to shrink the working dimension once a transient
    has emptied the high Fock levels.
    """
    if rho.space.n_modes != 1:
        raise DimensionError("truncated expects a single-mode state")
    if not 1 <= dim <= rho.dim:
        raise DimensionError(f"cannot truncate dim {rho.dim} to {dim}")
    block = rho.matrix[:dim, :dim].copy()
    kept = block.trace().real
    if 1.0 - kept > 1e-8:
        warnings.warn(f"truncation to dim {dim} discards mass {1.0 - kept:.3e}", stacklevel=2)
    return DensityMatrix(HilbertSpace((dim,)), block / kept)
