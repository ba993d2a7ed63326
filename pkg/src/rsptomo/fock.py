"""Fock-basis numerics shared by the whole toolkit.

Quadrature convention (fixed here, used everywhere)
---------------------------------------------------
The quadrature wavefunctions are

    <Q_theta|n> = psi_n(Q) * exp(-i n theta)

with ``psi_n`` the real harmonic-oscillator eigenfunctions normalized so that

    psi_0(Q) = (2/pi)**(1/4) * exp(-Q**2)
    psi_1(Q) = 2 Q * (2/pi)**(1/4) * exp(-Q**2)

i.e. the vacuum quadrature distribution is a Gaussian with variance 1/4
(X = (a + a†)/2, [X, P] = i/2).  Every pdf, sampler, projector and Wigner
kernel in this package inherits this single scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_NORM_TOL = 1e-12
_TRACE_TOL = 1e-9
_EIG_TOL = 1e-9


class ZeroProbabilityProjection(Exception):
    """Projection onto a quadrature value with zero conditional weight."""


def oscillator_wavefunctions(n_max: int, q) -> np.ndarray:
    """Real quadrature wavefunctions psi_n(q) for n = 0..n_max.

    Evaluated by the stable three-term recurrence with the normalization
    (factorials and powers of two) folded into the coefficients:

        psi_{n+1} = 2 q / sqrt(n+1) * psi_n - sqrt(n/(n+1)) * psi_{n-1}

    which stays well-scaled up to n ~ 30.  Returns an array of shape
    ``q.shape + (n_max + 1,)``.
    """
    if n_max < 0:
        raise ValueError("photon number must be non-negative")
    q = np.asarray(q, dtype=float)
    out = np.empty(q.shape + (n_max + 1,), dtype=float)
    psi0 = (2.0 / np.pi) ** 0.25 * np.exp(-q * q)
    out[..., 0] = psi0
    if n_max >= 1:
        out[..., 1] = 2.0 * q * psi0
    for n in range(1, n_max):
        out[..., n + 1] = (2.0 * q / np.sqrt(n + 1.0)) * out[..., n] - np.sqrt(
            n / (n + 1.0)
        ) * out[..., n - 1]
    return out


def quad_wavefunction(n: int, q, theta: float = 0.0):
    """Quadrature-eigenstate overlap <Q_theta|n> = psi_n(q) exp(-i n theta).

    ``q`` may be a scalar or an array; the phase convention exp(-i n theta)
    extends the n = 1 case to all photon numbers.
    """
    if n < 0:
        raise ValueError("photon number must be non-negative")
    psi = oscillator_wavefunctions(n, q)[..., n]
    value = psi * np.exp(-1j * n * theta)
    if np.isscalar(q) or np.ndim(q) == 0:
        return complex(value)
    return value


def quad_wavefunctions(cutoff: int, q, theta) -> np.ndarray:
    """All overlaps <q_theta|n>, n = 0..cutoff, as a complex array.

    ``q`` and ``theta`` broadcast against each other; the result has shape
    ``broadcast(q, theta).shape + (cutoff + 1,)``.  This is the building
    block for projector matrices in the tomography iteration.
    """
    q, theta = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(theta, dtype=float))
    psi = oscillator_wavefunctions(cutoff, q)
    n = np.arange(cutoff + 1)
    return psi * np.exp(-1j * np.multiply.outer(theta, n).reshape(theta.shape + (cutoff + 1,)))


def _as_unit_vector(amplitudes, tol: float = _NORM_TOL) -> np.ndarray:
    vec = np.asarray(amplitudes, dtype=complex)
    norm2 = float(np.sum(np.abs(vec) ** 2))
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state not normalized: |psi|^2 = {norm2!r}")
    return vec


@dataclass(frozen=True)
class PureState:
    """Single-mode pure state, amplitudes indexed by photon number 0..cutoff."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_unit_vector(self.amplitudes)
        if vec.ndim != 1 or vec.size < 2:
            raise ValueError("need amplitudes for at least {|0>, |1>}")
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @staticmethod
    def fock(n: int, cutoff: int) -> "PureState":
        if not 0 <= n <= cutoff:
            raise ValueError("fock index outside cutoff")
        amp = np.zeros(cutoff + 1, dtype=complex)
        amp[n] = 1.0
        return PureState(amp)

    @staticmethod
    def normalized(amplitudes) -> "PureState":
        vec = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(vec / norm)


@dataclass(frozen=True)
class TwoModePure:
    """Two-mode pure state; ``amplitudes[n_a, n_b]`` over a square cutoff."""

    amplitudes: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.amplitudes, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise ValueError("amplitudes must be square with cutoff >= 1")
        norm2 = float(np.sum(np.abs(mat) ** 2))
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm2!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "amplitudes", mat)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @staticmethod
    def fock(n_a: int, n_b: int, cutoff: int) -> "TwoModePure":
        if not (0 <= n_a <= cutoff and 0 <= n_b <= cutoff):
            raise ValueError("fock indices outside cutoff")
        amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        amp[n_a, n_b] = 1.0
        return TwoModePure(amp)


@dataclass(frozen=True)
class TwoModeEnsemble:
    """Rank-decomposed two-mode mixed state: weighted pure components."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), state) for w, state in self.components)
        if not comps:
            raise ValueError("ensemble needs at least one component")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"component weights sum to {total!r}, expected 1")
        for w, state in comps:
            if not 0.0 <= w <= 1.0:
                raise ValueError("weights must lie in [0, 1]")
            if not isinstance(state, TwoModePure):
                raise TypeError("components must be TwoModePure states")
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix over Fock indices 0..cutoff."""

    elements: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.elements, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(mat - mat.conj().T)) > _NORM_TOL:
            raise ValueError("density matrix not Hermitian")
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > _TRACE_TOL:
            raise ValueError(f"trace = {trace!r}, expected 1")
        min_eig = float(np.linalg.eigvalsh(mat)[0])
        if min_eig < -_EIG_TOL:
            raise ValueError(f"negative eigenvalue {min_eig!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)

    @property
    def cutoff(self) -> int:
        return self.elements.shape[0] - 1

    def expanded(self, cutoff: int) -> "DensityMatrix":
        """Embed into a larger Fock space, padding with zeros."""
        if cutoff < self.cutoff:
            raise ValueError("target cutoff smaller than current")
        out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        n = self.elements.shape[0]
        out[:n, :n] = self.elements
        return DensityMatrix(out)


def beam_splitter(state: TwoModePure, transmission: float) -> TwoModePure:
    """Two-mode beam-splitter unitary with transmission alpha^2.

    Acts on creation operators as a† -> alpha a† - beta b†,
    b† -> beta a† + alpha b† (beta^2 = 1 - alpha^2), the sign convention
    under which |1,0> -> alpha|1,0> - beta|0,1>.  Photon number is
    conserved, so the input support must fit inside the cutoff.
    """
    if not 0.0 < transmission < 1.0:
        raise ValueError("transmission must lie strictly inside (0, 1)")
    alpha = np.sqrt(transmission)
    beta = np.sqrt(1.0 - transmission)
    amp = state.amplitudes
    dim = amp.shape[0]
    cutoff = dim - 1

    occupied = np.argwhere(np.abs(amp) > 0.0)
    if occupied.size and int(occupied.sum(axis=1).max()) > cutoff:
        raise ValueError("input support overflows the cutoff under photon-number mixing")

    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, 2 * dim)))))
    out = np.zeros_like(amp)
    for n_a, n_b in occupied:
        c = amp[n_a, n_b]
        # (alpha a† - beta b†)^n_a (beta a† + alpha b†)^n_b |0,0>, expanded binomially
        for j in range(n_a + 1):
            term_a = (
                _binom(n_a, j, log_fact)
                * alpha**j
                * (-beta) ** (n_a - j)
            )
            for k in range(n_b + 1):
                term = term_a * _binom(n_b, k, log_fact) * beta**k * alpha ** (n_b - k)
                m_a = j + k
                m_b = n_a + n_b - m_a
                scale = np.exp(
                    0.5 * (log_fact[m_a] + log_fact[m_b] - log_fact[n_a] - log_fact[n_b])
                )
                out[m_a, m_b] += c * term * scale
    return TwoModePure(out)


def _binom(n: int, k: int, log_fact: np.ndarray) -> float:
    return float(np.exp(log_fact[n] - log_fact[k] - log_fact[n - k]))


def project_mode_A(state: TwoModePure, q: float, theta_a: float = 0.0):
    """Condition mode B on a quadrature outcome ``q`` at phase ``theta_a``.

    Returns ``(conditional_state, weight)`` where ``weight`` is the
    probability density of the outcome (the squared norm of the
    unnormalized conditional vector).  Raises ZeroProbabilityProjection
    when the weight vanishes.
    """
    cutoff = state.cutoff
    overlaps = quad_wavefunctions(cutoff, q, theta_a).reshape(cutoff + 1)
    conditional = overlaps @ state.amplitudes
    weight = float(np.sum(np.abs(conditional) ** 2))
    if weight == 0.0:
        raise ZeroProbabilityProjection(f"zero-probability projection at q={q!r}")
    return PureState(conditional / np.sqrt(weight)), weight


def quadrature_pdf(rho, theta, x):
    """Probability density of quadrature outcome x at phase theta.

    ``rho`` may be a DensityMatrix or a raw Hermitian matrix; ``x`` may be
    scalar or an array.  Computed as <x_theta| rho |x_theta> in the
    truncated Fock basis.
    """
    mat = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    cutoff = mat.shape[0] - 1
    scalar = np.isscalar(x) or np.ndim(x) == 0
    vecs = quad_wavefunctions(cutoff, np.atleast_1d(x), theta)
    pdf = np.einsum("km,mn,kn->k", vecs, mat, vecs.conj()).real
    return float(pdf[0]) if scalar else pdf


def density_from_ensemble(components: Sequence) -> DensityMatrix:
    """Mixed state rho = sum_k w_k |psi_k><psi_k| from weighted pure states."""
    comps = [(float(w), state) for w, state in components]
    total = sum(w for w, _ in comps)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"weights sum to {total!r}, expected 1 within 1e-9")
    dim = max(state.amplitudes.size for _, state in comps)
    rho = np.zeros((dim, dim), dtype=complex)
    for w, state in comps:
        vec = np.zeros(dim, dtype=complex)
        vec[: state.amplitudes.size] = state.amplitudes
        rho += w * np.outer(vec, vec.conj())
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)
