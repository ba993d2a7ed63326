"""Closed-form predictions for quadrature-conditioned qubit preparation.

Alice's quadrature outcome ``q`` at phase ``theta_a`` on her half of the
split single photon leaves Bob with x|0> + y|1>; with source efficiency
``eta`` the conditional ensemble is a mixture of that qubit and vacuum.
These formulas are the ground truth the Monte-Carlo pipeline and the
tomography stage are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import (
    DensityMatrix,
    PureState,
    TwoModePure,
    beam_splitter,
    density_from_ensemble,
    project_mode_A,
    quad_wavefunction,
)


@dataclass(frozen=True)
class ProtocolParams:
    """Beam-splitter transmission, source efficiency, Alice phase and outcome."""

    alpha2: float
    eta: float
    theta_a: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha2 < 1.0:
            raise ValueError("alpha2 must lie in (0, 1)")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if not np.isfinite(self.q):
            raise ValueError("q must be finite")

    @property
    def beta2(self) -> float:
        return 1.0 - self.alpha2


@dataclass(frozen=True)
class Prediction:
    """Qubit coefficients and ensemble figures for one parameter point."""

    x: complex
    y: complex
    y2: float
    efficiency: float
    rate: float
    rho_b: DensityMatrix


def qubit_coefficients(params: ProtocolParams) -> tuple[complex, complex]:
    """Vacuum and single-photon coefficients (x, y) of Bob's conditional qubit.

    x is proportional to alpha <q|1> and y to -beta <q|0>, jointly normalized
    with a real-positive prefactor, so |y|^2 = beta^2 / (beta^2 + 4 alpha^2 q^2).
    """
    alpha = np.sqrt(params.alpha2)
    beta = np.sqrt(params.beta2)
    x_raw = alpha * quad_wavefunction(1, params.q, params.theta_a)
    y_raw = -beta * quad_wavefunction(0, params.q, params.theta_a)
    norm = np.sqrt(abs(x_raw) ** 2 + abs(y_raw) ** 2)
    return x_raw / norm, y_raw / norm


def single_photon_fraction(params: ProtocolParams) -> float:
    """|y|^2 of the prepared qubit (closed form)."""
    q2 = params.q * params.q
    return params.beta2 / (params.beta2 + 4.0 * params.alpha2 * q2)


def preparation_efficiency(params: ProtocolParams) -> float:
    """Weight of the pure qubit in the conditional ensemble.

    Equals eta*(4 alpha^2 q^2 + beta^2) / [eta*(4 alpha^2 q^2 + beta^2) + 1 - eta]
    after dividing both terms by the vacuum quadrature density.
    """
    signal = params.eta * (4.0 * params.alpha2 * params.q**2 + params.beta2)
    return signal / (signal + 1.0 - params.eta)


def success_rate(params: ProtocolParams) -> float:
    """Probability density of Alice's outcome landing at q.

    This is the normalization of the conditional ensemble: the vacuum
    branch contributes (1-eta)|<q|0>|^2 and the split photon
    eta*(alpha^2 |<q|1>|^2 + beta^2 |<q|0>|^2); it integrates to 1 over q.
    """
    g = abs(quad_wavefunction(0, params.q)) ** 2
    one = abs(quad_wavefunction(1, params.q)) ** 2
    return (1.0 - params.eta) * g + params.eta * (
        params.alpha2 * one + params.beta2 * g
    )


def success_rate_curve(alpha2: float, eta: float, q) -> np.ndarray:
    """Vectorized success rate over an array of conditional quadratures."""
    q = np.asarray(q, dtype=float)
    g = np.sqrt(2.0 / np.pi) * np.exp(-2.0 * q * q)
    return g * ((1.0 - eta) + eta * (4.0 * alpha2 * q * q + (1.0 - alpha2)))


def predict_rho_b(params: ProtocolParams, cutoff: int = 1) -> DensityMatrix:
    """Predicted conditional ensemble E |psi_B><psi_B| + (1-E) |0><0|."""
    return predict(params, cutoff).rho_b


def predict(params: ProtocolParams, cutoff: int = 1) -> Prediction:
    """Full closed-form prediction at one parameter point."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    x, y = qubit_coefficients(params)
    eff = preparation_efficiency(params)
    rate = success_rate(params)
    psi = np.zeros(cutoff + 1, dtype=complex)
    psi[0] = x
    psi[1] = y
    rho = eff * np.outer(psi, psi.conj())
    rho[0, 0] += 1.0 - eff
    return Prediction(
        x=complex(x),
        y=complex(y),
        y2=abs(y) ** 2,
        efficiency=eff,
        rate=rate,
        rho_b=DensityMatrix(rho),
    )


def conditional_rho_b(params: ProtocolParams, cutoff: int = 1) -> DensityMatrix:
    """Fock-level construction of the same conditional ensemble.

    Mixes the vacuum branch (weight (1-eta)|<q|0>|^2) with the projected
    split-photon branch (weight eta times the projection weight) using
    Bayesian weights.  Independent of :func:`predict`; used as its oracle.
    """
    bs_cutoff = max(cutoff, 1)
    split = beam_splitter(TwoModePure.fock(1, 0, bs_cutoff), params.alpha2)
    psi_b, w_split = project_mode_A(split, params.q, params.theta_a)
    w_vac = abs(quad_wavefunction(0, params.q)) ** 2
    w0 = (1.0 - params.eta) * w_vac
    w1 = params.eta * w_split
    total = w0 + w1
    vac = PureState.fock(0, bs_cutoff)
    return density_from_ensemble([(w0 / total, vac), (w1 / total, psi_b)])
