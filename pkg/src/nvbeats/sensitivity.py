"""Magnetometer sensitivity budgets and photon readout.

Projection-noise-limited sensitivity, the photon calibration curve and the
shot-noise-limited sensitivity derived from it, and Poisson readout
sampling.  Sensitivities are computed and stored in T*sqrt(s); display
conversion to nT/sqrt(Hz) is a separate, explicit step because the
conversion convention is ambiguous (see ``eta_to_nt_per_sqrt_hz``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocol import Basis, DecoherenceModel
from .spin_core import PhysicalConstants

__all__ = [
    "ReadoutModel",
    "SensitivityReport",
    "projection_noise_sensitivity",
    "optimal_tau",
    "calibration_curve",
    "shot_noise_sensitivity",
    "simulate_photon_counts",
    "compute_sensitivity_report",
    "eta_to_nt_per_sqrt_hz",
]


@dataclass(frozen=True)
class ReadoutModel:
    """Fluorescence readout parameters.

    ``alpha`` is the mean photon number per readout pulse, ``contrast_r``
    the half-contrast R (peak-to-peak fringe contrast is 2R), ``theta`` the
    calibration phase at zero applied field, ``total_time`` the measurement
    duration T, and ``dead_time`` the per-shot preparation plus readout
    overhead (2 us pump + 0.3 us probe by default).
    """

    alpha: float = 0.01
    contrast_r: float = 0.125
    theta: float = 0.0
    total_time: float = 1.0
    dead_time: float = 2.3e-6

    def __post_init__(self) -> None:
        if not 0.0 < self.contrast_r <= 0.5:
            raise ValueError("contrast_r must be in (0, 0.5]")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.total_time <= 0 or self.dead_time < 0:
            raise ValueError("total_time must be > 0 and dead_time >= 0")


def projection_noise_sensitivity(
    basis: Basis,
    decoherence: DecoherenceModel,
    tau: float,
    consts: PhysicalConstants = PhysicalConstants(),
) -> float:
    """Quantum-projection-noise-limited sensitivity, T*sqrt(s).

        eta_min = 1 / (2*pi * dm_s * gamma * exp(-(tau/T2*)^2) * sqrt(tau))

    Diverges as tau -> 0 (no phase accumulation) and as the envelope dies;
    the minimum sits at tau = T2*/2.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    decay = float(decoherence.envelope(tau))
    return 1.0 / (
        2.0 * np.pi * basis.delta_ms * consts.gamma * decay * np.sqrt(tau)
    )


def optimal_tau(decoherence: DecoherenceModel) -> float:
    """Free-evolution time minimizing the projection-noise sensitivity:
    T2*/2 for the Gaussian envelope."""
    return decoherence.t2_star / 2.0


def calibration_curve(
    readout: ReadoutModel,
    basis: Basis,
    tau: float,
    b_z_grid: np.ndarray,
    consts: PhysicalConstants = PhysicalConstants(),
) -> np.ndarray:
    """Expected photon counts versus applied axial field,

        P(B_z) = alpha*(T/tau) * (1 + R*sin(2*pi*dm_s*gamma*B_z*tau + theta)).
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if readout.total_time <= tau:
        raise ValueError("total_time must exceed tau")
    b = np.asarray(b_z_grid, dtype=float)
    phase = 2.0 * np.pi * basis.delta_ms * consts.gamma * b * tau + readout.theta
    return (
        readout.alpha
        * (readout.total_time / tau)
        * (1.0 + readout.contrast_r * np.sin(phase))
    )


def shot_noise_sensitivity(
    readout: ReadoutModel,
    basis: Basis,
    tau: float,
    decoherence: DecoherenceModel | None = None,
    include_decay: bool = False,
    include_dead_time: bool = False,
    perfect_readout_floor: bool = False,
    consts: PhysicalConstants = PhysicalConstants(),
) -> float:
    """Photon-shot-noise-limited sensitivity, T*sqrt(s).

        eta_ph = 1 / (2*pi * dm_s * gamma * sqrt(tau)) * 1 / (R*sqrt(alpha))

    With ``include_decay`` the result is multiplied by exp((tau/T2*)^2),
    which makes eta_ph = eta_min/(R*sqrt(alpha)) hold exactly.  With
    ``include_dead_time`` it is scaled by sqrt((tau + dead)/tau) to account
    for preparation/readout overhead.  ``perfect_readout_floor`` clamps the
    result at the projection-noise limit, the physical floor the Poisson
    model cannot beat as R -> 1/2 and alpha -> infinity.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    base = 1.0 / (2.0 * np.pi * basis.delta_ms * consts.gamma * np.sqrt(tau))
    eta_min = base
    if include_decay:
        if decoherence is None:
            raise ValueError("include_decay requires a decoherence model")
        decay = float(decoherence.envelope(tau))
        base = base / decay
        eta_min = base
    eta = base / (readout.contrast_r * np.sqrt(readout.alpha))
    if include_dead_time:
        eta *= np.sqrt((tau + readout.dead_time) / tau)
    if perfect_readout_floor:
        eta = max(eta, eta_min)
    return eta


def simulate_photon_counts(expected, seed: int):
    """Poisson photon counts with the given expectation.

    Deterministic for a fixed seed; accepts scalars or arrays.
    """
    lam = np.asarray(expected, dtype=float)
    if np.any(lam < 0):
        raise ValueError("expected counts must be >= 0")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(lam)
    if np.ndim(expected) == 0:
        return int(counts)
    return counts


@dataclass(frozen=True)
class SensitivityReport:
    """Sensitivity summary at one operating point.

    ``eta_ph`` includes the decay factor, so
    eta_ph = eta_min/(R*sqrt(alpha)) holds between the two entries.
    """

    basis: Basis
    eta_min: float
    eta_ph: float
    optimal_tau: float
    t2_star: float
    tau: float
    alpha: float
    contrast_r: float

    def as_record(self) -> dict[str, object]:
        """Flat key-value record for serialization."""
        return {
            "basis": self.basis.value,
            "eta_min_T_sqrt_s": self.eta_min,
            "eta_ph_T_sqrt_s": self.eta_ph,
            "optimal_tau_s": self.optimal_tau,
            "t2_star_s": self.t2_star,
            "tau_s": self.tau,
            "alpha": self.alpha,
            "contrast_r": self.contrast_r,
        }


def compute_sensitivity_report(
    basis: Basis,
    decoherence: DecoherenceModel,
    readout: ReadoutModel,
    tau: float | None = None,
    consts: PhysicalConstants = PhysicalConstants(),
) -> SensitivityReport:
    """Evaluate both sensitivity limits, at the optimal tau by default."""
    t_opt = optimal_tau(decoherence)
    t_eval = t_opt if tau is None else tau
    eta_min = projection_noise_sensitivity(basis, decoherence, t_eval, consts)
    eta_ph = shot_noise_sensitivity(
        readout, basis, t_eval, decoherence, include_decay=True, consts=consts
    )
    return SensitivityReport(
        basis=basis,
        eta_min=eta_min,
        eta_ph=eta_ph,
        optimal_tau=t_opt,
        t2_star=decoherence.t2_star,
        tau=t_eval,
        alpha=readout.alpha,
        contrast_r=readout.contrast_r,
    )


def eta_to_nt_per_sqrt_hz(eta_t_sqrt_s: float, convention: str = "none") -> float:
    """Convert a sensitivity from T*sqrt(s) to nT/sqrt(Hz) for display.

    ``convention`` selects the sqrt(s) <-> 1/sqrt(Hz) factor: "sqrt2"
    multiplies by sqrt(2) (one-sided spectral density of a white error
    sequence), "inv_sqrt2" divides by it, "none" applies the bare 1e9
    rescaling.  The factor is exposed because published sensitivity figures
    use inconsistent conventions; raw T*sqrt(s) values are the stored
    ground truth.
    """
    factors = {"none": 1.0, "sqrt2": np.sqrt(2.0), "inv_sqrt2": 1.0 / np.sqrt(2.0)}
    if convention not in factors:
        raise ValueError(f"unknown convention {convention!r}")
    return eta_t_sqrt_s * factors[convention] * 1e9
