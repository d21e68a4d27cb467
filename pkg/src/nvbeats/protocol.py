"""Ramsey measurement protocols in the {0,1} and {1,-1} bases.

Analytic fringe models, the pulse-level simulation of the two-pulse
sequence, strain-ensemble averaging, long time series under injected
temperature and magnetic noise, and the Monte-Carlo dephasing-time ratio
experiment for slow versus fast field noise.

Traces are normalized fluorescence probabilities in [0, 1] with full
contrast at tau = 0; physical photon counts enter only through the readout
model in :func:`run_time_series`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from . import dynamics
from .spin_core import (
    EXACT,
    LINEARIZED,
    EnvironmentState,
    MicrowaveDrive,
    PhysicalConstants,
    TransitionPair,
    transition_frequencies,
)

if TYPE_CHECKING:
    from .sensitivity import ReadoutModel

__all__ = [
    "Basis",
    "DecoherenceModel",
    "RamseyConfig",
    "Trace",
    "TemperatureDrift",
    "MagneticFieldOU",
    "EnsembleSpec",
    "TimeSeriesResult",
    "WeakDriveError",
    "ANALYTIC",
    "FULL_DYNAMICS",
    "M_I_VALUES",
    "ramsey_signal_analytic",
    "run_ramsey",
    "ensemble_average",
    "run_time_series",
    "dephasing_ratio_experiment",
]

ANALYTIC = "analytic"
FULL_DYNAMICS = "full_dynamics"

#: Nuclear projections in the order used by hyperfine weight vectors.
M_I_VALUES = (-1, 0, 1)


class WeakDriveError(RuntimeError):
    """The drive cannot support the requested pulse sequence."""


class Basis(Enum):
    """Interferometer level pair."""

    ZERO_ONE = "zero_one"
    ONE_MINUSONE = "one_minusone"

    @property
    def delta_ms(self) -> int:
        """Magnetic quantum number difference of the two levels (1 or 2)."""
        return 1 if self is Basis.ZERO_ONE else 2


@dataclass(frozen=True)
class DecoherenceModel:
    """Gaussian fringe envelope exp(-(tau/T2*)^2)."""

    t2_star: float
    envelope_shape: str = "gaussian"

    def __post_init__(self) -> None:
        if self.t2_star <= 0:
            raise ValueError("t2_star must be > 0")
        if self.envelope_shape != "gaussian":
            raise ValueError(f"unsupported envelope shape {self.envelope_shape!r}")

    def envelope(self, tau):
        return np.exp(-((np.asarray(tau, dtype=float) / self.t2_star) ** 2))


@dataclass(frozen=True)
class RamseyConfig:
    """Configuration of one Ramsey fringe measurement.

    ``hyperfine_weights`` are the populations of the nuclear projections in
    the order m_I = (-1, 0, +1); the nuclear spin is a static classical
    label averaged incoherently.  ``env.m_i`` is ignored by protocol runs
    (the weight loop supplies it).
    """

    basis: Basis
    env: EnvironmentState
    drive: MicrowaveDrive
    decoherence: DecoherenceModel
    tau_grid: np.ndarray
    hyperfine_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    simulation_mode: str = ANALYTIC

    def __post_init__(self) -> None:
        grid = np.atleast_1d(np.asarray(self.tau_grid, dtype=float))
        if np.any(grid < 0):
            raise ValueError("tau_grid entries must be >= 0")
        object.__setattr__(self, "tau_grid", grid)
        w = self.hyperfine_weights
        if len(w) != 3 or any(x < 0 for x in w):
            raise ValueError("hyperfine_weights must be three non-negative numbers")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError("hyperfine_weights must sum to 1")
        if self.simulation_mode not in (ANALYTIC, FULL_DYNAMICS):
            raise ValueError(f"unknown simulation_mode {self.simulation_mode!r}")


@dataclass(frozen=True)
class Trace:
    """Fringe trace: normalized fluorescence versus free-evolution time."""

    tau: np.ndarray
    p: np.ndarray


def _member_envs(config: RamseyConfig):
    """(m_i, weight, env) triples for the nuclear projections in play."""
    for m_i, w in zip(M_I_VALUES, config.hyperfine_weights):
        if w > 0:
            yield m_i, w, replace(config.env, m_i=m_i)


def _analytic_component_frequency(
    basis: Basis,
    env: EnvironmentState,
    drive_frequency: float,
    consts: PhysicalConstants,
) -> float:
    """Fringe frequency of one nuclear projection in the analytic model.

    {1,-1}: the quantum-beat frequency 2*(gamma*B_z + A_par*m_I), computed
    from the axial splitting alone so it is bit-exact independent of
    temperature, D_0 and axial strain.  {0,1}: the detuning nu_+ - f of the
    addressed transition, which inherits the full temperature and strain
    dependence.
    """
    if basis is Basis.ONE_MINUSONE:
        return 2.0 * env.axial_splitting(consts)
    pair = transition_frequencies(env, consts, LINEARIZED)
    return pair.nu_plus - drive_frequency


def ramsey_signal_analytic(
    config: RamseyConfig, consts: PhysicalConstants = PhysicalConstants()
) -> Trace:
    """Closed-form Ramsey fringes.

    Each nuclear projection contributes (1 + F(tau)*cos(2*pi*f_i*tau))/2
    with its own fringe frequency; the trace is the hyperfine-weighted
    mean, normalized to [0, 1] with P(0) = 1.
    """
    tau = config.tau_grid
    envelope = config.decoherence.envelope(tau)
    p = np.zeros_like(tau)
    for _, w, env in _member_envs(config):
        f_i = _analytic_component_frequency(
            config.basis, env, config.drive.frequency, consts
        )
        p += w * 0.5 * (1.0 + envelope * np.cos(2.0 * np.pi * f_i * tau))
    return Trace(tau=tau.copy(), p=p)


# Pulse-quality thresholds for the full-dynamics path.
_RESIDUAL_FLAG = 1e-2
# Spectator detuning, in units of the Rabi frequency, used to emulate the
# selective addressing of a single transition in the {0,1} sequence.
_ISOLATION_FACTOR = 1e3


def _pulse_setup(
    config: RamseyConfig, pair: TransitionPair
) -> tuple[TransitionPair, float]:
    """Transition pair seen by the pulses and the per-pulse duration."""
    drive = config.drive
    if config.basis is Basis.ONE_MINUSONE:
        residual = dynamics.residual_population_perturbative(pair, drive)
        if residual > _RESIDUAL_FLAG:
            raise WeakDriveError(
                f"pi pulse too weak: perturbative residual |0> population "
                f"{residual:.2e} exceeds {_RESIDUAL_FLAG:g}; increase the Rabi "
                f"frequency or reduce the level splitting"
            )
        return pair, dynamics.pi_pulse_duration(drive.rabi_frequency)

    # {0,1}: drive only the upper transition; push the spectator level far
    # out, standing in for the large-bias selective addressing of the
    # experiment.  The fringe depends only on nu_+ - f, which is kept exact.
    detuned = TransitionPair(
        nu_plus=pair.nu_plus,
        nu_minus=drive.frequency - _ISOLATION_FACTOR * drive.rabi_frequency,
    )
    two_level_rabi = drive.rabi_frequency / np.sqrt(2.0)
    leak = two_level_rabi**2 / (
        two_level_rabi**2 + (detuned.nu_minus - drive.frequency) ** 2
    )
    if leak > _RESIDUAL_FLAG:
        raise WeakDriveError(
            f"spectator-level leakage estimate {leak:.2e} exceeds "
            f"{_RESIDUAL_FLAG:g}"
        )
    return detuned, 0.5 * dynamics.selective_pi_duration(drive.rabi_frequency)


def run_ramsey(
    config: RamseyConfig, consts: PhysicalConstants = PhysicalConstants()
) -> Trace:
    """Pulse-level simulation of the two-pulse Ramsey sequence.

    For every nuclear projection and every tau: start in |0>, apply the
    first pulse (pi in the {1,-1} basis, pi/2 in {0,1}), free-evolve in the
    drive's rotating frame, apply the second, phase-coherent pulse, and
    read the |0> population.  The Gaussian decoherence envelope multiplies
    the oscillatory part and the trace is hyperfine averaged.

    Raises :class:`WeakDriveError` when the drive is too weak for a clean
    pulse (perturbative residual above 1e-2) instead of silently returning
    biased fringes.
    """
    if config.simulation_mode != FULL_DYNAMICS:
        raise ValueError("run_ramsey requires simulation_mode == 'full_dynamics'")
    tau = config.tau_grid
    drive = config.drive
    envelope = config.decoherence.envelope(tau)
    p = np.zeros_like(tau)
    e_zero = dynamics.SpinState.zero().as_array()

    for _, w, env in _member_envs(config):
        pair = transition_frequencies(env, consts, EXACT)
        pair_dyn, t_pulse = _pulse_setup(config, pair)
        u1 = dynamics.rwa_propagator(drive, pair_dyn, t_pulse)
        if config.basis is Basis.ONE_MINUSONE:
            # pi + pi compose to 2*pi at tau = 0: bright fringe by itself
            u2 = u1
        else:
            # readout half-pulse with inverted carrier phase, so the
            # zero-delay point sits on the bright fringe as in the analytic
            # (1 + cos)/2 convention
            u2 = dynamics.rwa_propagator(
                replace(drive, phase=drive.phase + np.pi), pair_dyn, t_pulse
            )

        psi1 = u1 @ e_zero
        detunings = np.array(
            [
                pair_dyn.nu_plus - drive.frequency,
                0.0,
                pair_dyn.nu_minus - drive.frequency,
            ]
        )
        phases = np.exp(-2j * np.pi * np.outer(tau, detunings))
        psi3 = (phases * psi1[None, :]) @ u2.T
        p_raw = np.abs(psi3[:, 1]) ** 2
        p += w * (0.5 + envelope * (p_raw - 0.5))
    return Trace(tau=tau.copy(), p=p)


@dataclass(frozen=True)
class EnsembleSpec:
    """Inhomogeneous NV ensemble under a [100]-oriented bias field.

    Member axial strains are drawn from a centered normal distribution of
    standard deviation ``axial_strain_sigma``.  A bias field along [100]
    makes the same angle with all four NV orientations, so every member
    sees the axial projection |B|/sqrt(3) and the orientation average
    collapses; the equal orientation weights are kept for the record.
    """

    axial_strain_sigma: float
    member_count: int
    bias_field_magnitude: float
    bias_field_direction: str = "crystal_100"
    orientation_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self) -> None:
        if self.member_count < 1:
            raise ValueError("member_count must be >= 1")
        if self.axial_strain_sigma < 0:
            raise ValueError("axial_strain_sigma must be >= 0")
        if self.bias_field_direction != "crystal_100":
            raise ValueError("only the [100] bias direction is supported")
        if len(self.orientation_weights) != 4 or any(
            abs(w - 0.25) > 1e-12 for w in self.orientation_weights
        ):
            raise ValueError("orientation_weights must be four equal weights of 1/4")


def ensemble_average(
    config: RamseyConfig,
    spec: EnsembleSpec,
    seed: int,
    consts: PhysicalConstants = PhysicalConstants(),
) -> Trace:
    """Average the configured Ramsey trace over a strain-broadened ensemble.

    Draws ``member_count`` axial-strain offsets, assigns every member the
    [100] axial field projection, and averages the member traces.
    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, spec.axial_strain_sigma, spec.member_count)
    b_axial = spec.bias_field_magnitude / np.sqrt(3.0)

    total = np.zeros_like(config.tau_grid)
    for off in offsets:
        env_m = replace(
            config.env, axial_strain=config.env.axial_strain + off, b_z=b_axial
        )
        cfg_m = replace(config, env=env_m)
        if config.simulation_mode == FULL_DYNAMICS:
            member = run_ramsey(cfg_m, consts)
        else:
            member = ramsey_signal_analytic(cfg_m, consts)
        total += member.p
    return Trace(tau=config.tau_grid.copy(), p=total / spec.member_count)


@dataclass(frozen=True)
class TemperatureDrift:
    """Temperature offset process (deg C) sampled on the wall-time grid.

    The offset is profile(t) + white noise + random walk; unused parts
    default to zero.  ``profile`` covers deterministic drifts such as a
    mid-series step.
    """

    white_sigma: float = 0.0
    walk_sigma: float = 0.0
    profile: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.white_sigma < 0 or self.walk_sigma < 0:
            raise ValueError("noise amplitudes must be >= 0")

    def sample(self, times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros_like(times)
        if self.profile is not None:
            out = out + np.asarray(self.profile(times), dtype=float)
        if self.white_sigma > 0:
            out = out + rng.normal(0.0, self.white_sigma, len(times))
        if self.walk_sigma > 0:
            out = out + np.cumsum(rng.normal(0.0, self.walk_sigma, len(times)))
        return out


@dataclass(frozen=True)
class MagneticFieldOU:
    """Ornstein-Uhlenbeck axial-field noise (tesla).

    Stationary process with standard deviation ``rms_amplitude`` and
    exponential autocorrelation time ``correlation_time``; sampled with the
    exact discrete update, so any sampling interval is valid.
    """

    correlation_time: float
    rms_amplitude: float

    def __post_init__(self) -> None:
        if self.correlation_time <= 0:
            raise ValueError("correlation_time must be > 0")
        if self.rms_amplitude < 0:
            raise ValueError("rms_amplitude must be >= 0")

    def sample(self, times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        n = len(times)
        out = np.empty(n)
        if n == 0:
            return out
        dt = times[1] - times[0] if n > 1 else self.correlation_time
        rho = np.exp(-dt / self.correlation_time)
        q = self.rms_amplitude * np.sqrt(1.0 - rho**2)
        x = rng.standard_normal(n)
        out[0] = self.rms_amplitude * x[0]
        for k in range(1, n):
            out[k] = rho * out[k - 1] + q * x[k]
        return out


@dataclass(frozen=True)
class TimeSeriesResult:
    """Fixed-tau monitoring run: counts and the inferred axial field."""

    times: np.ndarray
    counts: np.ndarray
    inferred_field: np.ndarray
    true_field: np.ndarray
    true_temperature: np.ndarray


def _signal_at_fixed_tau(
    config: RamseyConfig,
    tau: float,
    b_z: np.ndarray,
    temperature: np.ndarray,
    consts: PhysicalConstants,
) -> np.ndarray:
    """Analytic fringe value at one tau for arrays of environments."""
    envelope = float(config.decoherence.envelope(tau))
    p = np.zeros_like(b_z)
    for m_i, w in zip(M_I_VALUES, config.hyperfine_weights):
        if w == 0:
            continue
        axial = consts.gamma * b_z + consts.a_parallel * m_i
        if config.basis is Basis.ONE_MINUSONE:
            f_i = 2.0 * axial
        else:
            nu_plus = (
                consts.zero_field_splitting(temperature)
                + config.env.axial_strain
                + axial
            )
            f_i = nu_plus - config.drive.frequency
        p += w * 0.5 * (1.0 + envelope * np.cos(2.0 * np.pi * f_i * tau))
    return p


def run_time_series(
    config: RamseyConfig,
    noise: Sequence[TemperatureDrift | MagneticFieldOU],
    sample_interval: float,
    sample_count: int,
    readout: "ReadoutModel",
    seed: int,
    shot_noise: bool = True,
    include_dead_time: bool = False,
    consts: PhysicalConstants = PhysicalConstants(),
) -> TimeSeriesResult:
    """Repeated fixed-tau fluorescence measurement under injected noise.

    At every sample time the environment is evaluated under all noise
    processes, the fringe value is converted to expected photon counts for
    one sample interval via the readout model, Poisson counts are drawn
    (unless ``shot_noise`` is off), and the counts are inverted through the
    local calibration slope to an inferred axial field.  Deterministic
    under ``seed``.  Warns when the operating point sits near a fringe
    extremum, where the slope inversion degenerates.
    """
    if len(config.tau_grid) != 1:
        raise ValueError("run_time_series needs a config with a single fixed tau")
    tau = float(config.tau_grid[0])
    times = np.arange(sample_count) * sample_interval

    seeds = np.random.SeedSequence(seed).spawn(len(noise) + 1)
    d_temp = np.zeros(sample_count)
    d_field = np.zeros(sample_count)
    for proc, ss in zip(noise, seeds[:-1]):
        rng = np.random.default_rng(ss)
        if isinstance(proc, TemperatureDrift):
            d_temp += proc.sample(times, rng)
        elif isinstance(proc, MagneticFieldOU):
            d_field += proc.sample(times, rng)
        else:
            raise TypeError(f"unknown noise process {type(proc).__name__}")

    b_true = config.env.b_z + d_field
    t_true = config.env.temperature + d_temp
    p = _signal_at_fixed_tau(config, tau, b_true, t_true, consts)

    cycle = tau + readout.dead_time if include_dead_time else tau
    shots = sample_interval / cycle
    mean_counts = shots * readout.alpha * (
        1.0 + readout.contrast_r * (2.0 * p - 1.0)
    )

    # local calibration around the nominal environment
    db = 1e-4 / (config.basis.delta_ms * consts.gamma * tau)  # ~1e-4 fringe period
    p_plus = _signal_at_fixed_tau(
        config,
        tau,
        np.array([config.env.b_z + db]),
        np.array([config.env.temperature]),
        consts,
    )[0]
    p_minus = _signal_at_fixed_tau(
        config,
        tau,
        np.array([config.env.b_z - db]),
        np.array([config.env.temperature]),
        consts,
    )[0]
    p_center = _signal_at_fixed_tau(
        config,
        tau,
        np.array([config.env.b_z]),
        np.array([config.env.temperature]),
        consts,
    )[0]
    counts_center = shots * readout.alpha * (
        1.0 + readout.contrast_r * (2.0 * p_center - 1.0)
    )
    slope = (
        shots * readout.alpha * readout.contrast_r * (p_plus - p_minus) / db
    )
    max_slope = (
        shots
        * readout.alpha
        * readout.contrast_r
        * 2.0
        * np.pi
        * config.basis.delta_ms
        * consts.gamma
        * tau
    )
    if abs(slope) < 0.05 * max_slope:
        warnings.warn(
            "operating point is near a fringe extremum; the count-to-field "
            "inversion is ill conditioned there",
            stacklevel=2,
        )

    if shot_noise:
        rng_shot = np.random.default_rng(seeds[-1])
        counts = rng_shot.poisson(mean_counts).astype(float)
    else:
        counts = mean_counts

    inferred = config.env.b_z + (counts - counts_center) / slope
    return TimeSeriesResult(
        times=times,
        counts=counts,
        inferred_field=inferred,
        true_field=b_true,
        true_temperature=t_true,
    )


def dephasing_ratio_experiment(
    noise_correlation_time: float,
    t2_target: float,
    seed: int,
    noise_rms_field: float | None = None,
    n_paths: int = 8000,
    consts: PhysicalConstants = PhysicalConstants(),
) -> float | None:
    """Ratio of the fitted dephasing times T2*({0,1}) / T2*({1,-1}) under
    Ornstein-Uhlenbeck axial-field noise.

    The {0,1} coherence averages exp(i*phi) and the {1,-1} coherence
    exp(2i*phi) over the accumulated phase phi of Monte-Carlo noise paths;
    the decay times are the interpolated 1/e crossings of the two
    coherence magnitudes.  The correlation time must sit in the slow
    (>= 100 * t2_target) or fast (<= 0.01 * t2_target) regime; intermediate
    values are rejected.  ``noise_rms_field`` (tesla) overrides the noise
    amplitude otherwise calibrated to put the {0,1} decay near
    ``t2_target``; with zero amplitude there is no decay and the experiment
    returns None.
    """
    if noise_correlation_time <= 0 or t2_target <= 0:
        raise ValueError("times must be positive")
    regime = noise_correlation_time / t2_target
    if regime >= 100.0:
        sigma_nu = np.sqrt(2.0) / (2.0 * np.pi * t2_target)
        dt = t2_target / 200.0
    elif regime <= 0.01:
        sigma_nu = 1.0 / (2.0 * np.pi * np.sqrt(noise_correlation_time * t2_target))
        dt = noise_correlation_time / 10.0
    else:
        raise ValueError(
            "noise correlation time must be >= 100x or <= 0.01x the target "
            "dephasing time; intermediate regimes are not supported"
        )
    if noise_rms_field is not None:
        sigma_nu = consts.gamma * noise_rms_field
        if sigma_nu == 0.0:
            return None

    t_total = 3.0 * t2_target
    n_steps = int(np.ceil(t_total / dt))
    rho = np.exp(-dt / noise_correlation_time)
    q = np.sqrt(1.0 - rho**2)
    idx = np.unique(np.linspace(1, n_steps, 200).astype(int))
    taus = idx * dt

    rng = np.random.default_rng(seed)
    s1 = np.zeros(len(idx), dtype=complex)
    s2 = np.zeros(len(idx), dtype=complex)
    done = 0
    chunk = max(1, min(500, n_paths))
    while done < n_paths:
        m = min(chunk, n_paths - done)
        x = rng.standard_normal((m, n_steps + 1))
        nu = np.empty((m, n_steps + 1))
        nu[:, 0] = sigma_nu * x[:, 0]
        for k in range(1, n_steps + 1):
            nu[:, k] = rho * nu[:, k - 1] + sigma_nu * q * x[:, k]
        phi = 2.0 * np.pi * np.cumsum(nu[:, 1:] * dt, axis=1)
        ph = phi[:, idx - 1]
        s1 += np.exp(1j * ph).sum(axis=0)
        s2 += np.exp(2j * ph).sum(axis=0)
        done += m

    l1 = np.abs(s1) / n_paths
    l2 = np.abs(s2) / n_paths

    def time_to_1e(l_curve: np.ndarray) -> float | None:
        target = np.exp(-1.0)
        below = np.nonzero(l_curve < target)[0]
        if len(below) == 0:
            return None
        i = int(below[0])
        if i == 0:
            return float(taus[0])
        frac = (target - l_curve[i - 1]) / (l_curve[i] - l_curve[i - 1])
        return float(taus[i - 1] + frac * (taus[i] - taus[i - 1]))

    t_01 = time_to_1e(l1)
    t_1m1 = time_to_1e(l2)
    if t_01 is None or t_1m1 is None:
        return None
    return t_01 / t_1m1
