"""Coherent dynamics of the spin-1 ground state.

The state lives in the {|+1>, |0>, |-1>} basis.  Rotating-frame evolution
uses the exact matrix exponential of the time-independent rotating-frame
Hamiltonian; lab-frame evolution integrates the explicitly time-dependent
Hamiltonian with a fixed-step fourth-order commutator-free Magnus scheme,
which is unitary at every step.

Drive normalization: ``rabi_frequency`` is the observed on-resonance Rabi
frequency of the |0> <-> |bright> transition, so a resonant pi pulse lasts
1/(2*rabi_frequency).  The lab-frame cosine amplitude on each of the two
single-quantum transitions is then rabi_frequency/sqrt(2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .spin_core import MicrowaveDrive, TransitionPair

__all__ = [
    "SpinState",
    "BrightDarkDecomposition",
    "to_bright_dark",
    "free_evolution",
    "rwa_propagator",
    "evolve_rwa",
    "evolve_lab_frame",
    "lab_to_rotating",
    "rotating_to_lab",
    "pi_pulse_duration",
    "selective_pi_duration",
    "residual_population_perturbative",
]

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SpinState:
    """Complex amplitudes over {|+1>, |0>, |-1>}."""

    amp_plus: complex
    amp_zero: complex
    amp_minus: complex

    @classmethod
    def zero(cls) -> "SpinState":
        return cls(0.0, 1.0, 0.0)

    @classmethod
    def plus_one(cls) -> "SpinState":
        return cls(1.0, 0.0, 0.0)

    @classmethod
    def minus_one(cls) -> "SpinState":
        return cls(0.0, 0.0, 1.0)

    @classmethod
    def bright(cls) -> "SpinState":
        return cls(1.0 / _SQRT2, 0.0, 1.0 / _SQRT2)

    @classmethod
    def dark(cls) -> "SpinState":
        return cls(1.0 / _SQRT2, 0.0, -1.0 / _SQRT2)

    @classmethod
    def from_array(cls, vec: np.ndarray) -> "SpinState":
        return cls(complex(vec[0]), complex(vec[1]), complex(vec[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.amp_plus, self.amp_zero, self.amp_minus], dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def populations(self) -> tuple[float, float, float]:
        """(pop_plus, pop_zero, pop_minus)."""
        v = self.as_array()
        p = np.abs(v) ** 2
        return float(p[0]), float(p[1]), float(p[2])

    def normalized(self) -> "SpinState":
        return SpinState.from_array(self.as_array() / self.norm)


@dataclass(frozen=True)
class BrightDarkDecomposition:
    """Populations in the {|0>, |B>, |D>} basis plus the B-D relative phase.

    |B> = (|+1> + |-1>)/sqrt(2) couples to a single-tone drive, the
    orthogonal |D> = (|+1> - |-1>)/sqrt(2) does not.
    """

    pop_zero: float
    pop_bright: float
    pop_dark: float
    phase_bright_dark: float


def to_bright_dark(state: SpinState) -> BrightDarkDecomposition:
    """Decompose a normalized state onto {|0>, |B>, |D>}.

    ``phase_bright_dark`` is arg(c_B * conj(c_D)), defined as 0 when either
    amplitude vanishes.
    """
    c_b = (state.amp_plus + state.amp_minus) / _SQRT2
    c_d = (state.amp_plus - state.amp_minus) / _SQRT2
    phase = 0.0
    if abs(c_b) > 1e-12 and abs(c_d) > 1e-12:
        phase = float(np.angle(c_b * np.conj(c_d)))
    return BrightDarkDecomposition(
        pop_zero=abs(state.amp_zero) ** 2,
        pop_bright=abs(c_b) ** 2,
        pop_dark=abs(c_d) ** 2,
        phase_bright_dark=phase,
    )


def _rwa_hamiltonian(drive: MicrowaveDrive, pair: TransitionPair) -> np.ndarray:
    """Rotating-frame Hamiltonian (Hz) in the {|+1>, |0>, |-1>} basis.

    The |+-1> amplitudes carry the e^{2*pi*i*f*t} rotating-frame phase;
    |0> is the frame anchor.  The 0<->bright coupling element equals
    -rabi_frequency/2.
    """
    kappa = drive.rabi_frequency / (2.0 * _SQRT2)
    c = -kappa * np.exp(-1j * drive.phase)
    h = np.array(
        [
            [pair.nu_plus - drive.frequency, c, 0.0],
            [np.conj(c), 0.0, np.conj(c)],
            [0.0, c, pair.nu_minus - drive.frequency],
        ],
        dtype=complex,
    )
    return h


def free_evolution(
    state: SpinState, pair: TransitionPair, frame_frequency: float, duration: float
) -> SpinState:
    """Drive-free evolution in the rotating frame at ``frame_frequency``.

    Exact: the |+-1> amplitudes acquire phases e^{-2*pi*i*(nu_+- - f)*tau}.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    phases = np.exp(
        -2j
        * np.pi
        * np.array(
            [pair.nu_plus - frame_frequency, 0.0, pair.nu_minus - frame_frequency]
        )
        * duration
    )
    return SpinState.from_array(state.as_array() * phases)


def rwa_propagator(
    drive: MicrowaveDrive, pair: TransitionPair, duration: float
) -> np.ndarray:
    """Unitary propagator of the rotating-wave Hamiltonian over ``duration``.

    Computed exactly by eigendecomposition of the 3x3 Hermitian generator.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    h = _rwa_hamiltonian(drive, pair)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-2j * np.pi * w * duration)) @ v.conj().T


def evolve_rwa(
    state: SpinState,
    drive: MicrowaveDrive,
    pair: TransitionPair,
    duration: float,
) -> SpinState:
    """Evolve under the rotating-wave Hamiltonian for ``duration`` seconds.

    The generator is time independent, so the propagator is exact (no time
    stepping).  Returns the state in the rotating frame of the drive.
    """
    if duration == 0:
        return state
    return SpinState.from_array(rwa_propagator(drive, pair, duration) @ state.as_array())


# Gauss nodes and weights of the two-exponential fourth-order
# commutator-free Magnus integrator.
_CF4_C1 = 0.5 - np.sqrt(3.0) / 6.0
_CF4_C2 = 0.5 + np.sqrt(3.0) / 6.0
_CF4_A1 = 0.25 + np.sqrt(3.0) / 6.0
_CF4_A2 = 0.25 - np.sqrt(3.0) / 6.0


def evolve_lab_frame(
    state: SpinState,
    drive: MicrowaveDrive,
    pair: TransitionPair,
    duration: float,
    step: float,
    start_time: float = 0.0,
) -> SpinState:
    """Integrate the lab-frame Schroedinger equation with the full
    -Omega*cos(2*pi*f*t) drive term.

    Uses a fixed-step fourth-order commutator-free Magnus integrator (two
    matrix exponentials per step), so the propagation is unitary at every
    step and the norm drift over a pi-pulse-length run stays at rounding
    level.  ``step`` must resolve the carrier: step <= 1/(100*max(f, nu_+-)).
    ``start_time`` sets the carrier phase reference of the pulse window.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    f_max = max(drive.frequency, pair.nu_plus, pair.nu_minus)
    if step > 1.0 / (100.0 * f_max):
        raise ValueError(
            f"step {step:g} s too coarse; need <= {1.0 / (100.0 * f_max):g} s "
            f"(1/(100*max carrier frequency))"
        )
    if duration == 0:
        return state

    n_steps = int(np.ceil(duration / step))
    h = duration / n_steps
    lam = drive.rabi_frequency / _SQRT2  # per-transition cosine amplitude

    # Drive samples at the two Gauss nodes of every step.
    k = np.arange(n_steps)
    t1 = start_time + (k + _CF4_C1) * h
    t2 = start_time + (k + _CF4_C2) * h
    c1 = -lam * np.cos(2.0 * np.pi * drive.frequency * t1 + drive.phase)
    c2 = -lam * np.cos(2.0 * np.pi * drive.frequency * t2 + drive.phase)

    # Two effective Hamiltonians per step; batch the eigendecompositions.
    diag = np.array([pair.nu_plus, 0.0, pair.nu_minus])
    hams = np.zeros((2 * n_steps, 3, 3))
    cc = np.empty((2, n_steps))
    cc[0] = _CF4_A1 * c1 + _CF4_A2 * c2  # first exponential of each step
    cc[1] = _CF4_A2 * c1 + _CF4_A1 * c2  # second exponential
    for j in (0, 1):
        blk = hams[j::2]
        blk[:, 0, 0] = diag[0]
        blk[:, 2, 2] = diag[2]
        blk[:, 0, 1] = blk[:, 1, 0] = cc[j]
        blk[:, 1, 2] = blk[:, 2, 1] = cc[j]

    w, v = np.linalg.eigh(hams)
    phases = np.exp(-2j * np.pi * w * h)
    props = np.einsum("nij,nj,nkj->nik", v, phases, v.conj())

    psi = state.as_array()
    for n in range(n_steps):
        psi = props[2 * n] @ psi
        psi = props[2 * n + 1] @ psi
    return SpinState.from_array(psi)


def lab_to_rotating(state: SpinState, frequency: float, t: float) -> SpinState:
    """Map lab-frame amplitudes to the rotating frame at time ``t``.

    The |+-1> amplitudes are multiplied by e^{+2*pi*i*f*t}; |0> is shared
    between the frames.  Inverse of :func:`rotating_to_lab`.
    """
    phase = np.exp(2j * np.pi * frequency * t)
    return SpinState(state.amp_plus * phase, state.amp_zero, state.amp_minus * phase)


def rotating_to_lab(state: SpinState, frequency: float, t: float) -> SpinState:
    """Map rotating-frame amplitudes back to the lab frame at time ``t``."""
    phase = np.exp(-2j * np.pi * frequency * t)
    return SpinState(state.amp_plus * phase, state.amp_zero, state.amp_minus * phase)


def pi_pulse_duration(rabi_frequency: float) -> float:
    """Duration of a resonant |0> -> |bright> pi pulse: 1/(2*Omega)."""
    return 1.0 / (2.0 * rabi_frequency)


def selective_pi_duration(rabi_frequency: float) -> float:
    """Duration of a resonant two-level pi pulse on a single transition.

    Addressing only 0 <-> +1 (the other level far detuned), the two-level
    Rabi frequency is rabi_frequency/sqrt(2), so the pi time is
    sqrt(2)/(2*Omega).
    """
    return _SQRT2 / (2.0 * rabi_frequency)


def residual_population_perturbative(
    pair: TransitionPair, drive: MicrowaveDrive
) -> float:
    """Perturbative estimate of the |0> population left by a nominal pi pulse.

    Returns (nu_+ - nu_-)^4 / (4*Omega_R^4) with the dressed Rabi frequency
    Omega_R = sqrt(Omega^2 + (nu_+ + nu_- - 2f)^2 / 4).  Used as a figure of
    merit for how strongly an imperfect pi pulse re-admits the single-level
    coherence.  Warns when Omega_R is not at least 5x the splitting, where
    the estimate loses meaning.
    """
    detuning = pair.nu_plus + pair.nu_minus - 2.0 * drive.frequency
    omega_r = np.hypot(drive.rabi_frequency, 0.5 * detuning)
    splitting = abs(pair.splitting)
    if splitting > 0 and omega_r / splitting < 5.0:
        warnings.warn(
            "drive is not strong against the level splitting; the "
            "perturbative residual-population estimate is unreliable",
            stacklevel=2,
        )
    return splitting**4 / (4.0 * omega_r**4)
