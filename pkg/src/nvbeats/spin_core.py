"""Ground-state level structure of the NV center electron spin.

Physical constants, environment and microwave-drive descriptions, and the
closed-form frequencies of the m_s = 0 <-> +/-1 transitions.  All energies
are expressed as frequencies in Hz (the Hamiltonian is H/h throughout the
package) and magnetic fields in tesla.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "T_REF_C",
    "LINEARIZED",
    "EXACT",
    "PhysicalConstants",
    "EnvironmentState",
    "MicrowaveDrive",
    "TransitionPair",
    "transition_frequencies",
    "beat_frequency",
    "regime_check",
]

# Reference temperature at which the zero-field splitting takes its nominal
# value.  Only the slope dD/dT is experimentally constrained, so the anchor
# point is a convention.
T_REF_C = 25.0

LINEARIZED = "linearized"
EXACT = "exact"

# Ratio used to decide "much larger / much smaller" in regime checks.
_REGIME_RATIO = 10.0


@dataclass(frozen=True)
class PhysicalConstants:
    """NV ground-state constants (frequencies in Hz, fields in tesla).

    Attributes
    ----------
    d_0 : float
        Zero-field splitting at ``T_REF_C``, Hz.
    g_e : float
        Electron g-factor, dimensionless.
    mu_b : float
        Bohr magneton, Hz/T.
    a_parallel : float
        Parallel hyperfine coefficient of the 14N nucleus, Hz.
    a_perp : float
        Perpendicular hyperfine coefficient, Hz.
    dd_dt : float
        Temperature slope of the zero-field splitting, Hz per deg C.
    """

    d_0: float = 2.870e9
    g_e: float = 2.003
    mu_b: float = 13.996e9
    a_parallel: float = -2.16e6
    a_perp: float = -2.7e6
    dd_dt: float = -78e3

    @property
    def gamma(self) -> float:
        """Electron gyromagnetic ratio g_e * mu_B, Hz/T (about 28.034 GHz/T)."""
        return self.g_e * self.mu_b

    def zero_field_splitting(self, temperature_c: float) -> float:
        """D(T) = D_0 + dD/dT * (T - T_ref), Hz."""
        return self.d_0 + self.dd_dt * (temperature_c - T_REF_C)


# Weak-field guard: two orders of magnitude below D/gamma (~0.1 T).
_MAX_FIELD_T = 0.01


@dataclass(frozen=True)
class EnvironmentState:
    """Static environment seen by one NV center.

    Fields are in tesla, strain products in Hz, temperature in deg C.  The
    strain enters only through the products d_parallel*eps_z and
    d_perp*eps_perp (``axial_strain`` and ``transverse_strain``), which is
    how the level formulas consume it.  ``m_i`` is the nuclear-spin
    projection treated as a static classical label.
    """

    b_z: float = 0.0
    b_perp: float = 0.0
    axial_strain: float = 0.0
    transverse_strain: float = 0.0
    temperature: float = T_REF_C
    m_i: int = 0

    def __post_init__(self) -> None:
        if abs(self.b_z) >= _MAX_FIELD_T or abs(self.b_perp) >= _MAX_FIELD_T:
            raise ValueError(
                f"field out of the weak-field regime (|B| must stay below "
                f"{_MAX_FIELD_T} T): b_z={self.b_z}, b_perp={self.b_perp}"
            )
        if self.transverse_strain < 0:
            raise ValueError("transverse_strain must be >= 0 (only its square enters)")
        if self.m_i not in (-1, 0, 1):
            raise ValueError(f"m_i must be -1, 0 or +1, got {self.m_i}")

    def axial_splitting(self, consts: PhysicalConstants) -> float:
        """gamma*B_z + A_parallel*m_I, Hz: half the field-dependent splitting."""
        return consts.gamma * self.b_z + consts.a_parallel * self.m_i


@dataclass(frozen=True)
class MicrowaveDrive:
    """Single-tone microwave drive.

    ``rabi_frequency`` is the on-resonance population-transfer Rabi
    frequency between |0> and the bright superposition of |+-1>, i.e. a
    resonant pi pulse lasts 1/(2*rabi_frequency).  ``phase`` is the carrier
    phase in radians; both Ramsey pulses share it, which is what makes the
    second pulse phase-coherent with the first.
    """

    frequency: float
    rabi_frequency: float
    phase: float = 0.0
    duration: float = 0.0

    def __post_init__(self) -> None:
        if self.rabi_frequency <= 0:
            raise ValueError("rabi_frequency must be > 0")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class TransitionPair:
    """Frequencies of the 0 -> +1 and 0 -> -1 transitions, Hz."""

    nu_plus: float
    nu_minus: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.nu_plus + self.nu_minus)

    @property
    def splitting(self) -> float:
        return self.nu_plus - self.nu_minus


def transition_frequencies(
    env: EnvironmentState,
    consts: PhysicalConstants = PhysicalConstants(),
    mode: str = LINEARIZED,
) -> TransitionPair:
    """Transition frequencies nu_+- of the two single-quantum lines.

    In ``linearized`` mode,

        nu_+- = D(T) + axial_strain +- (gamma*B_z + A_par*m_I),

    valid when the transverse strain is small against the axial splitting.
    ``exact`` mode keeps the transverse-strain mixing of the |+-1> levels,

        nu_+- = D(T) + axial_strain
                +- sqrt((gamma*B_z + A_par*m_I)^2 + transverse_strain^2),

    which reduces to the linearized form as transverse_strain -> 0.
    """
    if mode not in (LINEARIZED, EXACT):
        raise ValueError(f"mode must be '{LINEARIZED}' or '{EXACT}', got {mode!r}")
    center = consts.zero_field_splitting(env.temperature) + env.axial_strain
    axial = env.axial_splitting(consts)
    if mode == LINEARIZED:
        half = axial
    else:
        half = np.hypot(axial, env.transverse_strain)
    return TransitionPair(nu_plus=center + half, nu_minus=center - half)


def beat_frequency(
    env: EnvironmentState, consts: PhysicalConstants = PhysicalConstants()
) -> float:
    """Quantum-beat frequency nu_+ - nu_- = 2*(gamma*B_z + A_par*m_I), Hz.

    Computed directly from the axial splitting so the result is bit-exact
    independent of temperature, D_0 and axial strain.  Sign is preserved.
    Warns when the linearized regime assumption (axial splitting much
    larger than the transverse strain) does not hold.
    """
    axial = env.axial_splitting(consts)
    if abs(axial) < _REGIME_RATIO * env.transverse_strain:
        warnings.warn(
            "axial splitting is not large against the transverse strain; "
            "the linearized beat frequency may be inaccurate",
            stacklevel=2,
        )
    return 2.0 * axial


#: Names of the validity conditions evaluated by :func:`regime_check`.
WEAK_FIELD = "weak_field"
TRANSVERSE_ZEEMAN = "transverse_zeeman"
TRANSVERSE_STRAIN = "transverse_strain"


def regime_check(
    env: EnvironmentState, consts: PhysicalConstants = PhysicalConstants()
) -> list[str]:
    """Evaluate the validity conditions of the linearized level formulas.

    The three conditions, with "much larger" implemented as a factor of
    ten, are

    1. ``weak_field``: |B| << D/gamma,
    2. ``transverse_zeeman``: |gamma*B_z + A_par*m_I| >>
       (gamma*B_perp + A_perp*m_I)^2 / D,
    3. ``transverse_strain``: |gamma*B_z + A_par*m_I| >> transverse_strain.

    Returns the names of the violated conditions (empty when all hold).
    These are advisory: callers decide whether to warn or abort.
    """
    violated = []
    d_t = consts.zero_field_splitting(env.temperature)
    axial = abs(env.axial_splitting(consts))

    b_total = np.hypot(env.b_z, env.b_perp)
    if d_t / consts.gamma < _REGIME_RATIO * b_total:
        violated.append(WEAK_FIELD)

    transverse = consts.gamma * env.b_perp + consts.a_perp * env.m_i
    if axial < _REGIME_RATIO * transverse**2 / d_t:
        violated.append(TRANSVERSE_ZEEMAN)

    if axial < _REGIME_RATIO * env.transverse_strain:
        violated.append(TRANSVERSE_STRAIN)

    return violated
