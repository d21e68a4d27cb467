"""Quantum-beats Ramsey magnetometry simulator for NV centers in diamond.

Simulates Ramsey interferometry on the spin-1 NV ground state in both the
conventional {0,1} basis and the quantum-beats {1,-1} basis, with the
analysis chain (fringe spectra, shared hyperfine fits, power spectral
densities, Allan deviation) and the sensitivity budgets needed to compare
the two.
"""

__version__ = "0.1.0"

from .spin_core import (
    EXACT,
    LINEARIZED,
    T_REF_C,
    EnvironmentState,
    MicrowaveDrive,
    PhysicalConstants,
    TransitionPair,
    beat_frequency,
    regime_check,
    transition_frequencies,
)
from .dynamics import (
    BrightDarkDecomposition,
    SpinState,
    evolve_lab_frame,
    evolve_rwa,
    free_evolution,
    lab_to_rotating,
    pi_pulse_duration,
    residual_population_perturbative,
    rotating_to_lab,
    rwa_propagator,
    selective_pi_duration,
    to_bright_dark,
)
from .protocol import (
    ANALYTIC,
    FULL_DYNAMICS,
    M_I_VALUES,
    Basis,
    DecoherenceModel,
    EnsembleSpec,
    MagneticFieldOU,
    RamseyConfig,
    TemperatureDrift,
    TimeSeriesResult,
    Trace,
    WeakDriveError,
    dephasing_ratio_experiment,
    ensemble_average,
    ramsey_signal_analytic,
    run_ramsey,
    run_time_series,
)
from .sensitivity import (
    ReadoutModel,
    SensitivityReport,
    calibration_curve,
    compute_sensitivity_report,
    eta_to_nt_per_sqrt_hz,
    optimal_tau,
    projection_noise_sensitivity,
    shot_noise_sensitivity,
    simulate_photon_counts,
)
from .analysis import (
    AllanCurve,
    HyperfineFitModel,
    OperatingPoint,
    PeakFit,
    Spectrum,
    allan_deviation,
    field_estimate_from_counts,
    fringe_spectrum,
    gaussian_peak_fit,
    hyperfine_global_fit,
    peak_frequency,
    power_spectral_density,
)
from .fitting import FitError
