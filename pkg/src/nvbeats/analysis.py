"""Signal analysis for fringe traces and field time series.

Fringe spectra and Gaussian peak fits, the shared multi-temperature
three-cosine fringe fit, Welch power spectral densities, the two-sample
Allan deviation, and the linearized photon-count-to-field estimator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as _scipy_signal

from .fitting import FitError, levenberg_marquardt, scaled_condition_number
from .sensitivity import ReadoutModel
from .protocol import Basis
from .spin_core import PhysicalConstants

__all__ = [
    "Spectrum",
    "PeakFit",
    "HyperfineFitModel",
    "AllanCurve",
    "OperatingPoint",
    "fringe_spectrum",
    "peak_frequency",
    "gaussian_peak_fit",
    "hyperfine_global_fit",
    "power_spectral_density",
    "allan_deviation",
    "field_estimate_from_counts",
]


def _check_uniform(x: np.ndarray, what: str) -> float:
    """Return the grid step, rejecting non-uniform grids."""
    dx = np.diff(x)
    if len(dx) == 0:
        raise ValueError(f"{what} needs at least two samples")
    step = float(dx[0])
    if step <= 0 or not np.allclose(dx, step, rtol=1e-6, atol=abs(step) * 1e-9):
        raise ValueError(f"{what} must be a uniform, increasing grid")
    return step


@dataclass(frozen=True)
class Spectrum:
    """Magnitude spectrum on a uniform frequency grid."""

    frequencies: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self) -> None:
        if len(self.frequencies) != len(self.magnitudes):
            raise ValueError("frequency and magnitude arrays differ in length")
        _check_uniform(self.frequencies, "frequency grid")
        if np.any(self.magnitudes < 0):
            raise ValueError("magnitudes must be non-negative")


def fringe_spectrum(
    tau: np.ndarray, p: np.ndarray, zero_pad_factor: int = 1
) -> Spectrum:
    """Magnitude spectrum of a mean-subtracted Ramsey trace.

    The mean-subtracted trace is extended symmetrically about tau = 0
    before the transform (the trace is a phase-referenced cosine record, so
    the symmetric extension gives line shapes equal to the two-sided
    transform of the decay envelope instead of mixing in the dispersive
    part of the one-sided transform).  Zero padding, applied at large |tau|
    where the envelope has decayed, refines the frequency grid by
    ``zero_pad_factor``.
    """
    tau = np.asarray(tau, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(tau) < 16:
        raise ValueError("need at least 16 trace points")
    if len(tau) != len(p):
        raise ValueError("tau and p lengths differ")
    if zero_pad_factor < 1 or int(zero_pad_factor) != zero_pad_factor:
        raise ValueError("zero_pad_factor must be a positive integer")
    dtau = _check_uniform(tau, "tau grid")

    y = p - p.mean()
    n = len(y)
    m = int(zero_pad_factor) * (2 * n - 2)
    buf = np.zeros(m)
    buf[:n] = y
    buf[m - n + 1 :] = y[1:][::-1]  # circular mirror about index 0
    mags = np.abs(np.fft.rfft(buf))
    freqs = np.fft.rfftfreq(m, d=dtau)
    return Spectrum(frequencies=freqs, magnitudes=mags)


def peak_frequency(
    spectrum: Spectrum, window: tuple[float, float] | None = None
) -> float:
    """Location of the strongest peak, refined by three-point parabolic
    interpolation on the log magnitude.  Ties go to the larger magnitude
    bin (argmax order)."""
    f = spectrum.frequencies
    m = spectrum.magnitudes
    if window is not None:
        sel = (f >= window[0]) & (f <= window[1])
        if not np.any(sel):
            raise ValueError("window contains no spectrum bins")
        offset = np.nonzero(sel)[0][0]
        f = f[sel]
        m = m[sel]
    else:
        offset = 0
    k = int(np.argmax(m))
    if k == 0 or k == len(m) - 1 or m[k - 1] <= 0 or m[k + 1] <= 0 or m[k] <= 0:
        return float(f[k])
    la, lb, lc = np.log(m[k - 1]), np.log(m[k]), np.log(m[k + 1])
    denom = la - 2 * lb + lc
    if denom >= 0:
        return float(f[k])
    delta = 0.5 * (la - lc) / denom
    df = f[1] - f[0]
    return float(f[k] + delta * df)


@dataclass(frozen=True)
class PeakFit:
    center: float
    fwhm: float
    amplitude: float
    residual_rms: float


_FWHM_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


def gaussian_peak_fit(spectrum: Spectrum, window: tuple[float, float]) -> PeakFit:
    """Least-squares Gaussian fit of a single spectral peak.

    ``window`` is the (low, high) frequency range; it must contain exactly
    one prominent local maximum.  The full width at half maximum is
    2*sqrt(2*ln 2) times the fitted Gaussian sigma.  Non-convergence raises
    :class:`FitError` with residual diagnostics.
    """
    f = spectrum.frequencies
    m = spectrum.magnitudes
    sel = (f >= window[0]) & (f <= window[1])
    if np.count_nonzero(sel) < 5:
        raise ValueError("window contains fewer than 5 spectrum bins")
    fw = f[sel]
    mw = m[sel]

    span = mw.max() - mw.min()
    if span <= 0:
        raise ValueError("window contains no peak (flat spectrum)")
    interior = (mw[1:-1] > mw[:-2]) & (mw[1:-1] > mw[2:])
    prominent = interior & (mw[1:-1] - mw.min() > 0.05 * span)
    n_peaks = int(np.count_nonzero(prominent))
    if n_peaks == 0:
        raise ValueError("window contains no interior local maximum")
    if n_peaks > 1:
        raise ValueError(f"window contains {n_peaks} local maxima, expected exactly 1")

    k = int(np.argmax(mw))
    # second-moment width seed around the peak
    weights = np.clip(mw - mw.min(), 0, None)
    sigma0 = np.sqrt(np.sum(weights * (fw - fw[k]) ** 2) / np.sum(weights))
    sigma0 = max(sigma0, fw[1] - fw[0])
    p0 = np.array([mw[k], fw[k], sigma0])

    def res(p):
        a, c, s = p
        return a * np.exp(-((fw - c) ** 2) / (2.0 * s**2)) - mw

    def jac(p):
        a, c, s = p
        g = np.exp(-((fw - c) ** 2) / (2.0 * s**2))
        d = fw - c
        return np.column_stack([g, a * g * d / s**2, a * g * d**2 / s**3])

    fit = levenberg_marquardt(res, jac, p0)
    if not fit.converged:
        raise FitError(
            f"gaussian peak fit did not converge after {fit.n_iter} iterations "
            f"(residual rms {fit.residual_rms:.3e})"
        )
    a, c, s = fit.params
    return PeakFit(
        center=float(c),
        fwhm=float(_FWHM_SIGMA * abs(s)),
        amplitude=float(a),
        residual_rms=fit.residual_rms,
    )


@dataclass(frozen=True)
class HyperfineFitModel:
    """Result of the shared three-cosine fit across temperature datasets.

    The model is P(tau) = sum_i A_i cos(2*pi*(nu_i + dnu_k)*tau + phi_i) + b
    with amplitudes, base frequencies, phases and baseline shared by all
    datasets and one frequency shift dnu_k per dataset (the first dataset
    pins dnu_1 = 0 as the gauge).
    """

    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray
    baseline: float
    temperatures: np.ndarray
    delta_nu: np.ndarray
    slope_hz_per_c: float
    residual_rms: float
    condition_number: float


def _seed_peaks(tau: np.ndarray, p: np.ndarray, n_components: int) -> np.ndarray:
    """Seed component frequencies from the strongest well-separated
    spectrum peaks."""
    spec = fringe_spectrum(tau, p, zero_pad_factor=8)
    f = spec.frequencies
    m = spec.magnitudes.copy()
    df = f[1] - f[0]
    # resolution floor: peaks closer than this are one component
    min_sep = max(4 * df, 1.0 / (2.0 * (tau[-1] - tau[0])))
    found = []
    while len(found) < n_components:
        k = int(np.argmax(m))
        if m[k] <= 0:
            break
        sub = Spectrum(f, spec.magnitudes)
        lo, hi = f[k] - 2 * df, f[k] + 2 * df
        found.append(peak_frequency(sub, (max(lo, 0.0), hi)))
        m[np.abs(f - f[k]) < min_sep] = 0.0
    if len(found) < n_components:
        raise FitError(
            f"only {len(found)} resolved spectral peaks for "
            f"{n_components} fit components; the fit would be rank deficient"
        )
    return np.sort(np.array(found))


def hyperfine_global_fit(
    traces: list[tuple[float, np.ndarray, np.ndarray]],
    n_components: int = 3,
    max_condition: float = 1e8,
) -> HyperfineFitModel:
    """Fit hyperfine fringe traces at several temperatures with one shared
    cosine model and a per-temperature frequency shift.

    Parameters
    ----------
    traces : list of (temperature_C, tau, p)
        At least two datasets sharing one tau grid.
    n_components : int
        Number of cosine components (three hyperfine lines by default).
    max_condition : float
        Fits whose column-scaled Jacobian condition number exceeds this are
        refused as rank deficient.

    Returns the fitted model, the per-dataset shifts and the regression
    slope of shift versus temperature.
    """
    if len(traces) < 2:
        raise ValueError("need at least two temperature datasets")
    temps = np.array([t for t, _, _ in traces], dtype=float)
    tau = np.asarray(traces[0][1], dtype=float)
    for _, t_k, _ in traces[1:]:
        if len(t_k) != len(tau) or not np.allclose(t_k, tau):
            raise ValueError("all datasets must share one tau grid")
    ys = [np.asarray(p, dtype=float) for _, _, p in traces]
    n_sets = len(traces)

    # seeds: frequencies from the first dataset's spectrum, shifts from the
    # per-dataset spectra so large shifts do not strand the fit in a local
    # minimum
    nu0 = _seed_peaks(tau, ys[0], n_components)
    shifts0 = np.zeros(n_sets)
    for k in range(1, n_sets):
        nu_k = _seed_peaks(tau, ys[k], n_components)
        shifts0[k] = float(np.mean(nu_k - nu0))
    amps0 = np.full(n_components, 0.5 * (ys[0].max() - ys[0].min()) / n_components)
    p0 = np.concatenate(
        [amps0, nu0, np.zeros(n_components), [np.mean(ys[0])], shifts0[1:]]
    )
    nc = n_components

    def unpack(p):
        return (
            p[:nc],
            p[nc : 2 * nc],
            p[2 * nc : 3 * nc],
            p[3 * nc],
            np.concatenate([[0.0], p[3 * nc + 1 :]]),
        )

    def model_k(p, k):
        a, nu, phi, b, dnu = unpack(p)
        arg = 2.0 * np.pi * np.outer(tau, nu + dnu[k]) + phi
        return np.cos(arg) @ a + b

    def res(p):
        return np.concatenate([model_k(p, k) - ys[k] for k in range(n_sets)])

    def jac(p):
        a, nu, phi, b, dnu = unpack(p)
        blocks = []
        for k in range(n_sets):
            arg = 2.0 * np.pi * np.outer(tau, nu + dnu[k]) + phi
            cos_t = np.cos(arg)
            sin_t = np.sin(arg)
            d_a = cos_t
            d_nu = -2.0 * np.pi * tau[:, None] * sin_t * a
            d_phi = -sin_t * a
            d_b = np.ones((len(tau), 1))
            d_shift = np.zeros((len(tau), n_sets - 1))
            if k > 0:
                d_shift[:, k - 1] = d_nu.sum(axis=1)
            blocks.append(np.hstack([d_a, d_nu, d_phi, d_b, d_shift]))
        return np.vstack(blocks)

    cond0 = scaled_condition_number(jac(p0))
    if not np.isfinite(cond0) or cond0 > max_condition:
        raise FitError(
            f"rank-deficient fringe fit (condition number {cond0:.3e} "
            f"exceeds {max_condition:.1e})"
        )

    fit = levenberg_marquardt(res, jac, p0)
    if not fit.converged:
        raise FitError(
            f"global fringe fit did not converge after {fit.n_iter} iterations "
            f"(residual rms {fit.residual_rms:.3e})"
        )
    cond = scaled_condition_number(fit.jacobian)
    if not np.isfinite(cond) or cond > max_condition:
        raise FitError(
            f"rank-deficient fringe fit (condition number {cond:.3e} "
            f"exceeds {max_condition:.1e})"
        )

    a, nu, phi, b, dnu = unpack(fit.params)
    slope = float(np.polyfit(temps, dnu, 1)[0])
    order = np.argsort(nu)
    return HyperfineFitModel(
        amplitudes=a[order],
        frequencies=nu[order],
        phases=phi[order],
        baseline=float(b),
        temperatures=temps,
        delta_nu=dnu,
        slope_hz_per_c=slope,
        residual_rms=fit.residual_rms,
        condition_number=cond,
    )


def power_spectral_density(
    t: np.ndarray, values: np.ndarray, segment_length: int
) -> Spectrum:
    """One-sided amplitude spectral density by Welch's method.

    Hann window, 50% overlap, per-segment mean removal.  Normalized as a
    density: a white sequence of variance sigma^2 sampled at interval dt
    has a flat power density sigma^2 * 2*dt, i.e. the returned amplitude
    density is its square root (T/sqrt(Hz) for field inputs) and the
    integrated power density recovers the variance.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if segment_length > len(values):
        raise ValueError("segment_length exceeds the series length")
    dt = _check_uniform(t, "time grid")
    freqs, psd = _scipy_signal.welch(
        values,
        fs=1.0 / dt,
        window="hann",
        nperseg=int(segment_length),
        noverlap=int(segment_length) // 2,
        detrend="constant",
        scaling="density",
    )
    return Spectrum(frequencies=freqs, magnitudes=np.sqrt(psd))


@dataclass(frozen=True)
class AllanCurve:
    """Two-sample deviation versus gate time.

    ``skipped_gates`` lists requested gates that had fewer than two
    complete blocks and were omitted.
    """

    gate_times: np.ndarray
    deviations: np.ndarray
    skipped_gates: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.gate_times) <= 0):
            raise ValueError("gate_times must be strictly increasing")
        if np.any(self.deviations < 0):
            raise ValueError("deviations must be non-negative")


def allan_deviation(
    t: np.ndarray, values: np.ndarray, gate_times: np.ndarray
) -> AllanCurve:
    """Two-sample (Allan) deviation over non-overlapping adjacent gates.

    For gate time T_g the series is cut into adjacent blocks of T_g, each
    block is averaged, and

        sigma(T_g) = sqrt(0.5 * mean((mean_{n+1} - mean_n)^2))

    over all adjacent block pairs.  Gate times must be integer multiples of
    the sample interval; gates with fewer than two complete blocks are
    omitted from the curve and reported in ``skipped_gates``.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = _check_uniform(t, "time grid")

    gates = []
    devs = []
    skipped = []
    for g in np.asarray(gate_times, dtype=float):
        m = g / dt
        m_int = int(round(m))
        if m_int < 1 or abs(m - m_int) > 1e-6 * max(m, 1.0):
            raise ValueError(
                f"gate time {g:g} s is not an integer multiple of the "
                f"sample interval {dt:g} s"
            )
        n_blocks = len(values) // m_int
        if n_blocks < 2:
            skipped.append(float(g))
            continue
        block_means = values[: n_blocks * m_int].reshape(n_blocks, m_int).mean(axis=1)
        diffs = np.diff(block_means)
        gates.append(float(g))
        devs.append(float(np.sqrt(0.5 * np.mean(diffs**2))))
    return AllanCurve(
        gate_times=np.array(gates), deviations=np.array(devs), skipped_gates=skipped
    )


@dataclass(frozen=True)
class OperatingPoint:
    """Fixed Ramsey working point for count-to-field inversion."""

    tau: float
    theta: float
    basis: Basis


def field_estimate_from_counts(
    counts,
    readout: ReadoutModel,
    operating_point: OperatingPoint,
    consts: PhysicalConstants = PhysicalConstants(),
):
    """Invert photon counts to an axial-field offset from the working point.

    Linearizes counts = alpha*(T/tau)*(1 + R*sin(2*pi*dm*gamma*B*tau + theta))
    around the maximum-slope point:

        B = ((counts/(alpha*T/tau) - 1)/R - sin(theta)) / (cos(theta) * 2*pi*dm*gamma*tau)

    Counts implying |sin| > 1 are clamped to the fringe extremes, with a
    warning reporting how many samples saturated.  Accepts scalar or array
    counts.
    """
    tau = operating_point.tau
    dm = operating_point.basis.delta_ms
    lam0 = readout.alpha * readout.total_time / tau
    y = (np.asarray(counts, dtype=float) / lam0 - 1.0) / readout.contrast_r

    n_sat = int(np.count_nonzero(np.abs(y) > 1.0))
    if n_sat:
        warnings.warn(
            f"{n_sat} count value(s) imply |sin| > 1 and were clamped to the "
            "fringe extremes",
            stacklevel=2,
        )
        y = np.clip(y, -1.0, 1.0)

    slope = np.cos(operating_point.theta) * 2.0 * np.pi * dm * consts.gamma * tau
    b = (y - np.sin(operating_point.theta)) / slope
    if np.ndim(counts) == 0:
        return float(b)
    return b
