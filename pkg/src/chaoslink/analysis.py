"""Lyapunov spectra, correlation dimension, and spectral estimation.

Four Lyapunov estimators with different trust models:

* ``le_analytic``   closed form, only valid for the constant-slope folds
  (beta 0 or 1) where the Jacobian never changes.
* ``le_qr``         exact Jacobians accumulated along a simulated orbit with
  QR re-orthonormalization; the internal ground truth.
* ``le_eckmann_ruelle``  data-driven: local linear maps fitted from
  neighborhoods, then the same QR accumulation.
* ``le_wolf``       data-driven dominant exponent by following a neighbor
  trajectory and renormalizing through replacements.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal
from scipy.spatial import cKDTree

from . import _kernels
from .core_map import (
    DegenerateTrajectoryError,
    Trajectory,
    generate_trajectory,
    jacobian_at,
)
from .params import DEFAULT_PARAMS, SettlingConfig, SystemParams


@dataclass(frozen=True)
class LeSpectrum:
    """Ordered Lyapunov exponents (nats per iteration) with estimator metadata."""

    exponents: tuple
    method: str
    sample_count: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        exps = tuple(float(v) for v in self.exponents)
        if list(exps) != sorted(exps, reverse=True):
            raise ValueError("exponents must be sorted descending")
        if self.method == "wolf" and len(exps) != 1:
            raise ValueError("wolf spectra carry exactly one exponent")
        object.__setattr__(self, "exponents", exps)

    def __iter__(self):
        return iter(self.exponents)


@dataclass(frozen=True)
class PsdEstimate:
    """Welch power spectral density on a uniform frequency grid."""

    frequencies: np.ndarray
    power: np.ndarray
    segment_length: int
    overlap: float

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        p = np.asarray(self.power, dtype=float)
        if f.shape != p.shape:
            raise ValueError("frequency and power grids must match")
        if np.any(p < 0):
            raise ValueError("power must be non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "power", p)


@dataclass(frozen=True)
class DimensionFit:
    """Correlation-dimension slope fit with a residual-based error bar."""

    dimension: float
    error: float
    radii: np.ndarray
    correlation_sums: np.ndarray
    fit_window: tuple
    r_squared: float


class NoScalingRegionError(RuntimeError):
    """No radius window met the linearity requirement for the slope fit."""


def le_analytic(params: SystemParams = DEFAULT_PARAMS) -> LeSpectrum:
    """Closed-form spectrum for the constant-Jacobian folds (beta 0 or 1).

    With a constant Jacobian J = +-A the orbit average collapses and each
    exponent is half the log of an eigenvalue of A @ A.T.
    """
    if params.beta not in (0.0, 1.0):
        raise ValueError(
            "analytic spectrum requires beta in {0, 1}; "
            f"got beta={params.beta} (use le_qr for intermediate asymmetry)"
        )
    a_mat = params.matrix()
    eig = np.linalg.eigvalsh(a_mat @ a_mat.T)
    exps = np.sort(0.5 * np.log(eig))[::-1]
    return LeSpectrum(tuple(exps), method="analytic", sample_count=0)


def le_qr(traj: Trajectory) -> LeSpectrum:
    """Exact-Jacobian spectrum accumulated along a trajectory with QR steps.

    Handles both ideal and settling-limited trajectories (the Jacobian picks
    up the identity blend in the latter case). Steps whose fold argument
    lands exactly on a branch boundary keep the central-branch slope and are
    reported in meta["breakpoint_fraction"].
    """
    states = traj.states
    if len(traj) < 10:
        raise ValueError("trajectory too short for spectrum estimation")
    p = traj.params
    weight = 1.0 if traj.settling is None else traj.settling.weight
    spread = np.max(np.abs(states - states[0]), axis=0).max()
    if spread == 0.0:
        # Pinned orbit: meaningful only if the point actually attracts
        # (e.g. strongly damped settling); otherwise it is a measure-zero
        # artifact such as starting exactly at the unstable origin.
        jac = jacobian_at(states[0], p, on_breakpoint="central")
        if weight != 1.0:
            jac = (1.0 - weight) * np.eye(3) + weight * jac
        if np.max(np.abs(np.linalg.eigvals(jac))) >= 1.0:
            raise DegenerateTrajectoryError(
                "trajectory is pinned at a non-attracting fixed point; "
                "no expansion data"
            )
    sums, used, breakpoints = _kernels.qr_log_sums(
        states, p.a, p.b, p.c, p.beta, weight
    )
    if used < len(traj):
        raise DegenerateTrajectoryError(
            "tangent vectors collapsed during QR accumulation"
        )
    exps = np.sort(np.asarray(sums) / used)[::-1]
    return LeSpectrum(
        tuple(exps),
        method="qr",
        sample_count=used,
        meta={"breakpoint_fraction": breakpoints / used},
    )


def _as_series(series) -> np.ndarray:
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"series must have shape (n, 3), got {arr.shape}")
    return arr


def le_eckmann_ruelle(
    series,
    n_reference: int = 2000,
    n_neighbors: int | None = None,
    min_points: int = 2000,
) -> LeSpectrum:
    """Data-driven spectrum from locally fitted linear maps.

    For each of ``n_reference`` consecutive fiducial points a linear map is
    fitted by least squares from neighbor displacements at step n to step
    n+1, then the fitted Jacobians are QR-accumulated exactly like le_qr.
    The default neighborhood is 2% of the series clamped to [20, 40]
    points; larger neighborhoods span a sizable part of the attractor and
    wash the local Jacobian out. The fraction of displacement variance
    explained by the fits is reported as meta["fit_quality"], and
    meta["low_confidence"] is set when the local dynamics do not look
    deterministic (e.g. white noise input).
    """
    states = _as_series(series)
    n = states.shape[0]
    if n < min_points:
        raise ValueError(f"need at least {min_points} points, got {n}")
    if n_neighbors is None:
        n_neighbors = max(20, min(40, int(0.02 * n)))
    n_neighbors = min(n_neighbors, n - 2)
    n_reference = min(n_reference, n - 1)
    if n_reference < 500:
        warnings.warn(
            f"only {n_reference} reference points available; estimates may be noisy",
            RuntimeWarning,
        )

    tree = cKDTree(states[:-1])
    q = np.eye(3)
    sums = np.zeros(3)
    used = 0
    short = 0
    resid_power = 0.0
    target_power = 0.0
    for i in range(n_reference):
        # +2 candidates so the point itself and its successor can be dropped.
        dists, idx = tree.query(states[i], k=n_neighbors + 2)
        keep = idx[(idx != i) & (idx != i + 1)][:n_neighbors]
        if keep.size < 4:
            short += 1
            continue
        dx = states[keep] - states[i]
        dy = states[keep + 1] - states[i + 1]
        jac, res, rank, _ = np.linalg.lstsq(dx, dy, rcond=None)
        if rank < 3:
            short += 1
            continue
        pred = dx @ jac
        resid_power += np.sum((dy - pred) ** 2)
        target_power += np.sum(dy**2)
        m = jac.T @ q
        q, r = np.linalg.qr(m)
        diag = np.abs(np.diag(r))
        if np.any(diag == 0.0):
            short += 1
            continue
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        q = q * signs
        sums += np.log(diag)
        used += 1
    if used == 0:
        raise DegenerateTrajectoryError("no usable reference points for local fits")
    coverage = used / n_reference
    if coverage < 1.0:
        warnings.warn(
            f"local fits succeeded at {coverage:.1%} of reference points",
            RuntimeWarning,
        )
    fit_quality = 1.0 - resid_power / target_power if target_power > 0 else 0.0
    exps = np.sort(sums / used)[::-1]
    return LeSpectrum(
        tuple(exps),
        method="eckmann-ruelle",
        sample_count=used,
        meta={
            "n_neighbors": n_neighbors,
            "coverage": coverage,
            "fit_quality": fit_quality,
            "low_confidence": bool(fit_quality < 0.3),
        },
    )


def le_wolf(
    series,
    max_separation: float = 0.1,
    min_separation: float = 1e-6,
    theiler: int = 10,
    n_candidates: int = 50,
    min_points: int = 2000,
) -> LeSpectrum:
    """Dominant exponent by direct neighbor tracking (Wolf-style).

    Follows the recorded future of the nearest neighbor of the fiducial
    point until their separation exceeds ``max_separation``, accumulates the
    log growth, then replaces the neighbor with the candidate best aligned
    with the current displacement direction (separation kept above
    ``min_separation``). Euclidean metric in the native (x, y, z) space.
    """
    states = _as_series(series)
    n = states.shape[0]
    if n < min_points:
        raise ValueError(f"need at least {min_points} points, got {n}")

    tree = cKDTree(states)

    def replacement(i, direction):
        dists, idx = tree.query(states[i], k=n_candidates)
        best = -1
        best_score = np.inf
        norm_dir = np.linalg.norm(direction)
        for d, j in zip(dists, idx):
            if j >= n - 1 or abs(j - i) <= theiler or d < min_separation:
                continue
            if d > max_separation:
                break
            if norm_dir > 0:
                cosang = np.dot(states[j] - states[i], direction) / (d * norm_dir)
                cosang = min(1.0, max(-1.0, cosang))
                score = d * (1.0 + 2.0 * np.arccos(cosang))
            else:
                score = d
            if score < best_score:
                best_score = score
                best = j
        if best < 0:
            # fall back to the nearest admissible neighbor regardless of angle
            for d, j in zip(dists, idx):
                if j < n - 1 and abs(j - i) > theiler and d >= min_separation:
                    return j
        return best

    i = 0
    j = replacement(0, np.zeros(3))
    if j < 0:
        raise DegenerateTrajectoryError("no admissible neighbor found")
    log_sum = 0.0
    steps = 0
    replacements = 0
    dist = np.linalg.norm(states[j] - states[i])
    while i + 1 < n and j + 1 < n:
        i += 1
        j += 1
        steps += 1
        new_dist = np.linalg.norm(states[j] - states[i])
        if new_dist > max_separation or j + 1 >= n or new_dist == 0.0:
            if new_dist > 0.0 and dist > 0.0:
                log_sum += np.log(new_dist / dist)
            direction = states[j] - states[i]
            j = replacement(i, direction)
            replacements += 1
            if j < 0:
                break
            dist = np.linalg.norm(states[j] - states[i])
    if steps == 0:
        raise DegenerateTrajectoryError("could not follow any neighbor trajectory")
    # close the last open segment
    if j >= 0 and dist > 0.0:
        tail = np.linalg.norm(states[j] - states[i])
        if tail > 0.0:
            log_sum += np.log(tail / dist)
    exponent = log_sum / steps
    return LeSpectrum(
        (exponent,),
        method="wolf",
        sample_count=steps,
        meta={"replacements": replacements},
    )


def correlation_dimension(
    series,
    radii=None,
    n_radii: int = 24,
    min_r_squared: float = 0.995,
    min_window: int = 6,
    max_points: int = 8000,
) -> DimensionFit:
    """Correlation-sum slope (Grassberger-Procaccia) with auto scaling region.

    Computes C(r) over log-spaced radii, then fits the slope on the longest
    log-log window whose linear fit reaches ``min_r_squared``. The error bar
    is the standard error of the fitted slope. The default radius range runs
    from 0.08 to 0.55 standard deviations: the lower cutoff keeps enough
    pairs per radius for stable counts, the upper one stays well below the
    attractor extent where the sum saturates. Points beyond ``max_points``
    are thinned deterministically (every k-th sample) to bound the pairwise
    distance work.

    Raises NoScalingRegionError when no window is linear enough.
    """
    states = np.asarray(series, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    n = states.shape[0]
    if n < 100:
        raise ValueError(f"need at least 100 points, got {n}")
    if n > max_points:
        stride = int(np.ceil(n / max_points))
        states = states[::stride]
        n = states.shape[0]

    if radii is None:
        scale = np.std(states)
        radii = np.geomspace(0.08 * scale, 0.55 * scale, n_radii)
    else:
        radii = np.sort(np.asarray(radii, dtype=float))
        if radii.size < min_window:
            raise ValueError("need at least as many radii as the fit window")

    # chunked pairwise distances -> counts below each radius
    counts = np.zeros(radii.size, dtype=np.int64)
    edges = np.concatenate(([0.0], radii))
    sq_norms = np.sum(states**2, axis=1)
    chunk = max(1, int(2e7 // n))
    for start in range(0, n, chunk):
        block = states[start : start + chunk]
        d = np.sqrt(
            np.maximum(
                0.0,
                sq_norms[start : start + chunk, None]
                + sq_norms[None, :]
                - 2.0 * block @ states.T,
            )
        )
        hist, _ = np.histogram(d, bins=edges)
        counts += np.cumsum(hist)
    # every row contributed exactly one zero-distance self-pair per radius
    counts -= n
    csums = counts / (n * (n - 1))

    valid = csums > 0
    log_r = np.log(radii[valid])
    log_c = np.log(csums[valid])
    m = log_r.size
    best = None
    for width in range(m, min_window - 1, -1):
        for lo in range(0, m - width + 1):
            x = log_r[lo : lo + width]
            y = log_c[lo : lo + width]
            slope, intercept = np.polyfit(x, y, 1)
            pred = slope * x + intercept
            ss_res = np.sum((y - pred) ** 2)
            ss_tot = np.sum((y - y.mean()) ** 2)
            r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
            if r2 >= min_r_squared:
                stderr = np.sqrt(
                    ss_res / (width - 2) / np.sum((x - x.mean()) ** 2)
                ) if width > 2 else np.inf
                best = (slope, stderr, (lo, lo + width), r2)
                break
        if best is not None:
            break
    if best is None:
        raise NoScalingRegionError(
            f"no radius window of >= {min_window} points reached "
            f"R^2 >= {min_r_squared}"
        )
    slope, stderr, window, r2 = best
    return DimensionFit(
        dimension=float(slope),
        error=float(stderr),
        radii=radii,
        correlation_sums=csums,
        fit_window=window,
        r_squared=float(r2),
    )


def welch_psd(
    series,
    segment_length: int = 1024,
    overlap: float = 0.5,
    fs: float = 1.0,
    window: str = "hann",
) -> PsdEstimate:
    """Averaged periodogram over overlapping windowed segments.

    Density scaling, so the integral over [0, fs/2] approximates the series
    variance (the mean is removed per segment).
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("welch_psd expects a scalar series")
    if x.size < segment_length:
        raise ValueError(
            f"series length {x.size} shorter than segment length {segment_length}"
        )
    noverlap = int(round(segment_length * overlap))
    freqs, power = signal.welch(
        x,
        fs=fs,
        window=window,
        nperseg=segment_length,
        noverlap=noverlap,
        scaling="density",
    )
    return PsdEstimate(
        frequencies=freqs,
        power=power,
        segment_length=segment_length,
        overlap=overlap,
    )


def zoh_magnitude(f, f_clk: float):
    """Magnitude response |sin(pi f/f_clk) / (pi f/f_clk)| of a zero-order hold.

    Equals 1 at f = 0 (the sinc limit) and 0 at every integer multiple of
    the clock frequency.
    """
    if f_clk <= 0:
        raise ValueError("f_clk must be positive")
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequencies must be non-negative")
    out = np.abs(np.sinc(f / f_clk))
    return out if out.ndim else float(out)


def hold_upsample(series, factor: int) -> np.ndarray:
    """Zero-order-hold upsampling: repeat every sample ``factor`` times."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return np.repeat(np.asarray(series, dtype=float), factor)


def compensate_zoh(
    psd: PsdEstimate, f_clk: float, guard_fraction: float = 0.05
) -> PsdEstimate:
    """Divide a PSD by the squared hold response, away from its nulls.

    Bins whose frequency falls within ``guard_fraction * f_clk`` of a hold
    null (any positive integer multiple of f_clk) are dropped rather than
    amplified. Raises ValueError when no bins survive.
    """
    if not 0.0 < guard_fraction < 0.5:
        raise ValueError("guard_fraction must lie in (0, 0.5)")
    f = psd.frequencies
    nearest_null = np.round(f / f_clk) * f_clk
    null_distance = np.abs(f - nearest_null)
    # frequencies below f_clk/2 have "nearest null" zero, which is not a null
    null_distance[nearest_null == 0.0] = np.inf
    keep = null_distance > guard_fraction * f_clk
    if not np.any(keep):
        raise ValueError("all frequency bins fall inside the null guard band")
    gain = zoh_magnitude(f[keep], f_clk) ** 2
    return PsdEstimate(
        frequencies=f[keep],
        power=psd.power[keep] / gain,
        segment_length=psd.segment_length,
        overlap=psd.overlap,
    )


def le_vs_settling(
    params: SystemParams,
    t_n_values,
    n: int = 100_000,
    seed: int = 0,
    transient: int = 2000,
):
    """QR spectra of the settling-limited dynamics over a hold-time grid.

    Returns a list of (t_n, LeSpectrum) sorted like the input grid. Each
    grid point simulates its own trajectory from the same seed.
    """
    results = []
    for t_n in t_n_values:
        if t_n <= 0:
            raise ValueError(f"t_n values must be positive, got {t_n}")
        traj = generate_trajectory(
            n,
            params=params,
            seed=seed,
            settling=SettlingConfig(t_n=float(t_n)),
            transient=transient,
        )
        results.append((float(t_n), le_qr(traj)))
    return results
