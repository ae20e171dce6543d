"""Scalar-signal synchronization: receiver dynamics, stability, noise metrics.

The transmitter runs free and sends only ``w = gamma*x + z``. The receiver
rebuilds its missing third coordinate by synchronous substitution,
``z_est = w - gamma*x_r``, and iterates the same fold dynamics on the
substituted state. Stability of the error dynamics is governed by the
eigenvalues of the coupled matrix scaled by the worst-case fold slope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core_map import _as_state, fold, generate_trajectory
from .params import DEFAULT_PARAMS, SystemParams

SYNC_DISCARD = 100  # settle window dropped before error statistics


@dataclass(frozen=True)
class CouplingConfig:
    """Coupling gain and channel noise level for a synchronization run."""

    gamma: float = DEFAULT_PARAMS.gamma
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class SyncRun:
    """Synchronization quality metrics for one drive/response simulation."""

    rms_error: tuple
    correlation: tuple
    delta_n: float
    samples: int

    def __post_init__(self):
        if any(r < 0 for r in self.rms_error) or self.delta_n < 0:
            raise ValueError("rms errors and delta_n must be non-negative")
        if any(not -1.0 <= c <= 1.0 for c in self.correlation):
            raise ValueError("correlations must lie in [-1, 1]")


@dataclass(frozen=True)
class DeviationFit:
    """Least-squares fit of delta_n**2 = A**2 + (sigma*B)**2."""

    a: float
    b: float
    residual: float
    r_squared: float


def receiver_step(state, w_received: float, params: SystemParams = DEFAULT_PARAMS):
    """One response-system update driven by the received scalar.

    Substitutes ``z_est = w_received - gamma*x`` for the third coordinate and
    applies the folded linear update to (x, y, z).
    """
    s = _as_state(state)
    x, y, z = s
    z_est = w_received - params.gamma * x
    beta = params.beta
    return np.array(
        [
            fold(params.a * x + params.b * z_est, beta),
            fold(params.c * y + z_est, beta),
            fold(x + y, beta),
        ]
    )


def receiver_run(w, init, params: SystemParams = DEFAULT_PARAMS) -> np.ndarray:
    """Response states for a whole received series.

    Returns an array (len(w), 3); row k is the receiver state at sample k,
    i.e. before consuming w[k], so transmitter and receiver rows align.
    """
    w = np.asarray(w, dtype=float)
    start = _as_state(init)
    out = np.empty((w.size, 3))
    _kernels.receiver_chain(
        w,
        start[0],
        start[1],
        start[2],
        params.a,
        params.b,
        params.c,
        params.beta,
        params.gamma,
        out,
    )
    return out


def response_estimate(w, states, gamma: float) -> np.ndarray:
    """Receiver's reconstruction of the drive state: (x_r, y_r, z_est).

    The third coordinate is the substituted value ``w - gamma*x_r`` (the
    receiver's actual output for the missing variable), not the internal z
    state, which only feeds the next iteration.
    """
    w = np.asarray(w, dtype=float)
    est = np.array(states, dtype=float, copy=True)
    est[:, 2] = w - gamma * est[:, 0]
    return est


def coupled_matrix(params: SystemParams = DEFAULT_PARAMS) -> np.ndarray:
    """Error-dynamics matrix of the substituted receiver.

    Lower triangular with eigenvalues (a - b*gamma, c, 0); the fold slope
    multiplies these when assessing stability.
    """
    return np.array(
        [
            [params.a - params.b * params.gamma, 0.0, 0.0],
            [-params.gamma, params.c, 0.0],
            [1.0, 1.0, 0.0],
        ]
    )


def stability_check(params: SystemParams = DEFAULT_PARAMS) -> dict:
    """Synchronization stability verdict with per-condition margins.

    The receiver error contracts when |a - b*gamma| and |c| both stay below
    the reciprocal of the worst fold slope: 1 for beta in {0, 1}, beta for
    0 < beta <= 1/2, and 1 - beta for 1/2 < beta < 1. Margins are
    bound - |value|, positive when satisfied.
    """
    beta = params.beta
    if beta in (0.0, 1.0):
        bound = 1.0
    elif beta <= 0.5:
        bound = beta
    else:
        bound = 1.0 - beta
    coupling_term = abs(params.a - params.b * params.gamma)
    margins = {
        "coupling": bound - coupling_term,
        "c": bound - abs(params.c),
    }
    return {
        "stable": bool(margins["coupling"] > 0 and margins["c"] > 0),
        "bound": bound,
        "margins": margins,
    }


def normalized_deviation(z1, z2) -> float:
    """RMS difference of two series divided by the product of their spreads.

    Note the denominator is the plain product sigma(z1)*sigma(z2), not its
    square root, so the metric scales as 1/s when both series are scaled by
    s. It is implemented exactly in this form for comparability.
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    num = np.sqrt(np.mean((z1 - z2) ** 2))
    denom = np.std(z1) * np.std(z2)
    if denom == 0:
        raise ValueError("series must have nonzero spread")
    return float(num / denom)


def run_sync(
    params: SystemParams = DEFAULT_PARAMS,
    coupling: CouplingConfig = CouplingConfig(),
    n: int = 10_000,
    seed: int = 0,
    discard: int = SYNC_DISCARD,
) -> SyncRun:
    """Simulate drive and response over a noisy scalar channel.

    White Gaussian noise of ``coupling.noise_sigma`` is added to the
    transmitted scalar only. The drive starts from the seeded cube draw
    (sub-seed 0), the receiver from a different point (sub-seed 1), and the
    noise uses sub-seed 2; the first ``discard`` samples are excluded from
    the statistics so convergence is exercised but not measured. Errors are
    scored against the receiver's reconstructed estimate (x_r, y_r, z_est),
    see response_estimate.
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples after the settle window")
    run_params = params.replace(gamma=coupling.gamma)
    total = n + discard
    ss = np.random.SeedSequence(seed)
    drive_seed, recv_seed, noise_seed = ss.spawn(3)
    drive = generate_trajectory(
        total,
        params=run_params,
        init=np.random.Generator(np.random.PCG64(drive_seed)).uniform(-0.5, 0.5, 3),
        seed=seed,
    )
    w = drive.w
    if coupling.noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(noise_seed))
        w = w + rng.normal(0.0, coupling.noise_sigma, size=w.size)
    recv_init = np.random.Generator(np.random.PCG64(recv_seed)).uniform(-0.5, 0.5, 3)
    response = response_estimate(w, receiver_run(w, recv_init, run_params), coupling.gamma)

    d = drive.states[discard:]
    r = response[discard:]
    err = r - d
    rms = tuple(np.sqrt(np.mean(err**2, axis=0)))
    corr = tuple(
        float(np.corrcoef(d[:, k], r[:, k])[0, 1]) for k in range(3)
    )
    delta = normalized_deviation(d[:, 2], r[:, 2])
    return SyncRun(rms_error=rms, correlation=corr, delta_n=delta, samples=n)


def sync_sweep(
    params: SystemParams,
    gammas,
    sigmas,
    n: int = 10_000,
    seed: int = 0,
    max_workers: int = 1,
):
    """run_sync over the gamma x sigma grid.

    Grid point (i, j) uses the sub-seed spawned from the master seed at
    position i*len(sigmas)+j, so points are independent and reproducible;
    results come back in grid order regardless of ``max_workers``.
    Returns a list of dicts with keys gamma, sigma, run.
    """
    gammas = [float(g) for g in gammas]
    sigmas = [float(s) for s in sigmas]
    if not gammas or not sigmas:
        raise ValueError("gamma and sigma grids must be non-empty")
    children = np.random.SeedSequence(seed).spawn(len(gammas) * len(sigmas))
    points = [
        (gamma, sigma, int(children[i * len(sigmas) + j].generate_state(1)[0]))
        for i, gamma in enumerate(gammas)
        for j, sigma in enumerate(sigmas)
    ]

    def evaluate(point):
        gamma, sigma, point_seed = point
        run = run_sync(
            params,
            CouplingConfig(gamma=gamma, noise_sigma=sigma),
            n=n,
            seed=point_seed,
        )
        return {"gamma": gamma, "sigma": sigma, "run": run}

    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(evaluate, points))
    return [evaluate(p) for p in points]


def fit_deviation_model(points) -> DeviationFit:
    """Fit delta_n**2 = A**2 + sigma**2 * B**2 by linear least squares.

    ``points`` is a sequence of (sigma, delta_n) pairs; at least three
    distinct noise levels are required. Returns non-negative A and B, the
    RMS residual of delta_n**2, and the R^2 of the linear fit in sigma**2.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (sigma, delta_n) pairs")
    if pts.shape[0] < 3:
        raise ValueError("need at least 3 points")
    sigma2 = pts[:, 0] ** 2
    if np.ptp(sigma2) == 0:
        raise ValueError("all sigma values are equal; fit is underdetermined")
    target = pts[:, 1] ** 2
    design = np.column_stack([np.ones_like(sigma2), sigma2])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((target - pred) ** 2))
    ss_tot = float(np.sum((target - target.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    a = float(np.sqrt(max(coef[0], 0.0)))
    b = float(np.sqrt(max(coef[1], 0.0)))
    residual = float(np.sqrt(np.mean((target - pred) ** 2)))
    return DeviationFit(a=a, b=b, residual=residual, r_squared=r_squared)
