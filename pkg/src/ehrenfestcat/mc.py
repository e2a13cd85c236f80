"""Monte Carlo oracles for the chain and the jump-diffusion.

Chain paths are simulated event by event with exponential clocks;
diffusion paths advance by exact transition sampling between reset
epochs, so the moments carry no discretization bias at any step size.
Every path draws from its own counter-based stream keyed by
(seed, path_index) (Philox), which makes each trajectory a pure function
of those two integers regardless of chunking, execution order or worker
count.

Diffusion first-passage times are detected by sign changes on a uniform
grid (plus exact reset times); the bias of that detector is positive and
shrinks with the step, which the estimator reports by re-running at half
the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ehrenfest import ChainParams, Curve, ProbVector, rates
from .oujump import DiffusionParams

__all__ = [
    "SimConfig",
    "EstimateWithError",
    "LawEstimate",
    "FptEstimate",
    "ChainPath",
    "OuPath",
    "path_rng",
    "simulate_chain_path",
    "simulate_chain_path_clock",
    "estimate_chain_law",
    "simulate_ou_path",
    "sample_ou_endpoints",
    "estimate_ou_moments",
    "estimate_fpt",
    "default_horizon",
]

#: per-path streams are consumed in fixed blocks of this many grid steps
#: (three arrays per block: normals, reset uniforms, reset-time uniforms),
#: so chunked estimators reproduce single-path trajectories exactly
OU_BLOCK = 256

_CENSOR_FLAG_FRACTION = 1e-3


@dataclass(frozen=True)
class SimConfig:
    """Simulation budget: seed, path count, optional horizon and FPT grid step.

    horizon and fpt_grid_dt default to model-dependent values, see
    default_horizon / default_fpt_grid_dt.
    """

    seed: int
    n_paths: int
    horizon: float | None = None
    fpt_grid_dt: float | None = None

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.horizon is not None and not self.horizon > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.fpt_grid_dt is not None and not self.fpt_grid_dt > 0.0:
            raise ValueError(f"fpt_grid_dt must be positive, got {self.fpt_grid_dt}")


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n: int

    def __post_init__(self):
        if self.std_error < 0.0:
            raise ValueError("std_error must be non-negative")


@dataclass(frozen=True)
class LawEstimate:
    """Empirical distribution over the states with per-entry standard errors."""

    law: ProbVector
    std_error: np.ndarray
    n: int


@dataclass(frozen=True)
class ChainPath:
    """Piecewise-constant trajectory: state states[i] holds on [times[i], times[i+1])."""

    times: np.ndarray
    states: np.ndarray

    def state_at(self, t):
        idx = np.searchsorted(self.times, t, side="right") - 1
        return int(self.states[idx])

    def occupation_fraction(self, state, horizon):
        bounds = np.append(self.times, horizon)
        mask = self.states == state
        return float(np.sum(bounds[1:][mask] - self.times[mask]) / horizon)


@dataclass(frozen=True)
class OuPath:
    """Trajectory sampled on the uniform FPT grid."""

    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class FptEstimate:
    mean: EstimateWithError
    variance: EstimateWithError
    density: Curve
    n_censored: int
    censored_fraction: float
    flagged: bool
    mean_half_step: EstimateWithError | None = None


def path_rng(seed, path_index) -> np.random.Generator:
    """Counter-based stream for one path, keyed by (seed, path_index)."""
    key = np.array([seed, path_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_horizon(model) -> float:
    """50 relaxation times of the slowest relevant rate."""
    if isinstance(model, ChainParams):
        base = model.lam + model.mu
    else:
        base = model.alpha
    slowest = min(base, model.xi) if model.xi > 0.0 else base
    return 50.0 / slowest


def default_fpt_grid_dt(d: DiffusionParams) -> float:
    return math.sqrt(d.nu) / (50.0 * max(d.alpha, 1.0))


# ----------------------------------------------------------------------
# chain simulation


def _rate_table(p: ChainParams):
    """Per state: target states, cumulative jump probabilities, total rate."""
    table = []
    for k in range(-p.N, p.N + 1):
        edges = rates(p, k)
        targets = np.array([t for t, _ in edges], dtype=np.int64)
        rvals = np.array([r for _, r in edges])
        total = rvals.sum()
        table.append((targets, np.cumsum(rvals) / total, total))
    return table


def simulate_chain_path(p: ChainParams, j, cfg: SimConfig, path_index) -> ChainPath:
    """One exact event-driven trajectory over [0, horizon], merged-rate form.

    At state k the holding time is exponential with the total outgoing
    rate and the next state is drawn proportionally to the individual
    rates (catastrophe edges included).
    """
    j = p.check_state(j, "j")
    horizon = cfg.horizon if cfg.horizon is not None else default_horizon(p)
    rng = path_rng(cfg.seed, path_index)
    table = _rate_table(p)
    times = [0.0]
    states = [j]
    t = 0.0
    k = j
    while True:
        targets, cum, total = table[k + p.N]
        t += -math.log1p(-rng.random()) / total
        if t >= horizon:
            break
        k = int(targets[np.searchsorted(cum, rng.random())])
        times.append(t)
        states.append(k)
    return ChainPath(np.array(times), np.array(states, dtype=np.int64))


def simulate_chain_path_clock(p: ChainParams, j, cfg: SimConfig, path_index) -> ChainPath:
    """One trajectory with catastrophes as an independent Poisson(xi) clock.

    Statistically equivalent to the merged-rate simulator; kept as a
    cross-check of the rate bookkeeping (catastrophes landing while the
    chain already sits at 0 are invisible and not recorded).
    """
    j = p.check_state(j, "j")
    horizon = cfg.horizon if cfg.horizon is not None else default_horizon(p)
    rng = path_rng(cfg.seed, path_index)
    free = _rate_table(ChainParams(N=p.N, lam=p.lam, mu=p.mu, xi=0.0))
    times = [0.0]
    states = [j]
    t = 0.0
    k = j
    next_cat = math.inf
    if p.xi > 0.0:
        next_cat = -math.log1p(-rng.random()) / p.xi
    while True:
        targets, cum, total = free[k + p.N]
        t_move = t + -math.log1p(-rng.random()) / total
        if next_cat < t_move:
            t = next_cat
            next_cat = t + -math.log1p(-rng.random()) / p.xi
            if t >= horizon:
                break
            if k != 0:
                k = 0
                times.append(t)
                states.append(0)
            continue
        t = t_move
        if t >= horizon:
            break
        k = int(targets[np.searchsorted(cum, rng.random())])
        times.append(t)
        states.append(k)
    return ChainPath(np.array(times), np.array(states, dtype=np.int64))


def _chain_state_at(table, N, j, t, rng):
    k = j
    elapsed = 0.0
    while True:
        targets, cum, total = table[k + N]
        elapsed += -math.log1p(-rng.random()) / total
        if elapsed > t:
            return k
        k = int(targets[np.searchsorted(cum, rng.random())])


def estimate_chain_law(p: ChainParams, j, t, cfg: SimConfig) -> LawEstimate:
    """Empirical law of M(t) over cfg.n_paths independent paths."""
    j = p.check_state(j, "j")
    horizon = cfg.horizon if cfg.horizon is not None else default_horizon(p)
    if t > horizon:
        raise ValueError(f"t={t} exceeds the simulation horizon {horizon}")
    table = _rate_table(p)
    counts = np.zeros(2 * p.N + 1, dtype=np.int64)
    for i in range(cfg.n_paths):
        rng = path_rng(cfg.seed, i)
        counts[_chain_state_at(table, p.N, j, t, rng) + p.N] += 1
    phat = counts / cfg.n_paths
    se = np.sqrt(phat * (1.0 - phat) / cfg.n_paths)
    return LawEstimate(ProbVector(p.N, phat), se, cfg.n_paths)


# ----------------------------------------------------------------------
# diffusion simulation

def _ou_step_coeffs(d: DiffusionParams, dt):
    ea = math.exp(-d.alpha * dt)
    sd = math.sqrt(0.5 * d.nu * -math.expm1(-2.0 * d.alpha * dt))
    p_reset = -math.expm1(-d.xi * dt) if d.xi > 0.0 else 0.0
    return ea, sd, p_reset


def _draw_block(rng):
    """Fixed per-block consumption: normals, reset uniforms, reset-time uniforms."""
    z = rng.standard_normal(OU_BLOCK)
    u = rng.random(OU_BLOCK)
    v = rng.random(OU_BLOCK)
    return z, u, v


def simulate_ou_path(d: DiffusionParams, y, cfg: SimConfig, path_index) -> OuPath:
    """One reset-OU trajectory sampled exactly on the uniform grid.

    Between grid points the process advances by the exact transition
    (mean-reverting Gaussian); a step containing at least one reset
    replaces the update by an exact draw started from 0 at the last
    reset epoch, whose backward time is drawn from the truncated
    exponential.  Randomness is consumed in OU_BLOCK-step blocks so that
    the chunked estimators replay identical trajectories.
    """
    horizon = cfg.horizon if cfg.horizon is not None else default_horizon(d)
    dt = cfg.fpt_grid_dt if cfg.fpt_grid_dt is not None else default_fpt_grid_dt(d)
    n_steps = int(math.ceil(horizon / dt - 1e-12))
    rng = path_rng(cfg.seed, path_index)
    ea, sd, p_reset = _ou_step_coeffs(d, dt)
    values = np.empty(n_steps + 1)
    values[0] = y
    x = y
    step = 0
    while step < n_steps:
        z, u, v = _draw_block(rng)
        for k in range(min(OU_BLOCK, n_steps - step)):
            if p_reset > 0.0 and u[k] < p_reset:
                back = -math.log1p(-v[k] * p_reset) / d.xi
                m = d.beta * -math.expm1(-d.alpha * back)
                s = math.sqrt(0.5 * d.nu * -math.expm1(-2.0 * d.alpha * back))
                x = m + s * z[k]
            else:
                x = d.beta + (x - d.beta) * ea + sd * z[k]
            values[step + k + 1] = x
        step += OU_BLOCK
    return OuPath(np.arange(n_steps + 1) * dt, values)


def _ou_endpoint_chunk(d: DiffusionParams, y, dt, n_steps, seed, indices):
    """Endpoint X(n_steps * dt) for the given path indices, block-replayed."""
    gens = [path_rng(seed, i) for i in indices]
    ea, sd, p_reset = _ou_step_coeffs(d, dt)
    x = np.full(len(gens), float(y))
    step = 0
    while step < n_steps:
        block = [_draw_block(g) for g in gens]
        z = np.stack([b[0] for b in block])
        u = np.stack([b[1] for b in block])
        v = np.stack([b[2] for b in block])
        for k in range(min(OU_BLOCK, n_steps - step)):
            if p_reset > 0.0:
                reset = u[:, k] < p_reset
                back = -np.log1p(-v[:, k] * p_reset) / d.xi
                m = d.beta * -np.expm1(-d.alpha * back)
                s = np.sqrt(0.5 * d.nu * -np.expm1(-2.0 * d.alpha * back))
                x = np.where(reset, m + s * z[:, k], d.beta + (x - d.beta) * ea + sd * z[:, k])
            else:
                x = d.beta + (x - d.beta) * ea + sd * z[:, k]
        step += OU_BLOCK
    return x


def sample_ou_endpoints(d: DiffusionParams, y, t, cfg: SimConfig, chunk=2048) -> np.ndarray:
    """X(t) across cfg.n_paths paths, exact in distribution for any grid step."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")
    dt_target = cfg.fpt_grid_dt if cfg.fpt_grid_dt is not None else default_fpt_grid_dt(d)
    n_steps = max(1, int(round(t / dt_target)))
    dt = t / n_steps
    out = np.empty(cfg.n_paths)
    for lo in range(0, cfg.n_paths, chunk):
        idx = range(lo, min(lo + chunk, cfg.n_paths))
        out[lo : lo + len(idx)] = _ou_endpoint_chunk(d, y, dt, n_steps, cfg.seed, idx)
    return out


def estimate_ou_moments(d: DiffusionParams, y, t, cfg: SimConfig):
    """Sample mean and second moment of X(t) with standard errors."""
    x = sample_ou_endpoints(d, y, t, cfg)
    n = x.size
    mean = float(x.mean())
    m2 = float((x**2).mean())
    se_mean = float(x.std(ddof=1) / math.sqrt(n))
    se_m2 = float((x**2).std(ddof=1) / math.sqrt(n))
    return EstimateWithError(mean, se_mean, n), EstimateWithError(m2, se_m2, n)


# ----------------------------------------------------------------------
# first-passage estimation


def _chain_fpt_times(p: ChainParams, j, cfg: SimConfig, horizon):
    table = _rate_table(p)
    times = np.empty(cfg.n_paths)
    censored = 0
    for i in range(cfg.n_paths):
        rng = path_rng(cfg.seed, i)
        k = j
        t = 0.0
        while True:
            targets, cum, total = table[k + p.N]
            t += -math.log1p(-rng.random()) / total
            if t >= horizon:
                times[i] = np.nan
                censored += 1
                break
            k = int(targets[np.searchsorted(cum, rng.random())])
            if k == 0:
                times[i] = t
                break
    return times, censored


def _ou_fpt_chunk(d: DiffusionParams, y, dt, horizon, seed, indices, fpt_out):
    """Grid-detected first-passage times for the given paths (nan = censored).

    A path is stopped at the first grid step whose endpoint changes sign
    (recorded at the grid time, a positively biased estimate) or that
    contains a reset (recorded at the exact last-reset epoch).  Writes
    into fpt_out at the global path indices.
    """
    ea, sd, p_reset = _ou_step_coeffs(d, dt)
    alpha, beta, nu, xi = d.alpha, d.beta, d.nu, d.xi
    n_steps = int(math.ceil(horizon / dt - 1e-12))
    gens = [path_rng(seed, i) for i in indices]
    alive = np.arange(len(gens))
    idx_global = np.asarray(indices, dtype=np.int64)
    x = np.full(len(gens), float(y))
    step = 0
    while step < n_steps and alive.size:
        nb = min(OU_BLOCK, n_steps - step)
        zb = np.empty((alive.size, OU_BLOCK))
        ub = np.empty((alive.size, OU_BLOCK))
        vb = np.empty((alive.size, OU_BLOCK))
        for r, pos in enumerate(alive):
            zb[r], ub[r], vb[r] = _draw_block(gens[pos])
        xa = x[alive]
        live = np.ones(alive.size, dtype=bool)
        fpt_local = np.full(alive.size, np.nan)
        for k in range(nb):
            zk = zb[:, k]
            x_new = beta + (xa - beta) * ea + sd * zk
            if p_reset > 0.0:
                rmask = ub[:, k] < p_reset
                if rmask.any():
                    back = -np.log1p(-vb[rmask, k] * p_reset) / xi
                    x_new[rmask] = (
                        beta * -np.expm1(-alpha * back)
                        + np.sqrt(0.5 * nu * -np.expm1(-2.0 * alpha * back)) * zk[rmask]
                    )
                crossed = live & ((x_new * xa <= 0.0) | rmask)
            else:
                rmask = None
                crossed = live & (x_new * xa <= 0.0)
            if crossed.any():
                t_next = (step + k + 1) * dt
                fpt_local[crossed] = t_next
                if rmask is not None:
                    hit_reset = crossed & rmask
                    if hit_reset.any():
                        back_all = -np.log1p(-vb[:, k] * p_reset) / xi
                        fpt_local[hit_reset] = t_next - back_all[hit_reset]
                live &= ~crossed
                if not live.any():
                    xa = x_new
                    break
            xa = x_new
        done = ~np.isnan(fpt_local)
        fpt_out[idx_global[alive[done]]] = fpt_local[done]
        x[alive] = xa
        alive = alive[live]
        step += OU_BLOCK


def _moment_estimates(times, censored, n_total):
    finite = times[~np.isnan(times)]
    n = finite.size
    mean = float(finite.mean())
    var = float(finite.var(ddof=1))
    se_mean = float(math.sqrt(var / n))
    centered = finite - mean
    m4 = float((centered**4).mean())
    se_var = float(math.sqrt(max(m4 - var**2, 0.0) / n))
    return (
        EstimateWithError(mean, se_mean, n),
        EstimateWithError(var, se_var, n),
    )


def _fpt_histogram(times, n_total, n_bins=50) -> Curve:
    finite = np.sort(times[~np.isnan(times)])
    hi = finite[min(finite.size - 1, int(0.995 * finite.size))]
    edges = np.linspace(0.0, hi, n_bins + 1)
    counts, _ = np.histogram(finite, bins=edges)
    width = edges[1] - edges[0]
    density = counts / (n_total * width)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return Curve(mids, density)


def estimate_fpt(model, start, cfg: SimConfig, half_step_check=True) -> FptEstimate:
    """First-passage-time estimates through 0 from a nonzero start.

    Chain passage times are exact event times; diffusion passage times
    are grid-detected (positively biased by at most the grid resolution
    plus missed within-step excursions) and the estimate is re-run at
    half the step so the bias can be judged.  Paths that outlive the
    horizon are censored, counted, and flag the estimate beyond 0.1%.
    """
    if start == 0:
        raise ValueError("first passage from 0 is degenerate")
    horizon = cfg.horizon if cfg.horizon is not None else default_horizon(model)
    if isinstance(model, ChainParams):
        times, censored = _chain_fpt_times(model, model.check_state(start, "start"), cfg, horizon)
        half = None
    elif isinstance(model, DiffusionParams):
        dt = cfg.fpt_grid_dt if cfg.fpt_grid_dt is not None else default_fpt_grid_dt(model)
        times, censored = _ou_fpt_times(model, start, dt, horizon, cfg)
        half = None
        if half_step_check:
            times_h, censored_h = _ou_fpt_times(model, start, dt / 2.0, horizon, cfg)
            half, _ = _moment_estimates(times_h, censored_h, cfg.n_paths)
    else:
        raise TypeError(f"model must be ChainParams or DiffusionParams, got {type(model)}")
    mean, variance = _moment_estimates(times, censored, cfg.n_paths)
    frac = censored / cfg.n_paths
    return FptEstimate(
        mean=mean,
        variance=variance,
        density=_fpt_histogram(times, cfg.n_paths),
        n_censored=censored,
        censored_fraction=frac,
        flagged=frac > _CENSOR_FLAG_FRACTION,
        mean_half_step=half,
    )


def _ou_fpt_times(d, start, dt, horizon, cfg, chunk=8192):
    times = np.full(cfg.n_paths, np.nan)
    for lo in range(0, cfg.n_paths, chunk):
        idx = range(lo, min(lo + chunk, cfg.n_paths))
        _ou_fpt_chunk(d, start, dt, horizon, cfg.seed, idx, times)
    censored = int(np.isnan(times).sum())
    return times, censored
