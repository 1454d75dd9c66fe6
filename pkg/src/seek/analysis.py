"""Stability certificates and convergence metrics for recorded runs.

The bracket system for a quartic field is linear time-varying in the offset
from the minimizer. In the frame co-rotating with the heading it reads

    xi'  = -kappa1(t)*xi - (omega + kappa2(t))*eta
    eta' =  omega*xi

with kappa1 = c1*cos^4(omega*t) + c2*sin^4(omega*t) and
kappa2 = sin(2*omega*t)*(c1*cos^2(omega*t) - c2*sin^2(omega*t))/2, where
c1 = 4!*c*a^3*C1 and c2 = 4!*c*a^3*C2. :func:`certify` checks a sufficient
condition for exponential decay of that system and searches for a Lyapunov
cross weight gamma; the remaining helpers quantify decay and averaging
quality on trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import to_rotating
from .sim import Trajectory

__all__ = [
    "StabilityCertificate",
    "VdotReport",
    "DecayFit",
    "lbs_gains",
    "certify",
    "lyapunov_value",
    "vdot_sample",
    "decay_envelope",
    "fit_decay",
    "averaging_gap",
    "convergence_time",
]

GAMMA_CANDIDATES = 1000


def lbs_gains(c: float, a: float, C1: float, C2: float) -> tuple[float, float]:
    """Contraction gains (c1, c2) = 4!*c*a^3*(C1, C2) of the bracket system."""
    scale = 24.0 * c * a**3
    return (scale * C1, scale * C2)


def _branch_threshold(cs: float, cl: float) -> float:
    # Omega bound for the branch with cs = smaller gain, cl = larger gain;
    # valid on cs in (3*cl/5, cl] where the denominator is positive.
    return (
        2.0 * cs * (3.0 * cl - cs) * (2.0 * cl - cs)
        / (16.0 * cs**2 - (3.0 * cl - cs) ** 2)
    )


@dataclass(frozen=True)
class StabilityCertificate:
    """Outcome of the sufficient-condition check for one gain triple.

    ``condition_branch`` records which side of the gain-ordering condition
    held ('i' for c1 <= c2, 'ii' for the mirror, 'both' when c1 = c2, 'none').
    ``omega_threshold`` is the heading-rate bound of the holding branch, or
    None when neither interval condition is met. ``gamma_feasible`` is a
    Lyapunov cross weight certifying decay, or None if the search failed.
    """

    c1: float
    c2: float
    omega: float
    k11: float
    k12: float
    k2: float
    condition_branch: str
    omega_threshold: float | None
    gamma_feasible: float | None
    verdict: bool


def certify(c1: float, c2: float, omega: float) -> StabilityCertificate:
    """Check the exponential-decay condition and search for a Lyapunov weight.

    The branch test asks for near-balanced gains (each within a factor 5/3
    of the other) and a heading rate above a threshold set by the gains.
    The weight search evaluates the feasibility quadratic

        (4*w^2 + 4*k2*w + k12^2)*g^2
            - 2*(2*w*k11 + 2*k11*k2 - k2*k12)*g + k2^2 < 0

    on 1000 log-spaced candidates g in (0, min(1, k11/omega)). The verdict is
    true only when a branch holds and a feasible weight exists.
    """
    for name, value in (("c1", c1), ("c2", c2), ("omega", omega)):
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive and finite")

    k11 = 0.5 * min(c1, c2)
    k12 = max(c1, c2)
    k2 = 0.25 * abs(c1 - c2) + 0.125 * (c1 + c2)

    branch_i = 0.6 * c2 < c1 <= c2
    branch_ii = 0.6 * c1 < c2 <= c1
    threshold = None
    branch = "none"
    omega_ok = False
    if branch_i and branch_ii:
        branch = "both"
        threshold = _branch_threshold(c1, c2)
        omega_ok = omega > threshold
    elif branch_i:
        branch = "i"
        threshold = _branch_threshold(c1, c2)
        omega_ok = omega > threshold
    elif branch_ii:
        branch = "ii"
        threshold = _branch_threshold(c2, c1)
        omega_ok = omega > threshold

    gamma_max = min(1.0, k11 / omega)
    candidates = gamma_max * np.geomspace(1e-9, 1.0, GAMMA_CANDIDATES, endpoint=False)
    q = (
        (4.0 * omega**2 + 4.0 * k2 * omega + k12**2) * candidates**2
        - 2.0 * (2.0 * omega * k11 + 2.0 * k11 * k2 - k2 * k12) * candidates
        + k2**2
    )
    feasible = q < 0.0
    gamma = float(candidates[np.argmin(q)]) if feasible.any() else None

    return StabilityCertificate(
        c1=c1,
        c2=c2,
        omega=omega,
        k11=k11,
        k12=k12,
        k2=k2,
        condition_branch=branch,
        omega_threshold=threshold,
        gamma_feasible=gamma,
        verdict=bool(omega_ok and gamma is not None),
    )


def lyapunov_value(xi: float, eta: float, gamma: float) -> float:
    """V = (xi^2 + eta^2)/2 + gamma*xi*eta.

    For gamma in (0, 1) this is sandwiched between (1 -/+ gamma)/2 times the
    squared rotating-frame error, so decay of V means decay of the error.
    """
    return 0.5 * (xi * xi + eta * eta) + gamma * xi * eta


@dataclass(frozen=True)
class VdotReport:
    """Largest Lyapunov derivative seen along a trajectory."""

    max_vdot: float
    gamma: float
    n_samples: int
    certified: bool

    @property
    def decaying(self) -> bool:
        return self.max_vdot < 0.0


def vdot_sample(
    traj: Trajectory,
    target: tuple[float, float],
    c1: float,
    c2: float,
    omega: float,
    gamma: float,
) -> VdotReport:
    """Evaluate the analytic Lyapunov derivative at every recorded sample.

    V' = -(kappa1 - gamma*omega)*xi^2 - gamma*(omega + kappa2)*eta^2
         - (gamma*kappa1 + kappa2)*xi*eta

    Samples with squared error below 1e-12 are skipped; the sign there is
    dominated by rounding, not dynamics. ``certified`` reflects whether the
    parameters pass :func:`certify`; an uncertified set still gets a report.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    cert = certify(c1, c2, omega)
    worst = -math.inf
    used = 0
    for (x, y), t in zip(traj.positions(), traj.t):
        xi, eta = to_rotating(x, y, target, omega, t)
        if xi * xi + eta * eta < 1e-12:
            continue
        ct = math.cos(omega * t)
        st = math.sin(omega * t)
        kappa1 = c1 * ct**4 + c2 * st**4
        kappa2 = 0.5 * math.sin(2.0 * omega * t) * (c1 * ct**2 - c2 * st**2)
        vdot = (
            -(kappa1 - gamma * omega) * xi * xi
            - gamma * (omega + kappa2) * eta * eta
            - (gamma * kappa1 + kappa2) * xi * eta
        )
        if vdot > worst:
            worst = vdot
        used += 1
    if used == 0:
        raise ValueError("no samples outside the 1e-12 error floor")
    return VdotReport(
        max_vdot=worst, gamma=gamma, n_samples=used, certified=cert.verdict
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit of a per-period error envelope."""

    rate: float
    r_squared: float
    window: tuple[float, float]


def decay_envelope(
    traj: Trajectory,
    target: tuple[float, float],
    window: tuple[float, float],
    omega: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-period error envelope inside the window.

    Samples are grouped into consecutive heading periods of 2*pi/omega; each
    group contributes its peak error at the time it occurred. Peaks rather
    than raw samples make the fit blind to the rotation-rate oscillation.
    """
    t0, t1 = window
    if not (t1 > t0):
        raise ValueError("degenerate window: empty time span")
    if t0 < traj.t[0] - 1e-12 or t1 > traj.t[-1] + 1e-12:
        raise ValueError("degenerate window: outside the trajectory span")
    mask = (traj.t >= t0) & (traj.t <= t1)
    if mask.sum() < 20:
        raise ValueError("degenerate window: fewer than 20 samples")
    t = traj.t[mask]
    err = traj.error_norm(target)[mask]
    period = 2.0 * math.pi / omega
    groups = np.floor((t - t0) / period).astype(int)
    t_env = []
    env = []
    for g in np.unique(groups):
        sel = groups == g
        i = np.argmax(err[sel])
        t_env.append(t[sel][i])
        env.append(err[sel][i])
    return np.asarray(t_env), np.asarray(env)


def fit_decay(
    traj: Trajectory,
    target: tuple[float, float],
    window: tuple[float, float],
    omega: float | None = None,
) -> DecayFit:
    """Fit log(envelope) = log(q) - rate*t over the window.

    ``omega`` defaults to the trajectory's recorded heading rate. Envelope
    values are floored at 1e-12 before taking logs. R^2 is reported against
    the log-envelope variance and defined as 1.0 for a constant envelope.
    """
    if omega is None:
        omega = traj.meta.get("omega")
        if omega is None:
            raise ValueError("omega not given and absent from trajectory meta")
    t_env, env = decay_envelope(traj, target, window, omega)
    if len(t_env) < 2:
        raise ValueError("degenerate window: fewer than two envelope periods")
    logs = np.log(np.maximum(env, 1e-12))
    coeffs, residuals, *_ = np.polyfit(t_env, logs, 1, full=True)
    predicted = np.polyval(coeffs, t_env)
    ss_res = float(np.sum((logs - predicted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-30 else 1.0 - ss_res / ss_tot
    return DecayFit(rate=-float(coeffs[0]), r_squared=r2, window=(window[0], window[1]))


def averaging_gap(esc_traj: Trajectory, lbs_traj: Trajectory) -> float:
    """Largest position distance between a closed loop and its bracket system.

    Both trajectories must be recorded on the same grid from the same start;
    mismatched timestamps raise rather than silently comparing unlike times.
    """
    if len(esc_traj) != len(lbs_traj):
        raise ValueError(
            f"sample count mismatch: {len(esc_traj)} vs {len(lbs_traj)}"
        )
    scale = np.maximum(1.0, np.abs(esc_traj.t))
    if np.any(np.abs(esc_traj.t - lbs_traj.t) > 1e-9 * scale):
        raise ValueError("timestamp mismatch between trajectories")
    d0 = math.hypot(
        esc_traj.x[0] - lbs_traj.x[0], esc_traj.y[0] - lbs_traj.y[0]
    )
    if d0 > 1e-12:
        raise ValueError("trajectories do not share the initial position")
    gaps = np.hypot(esc_traj.x - lbs_traj.x, esc_traj.y - lbs_traj.y)
    return float(gaps.max())


def convergence_time(
    traj: Trajectory, target: tuple[float, float], radius: float
) -> float | None:
    """First recorded time after which every sample stays inside the radius.

    Returns None when the last sample is still outside, and the first
    timestamp when the whole trajectory already lives inside.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    err = traj.error_norm(target)
    outside = np.nonzero(err >= radius)[0]
    if len(outside) == 0:
        return float(traj.t[0])
    last_out = outside[-1]
    if last_out == len(err) - 1:
        return None
    return float(traj.t[last_out + 1])
