"""Control signals and time integration of the full nonlinear swimmer."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import N_STATE, Params, State, velocity

CSV_HEADER = ("t", "x", "y", "theta", "alpha_m", "alpha_p", "u1", "u2")

# phase k of a 4-phase cycle -> (u1, u2) in units of gamma
PIECEWISE4_TABLE = ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))


class IntegrationError(RuntimeError):
    def __init__(self, message, t_last):
        super().__init__(f"{message} (last valid time t={t_last:.17g})")
        self.t_last = t_last


@dataclass(frozen=True)
class ControlSignal:
    """Spontaneous-angle inputs (u1, u2) as a function of time.

    Use the ``sinusoidal``, ``piecewise4`` and ``zero`` constructors.
    """

    kind: str
    epsilon: float = 0.0
    omega: float = 0.0
    phi: float = 0.0
    gamma: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sinusoidal", "piecewise4", "zero"):
            raise ValueError(f"unknown control kind {self.kind!r}")
        if self.kind == "sinusoidal" and not self.omega > 0:
            raise ValueError("sinusoidal control needs omega > 0")
        if self.kind == "piecewise4" and not self.tau > 0:
            raise ValueError("piecewise control needs tau > 0")

    @classmethod
    def sinusoidal(cls, epsilon, omega, phi=math.pi / 2):
        return cls("sinusoidal", epsilon=epsilon, omega=omega, phi=phi)

    @classmethod
    def piecewise4(cls, gamma, tau):
        return cls("piecewise4", gamma=gamma, tau=tau)

    @classmethod
    def zero(cls):
        return cls("zero")

    @property
    def period(self):
        if self.kind == "sinusoidal":
            return 2 * math.pi / self.omega
        if self.kind == "piecewise4":
            return 4 * self.tau
        return math.inf

    def phase_index(self, t):
        # tolerance absorbs rounding of t = k * tau
        return int(math.floor(t / self.tau + 1e-9))

    def breakpoints(self, t_end):
        """Interior times where the signal jumps, in (0, t_end)."""
        if self.kind != "piecewise4":
            return []
        n = int(math.floor(t_end / self.tau + 1e-9))
        return [k * self.tau for k in range(1, n + 1) if k * self.tau < t_end * (1 - 1e-12)]


def eval_control(sig, t):
    """(u1, u2) at time t >= 0; piecewise phases are right-open [k tau, (k+1) tau)."""
    if t < 0:
        raise ValueError("controls are defined for t >= 0")
    if sig.kind == "sinusoidal":
        return (sig.epsilon * math.sin(sig.omega * t),
                sig.epsilon * math.sin(sig.omega * t + sig.phi))
    if sig.kind == "piecewise4":
        a, b = PIECEWISE4_TABLE[sig.phase_index(t) % 4]
        return a * sig.gamma, b * sig.gamma
    return 0.0, 0.0


@dataclass(frozen=True)
class IntegratorOptions:
    """``method`` is "RK45" (adaptive, default) or "RK4" (fixed step ``dt``).

    ``sample_dt`` is the output stride; by default 1/32 of the control period.
    Fixed-step runs record every step instead.
    """

    method: str = "RK45"
    rtol: float = 1e-10
    atol: float = 1e-10
    dt: float = 1e-3
    sample_dt: float | None = None
    max_step: float = math.inf

    def __post_init__(self):
        if self.method not in ("RK45", "RK4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.rtol <= 0 or self.atol <= 0 or self.dt <= 0:
            raise ValueError("tolerances and step must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    params: Params
    signal: ControlSignal
    options: IntegratorOptions = field(default_factory=IntegratorOptions)

    def __post_init__(self):
        n = len(self.times)
        if self.states.shape != (n, N_STATE) or self.controls.shape != (n, 2):
            raise ValueError("times, states and controls must have matching lengths")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory contains non-finite states")
        for arr in (self.times, self.states, self.controls):
            arr.flags.writeable = False

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self):
        return State(*self.states[-1])

    def state_at(self, t, rtol=1e-9):
        """Stored state at a sample time (no interpolation)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > rtol * max(1.0, abs(t)):
            raise ValueError(f"no sample at t={t!r}; nearest is {self.times[i]!r}")
        return self.states[i]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            write_csv_rows(fh, self)


def write_csv_rows(fh, traj):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t, s, u in zip(traj.times, traj.states, traj.controls):
        w.writerow([f"{v:.17g}" for v in (t, *s, *u)])


def read_csv(path):
    """Load a trajectory CSV as (times, states, controls) arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:6], data[:, 6:8]


def _segments(sig, t_end):
    edges = [0.0, *sig.breakpoints(t_end), t_end]
    return list(zip(edges[:-1], edges[1:]))


def _rk4_segment(f, a, b, y, dt):
    n = max(1, math.ceil((b - a) / dt - 1e-9))
    h = (b - a) / n
    ts, ys = [], []
    t = a
    for i in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = a + (i + 1) * h
        ts.append(t)
        ys.append(y)
    return ts, ys


def integrate(y0, sig, t_end, params, opts=None):
    """Integrate ydot = q0(y) + u1 q1(y) + u2 q2(y) from y(0) = y0 to t_end.

    Piecewise-constant signals are integrated phase by phase, restarting at
    every jump so no step straddles a discontinuity; within a phase the input
    is held at its table value rather than re-evaluated from t.
    """
    opts = opts or IntegratorOptions()
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    y = np.asarray(y0, dtype=float).copy()
    if y.shape != (N_STATE,) or not np.all(np.isfinite(y)):
        raise ValueError(f"bad initial state {y0!r}")

    sample_dt = opts.sample_dt
    if sample_dt is None:
        sample_dt = sig.period / 32 if math.isfinite(sig.period) else t_end / 1000
    n_samples = int(math.floor(t_end / sample_dt + 1e-9))
    grid = sample_dt * np.arange(n_samples + 1)
    if t_end - grid[-1] > 1e-9 * sample_dt:
        grid = np.append(grid, t_end)
    else:
        grid[-1] = t_end

    def checked(t, yy, u1, u2):
        try:
            v = velocity(yy, u1, u2, params)
        except ValueError as exc:
            raise IntegrationError(str(exc), t) from None
        if not np.all(np.isfinite(v)):
            raise IntegrationError("non-finite velocity", t)
        return v

    times, states, controls = [0.0], [y.copy()], [eval_control(sig, 0.0)]
    for a, b in _segments(sig, t_end):
        if sig.kind == "piecewise4":
            fixed = eval_control(sig, a + 0.5 * (b - a))
            def rhs(t, yy, u=fixed):
                return checked(t, yy, u[0], u[1])
        else:
            def rhs(t, yy):
                return checked(t, yy, *eval_control(sig, t))

        if opts.method == "RK4":
            ts, ys = _rk4_segment(rhs, a, b, y, opts.dt)
            y = ys[-1]
        else:
            tol = 1e-9 * sample_dt
            t_eval = grid[(grid > a + tol) & (grid <= b + tol)]
            t_eval = np.clip(t_eval, a, b)
            if len(t_eval) == 0 or t_eval[-1] < b:
                t_eval = np.append(t_eval, b)
            sol = solve_ivp(rhs, (a, b), y, method="RK45", t_eval=t_eval,
                            rtol=opts.rtol, atol=opts.atol, max_step=opts.max_step)
            if sol.status != 0:
                t_last = sol.t[-1] if len(sol.t) else a
                raise IntegrationError(f"integration failed: {sol.message}", t_last)
            ts, ys = list(sol.t), list(sol.y.T)
            y = ys[-1].copy()
            keep = [i for i, t in enumerate(ts) if np.any(np.abs(grid - t) <= tol)]
            ts, ys = [ts[i] for i in keep], [ys[i] for i in keep]
        for t, yy in zip(ts, ys):
            times.append(t)
            states.append(np.asarray(yy, dtype=float))
            if sig.kind == "piecewise4":
                controls.append(fixed if t < b else eval_control(sig, t))
            else:
                controls.append(eval_control(sig, t))

    return Trajectory(np.array(times), np.array(states), np.array(controls, dtype=float),
                      params, sig, opts)


def default_transient_periods(sig, params):
    """Periods to discard so the slowest shape mode exp(-6 nu t) has decayed by 1e8."""
    return max(1, math.ceil(math.log(1e8) / (6 * params.nu * sig.period)))


def net_displacement_per_period(traj, n_skip=None, n_avg=100):
    """Mean (dx, dy) over one period, averaged over ``n_avg`` periods after ``n_skip``."""
    sig = traj.signal
    if sig.kind == "zero":
        return 0.0, 0.0
    if n_skip is None:
        n_skip = default_transient_periods(sig, traj.params)
    T = sig.period
    t0, t1 = n_skip * T, (n_skip + n_avg) * T
    if t1 > traj.times[-1] * (1 + 1e-12):
        raise ValueError(
            f"trajectory spans {traj.times[-1]:.6g} but {n_skip}+{n_avg} periods need {t1:.6g}")
    d = (traj.state_at(t1) - traj.state_at(t0)) / n_avg
    return float(d[0]), float(d[1])


def mean_velocity(traj, n_skip=None, n_avg=100):
    """Average swimming speed: per-period displacement magnitude over the period."""
    if traj.signal.kind == "zero":
        return 0.0
    dx, dy = net_displacement_per_period(traj, n_skip, n_avg)
    return math.hypot(dx, dy) / traj.signal.period
