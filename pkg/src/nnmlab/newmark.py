"""Implicit Newmark time stepping for the nonlinear beam.

Average-acceleration Newmark (beta=1/4, gamma=1/2) with a Newton inner loop
on the cubic spring force.  The linearised effective stiffness is factorised
once per run; Newton reuses that factorisation (modified Newton) and falls
back to refactorising with the spring tangent if it has not converged after
a few sweeps.  Velocities come from the Newmark update itself, never from
finite-differencing the stored displacements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .beam import BeamModel, nonlinear_force, nonlinear_tangent
from .errors import DivergenceError, IntegrationError, InvalidInputError

NEWMARK_BETA = 0.25
NEWMARK_GAMMA = 0.5
NEWTON_RTOL = 1e-10
NEWTON_ATOL = 1e-12
MAX_NEWTON = 50
# Newton sweeps with the frozen linear factorisation before refactorising
# with the spring tangent included.
MODIFIED_NEWTON_SWEEPS = 8


@dataclass(frozen=True)
class StepSine:
    """Mono-harmonic force A*sin(2*pi*f*t) at one node's transverse DOF."""

    node: int
    amplitude: float
    frequency: float

    def to_dict(self):
        return {
            "type": "step_sine",
            "node": self.node,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
        }


@dataclass(frozen=True)
class InitialVelocity:
    """Impulsive start: velocity [m/s] imparted at one node, no forcing."""

    node: int
    value: float

    def to_dict(self):
        return {"type": "initial_velocity", "node": self.node, "value": self.value}


def forcing_from_dict(d):
    if d is None or d.get("type") in (None, "none"):
        return None
    if d["type"] == "step_sine":
        return StepSine(int(d["node"]), float(d["amplitude"]), float(d["frequency"]))
    if d["type"] == "initial_velocity":
        return InitialVelocity(int(d["node"]), float(d["value"]))
    raise InvalidInputError(f"unknown forcing type {d['type']!r}")


@dataclass(frozen=True)
class StateTrajectory:
    """Uniformly sampled state history; row t is [x(t), xdot(t)]."""

    dt: float
    states: np.ndarray  # T x 2n
    forcing: StepSine | InitialVelocity | None = None

    @property
    def n_dof(self):
        return self.states.shape[1] // 2

    @property
    def n_steps(self):
        return self.states.shape[0]

    @property
    def times(self):
        return self.dt * np.arange(self.states.shape[0])

    def displacements(self):
        return self.states[:, : self.n_dof]

    def velocities(self):
        return self.states[:, self.n_dof :]

    def forcing_dict(self):
        return {"type": "none"} if self.forcing is None else self.forcing.to_dict()


def step_sine_force(model: BeamModel, node, amplitude, frequency, t) -> np.ndarray:
    """Force vector, zero except A*sin(2*pi*f*t) at the node's transverse DOF."""
    dof = model.transverse_dof(node)
    force = np.zeros(model.n_dof)
    force[dof] = amplitude * np.sin(2.0 * np.pi * frequency * t)
    return force


def energy(model: BeamModel, state) -> float:
    """Mechanical energy 0.5*v'Mv + 0.5*x'Kx + 0.25*k_nl*x_s^4 [J]."""
    state = np.asarray(state, dtype=float)
    n = model.n_dof
    if state.shape != (2 * n,):
        raise InvalidInputError(f"state has shape {state.shape}, expected ({2 * n},)")
    x, v = state[:n], state[n:]
    e = 0.5 * v @ (model.mass @ v) + 0.5 * x @ (model.stiffness @ x)
    spring = model.nonlinear_spring
    if spring is not None:
        e += 0.25 * spring.coefficient * x[spring.dof] ** 4
    return float(e)


def integrate(
    model: BeamModel,
    forcing=None,
    x0=None,
    v0=None,
    dt: float = 1e-4,
    steps: int = 1000,
    f_max: float | None = None,
) -> StateTrajectory:
    """Advance M*xdd + C*xd + K*x + f_nl(x) = f(t) for ``steps`` steps.

    ``f_max`` is an optional accuracy guard: the caller declares the highest
    frequency [Hz] it needs resolved, and dt must satisfy
    dt * 2*pi*f_max < 0.5.  Initial state defaults to rest; an
    InitialVelocity forcing seeds v0 at its node.  Returns steps+1 samples
    including the initial state.
    """
    n = model.n_dof
    if dt <= 0 or steps < 1:
        raise InvalidInputError("dt must be positive and steps >= 1")
    if f_max is not None and dt * 2.0 * np.pi * f_max >= 0.5:
        raise InvalidInputError(
            f"dt={dt} too coarse for f_max={f_max} Hz (need dt*2*pi*f_max < 0.5)"
        )

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    v = np.zeros(n) if v0 is None else np.array(v0, dtype=float)
    if x.shape != (n,) or v.shape != (n,):
        raise InvalidInputError(f"initial state must have {n} entries")

    force_dof = -1
    amplitude = 0.0
    omega = 0.0
    if isinstance(forcing, StepSine):
        force_dof = model.transverse_dof(forcing.node)
        amplitude = forcing.amplitude
        omega = 2.0 * np.pi * forcing.frequency
    elif isinstance(forcing, InitialVelocity):
        v = v.copy()
        v[model.transverse_dof(forcing.node)] += forcing.value
    elif forcing is not None:
        raise InvalidInputError(f"unsupported forcing {forcing!r}")

    mass, damp, stiff = model.mass, model.damping, model.stiffness
    beta, gamma = NEWMARK_BETA, NEWMARK_GAMMA
    c_a = 1.0 / (beta * dt * dt)
    c_v = gamma / (beta * dt)
    k_eff = c_a * mass + c_v * damp + stiff
    lu_lin = scipy.linalg.lu_factor(k_eff)

    spring = model.nonlinear_spring
    spring_dof = spring.dof if spring is not None else -1
    k_nl = spring.coefficient if spring is not None else 0.0

    def ext_force(t):
        f = np.zeros(n)
        if force_dof >= 0:
            f[force_dof] = amplitude * np.sin(omega * t)
        return f

    a = np.linalg.solve(mass, ext_force(0.0) - damp @ v - stiff @ x - nonlinear_force(model, x))

    # Rank-one reduction: with K_eff x = b - g*e_s and g = k_nl*x_s^3, the
    # spring DOF satisfies the scalar cubic x_s + w_s*k_nl*x_s^3 = xb_s with
    # w = K_eff^-1 e_s, so each implicit step is solved exactly.
    w_col = None
    if k_nl != 0.0:
        e_s = np.zeros(n)
        e_s[spring_dof] = 1.0
        w_col = scipy.linalg.lu_solve(lu_lin, e_s)

    out = np.empty((steps + 1, 2 * n))
    out[0, :n] = x
    out[0, n:] = v

    for step in range(1, steps + 1):
        t = step * dt
        f_ext = ext_force(t)
        x_pred = x + dt * v + (0.5 - beta) * dt * dt * a
        v_pred = v + (1.0 - gamma) * dt * a

        b = f_ext + c_a * (mass @ x_pred) + damp @ (c_v * x_pred - v_pred)
        x_new = scipy.linalg.lu_solve(lu_lin, b)
        if k_nl != 0.0:
            x_new = x_new - _scalar_spring_solve(
                x_new[spring_dof], w_col[spring_dof], k_nl, x[spring_dof]
            ) * w_col

        converged = False
        for it in range(MAX_NEWTON):
            a_new = c_a * (x_new - x_pred)
            v_new = v_pred + gamma * dt * a_new
            inertial = mass @ a_new
            damping_f = damp @ v_new
            elastic = stiff @ x_new
            residual = inertial + damping_f + elastic - f_ext
            if k_nl != 0.0:
                residual[spring_dof] += k_nl * x_new[spring_dof] ** 3
            ref = max(
                np.linalg.norm(f_ext),
                np.linalg.norm(inertial),
                np.linalg.norm(damping_f),
                np.linalg.norm(elastic),
            )
            if np.linalg.norm(residual) < NEWTON_RTOL * ref + NEWTON_ATOL:
                converged = True
                break
            if k_nl != 0.0 and it >= MODIFIED_NEWTON_SWEEPS:
                jac = k_eff.copy()
                jac[spring_dof, spring_dof] += nonlinear_tangent(model, x_new)
                x_new = x_new - np.linalg.solve(jac, residual)
            else:
                x_new = x_new - scipy.linalg.lu_solve(lu_lin, residual)

        if not converged:
            raise IntegrationError(f"Newton stalled at step {step} (t={t:.6g} s)", step=step)
        if not np.all(np.isfinite(x_new)):
            raise DivergenceError(f"non-finite state at step {step} (t={t:.6g} s)", step=step)

        x, v, a = x_new, v_new, a_new
        out[step, :n] = x
        out[step, n:] = v

    return StateTrajectory(dt=dt, states=out, forcing=forcing)


def _scalar_spring_solve(xb_s, w_s, k_nl, x_start):
    """Newton on h(x) = x + w_s*k_nl*x^3 - xb_s = 0; returns g = k_nl*x^3.

    h' = 1 + 3*w_s*k_nl*x^2 >= 1 for w_s >= 0, so the root is unique and the
    iteration is well conditioned.
    """
    c = w_s * k_nl
    x = x_start if np.isfinite(x_start) else xb_s
    tol = 1e-15 * max(1.0, abs(xb_s))
    for _ in range(100):
        h = x + c * x**3 - xb_s
        if abs(h) <= tol:
            break
        x = x - h / (1.0 + 3.0 * c * x * x)
    return k_nl * x**3
