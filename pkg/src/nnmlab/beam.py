"""Finite-element model of the clamped nonlinear beam.

A slender main beam is clamped on its left side and joined at its tip to a
short, very thin beam whose far end is clamped as well.  The junction is
semi-rigid: the main-side and thin-side cross sections share the transverse
displacement but keep separate rotations, coupled by a rotational spring of
stiffness ``k_r`` (``k_r -> inf`` recovers a rigid joint, ``k_r = 0`` a
hinge).  A grounded cubic spring at the junction stands in for the geometric
stiffening of the thin beam.  Both segments are discretised with 2-node
Euler-Bernoulli elements (cubic Hermite shape functions, consistent mass);
clamped end DOFs are eliminated.

Damping is Rayleigh: ``C = alpha*K + beta*M``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, ModelError

# Measured properties of the benchmark beam (SI units).
MAIN_LENGTH = 0.7
MAIN_WIDTH = 0.01254
MAIN_THICKNESS = 0.01254
THIN_LENGTH = 0.0406
THIN_WIDTH = 0.0149
THIN_THICKNESS = 0.00051
YOUNGS_MODULUS = 1.605e11
DENSITY = 8300.0

# Rayleigh damping of the reference simulation: C = 3e-7*K + 5*M.
DEFAULT_ALPHA = 3e-7
DEFAULT_BETA = 5.0

# Junction rotational stiffness [N*m/rad], calibrated so the first linear
# frequency of the assembled model lands on 27.7 Hz (see
# scripts/calibrate_junction.py).  Overridable through the beam config.
DEFAULT_K_R = 8.2395

DEFAULT_MAIN_ELEMENTS = 14
DEFAULT_THIN_ELEMENTS = 3

# Node roles along the 0..17 axis: shaker at main node 2, accelerometers at
# main nodes 3 and 7, junction (main-beam tip) at node 14.
DEFAULT_FORCE_NODE = 2
DEFAULT_SENSOR_NODES = (3, 7)
DEFAULT_MONITOR_NODE = 14

STRONG_K_NL = 15e9
WEAK_K_NL = 0.1


@dataclass(frozen=True)
class BeamGeometry:
    """Geometric and material description of the two-segment beam."""

    main_length: float = MAIN_LENGTH
    main_width: float = MAIN_WIDTH
    main_thickness: float = MAIN_THICKNESS
    thin_length: float = THIN_LENGTH
    thin_width: float = THIN_WIDTH
    thin_thickness: float = THIN_THICKNESS
    youngs_modulus: float = YOUNGS_MODULUS
    density: float = DENSITY

    def validate(self):
        for name, value in self.__dict__.items():
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(f"geometry field {name!r} must be positive, got {value}")
        if self.thin_thickness >= self.main_thickness:
            raise InvalidInputError("thin beam must be thinner than the main beam")

    @property
    def main_ei(self):
        return self.youngs_modulus * self.main_width * self.main_thickness**3 / 12.0

    @property
    def thin_ei(self):
        return self.youngs_modulus * self.thin_width * self.thin_thickness**3 / 12.0

    @property
    def main_rho_a(self):
        return self.density * self.main_width * self.main_thickness

    @property
    def thin_rho_a(self):
        return self.density * self.thin_width * self.thin_thickness


@dataclass(frozen=True)
class CubicSpring:
    """Grounded cubic spring f = k_nl * x**3 acting on one free DOF."""

    dof: int
    coefficient: float
    exponent: int = 3


@dataclass(frozen=True)
class BeamModel:
    """Assembled matrices on the free DOFs plus node bookkeeping.

    ``node_dof_map[node]`` gives the free-DOF indices ``(transverse,
    rotation)`` of an axis node, with ``-1`` marking constrained DOFs.  The
    thin-side junction rotation (semi-rigid joint) is an extra free DOF not
    attached to any axis node; its index is ``junction_thin_rotation_dof``.
    For models built via :func:`custom_model` the node map is the identity
    on transverse DOFs.
    """

    mass: np.ndarray
    stiffness: np.ndarray
    damping: np.ndarray
    alpha: float
    beta: float
    nonlinear_spring: CubicSpring | None
    rotational_spring_node: int | None
    rotational_spring_k: float
    junction_thin_rotation_dof: int | None
    node_positions: np.ndarray
    node_dof_map: np.ndarray
    constrained_dofs: tuple[int, ...]
    geometry: BeamGeometry | None = None
    _modes_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_dof(self):
        return self.mass.shape[0]

    @property
    def n_nodes(self):
        return self.node_dof_map.shape[0]

    def transverse_dof(self, node):
        """Free-DOF index of a node's transverse displacement."""
        if not 0 <= node < self.n_nodes:
            raise InvalidInputError(f"node {node} out of range [0, {self.n_nodes})")
        dof = int(self.node_dof_map[node, 0])
        if dof < 0:
            raise InvalidInputError(f"node {node} transverse DOF is constrained")
        return dof

    def rotation_dof(self, node):
        if not 0 <= node < self.n_nodes:
            raise InvalidInputError(f"node {node} out of range [0, {self.n_nodes})")
        dof = int(self.node_dof_map[node, 1])
        if dof < 0:
            raise InvalidInputError(f"node {node} rotation DOF is constrained")
        return dof


@dataclass(frozen=True)
class LinearModes:
    """Mass-normalised eigensolution, frequencies ascending [Hz]."""

    frequencies: np.ndarray
    shapes: np.ndarray  # n_dof x n_modes


def _element_stiffness(ei, h):
    return (
        ei
        / h**3
        * np.array(
            [
                [12.0, 6.0 * h, -12.0, 6.0 * h],
                [6.0 * h, 4.0 * h**2, -6.0 * h, 2.0 * h**2],
                [-12.0, -6.0 * h, 12.0, -6.0 * h],
                [6.0 * h, 2.0 * h**2, -6.0 * h, 4.0 * h**2],
            ]
        )
    )


def _element_mass(rho_a, h):
    return (
        rho_a
        * h
        / 420.0
        * np.array(
            [
                [156.0, 22.0 * h, 54.0, -13.0 * h],
                [22.0 * h, 4.0 * h**2, 13.0 * h, -3.0 * h**2],
                [54.0, 13.0 * h, 156.0, -22.0 * h],
                [-13.0 * h, -3.0 * h**2, -22.0 * h, 4.0 * h**2],
            ]
        )
    )


def assemble_beam(
    geometry: BeamGeometry | None = None,
    k_nl: float = STRONG_K_NL,
    k_r: float = DEFAULT_K_R,
    damping_coeffs: tuple[float, float] = (DEFAULT_ALPHA, DEFAULT_BETA),
    main_elements: int = DEFAULT_MAIN_ELEMENTS,
    thin_elements: int = DEFAULT_THIN_ELEMENTS,
) -> BeamModel:
    """Assemble the clamped-clamped two-segment beam.

    The main beam is meshed with ``main_elements`` elements, the thin beam
    with ``thin_elements``.  The junction node (main-beam tip) carries the
    semi-rigid rotational coupling ``k_r`` between the two segments and the
    grounded cubic spring ``k_nl`` on its transverse DOF.  Translations and
    rotations at both outer ends are eliminated.
    """
    geometry = geometry or BeamGeometry()
    geometry.validate()
    if main_elements < 1 or thin_elements < 1:
        raise InvalidInputError("element counts must be >= 1")
    if k_nl < 0 or k_r < 0:
        raise InvalidInputError("spring coefficients must be non-negative")

    n_nodes = main_elements + thin_elements + 1
    theta_b = 2 * n_nodes  # thin-side junction rotation, appended after the node grid
    n_total = theta_b + 1
    mass = np.zeros((n_total, n_total))
    stiffness = np.zeros((n_total, n_total))

    h_main = geometry.main_length / main_elements
    h_thin = geometry.thin_length / thin_elements
    k_main = _element_stiffness(geometry.main_ei, h_main)
    m_main = _element_mass(geometry.main_rho_a, h_main)
    k_thin = _element_stiffness(geometry.thin_ei, h_thin)
    m_thin = _element_mass(geometry.thin_rho_a, h_thin)

    for e in range(main_elements):
        idx = np.array([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3])
        stiffness[np.ix_(idx, idx)] += k_main
        mass[np.ix_(idx, idx)] += m_main

    junction = main_elements
    for e in range(thin_elements):
        left = junction + e
        left_rot = theta_b if e == 0 else 2 * left + 1
        idx = np.array([2 * left, left_rot, 2 * left + 2, 2 * left + 3])
        stiffness[np.ix_(idx, idx)] += k_thin
        mass[np.ix_(idx, idx)] += m_thin

    # Joint spring: moment k_r * (theta_thin - theta_main) on each side.
    theta_a = 2 * junction + 1
    stiffness[theta_a, theta_a] += k_r
    stiffness[theta_b, theta_b] += k_r
    stiffness[theta_a, theta_b] -= k_r
    stiffness[theta_b, theta_a] -= k_r

    # Clamp both outer ends: drop translation and rotation there.
    constrained = (0, 1, 2 * (n_nodes - 1), 2 * (n_nodes - 1) + 1)
    free = np.array([i for i in range(n_total) if i not in constrained])
    mass = mass[np.ix_(free, free)]
    stiffness = stiffness[np.ix_(free, free)]

    global_to_free = {int(g): i for i, g in enumerate(free)}
    node_dof_map = np.full((n_nodes, 2), -1, dtype=int)
    for n in range(n_nodes):
        node_dof_map[n, 0] = global_to_free.get(2 * n, -1)
        node_dof_map[n, 1] = global_to_free.get(2 * n + 1, -1)

    positions = np.concatenate(
        [
            np.linspace(0.0, geometry.main_length, main_elements + 1),
            geometry.main_length + np.linspace(h_thin, geometry.thin_length, thin_elements),
        ]
    )

    alpha, beta = damping_coeffs
    damping = alpha * stiffness + beta * mass

    spring = None
    if k_nl != 0.0:
        spring = CubicSpring(dof=int(node_dof_map[junction, 0]), coefficient=float(k_nl))

    return BeamModel(
        mass=mass,
        stiffness=stiffness,
        damping=damping,
        alpha=float(alpha),
        beta=float(beta),
        nonlinear_spring=spring,
        rotational_spring_node=junction,
        rotational_spring_k=float(k_r),
        junction_thin_rotation_dof=global_to_free[theta_b],
        node_positions=positions,
        node_dof_map=node_dof_map,
        constrained_dofs=constrained,
        geometry=geometry,
    )


def custom_model(
    mass,
    stiffness,
    damping=None,
    damping_coeffs=(0.0, 0.0),
    k_nl=0.0,
    spring_dof=0,
) -> BeamModel:
    """Wrap explicit M, C, K matrices (SDOF Duffing, 2-DOF test systems).

    When ``damping`` is omitted it is built from the Rayleigh coefficients.
    The node map is the identity on transverse DOFs so node indices can be
    used interchangeably with DOF indices.
    """
    mass = np.atleast_2d(np.asarray(mass, dtype=float))
    stiffness = np.atleast_2d(np.asarray(stiffness, dtype=float))
    if mass.shape != stiffness.shape or mass.shape[0] != mass.shape[1]:
        raise InvalidInputError("mass and stiffness must be square and same shape")
    alpha, beta = damping_coeffs
    if damping is None:
        damping = alpha * stiffness + beta * mass
    damping = np.atleast_2d(np.asarray(damping, dtype=float))
    if damping.shape != mass.shape:
        raise InvalidInputError("damping shape mismatch")
    n = mass.shape[0]
    node_dof_map = np.stack([np.arange(n), np.full(n, -1)], axis=1)
    spring = CubicSpring(dof=int(spring_dof), coefficient=float(k_nl)) if k_nl != 0.0 else None
    return BeamModel(
        mass=mass,
        stiffness=stiffness,
        damping=damping,
        alpha=float(alpha),
        beta=float(beta),
        nonlinear_spring=spring,
        rotational_spring_node=None,
        rotational_spring_k=0.0,
        junction_thin_rotation_dof=None,
        node_positions=np.arange(n, dtype=float),
        node_dof_map=node_dof_map,
        constrained_dofs=(),
    )


def nonlinear_force(model: BeamModel, x) -> np.ndarray:
    """Restoring force of the grounded cubic spring, zero elsewhere.

    ``f = k_nl * |x|^3 * sign(x)``, identical to ``k_nl * x**3``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_dof,):
        raise InvalidInputError(f"state has shape {x.shape}, expected ({model.n_dof},)")
    force = np.zeros_like(x)
    spring = model.nonlinear_spring
    if spring is not None:
        force[spring.dof] = spring.coefficient * x[spring.dof] ** 3
    return force


def nonlinear_tangent(model: BeamModel, x) -> float:
    """d f_nl / dx at the spring DOF (for Newton iterations)."""
    spring = model.nonlinear_spring
    if spring is None:
        return 0.0
    return 3.0 * spring.coefficient * float(x[spring.dof]) ** 2


def linear_modes(model: BeamModel, n_modes: int | None = None) -> LinearModes:
    """Solve ``K phi = omega^2 M phi``; mass-normalised, ascending.

    Sign convention: the largest-magnitude entry of each shape is positive.
    """
    n_modes = model.n_dof if n_modes is None else int(n_modes)
    if not 1 <= n_modes <= model.n_dof:
        raise InvalidInputError(f"n_modes must be in [1, {model.n_dof}]")
    cached = model._modes_cache.get(n_modes)
    if cached is not None:
        return cached
    try:
        w2, shapes = scipy.linalg.eigh(model.stiffness, model.mass)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise ModelError(f"generalized eigensolve failed: {exc}") from exc
    if w2[0] < -1e-6 * abs(w2[-1]):
        raise ModelError("stiffness matrix is indefinite")
    w2 = np.clip(w2[:n_modes], 0.0, None)
    shapes = shapes[:, :n_modes]
    # scipy returns M-orthonormal vectors already; enforce the sign rule.
    for j in range(shapes.shape[1]):
        k = np.argmax(np.abs(shapes[:, j]))
        if shapes[k, j] < 0:
            shapes[:, j] = -shapes[:, j]
    result = LinearModes(frequencies=np.sqrt(w2) / (2.0 * np.pi), shapes=shapes)
    model._modes_cache[n_modes] = result
    return result


def calibrate_junction_stiffness(
    target_hz=27.7,
    geometry=None,
    damping_coeffs=(DEFAULT_ALPHA, DEFAULT_BETA),
    k_lo=0.0,
    k_hi=1e3,
    tol=1e-4,
) -> float:
    """Bisect k_r so the first linear frequency matches ``target_hz``.

    f1(k_r) is monotone increasing (hinge at k_r=0, rigid joint as
    k_r -> inf).  Raises :class:`ModelError` when the target frequency is
    outside the attainable range.
    """

    def first_freq(k_r):
        model = assemble_beam(geometry, k_nl=0.0, k_r=k_r, damping_coeffs=damping_coeffs)
        return linear_modes(model, 1).frequencies[0]

    f_lo, f_hi = first_freq(k_lo), first_freq(k_hi)
    if not f_lo <= target_hz <= f_hi:
        raise ModelError(
            f"target {target_hz} Hz outside attainable range [{f_lo:.2f}, {f_hi:.2f}] Hz"
        )
    lo, hi = k_lo, k_hi
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if first_freq(mid) < target_hz:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
