"""Differential equations driven by grid rough paths.

The stepper is the depth-L Euler scheme: over a step with group increment g
the state advances by the iterated directional derivatives of the identity
along the driving fields, contracted against the levels of g.  For the
Jacobian of the solution flow the same stepper runs on the augmented state
(y, J) whose fields are (V_i(y), DV_i(y) J).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import tensor_algebra as ta
from .errors import (ConfigError, DimensionMismatchError, ExplosionError,
                     FeasibilityError)
from .rough_path import RoughPathGrid

EXPLOSION_THRESHOLD = 1e12


@dataclass
class VectorFieldSet:
    """Driving fields V_1..V_d on R^e with analytic derivatives.

    v(y) returns (d, e); dv(y) returns (d, e, e) with dv[i, a, b] =
    d V_i^a / d y_b; d2v and d3v stack further y-derivatives in trailing
    axes (symmetric).  lip_gamma_bound is a user-facing regularity bound:
    computed for the builtin families, required for custom fields.
    """

    state_dim: int
    driver_dim: int
    v: callable
    dv: callable
    d2v: callable = None
    d3v: callable = None
    lip_gamma_bound: float = float("nan")
    gamma: float = 3.0
    family: str = "custom"
    spec: dict = field(default_factory=dict)

    def derivative_depth(self) -> int:
        if self.d3v is not None:
            return 3
        if self.d2v is not None:
            return 2
        return 1


def constant_fields(c) -> VectorFieldSet:
    """V_i(y) = c_i; c has shape (d, e)."""
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    d, e = c.shape
    zero2 = np.zeros((d, e, e))
    zero3 = np.zeros((d, e, e, e))
    zero4 = np.zeros((d, e, e, e, e))
    return VectorFieldSet(
        e, d,
        v=lambda y: c,
        dv=lambda y: zero2,
        d2v=lambda y: zero3,
        d3v=lambda y: zero4,
        lip_gamma_bound=float(np.max(np.linalg.norm(c, axis=1))),
        family="constant",
        spec={"family": "constant", "coefficients": c.tolist()})


def linear_fields(a, b=None) -> VectorFieldSet:
    """V_i(y) = A_i y + b_i; a has shape (d, e, e), b shape (d, e)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        a = a[None, :, :]
    d, e, e2 = a.shape
    if e != e2:
        raise DimensionMismatchError("linear coefficients must be square matrices")
    b = np.zeros((d, e)) if b is None else np.asarray(b, dtype=np.float64).reshape(d, e)
    zero3 = np.zeros((d, e, e, e))
    zero4 = np.zeros((d, e, e, e, e))
    op_norms = [np.linalg.norm(a[i], 2) for i in range(d)]
    bound = float(max(op_norms[i] + np.linalg.norm(b[i]) for i in range(d)))
    return VectorFieldSet(
        e, d,
        v=lambda y: a @ y + b,
        dv=lambda y: a,
        d2v=lambda y: zero3,
        d3v=lambda y: zero4,
        lip_gamma_bound=bound,
        family="linear",
        spec={"family": "linear",
              "coefficients": {"A": a.tolist(), "b": b.tolist()}})


def polynomial_fields(c0=None, c1=None, c2=None, c3=None, state_dim=None,
                      driver_dim=None, domain_radius: float = 10.0) -> VectorFieldSet:
    """Degree <= 3 polynomial fields
    V_i(y) = c0_i + c1_i y + c2_i[y, y] + c3_i[y, y, y].

    c2 and c3 are symmetrised on input.  The regularity bound is a valid
    upper bound on the ball |y| <= domain_radius via coefficient norms.
    """
    given = [c for c in (c0, c1, c2, c3) if c is not None]
    if not given:
        raise ConfigError("polynomial fields need at least one coefficient block")
    first = np.asarray(given[0], dtype=np.float64)
    d = driver_dim or first.shape[0]
    e = state_dim or first.shape[1]
    c0 = np.zeros((d, e)) if c0 is None else np.asarray(c0, dtype=np.float64)
    c1 = np.zeros((d, e, e)) if c1 is None else np.asarray(c1, dtype=np.float64)
    c2 = np.zeros((d, e, e, e)) if c2 is None else np.asarray(c2, dtype=np.float64)
    c3 = np.zeros((d, e, e, e, e)) if c3 is None else np.asarray(c3, dtype=np.float64)
    c2 = 0.5 * (c2 + c2.transpose(0, 1, 3, 2))
    perms3 = [(0, 1, 2, 3, 4), (0, 1, 2, 4, 3), (0, 1, 3, 2, 4),
              (0, 1, 3, 4, 2), (0, 1, 4, 2, 3), (0, 1, 4, 3, 2)]
    c3 = sum(c3.transpose(p) for p in perms3) / 6.0

    def v(y):
        return (c0 + c1 @ y + np.einsum("iabc,b,c->ia", c2, y, y)
                + np.einsum("iabcd,b,c,d->ia", c3, y, y, y))

    def dv(y):
        return (c1 + 2.0 * np.einsum("iabc,c->iab", c2, y)
                + 3.0 * np.einsum("iabcd,c,d->iab", c3, y, y))

    def d2v(y):
        return 2.0 * c2 + 6.0 * np.einsum("iabcd,d->iabc", c3, y)

    def d3v(y):
        return 6.0 * c3

    r = domain_radius
    norms = [float(np.max(np.linalg.norm(c.reshape(d, -1), axis=1)))
             for c in (c0, c1, c2, c3)]
    bound = (norms[0] + norms[1] * r + norms[2] * r * r + norms[3] * r ** 3
             + norms[1] + 2 * norms[2] * r + 3 * norms[3] * r * r
             + 2 * norms[2] + 6 * norms[3] * r + 6 * norms[3])
    return VectorFieldSet(
        e, d, v=v, dv=dv, d2v=d2v, d3v=d3v,
        lip_gamma_bound=float(bound), family="polynomial",
        spec={"family": "polynomial",
              "coefficients": {"c0": c0.tolist(), "c1": c1.tolist(),
                               "c2": c2.tolist(), "c3": c3.tolist()},
              "domain_radius": domain_radius})


def custom_fields(state_dim, driver_dim, v, dv, d2v=None, d3v=None,
                  lip_gamma_bound=None, gamma: float = 3.0) -> VectorFieldSet:
    """Wrap user callables.  An explicit lip_gamma_bound is required: an
    exact norm would be a global optimisation problem."""
    if lip_gamma_bound is None:
        raise ConfigError("custom fields require an explicit lip_gamma_bound")
    return VectorFieldSet(state_dim, driver_dim, v, dv, d2v, d3v,
                          float(lip_gamma_bound), gamma, "custom",
                          {"family": "custom"})


def fields_from_spec(spec: dict) -> VectorFieldSet:
    """Build a field set from the JSON object
    {family, coefficients, lip_gamma_bound?}."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("field spec must be an object with a 'family' key")
    family = spec["family"]
    coeff = spec.get("coefficients")
    if family == "constant":
        return constant_fields(np.asarray(coeff, dtype=np.float64))
    if family == "linear":
        if not isinstance(coeff, dict) or "A" not in coeff:
            raise ConfigError("linear fields need coefficients {A, b?}")
        return linear_fields(np.asarray(coeff["A"], dtype=np.float64),
                             None if coeff.get("b") is None
                             else np.asarray(coeff["b"], dtype=np.float64))
    if family == "polynomial":
        if not isinstance(coeff, dict):
            raise ConfigError("polynomial fields need coefficients {c0..c3}")
        kw = {k: np.asarray(v, dtype=np.float64)
              for k, v in coeff.items() if k in ("c0", "c1", "c2", "c3")}
        return polynomial_fields(domain_radius=spec.get("domain_radius", 10.0), **kw)
    if family == "custom":
        raise ConfigError("custom fields cannot be built from JSON; construct in-process")
    raise ConfigError(f"unknown field family {family!r}")


def load_fields_json(path) -> VectorFieldSet:
    with open(path, "r", encoding="utf-8") as f:
        return fields_from_spec(json.load(f))


def euler_increment(z, g: ta.GroupElement, fields: VectorFieldSet) -> np.ndarray:
    """Depth-L Euler step increment at state z for group increment g.

    Level 1 contracts the fields, level 2 the first iterated derivative
    DV_j . V_i, level 3 the second (D2V_k[V_i, V_j] + DV_k DV_j V_i),
    each against the matching tensor level of g.
    """
    z = np.asarray(z, dtype=np.float64)
    if g.dim != fields.driver_dim:
        raise DimensionMismatchError(
            f"driver dim {g.dim} does not match field set ({fields.driver_dim})")
    if g.level >= 2 and fields.dv is None:
        raise FeasibilityError("level >= 2 stepping requires first derivatives")
    if g.level >= 3 and fields.d2v is None:
        raise FeasibilityError("level 3 stepping requires second derivatives")
    vmat = np.asarray(fields.v(z), dtype=np.float64)
    out = np.einsum("ia,i->a", vmat, g.level_tensor(1))
    if g.level >= 2:
        dvmat = np.asarray(fields.dv(z), dtype=np.float64)
        out = out + np.einsum("jab,ib,ij->a", dvmat, vmat, g.level_tensor(2))
    if g.level >= 3:
        d2mat = np.asarray(fields.d2v(z), dtype=np.float64)
        g3 = g.level_tensor(3)
        out = out + np.einsum("kabc,ib,jc,ijk->a", d2mat, vmat, vmat, g3)
        out = out + np.einsum("kab,jbc,ic,ijk->a", dvmat, dvmat, vmat, g3)
    return out


@dataclass(frozen=True)
class Trajectory:
    """Solution samples; jacobians is None unless the augmented system ran."""

    times: np.ndarray
    states: np.ndarray
    jacobians: np.ndarray = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def sup_jacobian_norm(self) -> float:
        """sup over time of the operator (spectral) norm of the Jacobian."""
        if self.jacobians is None:
            raise FeasibilityError("trajectory carries no Jacobian samples")
        svals = np.linalg.svd(self.jacobians, compute_uv=False)
        return float(svals[:, 0].max())


def _step_times(x: RoughPathGrid, step_rule: str, substeps: int, alpha, p):
    if step_rule == "uniform":
        if substeps < 1:
            raise ConfigError("substeps must be >= 1")
        t = x.times
        if substeps == 1:
            return t.copy()
        frac = np.arange(substeps) / substeps
        inner = t[:-1, None] + np.diff(t)[:, None] * frac[None, :]
        return np.append(inner.ravel(), t[-1])
    if step_rule == "greedy":
        if alpha is None or alpha <= 0:
            raise ConfigError("greedy stepping needs a positive alpha")
        from .partition import greedy_partition
        from .variation import ControlQuery
        if p is None:
            p = x.level + 0.5  # deepest order the lift supports
        gp = greedy_partition(ControlQuery(x, p), alpha)
        return np.unique(np.concatenate([x.times, gp.taus]))
    raise ConfigError(f"unknown step rule {step_rule!r}")


def solve_rde(x: RoughPathGrid, fields: VectorFieldSet, y0,
              step_rule: str = "uniform", substeps: int = 1,
              alpha: float = None, p: float = None) -> Trajectory:
    """March the depth-L Euler scheme across a refinement of the grid.

    ``uniform`` splits every grid segment into equal sub-steps; ``greedy``
    inserts the stop times of a greedy partition so every step has control
    at most alpha.  Under refinement the scheme converges to the solution
    driven by the piecewise-linear interpolant.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=np.float64))
    if y0.shape[0] != fields.state_dim:
        raise DimensionMismatchError(
            f"y0 has dim {y0.shape[0]}, fields expect {fields.state_dim}")
    times = _step_times(x, step_rule, substeps, alpha, p)
    states = np.empty((times.shape[0], y0.shape[0]))
    states[0] = y0
    z = y0.copy()
    prev = x.signature_levels_at(times[0])
    for k in range(1, times.shape[0]):
        cur = x.signature_levels_at(times[k])
        inc = ta.increment_levels(prev, cur, x.level)
        g = ta.GroupElement(x.dim, x.level, tuple(inc))
        z = z + euler_increment(z, g, fields)
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > EXPLOSION_THRESHOLD:
            raise ExplosionError(
                f"state left the trust region at t={times[k]:.6g}", float(times[k]))
        states[k] = z
        prev = cur
    return Trajectory(times, states)


def augment_for_jacobian(fields: VectorFieldSet) -> VectorFieldSet:
    """Field set of the augmented system on (y, J):
    the y-block keeps the base fields, the J-block applies DV_i(y) to J."""
    e = fields.state_dim
    d = fields.driver_dim
    big = e + e * e

    def split(z):
        return z[:e], z[e:].reshape(e, e)

    def vhat(z):
        y, jac = split(z)
        vy = np.asarray(fields.v(y), dtype=np.float64)
        dvy = np.asarray(fields.dv(y), dtype=np.float64)
        jpart = np.einsum("iab,bc->iac", dvy, jac).reshape(d, e * e)
        return np.concatenate([vy, jpart], axis=1)

    def dvhat(z):
        y, jac = split(z)
        dvy = np.asarray(fields.dv(y), dtype=np.float64)
        d2y = np.asarray(fields.d2v(y), dtype=np.float64)
        out = np.zeros((d, big, big))
        out[:, :e, :e] = dvy
        mixed = np.einsum("iabc,bB->iaBc", d2y, jac).reshape(d, e * e, e)
        out[:, e:, :e] = mixed
        eye = np.eye(e)
        out[:, e:, e:] = np.einsum("iab,cd->iacbd", dvy, eye).reshape(d, e * e, e * e)
        return out

    def d2vhat(z):
        if fields.d3v is None:
            raise FeasibilityError(
                "level-3 Jacobian flow needs third derivatives of the base fields")
        y, jac = split(z)
        d2y = np.asarray(fields.d2v(y), dtype=np.float64)
        d3y = np.asarray(fields.d3v(y), dtype=np.float64)
        out = np.zeros((d, big, big, big))
        out[:, :e, :e, :e] = d2y
        jyy = np.einsum("iabcd,bB->iaBcd", d3y, jac).reshape(d, e * e, e, e)
        out[:, e:, :e, :e] = jyy
        eye = np.eye(e)
        mixed = np.einsum("iabc,BD->iaBbcD", d2y, eye)  # rows (a,B), dirs y_c, J_(b,D)
        mixed = mixed.transpose(0, 1, 2, 4, 3, 5).reshape(d, e * e, e, e * e)
        out[:, e:, :e, e:] = mixed
        out[:, e:, e:, :e] = mixed.transpose(0, 1, 3, 2)
        return out

    return VectorFieldSet(big, d, vhat, dvhat, d2vhat, None,
                          fields.lip_gamma_bound, fields.gamma,
                          f"jacobian({fields.family})", dict(fields.spec))


def jacobian_flow(x: RoughPathGrid, fields: VectorFieldSet, y0,
                  step_rule: str = "uniform", substeps: int = 1,
                  alpha: float = None, p: float = None) -> Trajectory:
    """Solve the augmented system from (y0, I); returns states and Jacobians."""
    if fields.dv is None:
        raise FeasibilityError("jacobian flow requires first derivatives")
    if x.level >= 3 and fields.d2v is None:
        raise FeasibilityError("level-3 jacobian flow requires second derivatives")
    e = fields.state_dim
    z0 = np.concatenate([np.atleast_1d(np.asarray(y0, dtype=np.float64)),
                         np.eye(e).ravel()])
    aug = augment_for_jacobian(fields)
    traj = solve_rde(x, aug, z0, step_rule, substeps, alpha, p)
    states = traj.states[:, :e]
    jacobians = traj.states[:, e:].reshape(-1, e, e)
    return Trajectory(traj.times, states, jacobians)
