"""Galerkin ODE assembly and time integration.

The retained-mode system is

    dv_i/dt = <g, w_i> - ((v.grad) v, w_i) + ((grad d)^T q, w_i) - (T : grad w_i)
    dd_i/dt = -((v.grad) d, z_i) + (skw(grad v) d, z_i)
              - lam (sym(grad v) d, z_i) - gamma (q, z_i)

with q the L^2-projected variational derivative of the free energy and T the
viscous stress with the co-rotational rate eliminated.  All nonlinear
pairings are evaluated pseudospectrally with the strict 2/3-rule cutoff, so
the semi-discrete energy balance holds to rounding error.

Time stepping is fixed-step integrating-factor RK4: the diagonal linear
parts (-gamma * sigma_i for director modes, -(mu4/2) |k|^2 for velocity
modes) are integrated exactly through exponential factors, everything else
by classical RK4 on the transformed variable.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .basis import (
    COS,
    SIN,
    DirectorBasis,
    SpectralGrid,
    VelocityBasis,
    build_director_basis,
    build_velocity_basis,
)
from .config import ConfigError, SimulationConfig
from .energies import FreeEnergyModel, variational_derivative
from .leslie import LeslieCoefficients, check_dissipativity, leslie_stress_discrete
from .tensors import contract32, sym_skw

BLOWUP_THRESHOLD = 1e12


class BlowUpError(RuntimeError):
    def __init__(self, last_good_time: float):
        super().__init__(f"solution blew up; last finite state at t = {last_good_time:.6g}")
        self.last_good_time = last_good_time


@dataclass
class SpectralState:
    """Retained-mode coefficients at one instant; treat as immutable."""

    t: float
    v_hat: np.ndarray
    d_hat: np.ndarray

    def copy(self) -> "SpectralState":
        return SpectralState(self.t, self.v_hat.copy(), self.d_hat.copy())


class GalerkinSystem:
    """Bundles grid, bases, free energy, and viscosities into one vector field."""

    def __init__(
        self,
        model: FreeEnergyModel,
        coeffs: LeslieCoefficients,
        grid: SpectralGrid,
        velocity_basis: VelocityBasis,
        director_basis: DirectorBasis,
        forcing_v_hat: np.ndarray | None = None,
    ):
        self.model = model
        self.coeffs = coeffs
        self.grid = grid
        self.velocity_basis = velocity_basis
        self.director_basis = director_basis
        if forcing_v_hat is None:
            forcing_v_hat = np.zeros(velocity_basis.size)
        self.forcing_v_hat = np.asarray(forcing_v_hat, dtype=float)
        if self.forcing_v_hat.shape != (velocity_basis.size,):
            raise ValueError("forcing coefficient vector does not match the velocity basis")
        # Stiff diagonal parts integrated exactly by the stepper.
        self.lin_v = -(coeffs.mu4 / 2.0) * velocity_basis.eigs
        self.lin_d = -coeffs.gamma * director_basis.sigmas
        self._exp_cache: dict[float, tuple] = {}

    # -- field reconstruction ------------------------------------------------
    def velocity_fields(self, v_hat: np.ndarray):
        v, grad_v, _ = self.velocity_basis.synthesize_with_derivatives(v_hat)
        return v, grad_v

    def director_fields(self, d_hat: np.ndarray):
        return self.director_basis.synthesize_with_derivatives(d_hat, hessian=True)

    def initial_projection(self, v0_field: np.ndarray, d0_field: np.ndarray) -> SpectralState:
        """State at t = 0 from grid fields: Leray-projected velocity, projected director."""
        return SpectralState(
            t=0.0,
            v_hat=self.velocity_basis.analyze(v0_field),
            d_hat=self.director_basis.analyze(d0_field),
        )

    def director_eval(self, d_hat: np.ndarray):
        """Director value, gradient, and raw variational derivative on the grid.

        For constant-Hessian models the elastic part of q is applied as the
        Fourier symbol inside one fused inverse transform; models with a
        state-dependent Hessian part synthesize the second gradient instead.
        """
        basis = self.director_basis
        grid = self.grid
        n = grid.n
        model = self.model
        if model.has_theta:
            d, grad_d, hess_d = basis.synthesize_with_derivatives(d_hat, hessian=True)
            return d, grad_d, variational_derivative(model, d, grad_d, hess_d)
        spec = basis.synthesize_spec_half(d_hat)
        km = grid.k_mesh_half
        grad_spec = (spec[..., :, None] * (1j * km)[..., None, :]).reshape(*spec.shape[:3], 9)
        elastic_spec = np.einsum("...im,...m->...i", basis.symbol_mesh_half, spec)
        out = grid.irfft(np.concatenate([spec, grad_spec, elastic_spec], axis=-1))
        d = out[..., 0:3]
        grad_d = out[..., 3:12].reshape(n, n, n, 3, 3)
        q = model.dF_dh(d, grad_d) + out[..., 12:15]
        if model.has_mixed:
            q = q - contract32(model.d2F_dSdh(d, grad_d), np.swapaxes(grad_d, -1, -2))
        return d, grad_d, q

    def compute_q(self, d_hat: np.ndarray, fields=None):
        """Unprojected variational derivative on the grid and its projection."""
        if fields is None:
            _, _, q_grid = self.director_eval(d_hat)
        else:
            d, grad_d, hess_d = fields
            q_grid = variational_derivative(self.model, d, grad_d, hess_d)
        return q_grid, self.director_basis.analyze(q_grid)

    # -- vector field ---------------------------------------------------------
    def assemble_rhs(self, state: SpectralState):
        c = self.coeffs
        grid = self.grid
        n = grid.n
        d, grad_d, q_raw = self.director_eval(state.d_hat)
        v, grad_v = self.velocity_fields(state.v_hat)
        q_hat = self.director_basis.analyze(q_raw)
        q = self.director_basis.synthesize(q_hat)

        sv, wv = sym_skw(grad_v)
        transport = (
            np.einsum("...ia,...a->...i", grad_d, v)
            - np.einsum("...ij,...j->...i", wv, d)
            + c.lam * np.einsum("...ij,...j->...i", sv, d)
        )
        convection = np.einsum("...ia,...a->...i", grad_v, v)
        director_force = np.einsum("...ji,...j->...i", grad_d, q)
        stress = leslie_stress_discrete(c, d, q, grad_v, sv=sv)

        # One fused forward transform for every quadrature pairing.
        bundle = np.concatenate(
            [transport, director_force - convection, stress.reshape(n, n, n, 9)], axis=-1
        )
        spec = grid.rfft(bundle).reshape(-1, 15)
        dd_hat = -self.director_basis.analyze_spec_half(spec[:, 0:3]) - c.gamma * q_hat
        dv_hat = (
            self.forcing_v_hat
            + self.velocity_basis.analyze_spec_half(spec[:, 3:6])
            - self.velocity_basis.project_stress_spec_half(spec[:, 6:15].reshape(-1, 3, 3))
        )
        return dv_hat, dd_hat

    def _nonlinear(self, v_hat, d_hat):
        dv, dd = self.assemble_rhs(SpectralState(0.0, v_hat, d_hat))
        return dv - self.lin_v * v_hat, dd - self.lin_d * d_hat

    def _exps(self, dt: float):
        try:
            return self._exp_cache[dt]
        except KeyError:
            exps = (
                np.exp(self.lin_v * dt / 2.0),
                np.exp(self.lin_v * dt),
                np.exp(self.lin_d * dt / 2.0),
                np.exp(self.lin_d * dt),
            )
            self._exp_cache[dt] = exps
            return exps

    def step(self, state: SpectralState, dt: float) -> SpectralState:
        """One integrating-factor RK4 step; dt = 0 is the identity."""
        if dt < 0:
            raise ValueError("dt must be nonnegative")
        if dt == 0.0:
            return state.copy()
        evh, evf, edh, edf = self._exps(dt)
        v0, d0 = state.v_hat, state.d_hat

        av, ad = self._nonlinear(v0, d0)
        bv, bd = self._nonlinear(evh * (v0 + 0.5 * dt * av), edh * (d0 + 0.5 * dt * ad))
        cv, cd = self._nonlinear(evh * v0 + 0.5 * dt * bv, edh * d0 + 0.5 * dt * bd)
        dv, dd = self._nonlinear(evf * v0 + dt * evh * cv, edf * d0 + dt * edh * cd)

        v1 = evf * v0 + (dt / 6.0) * (evf * av + 2.0 * evh * (bv + cv) + dv)
        d1 = edf * d0 + (dt / 6.0) * (edf * ad + 2.0 * edh * (bd + cd) + dd)
        if not (np.all(np.isfinite(v1)) and np.all(np.isfinite(d1))):
            raise BlowUpError(state.t)
        if max(np.max(np.abs(v1), initial=0.0), np.max(np.abs(d1), initial=0.0)) > BLOWUP_THRESHOLD:
            raise BlowUpError(state.t)
        return SpectralState(state.t + dt, v1, d1)


# ---------------------------------------------------------------------------
# Building a system and running a configuration


def _coefs_from_directive(directive, basis, kind: str) -> np.ndarray:
    coefs = np.zeros(basis.size)
    if directive[0] == "zero":
        return coefs
    if directive[0] == "constant":
        if kind != "director":
            raise ConfigError("key 'velocity': constant initial velocity is not solenoidal-mean-free")
        target = directive[1]
        root_v = np.sqrt(basis.grid.volume)
        for i in range(basis.size):
            if basis.is_const[i]:
                coefs[i] = root_v * float(basis.vecs[i] @ target)
        return coefs
    if directive[0] == "mode":
        _, k, branch, parity, amp = directive
        want_parity = COS if parity == "cos" else SIN
        for i, m in enumerate(basis.modes):
            if m.k == tuple(k) and m.branch == branch and m.parity == want_parity:
                coefs[i] = amp
                return coefs
        raise ConfigError(f"key '{kind}': mode k={k} branch={branch} {parity} not in retained basis")
    if directive[0] == "random":
        _, seed, amp = directive
        rng = np.random.default_rng(seed)
        return rng.uniform(-amp, amp, basis.size)
    raise ConfigError(f"key '{kind}': unknown directive {directive!r}")


def build_system(config: SimulationConfig) -> GalerkinSystem:
    model = config.build_model()
    coeffs = config.build_coefficients()
    margins = check_dissipativity(coeffs)
    if not margins.passed and not config.allow_nondissipative:
        raise ConfigError(
            "key 'allow_nondissipative': Leslie set fails dissipativity on "
            + ", ".join(margins.failures)
        )
    grid = SpectralGrid(config.n)
    vel = build_velocity_basis(grid, config.n_v)
    dirb = build_director_basis(model.d2F_dS2_const(), grid, config.n_d)
    forcing = _coefs_from_directive(config.forcing_velocity, vel, "velocity")
    return GalerkinSystem(model, coeffs, grid, vel, dirb, forcing_v_hat=forcing)


@dataclass
class SimulationResult:
    config: SimulationConfig
    system: GalerkinSystem
    states: list
    records: list

    @property
    def final_state(self) -> SpectralState:
        return self.states[-1]


def initial_state(config: SimulationConfig, system: GalerkinSystem) -> SpectralState:
    v_hat = _coefs_from_directive(config.initial_velocity, system.velocity_basis, "velocity")
    d_hat = _coefs_from_directive(config.initial_director, system.director_basis, "director")
    return SpectralState(0.0, v_hat, d_hat)


def run(config: SimulationConfig) -> SimulationResult:
    """Integrate the configured scenario, recording the energy ledger."""
    from . import diagnostics  # local import to keep the module graph acyclic

    system = build_system(config)
    state = initial_state(config, system)
    n_steps = int(round(config.t_end / config.dt))
    if abs(n_steps * config.dt - config.t_end) > 1e-9 * max(config.dt, config.t_end):
        raise ConfigError("key 't_end': must be an integer multiple of dt (fixed-step scheme)")
    states = [state]
    records = [diagnostics.energy_ledger(system, state)]
    for i in range(1, n_steps + 1):
        state = system.step(state, config.dt)
        # Keep recorded times exact multiples of dt.
        state = SpectralState(i * config.dt, state.v_hat, state.d_hat)
        if i % config.record_every == 0 or i == n_steps:
            states.append(state)
            records.append(diagnostics.energy_ledger(system, state))
    if len(records) >= 3:
        diagnostics.energy_residual_series(records)
    return SimulationResult(config=config, system=system, states=states, records=records)


# ---------------------------------------------------------------------------
# Checkpoint files: magic, config hash, t, mode counts, then little-endian
# float64 coefficient arrays.  Reload is bit-exact.

_MAGIC = b"ELGALCK1"


def save_checkpoint(path, state: SpectralState, config_hash: str, n_v: int, n_d: int) -> None:
    if len(state.v_hat) != n_v or len(state.d_hat) != n_d:
        raise ValueError("mode counts do not match the state")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(config_hash.encode("ascii").ljust(64, b"0")[:64])
        fh.write(struct.pack("<dQQ", state.t, n_v, n_d))
        fh.write(np.ascontiguousarray(state.v_hat, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.d_hat, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[SpectralState, dict]:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError("not a checkpoint file")
        config_hash = fh.read(64).decode("ascii")
        t, n_v, n_d = struct.unpack("<dQQ", fh.read(24))
        v_hat = np.frombuffer(fh.read(8 * n_v), dtype="<f8").astype(np.float64)
        d_hat = np.frombuffer(fh.read(8 * n_d), dtype="<f8").astype(np.float64)
    state = SpectralState(t, v_hat, d_hat)
    return state, {"config_hash": config_hash, "n_v": n_v, "n_d": n_d}
