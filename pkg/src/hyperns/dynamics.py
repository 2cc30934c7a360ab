"""Galerkin-truncated hyperdissipative Navier-Stokes dynamics.

Time stepping is integrating-factor RK4: the stiff diagonal linear part
exp(-(nu k^2 + eps m(k)) t) is applied exactly, classical RK4 handles the
dealiased pseudospectral nonlinear term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .diagnostics import DiagnosticsRecord, attach_budget_residuals, make_record
from .lattice import (SobolevIndex, SpectralVelocity, WavenumberLattice,
                      dealias, leray_project, sobolev_norm, _reflect)
from .symbols import MultiplierSymbol

CFL_LIMIT = 1.5


class NumericalError(RuntimeError):
    """Runtime failure of the integrator (NaN, CFL breach).

    Carries the last good state and any records collected so far.
    """

    def __init__(self, msg, state=None, records=None):
        super().__init__(msg)
        self.state = state
        self.records = records or []


class CFLError(NumericalError):
    def __init__(self, cfl, dt_admissible, state=None):
        super().__init__(
            f"advective CFL {cfl:.3f} exceeds {CFL_LIMIT}; "
            f"admissible dt <= {dt_admissible:.6e}", state=state)
        self.dt_admissible = dt_admissible


@dataclass
class TrajectoryState:
    u: SpectralVelocity
    t: float
    step_index: int
    cfl_estimate: float = 0.0


def nonlinear_term(u: SpectralVelocity) -> SpectralVelocity:
    """B(u) = dealias(P(div(u tensor u))), computed pseudospectrally.

    The input is expected dealiased and divergence-free; the output is
    both, and exactly energy-neutral under the two-thirds rule.
    """
    lat = u.lattice
    dim = lat.dim
    phys = u.to_physical()
    div_hat = np.empty_like(u.coeffs)
    prod_hat = {}
    for i in range(dim):
        for j in range(i, dim):
            prod_hat[(i, j)] = lat.forward(phys[i] * phys[j])
    for i in range(dim):
        acc = np.zeros(lat.grid_shape, dtype=np.complex128)
        for j in range(dim):
            t_ij = prod_hat[(min(i, j), max(i, j))]
            acc += 1j * lat.k[j] * t_ij
        div_hat[i] = acc
    out = SpectralVelocity(lat, div_hat, u.t)
    return dealias(leray_project(out))


def linear_propagator(sym: MultiplierSymbol, nu: float, eps: float,
                      dt: float) -> np.ndarray:
    """Pointwise decay factors exp(-(nu k^2 + eps m(k)) dt)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    lat = sym.lattice
    return np.exp(-(nu * lat.k_sq + eps * sym.m) * dt)


class Stepper:
    """One-trajectory integrator with precomputed propagators."""

    def __init__(self, lattice: WavenumberLattice, sym: MultiplierSymbol,
                 nu: float, eps: float, dt: float, nonlinear: bool = True):
        self.lattice = lattice
        self.sym = sym
        self.nu = nu
        self.eps = eps
        self.dt = dt
        self.nonlinear = nonlinear
        self.e_half = linear_propagator(sym, nu, eps, dt / 2.0)
        self.e_full = linear_propagator(sym, nu, eps, dt)
        self.k_max = lattice.k_unit * lattice.dealias_limit

    def _rhs(self, coeffs: np.ndarray, t: float) -> np.ndarray:
        if not self.nonlinear:
            return np.zeros_like(coeffs)
        u = SpectralVelocity(self.lattice, coeffs, t)
        return -nonlinear_term(u).coeffs

    def cfl(self, u: SpectralVelocity) -> float:
        vmax = float(np.max(np.sqrt(np.sum(u.to_physical() ** 2, axis=0))))
        return self.dt * vmax * self.k_max

    def step(self, state: TrajectoryState) -> TrajectoryState:
        dt = self.dt
        c0 = state.u.coeffs
        cfl = 0.0
        if self.nonlinear:
            cfl = self.cfl(state.u)
            if cfl > CFL_LIMIT:
                raise CFLError(cfl, dt * CFL_LIMIT / cfl, state=state)
        e1, e2 = self.e_half, self.e_full
        n1 = self._rhs(c0, state.t)
        n2 = self._rhs(e1 * (c0 + 0.5 * dt * n1), state.t + 0.5 * dt)
        n3 = self._rhs(e1 * c0 + 0.5 * dt * n2, state.t + 0.5 * dt)
        n4 = self._rhs(e2 * c0 + dt * e1 * n3, state.t + dt)
        c1 = e2 * c0 + (dt / 6.0) * (e2 * n1 + 2.0 * e1 * (n2 + n3) + n4)
        if not np.all(np.isfinite(c1)):
            raise NumericalError("NaN/Inf in solution after step",
                                 state=state)
        # guard against roundoff drift of the analytic invariants
        c1 = 0.5 * (c1 + np.conj(_reflect(c1, self.lattice.dim)))
        t1 = state.t + dt
        u1 = leray_project(SpectralVelocity(self.lattice, c1, t1))
        return TrajectoryState(u=u1, t=t1, step_index=state.step_index + 1,
                               cfl_estimate=cfl)


def step(state: TrajectoryState, cfg: SimConfig,
         sym: MultiplierSymbol | None = None) -> TrajectoryState:
    """Single integrating-factor RK4 step under ``cfg``."""
    lat = state.u.lattice
    sym = sym or cfg.build_symbol(lat)
    return Stepper(lat, sym, cfg.nu, cfg.eps, cfg.dt,
                   nonlinear=cfg.nonlinear).step(state)


def taylor_green(lattice: WavenumberLattice, t: float = 0.0) -> SpectralVelocity:
    """Classical Taylor-Green vortex on the box (2-D or 3-D)."""
    ku = lattice.k_unit
    x = lattice.x
    phys = np.zeros((lattice.dim,) + lattice.grid_shape)
    if lattice.dim == 2:
        phys[0] = np.sin(ku * x[0]) * np.cos(ku * x[1])
        phys[1] = -np.cos(ku * x[0]) * np.sin(ku * x[1])
    else:
        phys[0] = np.sin(ku * x[0]) * np.cos(ku * x[1]) * np.cos(ku * x[2])
        phys[1] = -np.cos(ku * x[0]) * np.sin(ku * x[1]) * np.cos(ku * x[2])
    return SpectralVelocity.from_physical(lattice, phys, t)


def random_field(lattice: WavenumberLattice, seed: int, sigma: float,
                 k_c: float, amplitude: float) -> SpectralVelocity:
    """Divergence-free Gaussian field with |u_hat| ~ |k|^sigma exp(-|k|^2/k_c^2).

    Bandlimited, zero-mean, seeded; the result is scaled to the requested
    L^2 norm (``amplitude``).
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((lattice.dim,) + lattice.grid_shape)
    coeffs = lattice.forward(noise)
    kmag = lattice.k_mag
    profile = np.zeros(lattice.grid_shape)
    nz = kmag > 0
    profile[nz] = kmag[nz] ** sigma * np.exp(-kmag[nz] ** 2 / k_c ** 2)
    u = SpectralVelocity(lattice, coeffs * profile)
    u = dealias(leray_project(u))
    norm = u.l2_norm()
    if norm == 0:
        raise ValueError("degenerate random field: zero norm")
    u.coeffs *= amplitude / norm
    return u


def initial_condition(cfg: SimConfig,
                      lattice: WavenumberLattice) -> SpectralVelocity:
    kind, _, arg = cfg.ic.partition(":")
    if kind == "taylor-green-2d":
        if lattice.dim != 2:
            raise ValueError("taylor-green-2d needs dim=2")
        u = taylor_green(lattice)
    elif kind == "taylor-green-3d":
        if lattice.dim != 3:
            raise ValueError("taylor-green-3d needs dim=3")
        u = taylor_green(lattice)
    elif kind == "random":
        u = random_field(lattice, cfg.seed, cfg.sigma, cfg.k_c, cfg.amplitude)
    elif kind == "snapshot":
        from .snapshot import read_snapshot
        u, _ = read_snapshot(arg)
        if u.lattice != lattice:
            raise ValueError(
                f"snapshot lattice {u.lattice} does not match config lattice")
        return dealias(u)
    else:
        raise ValueError(f"unknown initial condition {cfg.ic!r}")
    return dealias(leray_project(u))


def run(cfg: SimConfig, sinks=()):
    """Integrate from t=0 to t_end; returns (final state, records).

    ``sinks`` are callables invoked as sink(state, record) at every
    sample (every ``output_every`` steps, plus the initial and final
    states).  Budget residuals are attached to the records after the
    loop.  On a numerical failure the partial series is attached to the
    raised :class:`NumericalError`.
    """
    lattice = cfg.build_lattice()
    sym = cfg.build_symbol(lattice)
    u0 = initial_condition(cfg, lattice)
    stepper = Stepper(lattice, sym, cfg.nu, cfg.eps, cfg.dt,
                      nonlinear=cfg.nonlinear)
    n_steps = int(round(cfg.t_end / cfg.dt))
    # snapshot initial conditions resume from their stored time tag
    state = TrajectoryState(u=u0, t=u0.t, step_index=0)
    records: list[DiagnosticsRecord] = []

    def sample(st):
        rec = make_record(st.u, cfg.nu, cfg.eps, sym)
        records.append(rec)
        for sink in sinks:
            sink(st, rec)

    sample(state)
    for i in range(n_steps):
        try:
            state = stepper.step(state)
        except NumericalError as err:
            attach_budget_residuals(records)
            err.records = records
            raise
        if (i + 1) % cfg.output_every == 0 or i + 1 == n_steps:
            sample(state)
    attach_budget_residuals(records)
    return state, records


@dataclass
class SmallnessReport:
    """Runtime probe of the small-data regime."""

    s: float
    h_s_initial: float
    max_ratio: float
    small_data: bool


def smallness_probe(cfg: SimConfig, s: float) -> SmallnessReport:
    """Monitor ||u(t)||_{H^s} / ||u0||_{H^s} over a run.

    Flags the small-data regime when the ratio never exceeds 2.  Requires
    s > 5/2 for dim=3 (s > 2 for 2-D desk runs).
    """
    s_min = 2.5 if cfg.dim == 3 else 2.0
    if not s > s_min:
        raise ValueError(f"smallness probe needs s > {s_min} for dim={cfg.dim}")
    idx = SobolevIndex(s, "inhomogeneous")
    norms = []

    def sink(state, rec):
        norms.append(sobolev_norm(state.u, idx))

    run(cfg, sinks=(sink,))
    h0 = norms[0]
    if h0 == 0:
        return SmallnessReport(s, 0.0, 0.0, True)
    ratio = max(n / h0 for n in norms)
    return SmallnessReport(s, h0, ratio, ratio <= 2.0)
