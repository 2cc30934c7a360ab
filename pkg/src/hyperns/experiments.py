"""Prepackaged studies: scaling symmetry, vanishing-hyperdissipation sweeps,
exponent comparisons, and kernel-family classification."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import SimConfig
from .diagnostics import DefectSplit, defect_split, shell_spectrum
from .dynamics import nonlinear_term, run
from .lattice import SobolevIndex, SpectralVelocity, sobolev_norm
from .symbols import MultiplierSymbol, apply_multiplier, classify, kernel_symbol

TAIL_FRACTION_LIMIT = 1e-8


@dataclass
class SweepResult:
    """Outcome table of a one-parameter sweep."""

    parameter: str
    values: np.ndarray
    outcomes: dict
    slope: float | None = None
    intercept: float | None = None
    rms: float | None = None


def _dilate_modes(u: SpectralVelocity, lam: int, factor: float,
                  drop_tol: float = 0.0) -> SpectralVelocity:
    """Map mode kappa -> lam*kappa (same lattice) with an amplitude factor.

    Coefficients whose dilated index leaves the representable range raise,
    unless they fall below drop_tol relative to the largest coefficient
    (used to ignore FFT roundoff junk outside an exact support).
    """
    if lam < 1 or int(lam) != lam:
        raise ValueError(f"dilation factor must be a positive integer, got {lam}")
    lam = int(lam)
    lat = u.lattice
    n = lat.n_per_dim
    kap = lat.kappa
    in_range = np.all(np.abs(lam * kap) <= n // 2 - 1, axis=0)
    floor = drop_tol * np.max(np.abs(u.coeffs))
    support = np.any(np.abs(u.coeffs) > floor, axis=0)
    if np.any(support & ~in_range):
        raise ValueError(
            f"dilation by {lam} pushes occupied modes outside the lattice")
    new = np.zeros_like(u.coeffs)
    sel = in_range
    src = tuple((kap[d] % n)[sel] for d in range(lat.dim))
    dst = tuple(((lam * kap[d]) % n)[sel] for d in range(lat.dim))
    for c in range(lat.dim):
        new[c][dst] = factor * u.coeffs[c][src]
    return SpectralVelocity(lat, new, u.t)


def dilate(u: SpectralVelocity, lam: int, alpha: float) -> SpectralVelocity:
    """Spectral dilation u_hat(kappa) -> lam^{2 alpha - 1} u_hat at lam*kappa.

    The dilation maps the torus to itself lam-fold, so the returned field
    lives on the rescaled box of length L/lam; with that volume the L^2
    norm transforms exactly by the lattice-sum identity
    ``||dilate(u)||^2 = lam^(4 alpha - 2 - dim) ||u||^2``
    (dim=3 reproduces the continuum lam^(4 alpha - 5)).
    """
    lat = u.lattice
    shifted = _dilate_modes(u, lam, float(lam) ** (2.0 * alpha - 1.0))
    small = type(lat)(lat.n_per_dim, lat.dim, lat.box_length / lam)
    return SpectralVelocity(small, shifted.coeffs, u.t)


def dilation_norm_exponent(alpha: float, dim: int) -> float:
    """Exponent e with ||dilate(u)||_L2^2 = lam^e ||u||_L2^2."""
    return 4.0 * alpha - 2.0 - dim


def scaling_covariance_residual(u: SpectralVelocity, lam: int, alpha: float,
                                mu: float, sym: MultiplierSymbol | None = None
                                ) -> float:
    """Discrete covariance check of the pure-power right-hand side.

    F(v) = -B(v) - mu M v with nu = 0; the residual compares F(dilate(u))
    against lam^{4 alpha - 1} times the plain dilation of F(u).  Requires
    the doubled, dilated frequency support to respect the dealias band.
    """
    lat = u.lattice
    if sym is None:
        from .symbols import power_symbol
        sym = power_symbol(lat, mu, alpha)

    def rhs(v: SpectralVelocity) -> SpectralVelocity:
        b = nonlinear_term(v)
        mv = apply_multiplier(sym, v)
        return SpectralVelocity(lat, -b.coeffs - mv.coeffs, v.t)

    lim = lat.dealias_limit
    floor = 1e-13 * np.max(np.abs(u.coeffs))
    support = np.any(np.abs(u.coeffs) > floor, axis=0)
    kmax = int(np.max(np.abs(lat.kappa[:, support]))) if support.any() else 0
    if 2 * lam * kmax > lim:
        raise ValueError(
            f"doubled dilated support 2*{lam}*{kmax} exceeds dealias band {lim}")

    # both sides evaluated on u's lattice: the identity is stated in the
    # original frequency units, so only the mode relabeling enters here
    lhs = rhs(_dilate_modes(u, lam, float(lam) ** (2.0 * alpha - 1.0),
                            drop_tol=1e-13))
    ref = _dilate_modes(rhs(u), lam, 1.0, drop_tol=1e-13)
    scale = float(lam) ** (4.0 * alpha - 1.0)
    num = np.sqrt(np.sum(np.abs(lhs.coeffs - scale * ref.coeffs) ** 2))
    den = np.sqrt(np.sum(np.abs(lhs.coeffs) ** 2))
    if den == 0:
        return float(num)
    return float(num / den)


class StateRecorder:
    """Run sink collecting sampled states and times."""

    def __init__(self):
        self.times = []
        self.states = []

    def __call__(self, state, record):
        self.times.append(state.t)
        self.states.append(state.u.copy())


def spectral_tail_fraction(u: SpectralVelocity) -> float:
    """Energy fraction in the top third of resolved shells."""
    radii, e = shell_spectrum(u)
    lim = u.lattice.dealias_limit
    total = float(np.sum(e))
    if total == 0:
        return 0.0
    cut = 2.0 * lim / 3.0
    return float(np.sum(e[radii > cut]) / total)


def _run_recorded(cfg: SimConfig):
    rec = StateRecorder()
    final, records = run(cfg, sinks=(rec,))
    return rec, records


def vanishing_eps_sweep(base_cfg: SimConfig, eps_list, s: float, T: float,
                        max_workers: int | None = None) -> SweepResult:
    """Fit the convergence rate of u^eps toward the eps=0 reference.

    Runs the eps=0 reference once, then each eps from identical data;
    err(eps) = sup over samples of the inhomogeneous H^{s-1} distance.
    The reference must stay resolved: its spectral tail fraction must
    remain below 1e-8, the discrete stand-in for smoothness on [0, T].
    """
    eps_list = sorted(float(e) for e in eps_list)
    if len(eps_list) < 4:
        raise ValueError(f"need >= 4 eps values for a rate fit, got {len(eps_list)}")
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if eps_list[-1] / eps_list[0] < 100.0:
        raise ValueError("eps_list must span at least two decades")

    cfg_T = replace(base_cfg, t_end=T)
    ref_rec, _ = _run_recorded(replace(cfg_T, eps=0.0))
    for t, u in zip(ref_rec.times, ref_rec.states):
        tail = spectral_tail_fraction(u)
        if tail > TAIL_FRACTION_LIMIT:
            raise RuntimeError(
                f"reference run loses resolution at t={t:.4f}: "
                f"tail fraction {tail:.3e} > {TAIL_FRACTION_LIMIT}")

    idx = SobolevIndex(s - 1.0, "inhomogeneous")

    def one(eps):
        rec, _ = _run_recorded(replace(cfg_T, eps=eps))
        errs = []
        for uref, ueps in zip(ref_rec.states, rec.states):
            diff = SpectralVelocity(uref.lattice,
                                    ueps.coeffs - uref.coeffs, uref.t)
            errs.append(sobolev_norm(diff, idx))
        return float(max(errs))

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        errors = list(pool.map(one, eps_list))

    log_e, log_err = np.log(eps_list), np.log(errors)
    slope, intercept = np.polyfit(log_e, log_err, 1)
    rms = float(np.sqrt(np.mean((log_err - (slope * log_e + intercept)) ** 2)))
    return SweepResult(
        parameter="eps", values=np.asarray(eps_list),
        outcomes={"sup_error": np.asarray(errors)},
        slope=float(slope), intercept=float(intercept), rms=rms)


def alpha_comparison(base_cfg: SimConfig, alpha_list, eps: float,
                     max_workers: int | None = None) -> SweepResult:
    """Run identical data across dissipation orders and tabulate outcomes.

    Per alpha: sup_t enstrophy, time-integrated hyperdissipation, final
    shell spectrum, and the defect split at the configured eta.  Per-alpha
    failures are reported without aborting the sweep.
    """
    alpha_list = [float(a) for a in alpha_list]

    def one(alpha):
        try:
            cfg = replace(base_cfg, symbol="power", alpha=alpha, eps=eps)
            rec, records = _run_recorded(cfg)
        except Exception as err:  # sweep robustness: report, keep going
            return {"error": f"{type(err).__name__}: {err}"}
        times = np.array([r.t for r in records])
        hyper = np.array([r.hyper_dissipation_rate for r in records])
        out = {
            "sup_enstrophy": float(max(r.enstrophy for r in records)),
            "total_hyperdissipation": float(np.trapezoid(hyper, times)),
            "final_spectrum": records[-1].shell_spectrum,
            "error": None,
        }
        if eps > 0:
            sym = cfg.build_symbol(rec.states[0].lattice)
            out["defect"] = defect_split(rec.times, rec.states, sym,
                                         cfg.nu, eps, cfg.eta, cfg.t_end)
        return out

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(one, alpha_list))

    outcomes: dict = {key: [r.get(key) for r in results]
                      for key in ("sup_enstrophy", "total_hyperdissipation",
                                  "final_spectrum", "defect", "error")}
    return SweepResult(parameter="alpha", values=np.asarray(alpha_list),
                       outcomes=outcomes)


def kernel_interpolation_study(base_cfg: SimConfig, families) -> list:
    """Classify a family of kernel-induced symbols; run the admissible ones.

    ``families`` is a list of (name, builder) pairs, builder(lattice) ->
    list of c_hat arrays (one per direction).  Inadmissible kernels are
    reported as refused, not fatal.  Hyperdissipative members get a short
    run whose budget residual demonstrates end-to-end pluggability.
    """
    if len(families) < 3:
        raise ValueError("need a family of >= 3 kernels")
    lattice = base_cfg.build_lattice()
    band = (lattice.k_unit, lattice.dealias_limit * lattice.k_unit)
    report = []
    for name, builder in families:
        entry = {"name": name, "refused": False, "classification": None,
                 "budget_residual": None}
        try:
            sym = kernel_symbol(lattice, builder(lattice))
        except ValueError as err:
            entry["refused"] = True
            entry["reason"] = str(err)
            report.append(entry)
            continue
        cls = classify(sym, band)
        entry["classification"] = cls
        if cls.tag == "hyperdissipative":
            # run the loop directly around the kernel symbol
            from .dynamics import Stepper, TrajectoryState, initial_condition
            from .diagnostics import attach_budget_residuals, make_record
            u0 = initial_condition(base_cfg, lattice)
            stepper = Stepper(lattice, sym, base_cfg.nu, base_cfg.eps,
                              base_cfg.dt, nonlinear=base_cfg.nonlinear)
            state = TrajectoryState(u=u0, t=u0.t, step_index=0)
            records = [make_record(state.u, base_cfg.nu, base_cfg.eps, sym)]
            n_steps = int(round(base_cfg.t_end / base_cfg.dt))
            for _ in range(n_steps):
                state = stepper.step(state)
                records.append(make_record(state.u, base_cfg.nu,
                                           base_cfg.eps, sym))
            attach_budget_residuals(records)
            entry["budget_residual"] = max(r.budget_residual for r in records)
        report.append(entry)
    return report
