"""Experiment drivers behind the CLI subcommands.

Every realization draws from its own child stream keyed by the master seed
and the realization index, so results do not depend on how realizations are
spread over worker threads.  Workers only compute; averaging happens after
gathering, in index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..array import (RadarBeamformer, allocate_antennas, beampattern, pointing_angles,
                     sensing_distances, synthesize_radar_beamformer)
from ..channel import Channel, child_rng, generate_channel, optimal_beamformers, perturb
from ..fdsolver import (TradeoffConfig, align_radar_target, closed_form_solution, homogenize,
                        solve_full_digital, solve_sdr, stack_targets)
from ..hybrid import HybridConfig, alternating_minimize, random_analog, svd_analog
from ..kinematics import AoI, Trajectory, predict_aoi, predict_trajectory
from ..metrics import (LinkBudget, energy_efficiency, mismatched_spectral_efficiency,
                       power_sum, spectral_efficiency)
from .config import ScenarioConfig

LONG_HEADER = ("experiment", "scheme", "snr_db", "rho", "sigma_e", "metric", "value",
               "realizations", "seed")
AOI_HEADER = ("kind", "index", "time_s", "x_m", "y_m", "dx_m", "dy_m", "speed_mps",
              "heading_deg", "radius_m", "pointing_deg", "sensing_distance_m",
              "n_antennas", "n_antennas_uniform")
DIAG_HEADER = ("rho", "method", "objective", "residual_comm", "residual_radar",
               "sdp_value", "sdp_status", "eigen_ratio", "power", "seed")
SCHEME_ORDER = ("optimal", "full-digital", "hybrid", "uniform", "radar-target")


def fmt(value) -> str:
    """CSV cell text: floats with 12 significant digits, blanks for None."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


@dataclass(frozen=True)
class Geometry:
    """Realization-independent scenario pieces."""
    trajectory: Trajectory
    aoi: AoI
    angles: np.ndarray
    distances: np.ndarray
    radar: RadarBeamformer
    uniform: RadarBeamformer


def benchmark_uniform(cfg: ScenarioConfig, angles=None) -> RadarBeamformer:
    """Comparison beamformer: same pointing angles, antennas split evenly."""
    if angles is None:
        angles = scenario_geometry(cfg).angles
    angles = np.asarray(angles, dtype=float)
    # equal distances make the proportional rule an even split
    sizes = allocate_antennas(np.ones(len(angles)), cfg.array.n_tx)
    return synthesize_radar_beamformer(angles, sizes, cfg.array_config())


def scenario_geometry(cfg: ScenarioConfig) -> Geometry:
    """Predicted trajectory, AoI and the two radar beamformers."""
    k = cfg.kinematics
    traj = predict_trajectory(cfg.vehicle_state(), cfg.control_input(),
                              cfg.vehicle_geometry(), k.horizon, k.stages, step=k.step)
    aoi = predict_aoi(traj, cfg.vehicle_geometry())
    if k.waypoints:
        aoi = AoI(centers=np.array(k.waypoints, dtype=float), radius=k.safety_radius,
                  origin=aoi.origin)
    angles = pointing_angles(aoi)
    distances = sensing_distances(aoi)
    arr = cfg.array_config()
    radar = synthesize_radar_beamformer(
        angles, allocate_antennas(distances, cfg.array.n_tx), arr)
    return Geometry(traj, aoi, angles, distances, radar, benchmark_uniform(cfg, angles))


def _map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- per-realization design --------------------------------------------------

@dataclass
class Design:
    channel: np.ndarray
    combiner: np.ndarray
    precoders: dict  # (scheme, rho) -> N_t x N_s precoder


def _aligned(cfg, radar):
    return align_radar_target(radar, cfg.solver.n_streams, scale=cfg.solver.scale_radar)


def _fd(cfg, f_opt, f_rad, rho):
    s = cfg.solver
    return solve_full_digital(f_opt, f_rad, TradeoffConfig(rho, s.n_streams),
                              method=s.method, sdp_tol=s.sdp_tol).matrix


def _hybrid(cfg, H, f_opt, f_rad, rho, index):
    s = cfg.solver
    hc = HybridConfig(s.n_rf, rho, s.n_streams, s.outer_max, s.outer_tol,
                      s.inner_tol, s.inner_max)
    if s.hybrid_init == "svd":
        init = svd_analog(H, s.n_rf)
    else:
        init = random_analog(H.shape[1], s.n_rf,
                             child_rng(cfg.sweep.seed, "hybrid-init", index))
    return alternating_minimize(hc, f_opt, f_rad, f_rf_init=init).precoder


def design(cfg: ScenarioConfig, geom: Geometry, index: int, *, fd_rhos=(),
           hybrid_rhos=(), extras=True) -> Design:
    """Channel draw ``index`` and the precoders of every requested scheme."""
    ch = generate_channel(cfg.channel_config(), cfg.sweep.seed, "realization", index)
    pair = optimal_beamformers(ch, cfg.solver.n_streams)
    f_rad = _aligned(cfg, geom.radar)
    f_uni = _aligned(cfg, geom.uniform)
    pre = {}
    if extras:
        pre[("optimal", None)] = pair.f_opt
        pre[("radar-target", None)] = f_rad
    for rho in fd_rhos:
        pre[("full-digital", rho)] = _fd(cfg, pair.f_opt, f_rad, rho)
        pre[("uniform", rho)] = _fd(cfg, pair.f_opt, f_uni, rho)
    for rho in hybrid_rhos:
        pre[("hybrid", rho)] = _hybrid(cfg, ch.matrix, pair.f_opt, f_rad, rho, index)
    return Design(ch.matrix, pair.w_opt, pre)


def _realization_f_opt(cfg, index):
    ch = generate_channel(cfg.channel_config(), cfg.sweep.seed, "realization", index)
    return optimal_beamformers(ch, cfg.solver.n_streams).f_opt


def _sorted_keys(keys):
    def order(key):
        scheme, rho = key
        return (SCHEME_ORDER.index(scheme), -1.0 if rho is None else rho)
    return sorted(keys, key=order)


def _long_row(experiment, scheme, snr_db, rho, sigma_e, metric, value, cfg):
    return [experiment, scheme, fmt(float(snr_db)) if snr_db is not None else "",
            fmt(None if rho is None else float(rho)),
            fmt(None if sigma_e is None else float(sigma_e)),
            metric, fmt(float(value)), str(cfg.sweep.realizations), str(cfg.sweep.seed)]


# -- experiments ---------------------------------------------------------------

def run_aoi(cfg: ScenarioConfig, threads: int = 1):
    """Trajectory samples followed by one row per AoI disk."""
    geom = scenario_geometry(cfg)
    rows = []
    for i, (t, st) in enumerate(zip(geom.trajectory.times, geom.trajectory.states)):
        rows.append(["trajectory", str(i), fmt(float(t)), fmt(st.x), fmt(st.y),
                     fmt(st.x - geom.aoi.origin[0]), fmt(st.y - geom.aoi.origin[1]),
                     fmt(st.v), fmt(math.degrees(st.heading)), "", "", "", "", ""])
    for k, (dx, dy) in enumerate(geom.aoi.centers):
        rows.append(["aoi", str(k + 1), "", fmt(geom.aoi.origin[0] + dx),
                     fmt(geom.aoi.origin[1] + dy), fmt(float(dx)), fmt(float(dy)), "", "",
                     fmt(float(geom.aoi.radius)), fmt(math.degrees(geom.angles[k])),
                     fmt(float(geom.distances[k])), str(geom.radar.subarray_sizes[k]),
                     str(geom.uniform.subarray_sizes[k])])
    return AOI_HEADER, rows


def beampattern_columns(cfg: ScenarioConfig) -> list[str]:
    names = ["proposed", "uniform"] + [f"rho_{r:g}" for r in cfg.sweep.beampattern_rho]
    cols = ["theta_deg"]
    for name in names:
        cols += [f"{name}_linear", f"{name}_db"]
    return cols


def run_beampattern(cfg: ScenarioConfig, threads: int = 1):
    """Radar targets and full-digital solutions on realization 0, one column pair each."""
    geom = scenario_geometry(cfg)
    arr, grid = cfg.array_config(), cfg.grid()
    f_opt = _realization_f_opt(cfg, 0)
    f_rad = _aligned(cfg, geom.radar)
    mats = [f_rad, _aligned(cfg, geom.uniform)]
    mats += _map(lambda r: _fd(cfg, f_opt, f_rad, r), cfg.sweep.beampattern_rho, threads)
    patterns = [beampattern(F @ F.conj().T, arr, grid).power for F in mats]
    rows = []
    for g, theta in enumerate(np.degrees(grid)):
        row = [fmt(float(theta))]
        for p in patterns:
            row += [fmt(float(p[g])), fmt(10.0 * math.log10(max(float(p[g]), 1e-30)))]
        rows.append(row)
    return tuple(beampattern_columns(cfg)), rows


def _fd_rhos(cfg):
    return tuple(sorted(set(cfg.sweep.rho) | {cfg.solver.rho}))


def run_se_sweep(cfg: ScenarioConfig, threads: int = 1):
    """Mean spectral efficiency against SNR for every scheme, and against rho.

    Full-digital and uniform-benchmark curves cover every configured rho and
    the solver rho; the hybrid design runs at the solver rho only.
    """
    geom = scenario_geometry(cfg)
    snrs = cfg.sweep.snr_db
    budgets = [LinkBudget.from_db(s) for s in snrs]

    def work(i):
        d = design(cfg, geom, i, fd_rhos=_fd_rhos(cfg), hybrid_rhos=(cfg.solver.rho,))
        return {key: [spectral_efficiency(d.channel, d.combiner, F, b) for b in budgets]
                for key, F in d.precoders.items()}

    results = _map(work, range(cfg.sweep.realizations), threads)
    rows = []
    for key in _sorted_keys(results[0].keys()):
        values = np.array([r[key] for r in results])
        for j, snr in enumerate(snrs):
            col = values[:, j]
            rows.append(_long_row("se-sweep", key[0], snr, key[1], None, "se_mean",
                                  col.mean(), cfg))
            rows.append(_long_row("se-sweep", key[0], snr, key[1], None, "se_std",
                                  col.std(), cfg))
    return LONG_HEADER, rows


def run_ee_sweep(cfg: ScenarioConfig, threads: int = 1):
    """Spectral and energy efficiency of the full-digital and hybrid designs."""
    geom = scenario_geometry(cfg)
    snrs = cfg.sweep.snr_db
    budgets = [LinkBudget.from_db(s) for s in snrs]
    rho = cfg.solver.rho
    model = cfg.power_model()
    powers = {"full-digital": power_sum("full-digital", cfg.array.n_tx, cfg.array.n_tx, model),
              "hybrid": power_sum("hybrid", cfg.array.n_tx, cfg.solver.n_rf, model)}

    def work(i):
        d = design(cfg, geom, i, fd_rhos=(rho,), hybrid_rhos=(rho,), extras=False)
        return {s: [spectral_efficiency(d.channel, d.combiner, d.precoders[(s, rho)], b)
                    for b in budgets] for s in ("full-digital", "hybrid")}

    results = _map(work, range(cfg.sweep.realizations), threads)
    rows = []
    for scheme in ("full-digital", "hybrid"):
        se = np.array([r[scheme] for r in results])
        p = powers[scheme]
        for j, snr in enumerate(snrs):
            ee = np.array([energy_efficiency(v, p) for v in se[:, j]])
            rows.append(_long_row("ee-sweep", scheme, snr, rho, None, "se_mean", se[:, j].mean(), cfg))
            rows.append(_long_row("ee-sweep", scheme, snr, rho, None, "ee_mean", ee.mean(), cfg))
            rows.append(_long_row("ee-sweep", scheme, snr, rho, None, "power_w", p, cfg))
    return LONG_HEADER, rows


def run_tv_sweep(cfg: ScenarioConfig, threads: int = 1):
    """Spectral efficiency when the beamformers see a stale channel.

    Beamformers are designed on the drawn channel; the link uses a perturbed
    copy with error variance ``sigma_e^2`` per entry, one draw per
    (realization, sigma_e).
    """
    geom = scenario_geometry(cfg)
    snrs = cfg.sweep.snr_db
    budgets = [LinkBudget.from_db(s) for s in snrs]
    rho = cfg.solver.rho
    sigmas = tuple(sorted(set(cfg.sweep.sigma_e)))
    schemes = ("optimal", "full-digital", "hybrid", "uniform")

    def work(i):
        d = design(cfg, geom, i, fd_rhos=(rho,), hybrid_rhos=(rho,))
        out = {}
        for sigma in sigmas:
            actual = perturb_matrix(cfg, d.channel, sigma, i)
            for scheme in schemes:
                key = (scheme, None if scheme == "optimal" else rho)
                F = d.precoders[key]
                out[(scheme, sigma)] = [mismatched_spectral_efficiency(
                    d.channel, actual, d.combiner, F, b) for b in budgets]
        return out

    results = _map(work, range(cfg.sweep.realizations), threads)
    rows = []
    for scheme in schemes:
        r_out = None if scheme == "optimal" else rho
        for sigma in sigmas:
            values = np.array([r[(scheme, sigma)] for r in results])
            for j, snr in enumerate(snrs):
                rows.append(_long_row("tv-sweep", scheme, snr, r_out, sigma, "se_mean",
                                      values[:, j].mean(), cfg))
    return LONG_HEADER, rows


def perturb_matrix(cfg, H, sigma, index):
    return perturb(Channel(H, spacing_over_wavelength=cfg.array.spacing), sigma,
                   cfg.sweep.seed, "perturb", index, f"{sigma:.12g}").matrix


def run_fd_diagnostics(cfg: ScenarioConfig, threads: int = 1):
    """Per-solve diagnostics of the full-digital design on realization 0."""
    geom = scenario_geometry(cfg)
    f_opt = _realization_f_opt(cfg, 0)
    f_rad = _aligned(cfg, geom.radar)
    s = cfg.solver

    def work(rho):
        tc = TradeoffConfig(rho, s.n_streams)
        if s.method == "sdr":
            sol = solve_sdr(homogenize(stack_targets(f_opt, f_rad, tc), s.n_streams), s.sdp_tol)
        else:
            sol = closed_form_solution(f_opt, f_rad, tc)
        rc, rr = sol.residuals(f_opt, f_rad)
        return [fmt(float(rho)), sol.method, fmt(sol.objective), fmt(rc), fmt(rr),
                fmt(sol.sdp_value), fmt(sol.sdp_status), fmt(sol.eigen_ratio),
                fmt(float(np.linalg.norm(sol.matrix) ** 2)), str(cfg.sweep.seed)]

    return DIAG_HEADER, _map(work, _fd_rhos(cfg), threads)


EXPERIMENTS = {
    "aoi": run_aoi,
    "beampattern": run_beampattern,
    "se-sweep": run_se_sweep,
    "ee-sweep": run_ee_sweep,
    "tv-sweep": run_tv_sweep,
    "fd-diagnostics": run_fd_diagnostics,
}
