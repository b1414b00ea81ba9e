import math
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import pandas as pd

from ..core.analytic import gap_closed_form, kappa, pair_F, ps_bounds, ps_from_functionals, spectral_H
from ..core.model import DuplexMix, NetworkConfig, SelfInterferenceModel, SuccessMode
from ..core.parallel import ordered_map
from ..core.throughput import critical_beta, spatial_efficiency, t_hd_max, t_fd_max, t_max, throughput_gain
from ..simulation.estimators import estimate_ps
from .loader import ExperimentSpec

logger = logging.getLogger('engine')

ANALYTIC_COLUMNS = [
    "theta_db", "lambda", "R", "alpha", "p0", "p1", "p2", "beta", "K",
    "H", "F", "f_over_h", "kappa",
    "ps_hd", "ps_fd", "ps_unconditional", "ps_lower", "ps_upper", "gap",
    "t_hd_max", "t_fd_max", "t_max", "regime", "beta_c",
    "tg", "tg_lower", "tg_upper", "spatial_eff_hd", "spatial_eff_fd",
]
MC_COLUMNS = ["mc_mode", "mc_analytic", "mc_estimate", "mc_std_error", "ci_low", "ci_high", "mc_trials", "ci_contains"]
PS_COLUMN = {SuccessMode.HD: "ps_hd", SuccessMode.FD: "ps_fd", SuccessMode.UNCONDITIONAL: "ps_unconditional"}

CSV_FLOAT_FORMAT = "%.12g"


@dataclass(frozen=True)
class _PointTask:
    cfg: NetworkConfig
    mix: DuplexMix
    si: SelfInterferenceModel
    theta_db: float
    mode: SuccessMode
    rel_tol: float
    corrupt_f: float


def analytic_row(task: _PointTask) -> dict:
    """
    Every analytic column at one grid point.

    Only the success probabilities see the corrupt_f factor; the functional,
    throughput and gain columns use the true F.
    """
    cfg, mix, si = task.cfg, task.mix, task.si
    H = spectral_H(cfg.s, cfg.alpha)
    F = pair_F(cfg.s, cfg.alpha, cfg.R, task.rel_tol)
    F_used = F * task.corrupt_f
    bounds = ps_bounds(cfg, mix, si, task.mode, with_exact=False)
    tg, tg_lower, tg_upper = throughput_gain(cfg, si, task.rel_tol)
    optimum = t_max(cfg, si, task.rel_tol)
    eff_hd, eff_fd = spatial_efficiency(cfg, task.rel_tol)
    return {
        "theta_db": task.theta_db,
        "lambda": cfg.lam,
        "R": cfg.R,
        "alpha": cfg.alpha,
        "p0": mix.p0,
        "p1": mix.p1,
        "p2": mix.p2,
        "beta": si.beta,
        "K": si.K,
        "H": H,
        "F": F,
        "f_over_h": F / H,
        "kappa": kappa(cfg, si),
        "ps_hd": ps_from_functionals(cfg, mix, si, SuccessMode.HD, H, F_used),
        "ps_fd": ps_from_functionals(cfg, mix, si, SuccessMode.FD, H, F_used),
        "ps_unconditional": ps_from_functionals(cfg, mix, si, SuccessMode.UNCONDITIONAL, H, F_used),
        "ps_lower": bounds.lower,
        "ps_upper": bounds.upper,
        "gap": gap_closed_form(mix, cfg.alpha) if mix.active > 0 else math.nan,
        "t_hd_max": t_hd_max(cfg)[0],
        "t_fd_max": t_fd_max(cfg, si, task.rel_tol)[0],
        "t_max": optimum.t_max,
        "regime": optimum.regime.value,
        "beta_c": critical_beta(cfg, si.K, task.rel_tol),
        "tg": tg,
        "tg_lower": tg_lower,
        "tg_upper": tg_upper,
        "spatial_eff_hd": eff_hd,
        "spatial_eff_fd": eff_fd,
    }


def write_csv(df: pd.DataFrame, path: str | Path) -> Path:
    """
    Write a result table: comma separated, header row, 12 significant digits, '\\n' line ends.

    Raises
    ------
    OSError
        With the path in the message.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        logger.error(f"Cannot write {path}: {e}")
        raise OSError(f"cannot write {path}: {e}") from e
    logger.info(f"wrote {len(df)} rows to {path}")
    return path


def run_sweep(spec: ExperimentSpec, workers: Optional[int] = None, write: bool = True) -> pd.DataFrame:
    """
    Evaluate the analytic columns, and the Monte Carlo columns when the spec has a
    simulation block, at every grid point of the sweep.

    Grid points are evaluated in parallel and the rows come out in grid order.
    Monte Carlo points run one after the other, each spreading its trial blocks
    over the workers.

    Returns
    -------
    pandas.DataFrame
        ANALYTIC_COLUMNS, followed by MC_COLUMNS when simulating.
    """
    values = spec.sweep.values()
    logger.info(f"Starting sweep {spec.name!r} over {spec.sweep.variable} ({len(values)} points).")
    points = [spec.point(float(v)) for v in values]
    tasks = [_PointTask(cfg, mix, si, theta_db, spec.mc_mode, spec.rel_tol, spec.corrupt_f)
             for cfg, mix, si, theta_db in points]
    rows = ordered_map(analytic_row, tasks, workers)
    df = pd.DataFrame(rows, columns=ANALYTIC_COLUMNS)

    if spec.sim is not None:
        mc = []
        column = PS_COLUMN[spec.mc_mode]
        for i, (cfg, mix, si, _) in enumerate(points):
            est = estimate_ps(cfg, mix, si, spec.mc_mode, spec.sim, workers)
            analytic = float(df.at[i, column])
            mc.append({
                "mc_mode": spec.mc_mode.value,
                "mc_analytic": analytic,
                "mc_estimate": est.estimate,
                "mc_std_error": est.std_error,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "mc_trials": est.trials,
                "ci_contains": est.contains(analytic),
            })
            logger.debug(f"point {i}: analytic={analytic:.6g} mc={est.estimate:.6g} "
                         f"[{est.ci_low:.6g}, {est.ci_high:.6g}]")
        df = pd.concat([df, pd.DataFrame(mc, columns=MC_COLUMNS)], axis=1)

    logger.info(f"Sweep {spec.name!r} finished.")
    if write:
        write_csv(df, spec.output)
    return df
