import logging
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..core.analytic import functional_ratio, kappa, ps_bounds, ps_fd_only, ps_hd_only
from ..core.model import DuplexMix, NetworkConfig, SelfInterferenceModel, SuccessMode
from ..core.parallel import ordered_map
from ..core.throughput import critical_beta
from ..simulation.estimators import estimate_ps
from ..simulation.network import SimConfig
from .engine import write_csv
from .loader import Settings
from .units import cancellation_db, db_to_linear

logger = logging.getLogger('figures')

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")

# operating points of the figure tables
LAMBDA = 0.1
ALPHA = 4.0
THETA_DB_RANGE = (-10.0, 20.0)
TG_THETA_DB_RANGE = (-10.0, 40.0)
FIG3_BETAS = {"0": 0.0, "1e-4": 1e-4}
FIG4_CURVES = [(3.0, 0.0), (3.0, 10.0), (4.0, 0.0), (4.0, 10.0)]
FIG4_R_DECADES = (0.0, 3.0)
FIG5_BETAS = {"1e-5": 1e-5, "1e-7": 1e-7, "0": 0.0}


def _theta_grid(settings: Settings, tg: bool = False) -> np.ndarray:
    lo, hi = TG_THETA_DB_RANGE if tg else THETA_DB_RANGE
    return np.linspace(lo, hi, settings.tg_theta_points if tg else settings.theta_points)


def _base(theta_db: float, alpha: float = ALPHA, R: float = 1.0) -> NetworkConfig:
    return NetworkConfig(lam=LAMBDA, theta=db_to_linear(theta_db), R=R, alpha=alpha)


def _overlay(df: pd.DataFrame, mix: DuplexMix, si: SelfInterferenceModel, mode: SuccessMode,
             sim: SimConfig, workers: Optional[int]) -> pd.DataFrame:
    """Append mc_estimate, ci_low and ci_high columns estimated at every theta of the table."""
    estimates = [estimate_ps(_base(t), mix, si, mode, sim, workers) for t in df["theta_db"]]
    df = df.copy()
    df["mc_estimate"] = [e.estimate for e in estimates]
    df["ci_low"] = [e.ci_low for e in estimates]
    df["ci_high"] = [e.ci_high for e in estimates]
    return df


def _fig1_row(theta_db: float, rel_tol: float) -> dict:
    b = ps_bounds(_base(theta_db), DuplexMix(0.0, 0.5, 0.5), SelfInterferenceModel.perfect(),
                  SuccessMode.UNCONDITIONAL, rel_tol=rel_tol)
    return {"theta_db": theta_db, "ps_exact": b.exact, "ps_lower": b.lower, "ps_upper": b.upper}


def _fig2_row(theta_db: float, rel_tol: float) -> dict:
    cfg = _base(theta_db)
    b = ps_bounds(cfg, DuplexMix.fd_only(), SelfInterferenceModel.perfect(), SuccessMode.FD, rel_tol=rel_tol)
    return {"theta_db": theta_db, "ps_fd_only": b.exact, "ps_lower": b.lower,
            "ps_upper": b.upper, "ps_hd_only": ps_hd_only(cfg)}


def _fig3_row(theta_db: float, si: SelfInterferenceModel, rel_tol: float) -> dict:
    cfg = _base(theta_db)
    return {"theta_db": theta_db, "ps_fd_only": ps_fd_only(cfg, si, rel_tol),
            "ps_hd_only": ps_hd_only(cfg), "kappa": kappa(cfg, si)}


def _fig4_row(R: float, alpha: float, theta_db: float, K: float, rel_tol: float) -> dict:
    return {"beta_c_db": cancellation_db(critical_beta(_base(theta_db, alpha, R), K, rel_tol)), "R": R}


def fig1(settings: Settings, workers: Optional[int] = None) -> dict[str, pd.DataFrame]:
    """Unconditional success probability and its bounds; p1 = p2 = 0.5, beta = 0."""
    rows = ordered_map(partial(_fig1_row, rel_tol=settings.rel_tol), _theta_grid(settings), workers)
    return {"fig1": pd.DataFrame(rows)}


def fig2(settings: Settings, workers: Optional[int] = None) -> dict[str, pd.DataFrame]:
    """FD-only success probability with its bounds, against HD-only; beta = 0."""
    rows = ordered_map(partial(_fig2_row, rel_tol=settings.rel_tol), _theta_grid(settings), workers)
    return {"fig2": pd.DataFrame(rows)}


def fig3(settings: Settings, workers: Optional[int] = None) -> dict[str, pd.DataFrame]:
    """FD-only and HD-only success probabilities at beta = 0 and 1e-4, K from the Wi-Fi preset."""
    K = settings.preset_K("wifi_2g4")
    tables = {}
    for label, beta in FIG3_BETAS.items():
        row = partial(_fig3_row, si=SelfInterferenceModel(beta=beta, K=K), rel_tol=settings.rel_tol)
        tables[f"fig3_beta_{label}"] = pd.DataFrame(ordered_map(row, _theta_grid(settings), workers))
    return tables


def fig4(settings: Settings, workers: Optional[int] = None) -> dict[str, pd.DataFrame]:
    """
    Link distance against the cancellation depth -10 log10(beta_c) needed for FD to break even.

    One table per (alpha, theta); in (R, beta_c) log-log axes each curve is a line of slope -1/alpha.
    """
    K = settings.preset_K("wifi_2g4")
    distances = [float(R) for R in np.logspace(*FIG4_R_DECADES, settings.distance_points)]
    tables = {}
    for alpha, theta_db in FIG4_CURVES:
        row = partial(_fig4_row, alpha=alpha, theta_db=theta_db, K=K, rel_tol=settings.rel_tol)
        tables[f"fig4_alpha_{alpha:g}_theta_{theta_db:g}db"] = pd.DataFrame(ordered_map(row, distances, workers))
    return tables


def fig5(settings: Settings, workers: Optional[int] = None) -> dict[str, pd.DataFrame]:
    """
    Throughput gain and its bounds against theta for beta in {1e-5, 1e-7, 0}; alpha = 4, R = 1.

    TG = 2 kappa / (F / H); the ratio does not depend on beta and is evaluated once per theta.
    """
    K = settings.preset_K("wifi_2g4")
    thetas = _theta_grid(settings, tg=True)
    ratios = ordered_map(partial(functional_ratio, alpha=ALPHA, rel_tol=settings.rel_tol),
                         [db_to_linear(t) for t in thetas], workers)
    tables = {}
    for label, beta in FIG5_BETAS.items():
        si = SelfInterferenceModel(beta=beta, K=K)
        rows = []
        for t, ratio in zip(thetas, ratios):
            cfg = _base(t)
            k = kappa(cfg, si)
            rows.append({"theta_db": t, "tg": 2.0 * k / ratio, "tg_lower": k,
                         "tg_upper": 2.0 * k / (1.0 + cfg.delta)})
        tables[f"fig5_beta_{label}"] = pd.DataFrame(rows)
    return tables


_BUILDERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}


def run_figure(fig_id: str, out_dir: str | Path, settings: Settings, simulate: bool = False,
               sim: Optional[SimConfig] = None, workers: Optional[int] = None) -> list[Path]:
    """
    Write the CSV tables of one figure into out_dir.

    Parameters
    ----------
    fig_id : str
        One of fig1 .. fig5.
    simulate : bool
        Add Monte Carlo columns to the success-probability figures (fig1 to fig3).
    sim : SimConfig, optional
        Monte Carlo settings; defaults come from settings.

    Returns
    -------
    list[Path]
        Written files, in curve order.
    """
    if fig_id not in _BUILDERS:
        message = f"unknown figure {fig_id!r}; choose from {list(FIGURES)}"
        logger.error(message)
        raise ValueError(message)
    logger.info(f"building {fig_id}")
    tables = _BUILDERS[fig_id](settings, workers)

    if simulate:
        sim = sim or SimConfig(trials=settings.trials, seed=settings.seed,
                               truncation_epsilon=settings.truncation_epsilon,
                               confidence_level=settings.confidence_level)
        K = settings.preset_K("wifi_2g4")
        if fig_id == "fig1":
            tables["fig1"] = _overlay(tables["fig1"], DuplexMix(0.0, 0.5, 0.5), SelfInterferenceModel.perfect(),
                                      SuccessMode.UNCONDITIONAL, sim, workers)
        elif fig_id == "fig2":
            tables["fig2"] = _overlay(tables["fig2"], DuplexMix.fd_only(), SelfInterferenceModel.perfect(),
                                      SuccessMode.FD, sim, workers)
        elif fig_id == "fig3":
            for label, beta in FIG3_BETAS.items():
                name = f"fig3_beta_{label}"
                tables[name] = _overlay(tables[name], DuplexMix.fd_only(), SelfInterferenceModel(beta, K),
                                        SuccessMode.FD, sim, workers)
        else:
            logger.warning(f"{fig_id} has no success-probability curve; --simulate ignored")

    out_dir = Path(out_dir)
    return [write_csv(df, out_dir / f"{name}.csv") for name, df in tables.items()]
