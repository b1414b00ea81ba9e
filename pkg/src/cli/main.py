import sys
import logging
import argparse
from pathlib import Path
from typing import Optional, Sequence

from ..core.analytic import sir_loss_bounds
from ..core.errors import ConfigurationError, DomainError, InversionError, QuadratureError
from ..core.model import NetworkConfig, SelfInterferenceModel
from ..core.throughput import critical_beta, t_max, throughput_gain, to_bits
from ..simulation.network import SimConfig
from .engine import run_sweep
from .figures import FIGURES, run_figure
from .loader import BASE_CONFIG, DEFAULT_PRESET, Settings, load_experiment, load_settings, parse_beta_db
from .units import cancellation_db, db_to_linear, linear_to_db
from .validate import validate

logger = logging.getLogger('cli')

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DEFAULT_LEVEL = 'INFO'
DEFAULT_FALLBACK = logging.DEBUG  # What to set if the level is invalid
LOGGER_MAP = {
    'model': 'model_level',
    'quadrature': 'quadrature_level',
    'analytic': 'analytic_level',
    'throughput': 'throughput_level',
    'simulator': 'simulator_level',
    'loader': 'loader_level',
    'engine': 'engine_level',
    'figures': 'figures_level',
    'validate': 'validate_level',
    'cli': 'cli_level',
}


def setup_logging(logger_config: dict, root_level: Optional[str] = None) -> None:
    """
    Install the root handler and set every named logger from the `logger:` section of base.yaml.

    An invalid level name falls back to DEBUG with a warning; root_level, when given,
    overrides every named level.
    """
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, force=True)
    for logger_name, config_key in LOGGER_MAP.items():
        level_str = str(root_level or logger_config.get(config_key, DEFAULT_LEVEL))
        logger_instance = logging.getLogger(logger_name)
        try:
            logger_instance.setLevel(getattr(logging, level_str.upper()))
        except AttributeError:
            logger_instance.setLevel(DEFAULT_FALLBACK)
            logging.warning(f"Level '{level_str}' in YAML for '{config_key}' is not valid. "
                            f"Falling back to {logging.getLevelName(DEFAULT_FALLBACK)}.")
    if root_level:
        logging.getLogger().setLevel(root_level.upper())


def _spec_overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.set or [])
    if args.trials is not None:
        overrides.append(f"simulation.trials={args.trials}")
    if args.seed is not None:
        overrides.append(f"simulation.seed={args.seed}")
    if args.output is not None:
        overrides.append(f"output={args.output}")
    if getattr(args, "corrupt_f", None) is not None:
        overrides.append(f"validation.corrupt_f={args.corrupt_f}")
    return overrides


def _point(args: argparse.Namespace, settings: Settings) -> tuple[NetworkConfig, SelfInterferenceModel]:
    cfg = NetworkConfig(lam=args.lam, theta=db_to_linear(args.theta_db), R=args.R, alpha=args.alpha)
    K = db_to_linear(args.K_db) if args.K_db is not None else settings.preset_K(DEFAULT_PRESET)
    _, beta = parse_beta_db(args.beta_db, "--beta-db")
    si = SelfInterferenceModel(beta=beta, K=K)
    return cfg, si


def cmd_figure(args: argparse.Namespace, settings: Settings) -> int:
    sim = None
    if args.simulate:
        sim = SimConfig(trials=settings.trials if args.trials is None else args.trials,
                        seed=settings.seed if args.seed is None else args.seed,
                        truncation_epsilon=settings.truncation_epsilon,
                        confidence_level=settings.confidence_level)
    out_dir = args.out_dir or settings.out_dir
    for path in run_figure(args.id, out_dir, settings, simulate=args.simulate, sim=sim, workers=args.workers):
        print(path)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    spec = load_experiment(args.spec, settings, _spec_overrides(args))
    run_sweep(spec, workers=args.workers)
    print(spec.output)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    spec = load_experiment(args.spec, settings, _spec_overrides(args))
    report = validate(spec, workers=args.workers)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def cmd_beta_c(args: argparse.Namespace, settings: Settings) -> int:
    cfg, si = _point(args, settings)
    beta_c = critical_beta(cfg, si.K, settings.rel_tol)
    print(f"beta_c = {beta_c:.9g}")
    print(f"cancellation needed = {cancellation_db(beta_c):.6f} dB")
    return EXIT_OK


def cmd_tmax(args: argparse.Namespace, settings: Settings) -> int:
    cfg, si = _point(args, settings)
    opt = t_max(cfg, si, settings.rel_tol)
    tg, lower, upper = throughput_gain(cfg, si, settings.rel_tol)
    print(f"regime = {opt.regime.value}")
    print(f"t_max = {opt.t_max:.9g} nats ({to_bits(opt.t_max):.9g} bits) per unit area per channel use")
    print(f"lambda1_opt = {opt.optimal.lambda1:.9g}")
    print(f"lambda2_opt = {opt.optimal.lambda2:.9g}")
    if opt.line is not None:
        print(f"optimal line: lambda1 + {opt.line.fd_weight:.9g} lambda2 = {opt.line.level:.9g}")
    print(f"throughput gain = {tg:.9g} in ({lower:.9g}, {upper:.9g})")
    return EXIT_OK


def cmd_sir_loss(args: argparse.Namespace, settings: Settings) -> int:
    cfg, si = _point(args, settings)
    lower, upper = sir_loss_bounds(args.p, cfg, si, settings.rel_tol)
    print(f"SIR loss in [{lower:.9g}, {upper:.9g}] = [{linear_to_db(lower):.4f} dB, {linear_to_db(upper):.4f} dB]")
    return EXIT_OK


def _add_point_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, help="Node density.")
    p.add_argument("--theta-db", type=float, default=0.0, help="SIR threshold in dB.")
    p.add_argument("--R", type=float, default=1.0, help="Link distance.")
    p.add_argument("--alpha", type=float, default=4.0, help="Path-loss exponent (> 2).")
    p.add_argument("--beta-db", default="perfect", help="Self-interference cancellation in dB, or 'perfect'.")
    p.add_argument("--K-db", type=float, default=None, help="Propagation constant in dB (default: wifi_2g4 preset).")


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("spec", help="Experiment YAML file.")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="Override a spec field.")
    p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point.")
    p.add_argument("--seed", type=int, default=None, help="Master seed.")
    p.add_argument("--output", default=None, help="CSV output path.")


def create_cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdnet",
        description="Success probability and throughput of mixed HD/FD Poisson networks.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--config", default=str(BASE_CONFIG), help="Base YAML configuration.")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes (FDNET_WORKERS otherwise).")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None,
                        help="Override every logger level.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure", help="Write the CSV tables of a figure.")
    p.add_argument("id", choices=FIGURES)
    p.add_argument("--out-dir", default=None, help="Output directory (figures.out_dir otherwise).")
    p.add_argument("--simulate", action="store_true", help="Add Monte Carlo columns to fig1..fig3.")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_figure)

    p = sub.add_parser("sweep", help="Evaluate an experiment spec over its grid.")
    _add_spec_args(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("validate", help="Check analytic values against Monte Carlo intervals.")
    _add_spec_args(p)
    p.add_argument("--corrupt-f", type=float, default=None, help="Debug: multiply F by this factor.")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("beta-c", help="Critical SIPR at one configuration.")
    _add_point_args(p)
    p.set_defaults(handler=cmd_beta_c)

    p = sub.add_parser("tmax", help="Maximal throughput and its regime at one configuration.")
    _add_point_args(p)
    p.set_defaults(handler=cmd_tmax)

    p = sub.add_parser("sir-loss", help="Bounds of the SIR loss of FD-only over HD-only.")
    _add_point_args(p)
    p.add_argument("--p", type=float, default=0.5, help="Target success probability.")
    p.set_defaults(handler=cmd_sir_loss)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point: parse arguments, configure logging and dispatch.

    Exit codes: 0 success, 1 validation failure, 2 configuration error, 3 numeric failure.
    """
    parser = create_cli_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings(Path(args.config))
        setup_logging(settings.logger, args.log_level)
        workers = args.workers if args.workers is not None else settings.workers
        args.workers = workers
        return args.handler(args, settings)
    except FileNotFoundError as e:
        logger.critical(f"{e}")
        return EXIT_CONFIG
    except (ConfigurationError, DomainError) as e:
        logger.critical(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (QuadratureError, InversionError) as e:
        logger.critical(f"Numeric failure: {e}")
        return EXIT_NUMERIC
    except OSError as e:
        logger.critical(f"I/O error: {e}")
        return EXIT_CONFIG
    except (ValueError, TypeError) as e:
        # a config value that slipped past the loader checks
        logger.critical(f"Invalid configuration value: {type(e).__name__}: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
