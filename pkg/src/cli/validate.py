import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..core.errors import ConfigurationError
from ..core.metrics import ci_miss_budget
from .engine import run_sweep
from .loader import ExperimentSpec

logger = logging.getLogger('validate')


@dataclass
class ValidationReport:
    """
    Outcome of an analytic-versus-simulation check.

    Attributes:
    name (str): Experiment name.
    points (list[dict]): Per grid point: sweep value, analytic value, estimate, interval and pass flag.
    misses (int): Points whose interval does not contain the analytic value.
    miss_budget (int): Misses tolerated at the configured quantile.
    passed (bool): misses <= miss_budget.
    warnings (list[str]): Low trial counts and similar caveats.
    """
    name: str
    sweep_variable: str
    mode: str
    trials: int
    seed: int
    confidence_level: float
    corrupt_f: float
    points: list[dict]
    misses: int
    miss_budget: int
    passed: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sweep_variable": self.sweep_variable,
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "confidence_level": self.confidence_level,
            "corrupt_f": self.corrupt_f,
            "points": self.points,
            "misses": self.misses,
            "miss_budget": self.miss_budget,
            "passed": self.passed,
            "warnings": self.warnings,
        }

    def summary(self) -> str:
        n = len(self.points)
        lines = [
            f"validation {self.name}: {n - self.misses}/{n} points inside the "
            f"{100 * self.confidence_level:g}% interval ({self.mode}, {self.trials} trials, seed {self.seed})",
            f"misses {self.misses}, budget {self.miss_budget}: {'PASS' if self.passed else 'FAIL'}",
        ]
        for p in self.points:
            if not p["pass"]:
                lines.append(f"  miss at {self.sweep_variable}={p['value']:.6g}: analytic {p['analytic']:.6g} "
                             f"outside [{p['ci_low']:.6g}, {p['ci_high']:.6g}]")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)

    def write(self, path: str | Path) -> Path:
        """JSON with sorted keys and no timestamps, so equal runs give equal bytes."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="\n") as f:
                json.dump(self.to_dict(), f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            logger.error(f"Cannot write {path}: {e}")
            raise OSError(f"cannot write {path}: {e}") from e
        return path


def report_path(spec: ExperimentSpec) -> Path:
    return spec.output.with_suffix(".report.json")


def validate(spec: ExperimentSpec, workers: Optional[int] = None, write: bool = True) -> ValidationReport:
    """
    Run the sweep with its simulation block and check the analytic value against the
    Monte Carlo interval at every grid point.

    The run passes when the misses do not exceed the miss_budget_quantile quantile of
    Binomial(points, 1 - confidence_level).

    Raises
    ------
    ConfigurationError
        If the spec has no simulation block.
    """
    if spec.sim is None:
        message = f"{spec.name}: validate needs a simulation block"
        logger.error(message)
        raise ConfigurationError(message)
    sim = spec.sim
    warnings = []
    if sim.trials <= spec.low_trial_threshold:
        warnings.append(f"low trial count: {sim.trials} <= {spec.low_trial_threshold}, intervals are unreliable")
        logger.warning(warnings[-1])
    if spec.corrupt_f != 1.0:
        warnings.append(f"analytic F multiplied by {spec.corrupt_f:g} (negative control)")
        logger.warning(warnings[-1])

    df = run_sweep(spec, workers, write=write)
    values = spec.sweep.values()
    points = []
    for i, row in df.iterrows():
        points.append({
            "value": float(values[i]),
            "analytic": float(row["mc_analytic"]),
            "estimate": float(row["mc_estimate"]),
            "ci_low": float(row["ci_low"]),
            "ci_high": float(row["ci_high"]),
            "pass": bool(row["ci_contains"]),
        })
    misses = sum(not p["pass"] for p in points)
    budget = ci_miss_budget(len(points), sim.confidence_level, spec.miss_budget_quantile)
    report = ValidationReport(
        name=spec.name,
        sweep_variable=spec.sweep.variable,
        mode=spec.mc_mode.value,
        trials=sim.trials,
        seed=int(sim.seed),
        confidence_level=sim.confidence_level,
        corrupt_f=spec.corrupt_f,
        points=points,
        misses=misses,
        miss_budget=budget,
        passed=misses <= budget,
        warnings=warnings,
    )
    logger.info(f"validation {spec.name}: {misses} misses, budget {budget}, "
                f"{'passed' if report.passed else 'failed'}")
    if write:
        report.write(report_path(spec))
    return report
