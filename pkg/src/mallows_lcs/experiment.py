"""
Monte Carlo harness for LCS of two independent Mallows permutations.

Each trial draws ``p ~ mu_{n,q}`` and ``t ~ mu_{n,q'}`` with
``q = 1 - beta/n`` and ``q' = 1 - gamma/n``, records ``LCS(p, t)`` and
rectangle statistics, and is reproducible on its own: the trial stream is
``Philox`` keyed by a 64-bit value derived from ``(seed, trial_index)``.
Aggregation always folds records in trial order, so reports do not depend
on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .density import DensityField, rho_rect
from .mallows import MallowsParams, ScalingParams, sample
from .perm_core import Permutation, induced, inverse
from .sequence_stats import (
    PointCloud,
    Rectangle,
    lcs,
    lcs_dp_oracle,
    lis,
    lis_in_rectangle,
)
from .variational import JBracket

__all__ = [
    "GENERATOR", "ConfigError", "GuardError", "ExperimentConfig", "TrialRecord",
    "BandCheck", "ConvergenceReport", "check_guard", "trial_rng", "run_trial", "run_trials",
    "empirical_rectangle_fraction", "lis_band_check", "SubPermutationBandReport",
    "sub_permutation_band_check", "convergence_report", "records_to_csv",
    "report_to_json",
]

GENERATOR = "numpy.random.Philox keyed by SeedSequence([seed, trial]).generate_state(1, uint64)"
ORACLE_MAX_N = 1000
CLOUDS = ("direct", "inverse")


class ConfigError(ValueError):
    """Experiment configuration violates its invariants."""


class GuardError(ConfigError):
    """A rectangle is too wide for the rectangle-LIS band (``dx |beta| >= ln 2``)."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    beta: float = 0.0
    gamma: float = 0.0
    trials: int = 1
    seed: int = 0
    rectangles: tuple[Rectangle, ...] = ()
    delta_x_guard: bool = True
    epsilon: float = 0.3
    # rectangle statistics on z(p, t) ("direct") or z(p^-1, t^-1) ("inverse")
    cloud: str = "direct"
    verify_oracle: bool = False
    output_path: str | None = None
    csv_path: str | None = None

    def __post_init__(self):
        rects = tuple(r if isinstance(r, Rectangle) else _rect_from_any(r) for r in self.rectangles)
        object.__setattr__(self, "rectangles", rects)
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.n > max(abs(self.beta), abs(self.gamma)):
            raise ConfigError(f"need n > max(|beta|, |gamma|), got n={self.n}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit nonnegative integer")
        if self.cloud not in CLOUDS:
            raise ConfigError(f"cloud must be one of {CLOUDS}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")

    @property
    def q(self) -> float:
        return ScalingParams(self.n, self.beta).q

    @property
    def q_prime(self) -> float:
        return ScalingParams(self.n, self.gamma).q

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> ExperimentConfig:
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        data["rectangles"] = tuple(_rect_from_any(r) for r in data.get("rectangles", ()))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rectangles"] = [str(r) for r in self.rectangles]
        return d


def _rect_from_any(r) -> Rectangle:
    if isinstance(r, Rectangle):
        return r
    if isinstance(r, str):
        return Rectangle.parse(r)
    if len(r) != 4:
        raise ConfigError(f"rectangle needs four numbers: {r!r}")
    return Rectangle(*(Fraction(str(v)) for v in r))


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed_used: int
    n: int
    lcs_value: int
    lcs_scaled: float
    rect_counts: tuple[int, ...] = ()
    rect_lis: tuple[int, ...] = ()


def trial_rng(seed: int, trial_index: int) -> tuple[np.random.Generator, int]:
    key = int(np.random.SeedSequence([seed, trial_index]).generate_state(1, np.uint64)[0])
    return np.random.Generator(np.random.Philox(key)), key


def _cloud(cfg: ExperimentConfig, p: Permutation, t: Permutation) -> PointCloud:
    if cfg.cloud == "inverse":
        return PointCloud.from_permutations(inverse(p), inverse(t))
    return PointCloud.from_permutations(p, t)


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialRecord:
    rng, key = trial_rng(cfg.seed, trial_index)
    p = sample(MallowsParams(cfg.n, cfg.q), rng)
    t = sample(MallowsParams(cfg.n, cfg.q_prime), rng)
    value = lcs(p, t)
    if cfg.verify_oracle and cfg.n <= ORACLE_MAX_N:
        check = lcs_dp_oracle(p, t)
        if check != value:
            raise AssertionError(f"trial {trial_index}: lcs {value} != dp oracle {check}")
    counts, lis_r = (), ()
    if cfg.rectangles:
        cloud = _cloud(cfg, p, t)
        counts = tuple(cloud.count(r) for r in cfg.rectangles)
        lis_r = tuple(lis_in_rectangle(cloud, r) for r in cfg.rectangles)
    return TrialRecord(trial_index, key, cfg.n, value, value / math.sqrt(cfg.n), counts, lis_r)


def _run_chunk(args: tuple[ExperimentConfig, range]) -> list[TrialRecord]:
    cfg, idx = args
    return [run_trial(cfg, i) for i in idx]


def run_trials(cfg: ExperimentConfig, threads: int = 1) -> list[TrialRecord]:
    """All trials of ``cfg``, in trial order; ``threads > 1`` uses worker processes."""
    if threads <= 1 or cfg.trials == 1:
        return [run_trial(cfg, i) for i in range(cfg.trials)]
    step = max(1, math.ceil(cfg.trials / (4 * threads)))
    chunks = [range(s, min(s + step, cfg.trials)) for s in range(0, cfg.trials, step)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(_run_chunk, [(cfg, c) for c in chunks])
        records = [r for part in parts for r in part]
    return sorted(records, key=lambda r: r.trial_index)


def empirical_rectangle_fraction(p: Permutation, t: Permutation, r: Rectangle) -> float:
    """Share of the points ``(p(i)/n, t(i)/n)`` lying in ``r``."""
    return PointCloud.from_permutations(p, t).count(r) / p.n


# -- rectangle LIS band ------------------------------------------------------

@dataclass(frozen=True)
class BandCheck:
    rho_masses: tuple[float, ...]
    bands: tuple[tuple[float, float], ...]
    pass_rates: tuple[float | None, ...]
    guard_violations: tuple[int, ...]


def _guard_ok(r: Rectangle, beta: float) -> bool:
    return float(r.width) * abs(beta) < math.log(2.0)


def check_guard(cfg: ExperimentConfig) -> tuple[int, ...]:
    """Indices of rectangles with ``dx |beta| >= ln 2``; raises if the guard is on."""
    violations = tuple(k for k, r in enumerate(cfg.rectangles) if not _guard_ok(r, cfg.beta))
    if cfg.delta_x_guard and violations:
        bad = ", ".join(str(cfg.rectangles[k]) for k in violations)
        raise GuardError(f"dx*|beta| >= ln 2 for rectangle(s) {bad}")
    return violations


def lis_band_check(cfg: ExperimentConfig, records: list[TrialRecord],
                   epsilon: float | None = None, *, strict: bool = True,
                   field: DensityField | None = None) -> BandCheck:
    """
    Per rectangle, the share of trials with ``l_R / sqrt(n rho(R))`` inside
    ``(2e^{-dx|b|/2} - eps, 2e^{dx|b|/2} + eps)``.

    With the guard on, rectangles with ``dx |beta| >= ln 2`` raise
    ``GuardError`` (``strict``) or are flagged and given no pass rate.
    """
    eps = cfg.epsilon if epsilon is None else epsilon
    field = field or DensityField(cfg.beta, cfg.gamma)
    if strict:
        violations = check_guard(cfg)
    else:
        violations = tuple(k for k, r in enumerate(cfg.rectangles) if not _guard_ok(r, cfg.beta))
    masses, bands, rates = [], [], []
    for k, r in enumerate(cfg.rectangles):
        mass = rho_rect(r, field)
        half = float(r.width) * abs(cfg.beta) / 2.0
        band = (2.0 * math.exp(-half) - eps, 2.0 * math.exp(half) + eps)
        masses.append(mass)
        bands.append(band)
        if (cfg.delta_x_guard and k in violations) or not records:
            rates.append(None)
            continue
        norm = math.sqrt(cfg.n * mass)
        inside = sum(band[0] < rec.rect_lis[k] / norm < band[1] for rec in records)
        rates.append(inside / len(records))
    return BandCheck(tuple(masses), tuple(bands), tuple(rates), violations)


# -- sub-permutation band ----------------------------------------------------

@dataclass(frozen=True)
class SubPermutationBandReport:
    n: int
    k: int
    beta: float
    q: float
    band: tuple[float, float]
    samples: int
    mean_scaled: float
    outside_frequency: float


def sub_permutation_band_check(n: int, beta: float, k: int, samples: int,
                               rng: np.random.Generator, epsilon: float = 0.3,
                               ) -> SubPermutationBandReport:
    """
    Frequency with which ``LIS(p_b)/sqrt(k)`` leaves its band, for
    ``p ~ mu_{n, 1 - beta/n}`` and uniformly random index vectors ``b`` of
    length ``k``. ``beta >= 0`` (``q <= 1``) uses ``(2 - eps, 2e^{beta/2} + eps)``
    and needs ``beta < ln 2``; ``beta <= 0`` uses ``(2e^{beta/2} - eps, 2 + eps)``.
    """
    if not 1 <= k <= n:
        raise ConfigError(f"need 1 <= k <= n, got k={k}, n={n}")
    if samples < 1:
        raise ConfigError("samples must be at least 1")
    if beta >= math.log(2.0):
        raise ConfigError("the q <= 1 band needs beta < ln 2")
    params = ScalingParams(n, beta).to_mallows()
    if beta >= 0:
        band = (2.0 - epsilon, 2.0 * math.exp(beta / 2.0) + epsilon)
    else:
        band = (2.0 * math.exp(beta / 2.0) - epsilon, 2.0 + epsilon)
    values = []
    for _ in range(samples):
        b = np.sort(rng.choice(n, size=k, replace=False)) + 1
        p = sample(params, rng)
        sub = p if k == n else induced(p, b.tolist())
        values.append(lis(sub) / math.sqrt(k))
    values = np.asarray(values)
    outside = float(np.mean((values <= band[0]) | (values >= band[1])))
    return SubPermutationBandReport(n, k, beta, params.q, band, samples, float(values.mean()), outside)


# -- aggregation -------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    n: int
    beta: float
    gamma: float
    trials: int
    mean_scaled: float
    stderr: float
    target: float
    target_lower: float
    target_upper: float
    rectangles: tuple[str, ...] = ()
    rho_masses: tuple[float, ...] = ()
    rect_fraction_errors: tuple[dict, ...] = ()
    band_epsilon: float = 0.3
    band_pass_rates: tuple[float | None, ...] = ()
    guard_violations: tuple[int, ...] = ()
    generator: str = GENERATOR
    config: dict = field(default_factory=dict)

    @property
    def deviation(self) -> float:
        return abs(self.mean_scaled - self.target)


# where results go is not part of the experiment
_OUTPUT_KEYS = ("output_path", "csv_path")


def convergence_report(cfg: ExperimentConfig, records: list[TrialRecord],
                       jbar: float | JBracket) -> ConvergenceReport:
    """Mean of ``LCS/sqrt(n)`` against ``2 * jbar`` plus the rectangle checks."""
    if not records:
        raise ValueError("no trial records")
    records = sorted(records, key=lambda r: r.trial_index)
    scaled = np.array([r.lcs_scaled for r in records])
    mean = float(scaled.mean())
    stderr = float(scaled.std(ddof=1) / math.sqrt(len(scaled))) if len(scaled) > 1 else 0.0
    if isinstance(jbar, JBracket):
        lo, hi = 2.0 * jbar.lower, 2.0 * jbar.upper
        target = 0.5 * (lo + hi)
    else:
        lo = hi = target = 2.0 * float(jbar)
    band = lis_band_check(cfg, records, strict=False)
    errors = []
    for k, mass in enumerate(band.rho_masses):
        e = np.array([abs(r.rect_counts[k] / cfg.n - mass) for r in records])
        errors.append({"mean_abs_error": float(e.mean()), "max_abs_error": float(e.max())})
    return ConvergenceReport(
        n=cfg.n, beta=cfg.beta, gamma=cfg.gamma, trials=len(records),
        mean_scaled=mean, stderr=stderr, target=target, target_lower=lo, target_upper=hi,
        rectangles=tuple(str(r) for r in cfg.rectangles), rho_masses=band.rho_masses,
        rect_fraction_errors=tuple(errors), band_epsilon=cfg.epsilon,
        band_pass_rates=band.pass_rates, guard_violations=band.guard_violations,
        config={k: v for k, v in cfg.to_dict().items() if k not in _OUTPUT_KEYS},
    )


def report_to_json(report: ConvergenceReport) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


def records_to_csv(cfg: ExperimentConfig, records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["trial", "seed", "n", "beta", "gamma", "lcs", "lcs_scaled"]
    for k in range(len(cfg.rectangles)):
        header += [f"rect_{k}_count", f"rect_{k}_lis"]
    writer.writerow(header)
    for r in sorted(records, key=lambda r: r.trial_index):
        row = [r.trial_index, r.seed_used, r.n, cfg.beta, cfg.gamma, r.lcs_value, repr(r.lcs_scaled)]
        for c, l in zip(r.rect_counts, r.rect_lis):
            row += [c, l]
        writer.writerow(row)
    return buf.getvalue()
