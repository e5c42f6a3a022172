"""Experiment runner: baseline-vs-tuned comparisons plus file artifacts.

For every selected classifier family the runner trains a documented
default configuration, runs the Bayesian-optimization loop on the
training split, retrains with the best found parameters, and reports
train/test metrics for both. Each family writes a trial log (JSON
lines), a convergence trace (CSV), a posterior contour grid (CSV), and
a space file recording how to rebuild the surrogate; the run writes a
combined summary. Every artifact is a pure function of (config, seed)
except the elapsed-time fields.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bayesopt import TrialLog, bo_minimize, expected_improvement_values, incumbent_best_mean
from .classifiers import (
    METHOD_BAGGING,
    EnsembleConfig,
    KnnConfig,
    SvmConfig,
)
from .data import (
    Dataset,
    apply_minmax,
    encode_categoricals,
    fit_categories,
    fit_minmax,
    load_csv,
    read_schema,
    stratified_split,
    synthesize_benchmark,
)
from .errors import ConfigError, DataError
from .gp import KERNEL_MATERN52, GpModel, fit_kernel_hyperparams, gp_fit, gp_posterior_batch
from .metrics import MetricsReport, confusion, report
from .objective import (
    FAMILIES,
    ObjectiveSpec,
    default_space,
    fit_and_predict,
)
from .space import Categorical, Continuous, Integer, SearchSpace

DEFAULT_BUDGET = 30
DEFAULT_FOLDS = 5
DEFAULT_N_INIT = 5
DEFAULT_TEST_FRACTION = 0.3
CONTOUR_RESOLUTION = 50

# Documented defaults for the unoptimized baseline rows.
BASELINE_SVM = {"c": 1.0, "gamma": 1.0}
BASELINE_KNN = {"k": 5, "distance": "euclidean"}


def baseline_assignment(family: str, n_train: int) -> dict:
    if family == "svm":
        return dict(BASELINE_SVM)
    if family == "knn":
        return dict(BASELINE_KNN)
    if family == "ensemble":
        return {"method": METHOD_BAGGING, "max_splits": max(1, n_train - 1), "n_trees": 100}
    raise ConfigError(f"unknown family {family!r}")


@dataclass
class ExperimentConfig:
    families: tuple[str, ...] = FAMILIES
    budget: int = DEFAULT_BUDGET
    folds: int = DEFAULT_FOLDS
    n_init: int = DEFAULT_N_INIT
    seed: int = 0
    test_fraction: float = DEFAULT_TEST_FRACTION
    output_dir: str = "runs/experiment"
    csv_path: str | None = None
    schema_path: str | None = None
    synth_rows: int | None = None
    synth_features: int = 14
    synth_anomaly_fraction: float = 1.0 / 3.0
    synth_difficulty: float = 0.3
    space_overrides: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if self.budget < 2:
            raise ConfigError(f"budget must be at least 2, got {self.budget}")
        if self.folds < 2:
            raise ConfigError(f"folds must be at least 2, got {self.folds}")
        if not self.families:
            raise ConfigError("select at least one classifier family")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ConfigError(f"unknown classifier family {fam!r}")
        if len(set(self.families)) != len(self.families):
            raise ConfigError("families must be unique")
        has_csv = self.csv_path is not None
        has_synth = self.synth_rows is not None
        if has_csv == has_synth:
            raise ConfigError("configure exactly one dataset source: csv_path or synth_rows")
        if has_csv and self.schema_path is None:
            raise ConfigError("csv_path requires schema_path")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")


_CONFIG_KEYS = {
    "families",
    "budget",
    "folds",
    "n_init",
    "seed",
    "test_fraction",
    "output_dir",
    "csv_path",
    "schema_path",
    "synth_rows",
    "synth_features",
    "synth_anomaly_fraction",
    "synth_difficulty",
}


def parse_config_text(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    """Parse the plain-text ``key = value`` experiment config format."""
    base = Path(base_dir)
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "families":
                cfg.families = tuple(f.strip() for f in value.split(",") if f.strip())
            elif key in ("budget", "folds", "n_init", "seed", "synth_rows", "synth_features"):
                setattr(cfg, key, int(value))
            elif key in ("test_fraction", "synth_anomaly_fraction", "synth_difficulty"):
                setattr(cfg, key, float(value))
            elif key == "output_dir":
                cfg.output_dir = str(base / value)
            elif key in ("csv_path", "schema_path"):
                setattr(cfg, key, str(base / value))
            elif key.startswith("space."):
                cfg.space_overrides[key[len("space."):]] = value
            else:
                raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"config line {lineno}: bad value {value!r} for {key!r}")
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"), base_dir=p.parent)


def _apply_override(space: SearchSpace, name: str, value: str) -> SearchSpace:
    params = []
    found = False
    for p in space.params:
        if p.name != name:
            params.append(p)
            continue
        found = True
        if isinstance(p, Continuous):
            lo, _, hi = value.partition("..")
            params.append(Continuous(p.name, float(lo), float(hi), log=p.log))
        elif isinstance(p, Integer):
            lo, _, hi = value.partition("..")
            params.append(Integer(p.name, int(lo), int(hi)))
        else:
            levels = tuple(v.strip() for v in value.split("|") if v.strip())
            params.append(Categorical(p.name, levels))
    if not found:
        raise ConfigError(f"space override names unknown parameter {name!r}")
    try:
        return SearchSpace(tuple(params))
    except ValueError as exc:
        raise ConfigError(f"bad space override for {name!r}: {exc}")


def build_space(family: str, n_train: int, overrides: dict[str, str]) -> SearchSpace:
    space = default_space(family, n_train)
    for key, value in overrides.items():
        fam, _, pname = key.partition(".")
        if fam != family:
            continue
        if not pname:
            raise ConfigError(f"space override key must look like space.<family>.<param>: {key!r}")
        space = _apply_override(space, pname, value)
    return space


def prepare_dataset(config: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """Load or synthesize, split, then fit all preprocessing on the training split."""
    seeds = np.random.SeedSequence(config.seed).generate_state(2)
    if config.csv_path is not None:
        schema = read_schema(config.schema_path)
        data = load_csv(config.csv_path, schema)
    else:
        data = synthesize_benchmark(
            n_rows=config.synth_rows,
            n_features=config.synth_features,
            anomaly_fraction=config.synth_anomaly_fraction,
            difficulty=config.synth_difficulty,
            seed=int(seeds[0]),
        )
    train, test = stratified_split(data, config.test_fraction, seed=int(seeds[1]))
    cmap = fit_categories(train)
    train = encode_categoricals(train, cmap)
    test = encode_categoricals(test, cmap)
    scaling = fit_minmax(train)
    return apply_minmax(train, scaling), apply_minmax(test, scaling)


@dataclass
class FamilyResult:
    family: str
    seed: int
    baseline_params: dict | None = None
    baseline_train: MetricsReport | None = None
    baseline_test: MetricsReport | None = None
    best_params: dict | None = None
    tuned_train: MetricsReport | None = None
    tuned_test: MetricsReport | None = None
    evaluations: int = 0
    elapsed_seconds: float = 0.0
    error: str | None = None


@dataclass
class RunSummary:
    output_dir: str
    seed: int
    budget: int
    families: dict[str, FamilyResult] = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def to_json(self) -> str:
        payload = {
            "output_dir": self.output_dir,
            "seed": self.seed,
            "budget": self.budget,
            "elapsed_seconds": self.elapsed_seconds,
            "families": {name: asdict(fr) for name, fr in self.families.items()},
        }
        return json.dumps(payload, indent=2)


def _evaluate_both(family, train, test, assignment, seed):
    train_pred = fit_and_predict(family, train, train.features, assignment, seed)
    test_pred = fit_and_predict(family, train, test.features, assignment, seed)
    return (
        report(confusion(train_pred, train.labels)),
        report(confusion(test_pred, test.labels)),
    )


def rebuild_surrogate(log: TrialLog, space: SearchSpace, seed: int) -> GpModel:
    """Refit the posterior from a finished trial log, deterministically."""
    X = np.vstack([space.encode(t.params) for t in log.trials])
    y = np.asarray([t.objective for t in log.trials])
    spec = fit_kernel_hyperparams(X, y, family=KERNEL_MATERN52, seed=seed)
    return gp_fit(X, y, spec)


def emit_trace(log: TrialLog, path: str | Path) -> None:
    """Convergence trace: eval_index, objective, best_so_far per trial."""
    if not log.trials:
        raise DataError("cannot emit a trace from an empty trial log")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("eval_index,objective,best_so_far\n")
        for t in log.trials:
            fh.write(f"{t.index},{t.objective!r},{t.best_so_far!r}\n")


def _axis_points(param, resolution: int):
    """(encoded column values, emitted axis values) for one grid axis.

    Continuous and integer axes sample ``resolution`` evenly spaced
    encoded points; categorical axes enumerate their levels. Log-scaled
    axes are emitted in log10 units, everything else in original units.
    """
    if isinstance(param, Categorical):
        encoded, emitted = [], []
        for i, level in enumerate(param.levels):
            block = [0.0] * len(param.levels)
            block[i] = 1.0
            encoded.append(block)
            emitted.append(level)
        return encoded, emitted
    xs = np.linspace(0.0, 1.0, resolution)
    encoded = [[float(v)] for v in xs]
    emitted = []
    for v in xs:
        value = param.decode([v])
        if isinstance(param, Continuous) and param.log:
            emitted.append(float(np.log10(value)))
        else:
            emitted.append(value)
    return encoded, emitted


def emit_contour(
    model: GpModel,
    space: SearchSpace,
    param_x: str,
    param_y: str,
    resolution: int,
    path: str | Path,
) -> int:
    """Posterior grid over two parameters, the rest pinned at the incumbent.

    Writes CSV columns (x, y, posterior_mean, posterior_sd,
    expected_improvement) in row-major order (x outer) and returns the
    number of grid rows.
    """
    if resolution < 2:
        raise DataError(f"resolution must be at least 2, got {resolution}")
    names = [p.name for p in space.params]
    for name in (param_x, param_y):
        if name not in names:
            raise DataError(f"unknown parameter {name!r}; space has {names}")
    if param_x == param_y:
        raise DataError("contour axes must be two different parameters")

    mean_at_train, _ = gp_posterior_batch(model, model.x_train)
    incumbent_x = model.x_train[int(np.argmin(mean_at_train))]
    best = float(mean_at_train.min())
    fixed = space.encode(space.decode(incumbent_x))

    blocks = {p.name: (p, i, j) for p, i, j in space.blocks()}
    px, ix, jx = blocks[param_x]
    py, iy, jy = blocks[param_y]
    xs_enc, xs_out = _axis_points(px, resolution)
    ys_enc, ys_out = _axis_points(py, resolution)

    grid = []
    for bx in xs_enc:
        for by in ys_enc:
            row = fixed.copy()
            row[ix:jx] = bx
            row[iy:jy] = by
            grid.append(row)
    grid = np.vstack(grid)
    mean, sd = gp_posterior_batch(model, grid)
    ei = expected_improvement_values(mean, sd, best)

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("x,y,posterior_mean,posterior_sd,expected_improvement\n")
        idx = 0
        for xv in xs_out:
            for yv in ys_out:
                xcell = xv if isinstance(xv, str) else repr(float(xv))
                ycell = yv if isinstance(yv, str) else repr(float(yv))
                fh.write(f"{xcell},{ycell},{mean[idx]!r},{sd[idx]!r},{ei[idx]!r}\n")
                idx += 1
    return len(grid)


def _space_to_json(space: SearchSpace) -> list[dict]:
    out = []
    for p in space.params:
        if isinstance(p, Continuous):
            out.append({"name": p.name, "kind": "continuous", "lo": p.lo, "hi": p.hi, "log": p.log})
        elif isinstance(p, Integer):
            out.append({"name": p.name, "kind": "integer", "lo": p.lo, "hi": p.hi})
        else:
            out.append({"name": p.name, "kind": "categorical", "levels": list(p.levels)})
    return out


def space_from_json(items: list[dict]) -> SearchSpace:
    params = []
    for item in items:
        kind = item["kind"]
        if kind == "continuous":
            params.append(Continuous(item["name"], item["lo"], item["hi"], log=item["log"]))
        elif kind == "integer":
            params.append(Integer(item["name"], item["lo"], item["hi"]))
        elif kind == "categorical":
            params.append(Categorical(item["name"], tuple(item["levels"])))
        else:
            raise DataError(f"unknown parameter kind {kind!r} in space file")
    return SearchSpace(tuple(params))


def run_experiment(config: ExperimentConfig) -> RunSummary:
    config.validate()
    t_start = time.perf_counter()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train, test = prepare_dataset(config)

    # Family seeds are fixed positions in the master sequence, so a family
    # produces the same artifacts whether it runs alone or with others.
    family_seeds = np.random.SeedSequence(config.seed).generate_state(2 + len(FAMILIES))
    summary = RunSummary(output_dir=str(out_dir), seed=config.seed, budget=config.budget)

    for family in config.families:
        seed = int(family_seeds[2 + FAMILIES.index(family)])
        result = FamilyResult(family=family, seed=seed)
        summary.families[family] = result
        f_start = time.perf_counter()
        try:
            base = baseline_assignment(family, train.n_rows)
            result.baseline_params = base
            result.baseline_train, result.baseline_test = _evaluate_both(
                family, train, test, base, seed
            )

            space = build_space(family, train.n_rows, config.space_overrides)
            spec = ObjectiveSpec(family=family, dataset=train, folds=config.folds, seed=seed)
            log = bo_minimize(spec, space, budget=config.budget, n_init=config.n_init, seed=seed)
            result.evaluations = len(log)
            best = log.best_trial().params
            result.best_params = best
            result.tuned_train, result.tuned_test = _evaluate_both(family, train, test, best, seed)

            log.to_jsonl(out_dir / f"{family}_trials.jsonl")
            emit_trace(log, out_dir / f"{family}_trace.csv")
            surrogate = rebuild_surrogate(log, space, seed)
            axis_x, axis_y = space.params[0].name, space.params[1].name
            emit_contour(
                surrogate, space, axis_x, axis_y, CONTOUR_RESOLUTION,
                out_dir / f"{family}_contour.csv",
            )
            (out_dir / f"{family}_space.json").write_text(
                json.dumps({"family": family, "seed": seed, "params": _space_to_json(space)}, indent=2),
                encoding="utf-8",
            )
        except Exception as exc:  # per-family isolation: keep the batch useful
            result.error = f"{type(exc).__name__}: {exc}"
        result.elapsed_seconds = time.perf_counter() - f_start

    _write_summary_csv(summary, out_dir / "summary.csv")
    summary.elapsed_seconds = time.perf_counter() - t_start
    (out_dir / "summary.json").write_text(summary.to_json(), encoding="utf-8")
    return summary


def _write_summary_csv(summary: RunSummary, path: Path) -> None:
    """Six metric rows (baseline + tuned per family), train block then test."""
    header = (
        "classifier,phase,train_acc_pct,train_precision,train_recall,train_far,"
        "test_acc_pct,test_precision,test_recall,test_far"
    )
    lines = [header]
    for name, fr in summary.families.items():
        if fr.error is not None:
            lines.append(f"{name},error,,,,,,,,")
            continue
        for phase, tr, te in (
            ("baseline", fr.baseline_train, fr.baseline_test),
            ("tuned", fr.tuned_train, fr.tuned_test),
        ):
            lines.append(f"{name},{phase},{tr.csv_row()},{te.csv_row()}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_run_space(run_dir: str | Path, family: str | None, param_x: str, param_y: str):
    """Locate the space file for the CLI contour verb.

    When ``family`` is omitted, picks the unique family whose space
    contains both named parameters.
    """
    run = Path(run_dir)
    if not run.is_dir():
        raise DataError(f"run directory not found: {run}")
    candidates = sorted(run.glob("*_space.json"))
    if family is not None:
        candidates = [p for p in candidates if p.name == f"{family}_space.json"]
        if not candidates:
            raise DataError(f"no space file for family {family!r} in {run}")
    matches = []
    for p in candidates:
        payload = json.loads(p.read_text(encoding="utf-8"))
        names = {item["name"] for item in payload["params"]}
        if param_x in names and param_y in names:
            matches.append(payload)
    if not matches:
        raise DataError(f"no run space contains both {param_x!r} and {param_y!r}")
    if len(matches) > 1:
        fams = [m["family"] for m in matches]
        raise DataError(f"parameters are ambiguous across families {fams}; pass --family")
    payload = matches[0]
    return payload["family"], space_from_json(payload["params"]), int(payload["seed"])
