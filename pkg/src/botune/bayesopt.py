"""Sequential Bayesian optimization with expected improvement.

Each iteration refits the kernel hyperparameters on everything observed
so far, conditions the Gaussian process, and maximizes expected
improvement against the incumbent, defined as the lowest posterior mean
over the evaluated points. Proposals come from seeded quasi-random
candidates plus golden-section refinement of the best few along the
continuous coordinates. Runs are deterministic under their seed.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import DataError
from .gp import (
    KERNEL_MATERN52,
    GpModel,
    PosteriorMoments,
    fit_kernel_hyperparams,
    gp_fit,
    gp_posterior_batch,
)
from .space import SearchSpace

_SQRT2 = math.sqrt(2.0)
_N_CANDIDATES = 2000
_N_REFINE = 5


@dataclass(frozen=True)
class Trial:
    index: int  # 1-based evaluation counter
    params: dict
    objective: float
    best_so_far: float
    elapsed_seconds: float


@dataclass
class TrialLog:
    trials: list[Trial] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.trials)

    def append(self, params: dict, objective: float, elapsed: float) -> Trial:
        best = min(objective, self.trials[-1].best_so_far) if self.trials else objective
        trial = Trial(
            index=len(self.trials) + 1,
            params=params,
            objective=objective,
            best_so_far=best,
            elapsed_seconds=elapsed,
        )
        self.trials.append(trial)
        return trial

    def best_trial(self) -> Trial:
        if not self.trials:
            raise DataError("trial log is empty")
        return min(self.trials, key=lambda t: (t.objective, t.index))

    def to_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for t in self.trials:
                fh.write(json.dumps(asdict(t)) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "TrialLog":
        p = Path(path)
        if not p.exists():
            raise DataError(f"trial log not found: {p}")
        trials = []
        for line in p.read_text(encoding="utf-8").splitlines():
            if line.strip():
                trials.append(Trial(**json.loads(line)))
        return cls(trials=trials)


def _norm_cdf(z: np.ndarray) -> np.ndarray:
    from scipy.special import erf

    return 0.5 * (1.0 + erf(z / _SQRT2))


def _norm_pdf(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def expected_improvement_values(mean: np.ndarray, sd: np.ndarray, best: float) -> np.ndarray:
    """Closed-form EI for minimization: E[max(0, best - f)] under N(mean, sd^2)."""
    mean = np.asarray(mean, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    improve = best - mean
    out = np.maximum(improve, 0.0)
    positive = sd > 1e-12
    if np.any(positive):
        z = improve[positive] / sd[positive]
        out = out.copy()
        out[positive] = improve[positive] * _norm_cdf(z) + sd[positive] * _norm_pdf(z)
    return np.maximum(out, 0.0)


def expected_improvement(post: PosteriorMoments, best: float) -> float:
    return float(expected_improvement_values(np.array([post.mean]), np.array([post.sd]), best)[0])


def incumbent_best_mean(model: GpModel) -> float:
    """Lowest posterior mean over the evaluated inputs."""
    mean, _ = gp_posterior_batch(model, model.x_train)
    return float(mean.min())


def propose_next(model: GpModel, space: SearchSpace, best: float, seed: int) -> np.ndarray:
    """Maximize EI over seeded quasi-random candidates plus local refinement.

    Candidates are snapped onto the realizable grid before scoring, so
    integer and categorical coordinates are judged where evaluation
    would actually happen. When every candidate has zero EI the
    lowest-posterior-mean candidate wins.
    """
    d = space.encoded_dim
    halton = qmc.Halton(d=d, scramble=True, seed=seed)
    raw = halton.random(_N_CANDIDATES)
    candidates = space.snap_batch(raw)
    mean, sd = gp_posterior_batch(model, candidates)
    ei = expected_improvement_values(mean, sd, best)

    if not np.any(ei > 0):
        return candidates[int(np.argmin(mean))]

    cont = space.continuous_coords()
    best_x = candidates[int(np.argmax(ei))]
    best_ei = float(ei.max())
    if cont:
        top = np.argsort(-ei, kind="stable")[:_N_REFINE]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        for t in top:
            x = candidates[int(t)].copy()

            def ei_at(x_vec: np.ndarray) -> float:
                m, s = gp_posterior_batch(model, x_vec[None, :])
                return float(expected_improvement_values(m, s, best)[0])

            for j in cont:
                a, b = 0.0, 1.0
                c = b - invphi * (b - a)
                dd = a + invphi * (b - a)
                xc, xd = x.copy(), x.copy()
                xc[j], xd[j] = c, dd
                fc, fd = ei_at(xc), ei_at(xd)
                for _ in range(22):
                    if fc > fd:
                        b, dd, fd = dd, c, fc
                        c = b - invphi * (b - a)
                        xc = x.copy()
                        xc[j] = c
                        fc = ei_at(xc)
                    else:
                        a, c, fc = c, dd, fd
                        dd = a + invphi * (b - a)
                        xd = x.copy()
                        xd[j] = dd
                        fd = ei_at(xd)
                x[j] = c if fc > fd else dd
            val = ei_at(x)
            if val > best_ei:
                best_ei = val
                best_x = x
    return best_x


def _as_callable(objective) -> Callable[[dict], float]:
    if callable(objective):
        return objective
    from .objective import ObjectiveSpec, evaluate_objective

    if isinstance(objective, ObjectiveSpec):
        return lambda assignment: evaluate_objective(objective, assignment)
    raise TypeError(f"objective must be callable or an ObjectiveSpec, got {type(objective)!r}")


def bo_minimize(
    objective,
    space: SearchSpace,
    budget: int = 30,
    n_init: int = 5,
    seed: int = 0,
) -> TrialLog:
    """Minimize the objective over the space within a fixed evaluation budget.

    The budget counts every evaluation including the ``n_init`` seeded
    Latin-hypercube design points that precede the model-guided stage.
    """
    if not budget >= n_init >= 2:
        raise ValueError(f"need budget >= n_init >= 2, got budget={budget}, n_init={n_init}")
    fn = _as_callable(objective)
    d = space.encoded_dim
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(2 * budget + 1)]

    log = TrialLog()
    X: list[np.ndarray] = []
    y: list[float] = []

    def run_point(x_encoded: np.ndarray) -> None:
        x_snapped = space.snap(x_encoded)
        assignment = space.decode(x_snapped)
        start = time.perf_counter()
        value = float(fn(assignment))
        elapsed = time.perf_counter() - start
        X.append(x_snapped)
        y.append(value)
        log.append(assignment, value, elapsed)

    design = qmc.LatinHypercube(d=d, seed=seeds[0]).random(n_init)
    for row in design:
        run_point(row)

    for t in range(n_init, budget):
        spec = fit_kernel_hyperparams(
            np.vstack(X), np.asarray(y), family=KERNEL_MATERN52, seed=seeds[2 * t + 1]
        )
        model = gp_fit(np.vstack(X), np.asarray(y), spec)
        best = incumbent_best_mean(model)
        proposal = propose_next(model, space, best, seed=seeds[2 * t + 2])
        run_point(proposal)
    return log


def random_search(objective, space: SearchSpace, budget: int, seed: int) -> TrialLog:
    """Uniform seeded sampling baseline (log-uniform on log-scaled params)."""
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")
    fn = _as_callable(objective)
    rng = np.random.default_rng(seed)
    log = TrialLog()
    for _ in range(budget):
        assignment = space.sample(rng)
        start = time.perf_counter()
        value = float(fn(assignment))
        elapsed = time.perf_counter() - start
        log.append(assignment, value, elapsed)
    return log
