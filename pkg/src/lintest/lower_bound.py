"""Sample-based lower-bound experiment: the linear-vs-noisy distinguishing game.

A yes-instance reveals (w.x_1, ..., w.x_n) ~ N(0, XX^T); a no-instance adds
an independent N(0, delta) deviate per coordinate, giving N(0, XX^T + dI).
With delta = C * lambda_min(X)^2 / n^2 the two observation laws are within
TV <= sqrt(C)/2, so even the optimal likelihood-ratio distinguisher stays
near coin-flipping: no sample-based tester learns anything from n samples.

The per-trial eigenwork (n up to a few hundred, 10^4 trials) runs through
numpy.linalg.eigh; the closed-form bound only needs the Gram eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import make_rng, standard_normal

_DEGENERACY_FLOOR = 1e-10
_MAX_RESAMPLES = 10


class LowerBoundError(ValueError):
    pass


@dataclass(frozen=True)
class LowerBoundConfig:
    n: int
    C: float = 0.01
    trials: int = 1000
    seed: int = 0
    delta_override: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise LowerBoundError(f"need dimension n >= 2, got {self.n}")
        if not 0.0 < self.C < (2.0 / 3.0) ** 2:
            raise LowerBoundError(f"C must lie in (0, (2/3)^2), got {self.C}")
        if self.trials < 1:
            raise LowerBoundError("need at least one trial")
        if self.delta_override is not None and self.delta_override < 0:
            raise LowerBoundError("delta override must be nonnegative")


@dataclass
class SampleMatrix:
    """X with standard-normal rows, its Gram matrix, and the Gram spectrum."""

    X: np.ndarray
    gram: np.ndarray
    eigvals: np.ndarray  # ascending eigenvalues of gram
    eigvecs: np.ndarray

    @property
    def lambda_min(self) -> float:
        """Smallest singular value of X (sqrt of the smallest Gram eigenvalue)."""
        return float(math.sqrt(max(self.eigvals[0], 0.0)))

    @staticmethod
    def from_matrix(X: np.ndarray) -> "SampleMatrix":
        X = np.asarray(X, dtype=float)
        gram = X @ X.T
        w, v = np.linalg.eigh(gram)
        return SampleMatrix(X, gram, w, v)


def build_instance(cfg: LowerBoundConfig, rng=None) -> tuple[SampleMatrix, float, int]:
    """Sample X row-wise from N(0,I) and derive delta = C lambda_min(X)^2 / n^2.

    Numerically degenerate draws (Gram min eigenvalue <= 1e-10) are
    resampled, up to a hard cap; the resample count is returned so reports
    can surface it.  Degeneracy has measure zero, so the cap never binds in
    practice.
    """
    rng = rng if rng is not None else make_rng(cfg.seed)
    resamples = 0
    while True:
        sm = SampleMatrix.from_matrix(standard_normal(rng, (cfg.n, cfg.n)))
        if sm.eigvals[0] > _DEGENERACY_FLOOR:
            break
        resamples += 1
        if resamples > _MAX_RESAMPLES:
            raise LowerBoundError("persistent degenerate sample matrix")
    if cfg.delta_override is not None:
        delta = float(cfg.delta_override)
    else:
        delta = derive_delta(sm, cfg.C)
    return sm, delta, resamples


def derive_delta(sm: SampleMatrix, C: float) -> float:
    """delta = C * lambda_min(X)^2 / n^2 (lambda_min(X)^2 = min Gram eigenvalue)."""
    n = sm.eigvals.size
    return float(C) * float(sm.eigvals[0]) / float(n**2)


def tv_bound(sm: SampleMatrix, delta: float) -> float:
    """Closed-form TV bound between N(0, XX^T) and N(0, XX^T + delta I).

    sqrt( (log det(S_yes)/det(S_no) + tr(S_yes^-1 S_no) - n) / 4 ), with the
    two intermediate facts asserted on the way: the determinant ratio
    det(S_no)/det(S_yes) = prod(1 + delta/lambda_i) exceeds 1, and the trace
    is at most n + delta n^2 / lambda_min(X)^2.
    """
    lam = np.asarray(sm.eigvals, dtype=float)
    n = lam.size
    if lam[0] <= 0:
        raise LowerBoundError("Gram matrix is singular")
    if delta < 0:
        raise LowerBoundError("delta must be nonnegative")
    ratio_terms = delta / lam  # delta * lambda_i^{-1}
    log_det_ratio = -float(np.sum(np.log1p(ratio_terms)))  # log det(S_yes)/det(S_no)
    trace = n + float(np.sum(ratio_terms))
    if delta > 0:
        assert math.exp(-log_det_ratio) > 1.0, "determinant ratio claim violated"
    assert trace <= n + delta * n**2 / max(lam[0], 1e-300) + 1e-9, "trace bound violated"
    bracket = log_det_ratio + trace - n
    assert bracket >= -1e-12
    return float(math.sqrt(max(bracket, 0.0) / 4.0))


def _log_density_delta(eigvals: np.ndarray, y2: np.ndarray, delta: float) -> float:
    """Log density (up to the shared constant) of v under N(0, gram + delta I).

    y2 holds the squared coordinates of v in the Gram eigenbasis.
    """
    lam = eigvals + delta
    return float(-0.5 * (np.sum(np.log(lam)) + np.sum(y2 / lam)))


@dataclass
class GameReport:
    n: int
    C: float
    trials: int
    seed: int
    successes: int
    success_rate: float
    wilson_interval: tuple[float, float]
    mean_tv_bound: float
    max_tv_bound: float
    delta_stats: dict
    resamples: int
    bound_respected: bool
    delta_override: float | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "C": self.C,
            "trials": self.trials,
            "seed": self.seed,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "wilson_interval": list(self.wilson_interval),
            "mean_tv_bound": self.mean_tv_bound,
            "max_tv_bound": self.max_tv_bound,
            "delta_stats": self.delta_stats,
            "resamples": self.resamples,
            "bound_respected": self.bound_respected,
            "delta_override": self.delta_override,
        }


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (max(0.0, centre - half), min(1.0, centre + half))


def run_distinguish_game(cfg: LowerBoundConfig) -> GameReport:
    """Play the yes/no distinguishing game with the likelihood-ratio rule.

    Per trial: draw X, flip a fair coin, emit v = Xw (yes) or v = Xw + eps
    with eps ~ N(0, delta I) (no), then classify v by comparing log densities
    under N(0, XX^T) and N(0, XX^T + delta I).  The LR rule is the
    TV-optimal distinguisher, so its empirical success rate certifies that
    no algorithm beats 1/2 + TV/2.
    """
    rng = make_rng(cfg.seed)
    successes = 0
    total_resamples = 0
    tv_sum = 0.0
    tv_max = 0.0
    deltas = []
    for _ in range(cfg.trials):
        sm, delta, resamples = build_instance(cfg, rng)
        total_resamples += resamples
        deltas.append(delta)
        tv = tv_bound(sm, delta)
        tv_sum += tv
        tv_max = max(tv_max, tv)

        truth_yes = bool(rng.random() < 0.5)
        w = standard_normal(rng, cfg.n)
        v = sm.X @ w
        if not truth_yes:
            v = v + math.sqrt(delta) * standard_normal(rng, cfg.n)

        y2 = (sm.eigvecs.T @ v) ** 2
        ll_yes = _log_density_delta(sm.eigvals, y2, 0.0)
        ll_no = _log_density_delta(sm.eigvals, y2, delta)
        if ll_yes == ll_no:
            guess_yes = bool(rng.random() < 0.5)
        else:
            guess_yes = ll_yes > ll_no
        if guess_yes == truth_yes:
            successes += 1

    rate = successes / cfg.trials
    mean_tv = tv_sum / cfg.trials
    stderr = math.sqrt(max(rate * (1 - rate), 1e-12) / cfg.trials)
    respected = rate <= 0.5 + 0.5 * mean_tv + 3 * stderr
    deltas_arr = np.asarray(deltas)
    return GameReport(
        n=cfg.n,
        C=cfg.C,
        trials=cfg.trials,
        seed=cfg.seed,
        successes=successes,
        success_rate=rate,
        wilson_interval=wilson_interval(successes, cfg.trials),
        mean_tv_bound=mean_tv,
        max_tv_bound=tv_max,
        delta_stats={
            "min": float(deltas_arr.min()),
            "mean": float(deltas_arr.mean()),
            "max": float(deltas_arr.max()),
        },
        resamples=total_resamples,
        bound_respected=respected,
        delta_override=cfg.delta_override,
    )
