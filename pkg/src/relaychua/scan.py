"""Parameter-plane cartography of the limit-cycle predicates."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DomainError, Params
from .poincare import find_cycle
from .spectrum import (
    GeometryClass,
    bifurcation_curve,
    geometry_class,
    real_root,
    routh_stable,
    single_real_root,
    theorem_region,
)

__all__ = [
    "GridSpec",
    "CellReport",
    "CycleOutcome",
    "bifurcation_curve",
    "evaluate_cell",
    "scan_grid",
]

CYCLE_SEED = (10.0, 10.0)
CYCLE_BUDGET = 200


class CycleOutcome(str, enum.Enum):
    FOUND = "true"
    ABSENT = "false"  # the seed orbit was captured or landed in E
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``n_alpha x n_beta`` grid.

    An axis with a single node must have equal bounds; otherwise the bounds
    must be strictly increasing.
    """

    alpha_min: float
    alpha_max: float
    n_alpha: int
    beta_min: float
    beta_max: float
    n_beta: int
    with_cycle_search: bool = False

    def __post_init__(self):
        for name, lo, hi, n in (
            ("alpha", self.alpha_min, self.alpha_max, self.n_alpha),
            ("beta", self.beta_min, self.beta_max, self.n_beta),
        ):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo > 0 and hi > 0):
                raise DomainError(f"{name} bounds must be positive")
            if n < 1:
                raise DomainError(f"{name} count must be at least 1")
            if n == 1 and lo != hi:
                raise DomainError(f"single-node {name} axis needs equal bounds")
            if n > 1 and not lo < hi:
                raise DomainError(f"{name} bounds must be increasing")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(self.alpha_min, self.alpha_max, self.n_alpha),
            np.linspace(self.beta_min, self.beta_max, self.n_beta),
        )


@dataclass(frozen=True)
class CellReport:
    params: Params
    routh: bool
    single_root: bool
    geometry: GeometryClass
    in_theorem_region: bool
    lambda_star: float
    cycle_found: CycleOutcome | None = None


def evaluate_cell(alpha: float, beta: float, with_cycle_search: bool = False) -> CellReport:
    p = Params(float(alpha), float(beta))
    lam = real_root(p)
    cycle = None
    if with_cycle_search:
        res = find_cycle(CYCLE_SEED, p, max_iter=CYCLE_BUDGET)
        if res.converged:
            cycle = CycleOutcome.FOUND
        elif res.failure in ("MaxIter", "NotContracting"):
            cycle = CycleOutcome.INCONCLUSIVE
        else:
            cycle = CycleOutcome.ABSENT
    return CellReport(
        params=p,
        routh=routh_stable(p),
        single_root=single_real_root(p),
        geometry=geometry_class(p, lam),
        in_theorem_region=theorem_region(p),
        lambda_star=lam,
        cycle_found=cycle,
    )


def _cell(args):
    return evaluate_cell(*args)


def scan_grid(g: GridSpec, workers: int | None = None) -> list[CellReport]:
    """One report per node, alpha-major (alpha outer loop, beta inner).

    With ``workers > 1`` cells run in a process pool; the output order is
    unaffected.
    """
    alphas, betas = g.axes()
    jobs = [(a, b, g.with_cycle_search) for a in alphas for b in betas]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_cell(j) for j in jobs]
