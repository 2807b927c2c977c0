"""Search over compatible left-invariant metrics for constant holomorphic
sectional curvature.

The complex structure is held fixed.  A metric is encoded by a complex
lower-triangular ``L`` with positive diagonal: the new Hermitian form has Gram
matrix ``h = L L^*`` on a fixed reference frame ``e0``, so ``L^{-1} e0`` is
unitary for it.

Two objectives are available.  The absolute one is the squared Frobenius
distance of ``Rhat`` from the constant-H pattern at the best-fit constant.  It
scales like ``lambda^-4`` under ``L -> lambda L`` and therefore has infimum 0
along any ray, so the search minimizes the relative one, which divides by
``|Rhat|^2`` and is scale invariant.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chern_geometry import chern_curvature, constant_h_pattern, symmetrize
from .errors import NumericalDomainError
from .lie_structure import (
    RealLieAlgebra,
    build_unitary_frame,
    extract_structure_constants,
)

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e8
NO_PARALLEL_ENV = "LIEHERM_NO_PARALLEL"


@dataclass(frozen=True)
class MetricParams:
    L: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=complex)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError(f"L must be square, got {L.shape}")
        if np.any(np.abs(np.triu(L, 1)) > 0):
            raise ValueError("L must be lower triangular")
        d = np.diag(L)
        if np.any(np.abs(d.imag) > 0) or np.any(d.real <= 0):
            raise ValueError("L must have a real, strictly positive diagonal")
        L = np.array(L)
        L.setflags(write=False)
        object.__setattr__(self, "L", L)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def h(self) -> np.ndarray:
        return self.L @ self.L.conj().T

    @classmethod
    def identity(cls, n: int) -> "MetricParams":
        return cls(np.eye(n, dtype=complex))

    def to_vector(self) -> np.ndarray:
        """Real coordinates: log-diagonal, then (Re, Im) of strictly-lower entries row by row."""
        n = self.n
        rows, cols = np.tril_indices(n, -1)
        low = self.L[rows, cols]
        return np.concatenate([np.log(np.diag(self.L).real), np.column_stack([low.real, low.imag]).ravel()])

    @classmethod
    def from_vector(cls, x, n: int) -> "MetricParams":
        x = np.asarray(x, dtype=float)
        if x.shape != (n * n,):
            raise ValueError(f"expected {n * n} coordinates, got {x.shape}")
        with np.errstate(over="ignore"):
            diag = np.exp(x[:n])
        if not np.all(np.isfinite(diag)) or not np.all(np.isfinite(x)):
            raise NumericalDomainError("metric coordinates overflow")
        L = np.diag(diag).astype(complex)
        rows, cols = np.tril_indices(n, -1)
        pairs = x[n:].reshape(-1, 2)
        L[rows, cols] = pairs[:, 0] + 1j * pairs[:, 1]
        return cls(L)


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 8
    max_iters: int = 500
    step_init: float = 0.1
    fd_epsilon: float = 1e-5
    seed: int = 0
    tol: float = 1e-10
    relative: bool = True
    armijo: float = 1e-4
    gtol: float = 1e-9         # stop a restart once the gradient norm falls below this
    ftol: float = 1e-12        # ... or once an accepted step improves by less than ftol * value
    init_scale: float = 0.5    # spread of random starting coordinates

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 0:
            raise ValueError("restarts must be >= 1 and max_iters >= 0")
        for name in ("step_init", "fd_epsilon", "tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SearchResult:
    best_params: MetricParams
    best_residual: float
    best_c: float
    trace: tuple = field(default_factory=tuple)   # (iteration, best residual so far)
    converged: bool = False
    best_restart: int = 0


def metric_from_frame(E: np.ndarray) -> np.ndarray:
    """The real metric for which the rows of ``E`` form a unitary frame."""
    M = E.conj().T @ E
    g = np.linalg.inv(2 * M.real)
    return (g + g.T) / 2


def metric_algebra(spec: RealLieAlgebra, params: MetricParams, reference=None) -> RealLieAlgebra:
    """``spec`` with its metric replaced by the one encoded in ``params``."""
    if params.n != spec.n:
        raise ValueError(f"params are for n = {params.n}, algebra has n = {spec.n}")
    cond = np.linalg.cond(params.L)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NumericalDomainError(f"metric factor is ill-conditioned (cond = {cond:.3e})")
    E0 = (reference if reference is not None else build_unitary_frame(spec)).E
    return spec.with_metric(metric_from_frame(np.linalg.solve(params.L, E0)))


def _deviation(spec: RealLieAlgebra):
    frame = build_unitary_frame(spec)
    Rhat = symmetrize(chern_curvature(extract_structure_constants(spec, frame)))
    P = constant_h_pattern(spec.n)
    c = float(np.sum(P * Rhat).real / np.sum(P * P))
    return Rhat, c, float(np.sum(np.abs(Rhat - c * P) ** 2))


def residual_objective(spec: RealLieAlgebra, params: MetricParams, relative: bool = False,
                       reference=None) -> float:
    """Squared Frobenius distance of ``Rhat`` from the constant-H pattern.

    With ``relative=True`` the distance is divided by ``|Rhat|^2`` (and taken
    as 0 when ``Rhat`` vanishes), which removes the dependence on overall scale.
    """
    Rhat, _, dev = _deviation(metric_algebra(spec, params, reference))
    if not relative:
        return dev
    norm2 = float(np.sum(np.abs(Rhat) ** 2))
    return dev / norm2 if norm2 > 0 else 0.0


def best_constant(spec: RealLieAlgebra, params: MetricParams, reference=None) -> float:
    return _deviation(metric_algebra(spec, params, reference))[1]


def _central_difference(fun: Callable, x: np.ndarray, eps: float) -> np.ndarray:
    grad = np.zeros_like(x)
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = eps
        grad[j] = (fun(x + step) - fun(x - step)) / (2 * eps)
    return grad


def _five_point(fun: Callable, x: np.ndarray, eps: float) -> np.ndarray:
    grad = np.zeros_like(x)
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = eps
        grad[j] = (-fun(x + 2 * step) + 8 * fun(x + step) - 8 * fun(x - step) + fun(x - 2 * step)) / (12 * eps)
    return grad


def _as_function(spec, n, objective, relative):
    if objective is not None:
        return objective
    reference = build_unitary_frame(spec)
    return lambda x: residual_objective(spec, MetricParams.from_vector(x, n), relative, reference)


def fd_gradient(spec: Optional[RealLieAlgebra], params: MetricParams, epsilon: float = 1e-5,
                objective: Optional[Callable] = None, relative: bool = False) -> np.ndarray:
    """Central-difference gradient in the coordinates of :meth:`MetricParams.to_vector`.

    ``objective`` replaces the curvature pipeline by an arbitrary function of
    the coordinate vector.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    fun = _as_function(spec, params.n, objective, relative)
    return _central_difference(fun, params.to_vector(), epsilon)


def five_point_gradient(spec: Optional[RealLieAlgebra], params: MetricParams, epsilon: float = 1e-3,
                        objective: Optional[Callable] = None, relative: bool = False) -> np.ndarray:
    """Fourth-order stencil, used to cross-check :func:`fd_gradient`."""
    fun = _as_function(spec, params.n, objective, relative)
    return _five_point(fun, params.to_vector(), epsilon)


def _descend(fun, x0, config: SearchConfig):
    """One gradient-descent run with backtracking; returns (x, value, per-iteration values)."""
    def safe(x):
        try:
            return fun(x)
        except NumericalDomainError:
            return np.inf

    x, fx = x0, safe(x0)
    history = [fx]
    for _ in range(config.max_iters):
        if fx <= config.tol:
            break
        g = _central_difference(safe, x, config.fd_epsilon)
        gg = float(g @ g)
        if not np.isfinite(gg) or np.sqrt(gg) < config.gtol:
            break
        alpha = config.step_init
        for _ in range(60):
            trial = x - alpha * g
            ft = safe(trial)
            if ft <= fx - config.armijo * alpha * gg:
                break
            alpha /= 2
        else:
            break
        improvement = fx - ft
        x, fx = trial, ft
        history.append(fx)
        if improvement < config.ftol * fx:
            break
    return x, fx, history


def search(spec: RealLieAlgebra, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Multi-start descent on the (relative by default) constant-H objective.

    Restart 0 starts at ``L = I``; the others at seeded random coordinates.
    """
    n = spec.n
    reference = build_unitary_frame(spec)

    def fun(x):
        return residual_objective(spec, MetricParams.from_vector(x, n), config.relative, reference)

    starts = [np.zeros(n * n)]
    for child in np.random.SeedSequence(config.seed).spawn(config.restarts - 1):
        starts.append(config.init_scale * np.random.default_rng(child).standard_normal(n * n))

    first = fun(starts[0])
    if first <= config.tol:
        params = MetricParams.from_vector(starts[0], n)
        return SearchResult(params, first, best_constant(spec, params, reference),
                            ((0, first),), True, 0)

    if os.environ.get(NO_PARALLEL_ENV) == "1" or config.restarts == 1:
        runs = [_descend(fun, x0, config) for x0 in starts]
    else:
        with ThreadPoolExecutor(max_workers=min(config.restarts, os.cpu_count() or 1)) as pool:
            runs = list(pool.map(lambda x0: _descend(fun, x0, config), starts))

    trace, best, it = [], np.inf, 0
    best_idx = 0
    for idx, (_, fx, history) in enumerate(runs):
        for value in history:
            best = min(best, value)
            trace.append((it, float(best)))
            it += 1
        if fx < runs[best_idx][1]:
            best_idx = idx
    x, fx, _ = runs[best_idx]
    params = MetricParams.from_vector(x, n)
    logger.debug("best restart %d residual %.3e", best_idx, fx)
    return SearchResult(params, float(fx), best_constant(spec, params, reference),
                        tuple(trace), bool(fx <= config.tol), best_idx)
