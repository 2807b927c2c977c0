"""Salamon frames and the flatness certificate for nilpotent algebras.

A unitary frame is in Salamon form when its dual coframe satisfies
``d phi_0 = 0`` and ``d phi_i`` lies in the ideal generated by
``phi_0 .. phi_{i-1}``.  At the level of structure constants this reads::

    C[j, i, k] = 0  unless  j > i or j > k
    D[j, i, k] = 0  unless  i > j

For such a frame, :func:`certify_flatness` replays the argument showing that
constant holomorphic sectional curvature forces ``c = 0`` and ``D = 0``, one
numerical assertion at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chern_geometry import chern_curvature, constant_h_fit, rhat_diagonal_pair, symmetrize
from .errors import PreconditionError
from .lie_structure import (
    DEFAULT_TOL,
    CDTensors,
    RealLieAlgebra,
    UnitaryFrame,
    build_unitary_frame,
    change_frame,
    extract_structure_constants,
    nilpotency_class,
)

FLAT_COMPLEX_GROUP = "flat_complex_group"
REFUTED_CONSTANT_H = "refuted_constant_h"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Violation:
    tensor: str          # "C", "D", or "D_top" for the D[n-1, :, :] consequence
    indices: tuple       # 0-based (j, i, k)
    value: complex


@dataclass(frozen=True)
class SalamonReport:
    violations: tuple = field(default_factory=tuple)
    max_residual: float = 0.0      # largest magnitude among entries required to vanish

    @property
    def satisfied(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Step:
    claim_id: str
    description: str
    max_residual: float
    passed: bool


@dataclass(frozen=True)
class FlatnessCertificate:
    steps: tuple
    c_value: float
    conclusion: str

    def step(self, claim_id: str) -> Step:
        for s in self.steps:
            if s.claim_id == claim_id:
                return s
        raise KeyError(claim_id)


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def salamon_masks(n: int):
    """Boolean masks of the entries of ``C`` and ``D`` that must vanish."""
    j, i, k = np.indices((n, n, n))
    return (j <= i) & (j <= k), i <= j


def verify_salamon_frame(cd: CDTensors, tol: float = DEFAULT_TOL) -> SalamonReport:
    n = cd.n
    c_mask, d_mask = salamon_masks(n)
    violations = []
    worst = max(_maxabs(cd.C[c_mask]), _maxabs(cd.D[d_mask]))
    for name, tensor, mask in (("C", cd.C, c_mask), ("D", cd.D, d_mask)):
        bad = mask & (np.abs(tensor) > tol)
        for idx in zip(*np.nonzero(bad)):
            idx = tuple(int(t) for t in idx)
            label = "D_top" if name == "D" and idx[0] == n - 1 else name
            violations.append(Violation(label, idx, complex(tensor[idx])))
    return SalamonReport(tuple(violations), worst)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _null_space(M: np.ndarray, tol: float) -> np.ndarray:
    """Rows spanning ``{a : M @ a = 0}``."""
    width = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(width, dtype=complex)
    _, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return np.conj(vh[rank:])


def _canonical_rows(rows: np.ndarray, tol: float) -> np.ndarray:
    """Reduced row echelon form with largest-magnitude pivoting.

    Gives a basis of the row space that does not depend on which basis was
    passed in, so the construction is reproducible.
    """
    A = np.array(rows, dtype=complex)
    r = 0
    for col in range(A.shape[1]):
        if r == A.shape[0]:
            break
        piv = r + int(np.argmax(np.abs(A[r:, col])))
        if abs(A[piv, col]) <= tol:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] /= A[r, col]
        for q in range(A.shape[0]):
            if q != r:
                A[q] -= A[q, col] * A[r]
        r += 1
    return A[:r]


def salamon_rotation(cd: CDTensors, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Unitary ``U`` such that ``change_frame(cd, U)`` is in Salamon form.

    Forms are represented by their values on the frame, ``phi(e_q) = a[q]``.
    At each stage a form is admissible when it kills the (1,0) part of every
    bracket ``[w, w']`` and ``[conj(e_l), w]`` with ``w, w'`` in the common
    kernel of the forms chosen so far.
    """
    n = cd.n
    C, D = cd.C, cd.D
    # e-coefficients of [conj(e_l), e_k], indexed [l, k, i]
    be = -np.conj(D).transpose(2, 0, 1)
    chosen = np.zeros((0, n), complex)
    stage = 0
    while chosen.shape[0] < n:
        kernel = _null_space(chosen, tol)                       # rows w with chosen @ w = 0
        images = [np.einsum("jik,pi,qk->pqj", C, kernel, kernel).reshape(-1, n),
                  np.einsum("lki,pk->lpi", be, kernel).reshape(-1, n)]
        constraints = np.vstack(images + [np.conj(chosen)])
        new = _null_space(constraints, tol)
        if new.shape[0] == 0:
            raise PreconditionError(
                f"Salamon construction stalled at stage {stage} with {chosen.shape[0]} of {n} forms; "
                "the algebra is not nilpotent"
            )
        new = _canonical_rows(new, tol)
        for a in new:
            for b in chosen:
                a = a - np.vdot(b, a) * b
            chosen = np.vstack([chosen, a / np.linalg.norm(a)])
        stage += 1
    # dual frame of the coframe with rows `chosen`
    return np.conj(chosen)


def construct_salamon_frame(spec: RealLieAlgebra, tol: float = DEFAULT_TOL) -> UnitaryFrame:
    """Unitary frame of ``spec`` whose coframe satisfies the Salamon conditions."""
    if nilpotency_class(spec, tol) is None:
        raise PreconditionError(f"algebra {spec.name or '<unnamed>'} is not nilpotent")
    frame = build_unitary_frame(spec, tol)
    U = salamon_rotation(extract_structure_constants(spec, frame), tol)
    return frame.rotate(U)


def salamon_form(cd: CDTensors, tol: float = DEFAULT_TOL) -> CDTensors:
    """``cd`` re-expressed in a Salamon frame."""
    return change_frame(cd, salamon_rotation(cd, tol))


# ---------------------------------------------------------------------------
# Certificate
# ---------------------------------------------------------------------------

def certify_flatness(cd: CDTensors, tol: float = DEFAULT_TOL) -> FlatnessCertificate:
    """Replay the vanishing argument for ``D`` on a Salamon-form ``cd``.

    Steps are emitted in proof order; each carries the size of the quantity
    that the argument says must vanish.
    """
    salamon = verify_salamon_frame(cd, tol)
    if not salamon.satisfied:
        raise PreconditionError(
            f"structure constants are not in Salamon form ({len(salamon.violations)} violations)"
        )
    n = cd.n
    D = cd.D
    R = chern_curvature(cd)
    fit = constant_h_fit(symmetrize(R), tol)
    steps = [
        Step("salamon_frame", "C and D obey the Salamon index conditions", salamon.max_residual, True),
        Step("constant_h", "symmetrized curvature matches the constant-H pattern",
             fit.residual, fit.is_constant),
    ]
    if not fit.is_constant:
        return FlatnessCertificate(tuple(steps), fit.c_fit, REFUTED_CONSTANT_H)

    def add(claim, desc, residual):
        steps.append(Step(claim, desc, float(residual), bool(residual <= tol)))

    first, last = R[0, 0, 0, 0].real, R[n - 1, n - 1, n - 1, n - 1].real
    add("c_nonpositive", "H(e_1) = -sum_r |D^1_{r1}|^2 <= 0", max(0.0, first))
    add("c_nonnegative", "H(e_n) = sum_r |D^r_{nn}|^2 >= 0", max(0.0, -last))
    add("c_zero", "both bounds force c = 0", abs(fit.c_fit))
    add("D1_r1_zero", "D^1_{r1} = 0 for all r", _maxabs(D[0, :, 0]))
    add("Dr_nn_zero", "D^r_{nn} = 0 for all r", _maxabs(D[:, n - 1, n - 1]))
    mixed = [abs(rhat_diagonal_pair(cd, i, k)) for i in range(n) for k in range(i + 1, n)]
    add("mixed_rhat_zero", "Rhat_{i ibar k kbar} = 0 for all i < k", max(mixed, default=0.0))

    # milestones at the top index before the general induction
    if n >= 2:
        add("top_pair_antisymmetric", "D^r_{n,n-1} + D^r_{n-1,n} = 0 for all r",
            _maxabs(D[:, n - 1, n - 2] + D[:, n - 2, n - 1]))
    if n >= 3:
        add("top_triple_entries", "D^{n-1}_{n,n-2} = D^{n-2}_{n,n-2} = D^{n-2}_{n-1,n} = 0",
            max(abs(D[n - 2, n - 1, n - 3]), abs(D[n - 3, n - 1, n - 3]), abs(D[n - 3, n - 2, n - 1])))
        add("top_triple_antisymmetric", "D^r_{n,n-2} + D^r_{n-2,n} = 0 for all r",
            _maxabs(D[:, n - 1, n - 3] + D[:, n - 3, n - 1]))

    # induction on i at each top level m, then peel off m
    for m in range(n - 1, 0, -1):
        sub = D[: m + 1, : m + 1, : m + 1]
        for i in range(m - 1, -1, -1):
            add(f"level{m + 1}_i{i + 1}",
                f"D^{i + 1}_{{r,{m + 1}}} = 0 and D^r_{{{m + 1},{i + 1}}} + D^r_{{{i + 1},{m + 1}}} = 0 for r <= {m + 1}",
                max(_maxabs(sub[i, :, m]), _maxabs(sub[:, m, i] + sub[:, i, m])))
        touching = np.concatenate([sub[m].ravel(), sub[:, m].ravel(), sub[:, :, m].ravel()])
        add(f"level{m + 1}_cleared", f"every D entry with an index equal to {m + 1} vanishes",
            _maxabs(touching))

    add("D_zero", "D = 0, so the group is a complex Lie group", _maxabs(D))
    add("chern_flat", "R = 0", _maxabs(R))

    conclusion = FLAT_COMPLEX_GROUP if all(s.passed for s in steps) else INCONCLUSIVE
    return FlatnessCertificate(tuple(steps), fit.c_fit, conclusion)
