"""Real Lie algebras with complex structure and metric, unitary frames, and
the complex structure constants ``C`` and ``D``.

Conventions
-----------
A real Lie algebra of dimension ``2n`` is given in a basis ``x_0 .. x_{2n-1}``
by ``f[a, b, c]``, the coefficient of ``x_c`` in ``[x_a, x_b]``.  ``J`` and
``g`` act on coordinate column vectors, so ``J x_a = sum_b J[b, a] x_b``.

Complexified vectors are complex coordinate vectors in the same real basis.
``B(u, v) = u^T g v`` is the complex-bilinear extension of ``g`` and
``h(u, v) = B(u, conj(v))`` the Hermitian form.

A unitary frame ``e_0 .. e_{n-1}`` of the ``(1,0)`` subspace (``J e = i e``)
is stored as the rows of a complex ``n x 2n`` matrix.  Structure constants are
stored with the upper index first::

    C[j, i, k] = B([e_i, e_k], conj(e_j))
    D[j, i, k] = B([conj(e_j), e_k], e_i)

so that ``[conj(e_j), e_k] = sum_i D[j, i, k] conj(e_i) - conj(D[k, i, j]) e_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import StructuralError

DEFAULT_TOL = 1e-10

__all__ = [
    "DEFAULT_TOL",
    "RealLieAlgebra",
    "UnitaryFrame",
    "CDTensors",
    "Check",
    "ValidationReport",
    "validate_real_algebra",
    "nilpotency_class",
    "build_unitary_frame",
    "extract_structure_constants",
    "bracket_reconstruction_residual",
    "jacobi_cd_residuals",
    "check_jacobi_cd",
    "validate_cd",
    "abelian_complex_structure_check",
    "change_frame",
    "realify",
    "change_real_basis",
    "random_unitary",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RealLieAlgebra:
    """The datum ``(g, J, <,>)`` in a fixed real basis."""

    f: np.ndarray
    J: np.ndarray
    g: np.ndarray
    name: str = ""

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        J = np.asarray(self.J, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if f.ndim != 3 or len(set(f.shape)) != 1:
            raise StructuralError(f"bracket tensor must be cubic, got shape {f.shape}")
        m = f.shape[0]
        if m < 2 or m % 2:
            raise StructuralError(f"real dimension must be even and >= 2, got {m}")
        if J.shape != (m, m):
            raise StructuralError(f"J must be {m}x{m}, got {J.shape}")
        if g.shape != (m, m):
            raise StructuralError(f"g must be {m}x{m}, got {g.shape}")
        object.__setattr__(self, "f", _frozen(f))
        object.__setattr__(self, "J", _frozen(J))
        object.__setattr__(self, "g", _frozen(g))

    @property
    def dim_real(self) -> int:
        return self.f.shape[0]

    @property
    def n(self) -> int:
        return self.f.shape[0] // 2

    def bracket(self, u, v):
        """Bilinear extension of the bracket to (complex) coordinate vectors."""
        return np.einsum("a,b,abc->c", u, v, self.f)

    def with_metric(self, g) -> "RealLieAlgebra":
        return RealLieAlgebra(self.f, self.J, g, self.name)


@dataclass(frozen=True)
class UnitaryFrame:
    """Rows of ``E`` are the frame vectors ``e_i`` in the complexified real basis."""

    E: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.E, dtype=complex)
        if E.ndim != 2 or E.shape[1] != 2 * E.shape[0]:
            raise StructuralError(f"frame matrix must be n x 2n, got {E.shape}")
        object.__setattr__(self, "E", _frozen(E))

    @property
    def n(self) -> int:
        return self.E.shape[0]

    def rotate(self, U) -> "UnitaryFrame":
        """Frame ``e'_i = sum_p U[i, p] e_p``."""
        return UnitaryFrame(np.asarray(U) @ self.E)


@dataclass(frozen=True)
class CDTensors:
    """Complex structure constants under a unitary frame."""

    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=complex)
        D = np.asarray(self.D, dtype=complex)
        if C.ndim != 3 or len(set(C.shape)) != 1:
            raise StructuralError(f"C must be n x n x n, got {C.shape}")
        if D.shape != C.shape:
            raise StructuralError(f"D must have the shape of C {C.shape}, got {D.shape}")
        object.__setattr__(self, "C", _frozen(C))
        object.__setattr__(self, "D", _frozen(D))

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "CDTensors":
        return cls(np.zeros((n, n, n), complex), np.zeros((n, n, n), complex))


@dataclass(frozen=True)
class Check:
    name: str
    max_residual: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _report(items, tol: float) -> ValidationReport:
    return ValidationReport(tuple(Check(name, float(r), bool(r <= tol)) for name, r in items))


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# Real algebra validation
# ---------------------------------------------------------------------------

def real_jacobi_tensor(f: np.ndarray) -> np.ndarray:
    """``[[x_a, x_b], x_d] + [[x_b, x_d], x_a] + [[x_d, x_a], x_b]`` indexed ``[a, b, d, :]``."""
    return (
        np.einsum("abc,cde->abde", f, f)
        + np.einsum("bdc,cae->abde", f, f)
        + np.einsum("dac,cbe->abde", f, f)
    )


def nijenhuis_tensor(f: np.ndarray, J: np.ndarray) -> np.ndarray:
    """``[x,y] - [Jx,Jy] + J[Jx,y] + J[x,Jy]`` on basis pairs, indexed ``[a, b, :]``."""
    fJ1 = np.einsum("pa,pbc->abc", J, f)            # [J x_a, x_b]
    fJ2 = np.einsum("qb,aqc->abc", J, f)            # [x_a, J x_b]
    fJJ = np.einsum("pa,qb,pqc->abc", J, J, f)      # [J x_a, J x_b]
    return f - fJJ + np.einsum("dc,abc->abd", J, fJ1 + fJ2)


def validate_real_algebra(spec: RealLieAlgebra, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Residuals of every structural invariant of ``spec``.

    Each residual is the max absolute violation over all index combinations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    f, J, g = spec.f, spec.J, spec.g
    m = spec.dim_real
    eye = np.eye(m)
    eig = np.linalg.eigvalsh((g + g.T) / 2)
    checks = list(_report([
        ("bracket_antisymmetry", _maxabs(f + f.transpose(1, 0, 2))),
        ("jacobi", _maxabs(real_jacobi_tensor(f))),
        ("J_squared", _maxabs(J @ J + eye)),
        ("g_symmetric", _maxabs(g - g.T)),
    ], tol).checks)
    # residual is how far the smallest eigenvalue sits below zero; strictly positive required
    checks.append(Check("g_positive_definite", max(0.0, -float(eig[0])), bool(eig[0] > tol)))
    checks.extend(_report([
        ("g_J_compatible", _maxabs(J.T @ g @ J - g)),
        ("integrability", _maxabs(nijenhuis_tensor(f, J))),
    ], tol).checks)
    return ValidationReport(tuple(checks))


def _rank(rows: np.ndarray, tol: float) -> int:
    if rows.size == 0:
        return 0
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _row_basis(rows: np.ndarray, tol: float) -> np.ndarray:
    if rows.size == 0:
        return rows.reshape(0, rows.shape[-1])
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vh[:r]


def nilpotency_class(spec: RealLieAlgebra, tol: float = DEFAULT_TOL) -> Optional[int]:
    """Length of the lower central series, or ``None`` if it stalls above zero."""
    f = spec.f
    m = spec.dim_real
    current = np.eye(m)
    steps = 0
    while True:
        # rows spanning [g, current]
        images = np.einsum("ab,cbd->cad", current, f).reshape(-1, m)
        nxt = _row_basis(images, tol)
        steps += 1
        if nxt.shape[0] == 0:
            return steps
        if nxt.shape[0] == current.shape[0]:
            return None
        current = nxt


def change_real_basis(spec: RealLieAlgebra, P) -> RealLieAlgebra:
    """Re-express ``spec`` in the basis ``y_a = sum_p P[a, p] x_p``."""
    P = np.asarray(P, dtype=float)
    Pinv = np.linalg.inv(P)
    f = np.einsum("ap,bq,pqr,rc->abc", P, P, spec.f, Pinv)
    # coordinates transform by Pinv^T: x-coords = P^T y-coords
    J = np.linalg.inv(P.T) @ spec.J @ P.T
    g = P @ spec.g @ P.T
    return RealLieAlgebra(f, J, g, spec.name)


# ---------------------------------------------------------------------------
# Frames and structure constants
# ---------------------------------------------------------------------------

def _h(u, v, g):
    return u @ g @ np.conj(v)


def build_unitary_frame(spec: RealLieAlgebra, tol: float = DEFAULT_TOL) -> UnitaryFrame:
    """Gram-Schmidt unitary frame of the ``(1,0)`` subspace.

    Candidates ``(x_a - i J x_a) / sqrt(2)`` are processed in basis order and
    kept whenever they are independent of those already accepted.
    """
    n, m = spec.n, spec.dim_real
    J, g = spec.J, spec.g
    frame = []
    for a in range(m):
        x = np.zeros(m)
        x[a] = 1.0
        v = (x - 1j * (J @ x)) / np.sqrt(2)
        scale = np.sqrt(abs(_h(v, v, g)))
        for e in frame:
            v = v - _h(v, e, g) * e
        norm2 = _h(v, v, g).real
        if norm2 > (tol * max(1.0, scale)) ** 2:
            frame.append(v / np.sqrt(norm2))
        if len(frame) == n:
            break
    if len(frame) < n:
        raise StructuralError(
            f"could only build {len(frame)} of {n} frame vectors; J or g is not a valid Hermitian pair"
        )
    return UnitaryFrame(np.array(frame))


def extract_structure_constants(spec: RealLieAlgebra, frame: UnitaryFrame) -> CDTensors:
    """``C`` and ``D`` of ``spec`` in ``frame`` (layout in the module docstring)."""
    if frame.E.shape[1] != spec.dim_real:
        raise StructuralError(
            f"frame lives in dimension {frame.E.shape[1]}, algebra in {spec.dim_real}"
        )
    E, Ebar, f, g = frame.E, np.conj(frame.E), spec.f, spec.g
    ee = np.einsum("ia,kb,abc->ikc", E, E, f)
    be = np.einsum("ja,kb,abc->jkc", Ebar, E, f)
    C = np.einsum("ikc,cd,jd->jik", ee, g, Ebar)
    C = (C - C.transpose(0, 2, 1)) / 2
    D = np.einsum("jkc,cd,id->jik", be, g, E)
    return CDTensors(C, D)


def bracket_reconstruction_residual(spec: RealLieAlgebra, frame: UnitaryFrame, cd: CDTensors) -> float:
    """Max deviation between brackets rebuilt from ``C, D`` and the bracket of ``spec``."""
    E, Ebar, f = frame.E, np.conj(frame.E), spec.f
    ee = np.einsum("ia,kb,abc->ikc", E, E, f)
    be = np.einsum("ja,kb,abc->jkc", Ebar, E, f)
    ee_rebuilt = np.einsum("jik,jc->ikc", cd.C, E)
    be_rebuilt = np.einsum("jik,ic->jkc", cd.D, Ebar) - np.einsum("kij,ic->jkc", np.conj(cd.D), E)
    return max(_maxabs(ee - ee_rebuilt), _maxabs(be - be_rebuilt))


# ---------------------------------------------------------------------------
# Identities at the C/D level
# ---------------------------------------------------------------------------

def jacobi_cd_residuals(cd: CDTensors) -> dict:
    """Left-hand sides of the three Jacobi identities, each indexed ``[i, j, k, l]``."""
    C, D = cd.C, cd.D
    cD = np.conj(D)
    cc = (
        np.einsum("rij,lrk->ijkl", C, C)
        + np.einsum("rjk,lri->ijkl", C, C)
        + np.einsum("rki,lrj->ijkl", C, C)
    )
    cdd = (
        np.einsum("rik,ljr->ijkl", C, D)
        + np.einsum("rji,lrk->ijkl", D, D)
        - np.einsum("rjk,lri->ijkl", D, D)
    )
    cdbar = (
        np.einsum("rik,rjl->ijkl", C, cD)
        - np.einsum("jrk,irl->ijkl", C, cD)
        + np.einsum("jri,krl->ijkl", C, cD)
        - np.einsum("lri,kjr->ijkl", D, cD)
        + np.einsum("lrk,ijr->ijkl", D, cD)
    )
    return {"jacobi_CC": cc, "jacobi_CD": cdd, "jacobi_CDbar": cdbar}


def check_jacobi_cd(cd: CDTensors, tol: float = DEFAULT_TOL) -> ValidationReport:
    res = jacobi_cd_residuals(cd)
    return _report([(k, _maxabs(v)) for k, v in res.items()], tol)


def validate_cd(cd: CDTensors, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Validation used when structure constants are supplied directly."""
    anti = ("C_antisymmetry", _maxabs(cd.C + cd.C.transpose(0, 2, 1)))
    jac = check_jacobi_cd(cd, tol)
    return ValidationReport((Check(anti[0], anti[1], anti[1] <= tol),) + jac.checks)


def abelian_complex_structure_check(cd: CDTensors, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Whether ``C = 0`` and, if so, the residuals of the commutativity identities on ``D``."""
    D = cd.D
    cD = np.conj(D)
    items = [("abelian", _maxabs(cd.C))]
    if items[0][1] <= tol:
        n = cd.n
        off = ~np.eye(n, dtype=bool)[:, None, :, None]  # mask i != k on [i, j, k, l]
        off = np.broadcast_to(off, (n,) * 4)
        dd = np.einsum("rji,lrk->ijkl", D, D) - np.einsum("rjk,lri->ijkl", D, D)
        ddbar = np.einsum("lri,kjr->ijkl", D, cD) - np.einsum("lrk,ijr->ijkl", D, cD)
        items.append(("commutativity_DD", _maxabs(dd[off])))
        items.append(("commutativity_DDbar", _maxabs(ddbar[off])))
    return _report(items, tol)


def change_frame(cd: CDTensors, U, tol: float = DEFAULT_TOL) -> CDTensors:
    """Structure constants in the frame ``e'_i = sum_p U[i, p] e_p``."""
    U = np.asarray(U, dtype=complex)
    n = cd.n
    if U.shape != (n, n):
        raise StructuralError(f"U must be {n}x{n}, got {U.shape}")
    if _maxabs(U @ U.conj().T - np.eye(n)) > tol:
        raise StructuralError("U is not unitary")
    cU = np.conj(U)
    C = np.einsum("js,ip,kq,spq->jik", cU, U, U, cd.C)
    D = np.einsum("js,ip,kq,spq->jik", cU, U, U, cd.D)
    return CDTensors(C, D)


def complex_bracket_table(cd: CDTensors) -> np.ndarray:
    """Bracket of the complexified algebra in the basis ``(e_0.., conj(e_0)..)``.

    ``table[p, q, :]`` holds the coefficients of ``[b_p, b_q]``.
    """
    n = cd.n
    C, D = cd.C, cd.D
    t = np.zeros((2 * n, 2 * n, 2 * n), complex)
    t[:n, :n, :n] = C.transpose(1, 2, 0)
    t[n:, n:, n:] = np.conj(C).transpose(1, 2, 0)
    # [conj(e_j), e_k]: conj(e_i) coefficient D[j,i,k], e_i coefficient -conj(D[k,i,j])
    be = np.zeros((n, n, 2 * n), complex)
    be[:, :, n:] = D.transpose(0, 2, 1)
    be[:, :, :n] = -np.conj(D).transpose(2, 0, 1)
    t[n:, :n, :] = be
    t[:n, n:, :] = -be.transpose(1, 0, 2)
    return t


def realify(cd: CDTensors, name: str = "", tol: float = 1e-9) -> RealLieAlgebra:
    """Real algebra with basis ``u_i = sqrt2 Re e_i``, ``v_i = J u_i`` and ``g = I``.

    Its Gram-Schmidt frame is exactly ``e``, so extraction returns ``cd``.
    """
    n = cd.n
    t = complex_bracket_table(cd)
    Q = np.zeros((2 * n, 2 * n), complex)  # column a: real basis vector a in (e, conj e) coords
    s = 1 / np.sqrt(2)
    for i in range(n):
        Q[i, 2 * i], Q[n + i, 2 * i] = s, s
        Q[i, 2 * i + 1], Q[n + i, 2 * i + 1] = 1j * s, -1j * s
    f = np.einsum("pa,qb,pqr,cr->abc", Q, Q, t, np.linalg.inv(Q))
    if _maxabs(f.imag) > tol:
        raise StructuralError("structure constants do not define a real bracket")
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    return RealLieAlgebra(f.real, J, np.eye(2 * n), name)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
