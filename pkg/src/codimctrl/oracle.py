"""Exact finite-dimensional ground truth for the controllability equivalences.

For a matrix pair (A, B) with bounded generator, the reachable subspace, its
codimension, and the controllability Gramian are all computable exactly (up
to quadrature and rank tolerances), so the four characterizations verified
here are the desk-scale ground truth against which the spectral modules'
diagnostics are calibrated:

1. rank of the Kalman matrix [B, AB, ..., A^{n-1} B],
2. rank of the Gramian int_0^T e^{As} B B^T e^{A^T s} ds,
3. coercivity of the Gramian form on its range (observability floor),
4. coercivity on the whole space after adding the kernel projector
   (finite-rank perturbation test).

Ranks are decided by a fixed documented tolerance; singular values within a
factor 10 of it flag the report Inconclusive instead of being rounded.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, subspace_angles

from .errors import QuadratureDivergenceError, ValidationError
from .quadrature import panel_nodes
from .serialize import SCHEMA_VERSION

# Scaling-and-squaring Pade exponential (scipy.linalg.expm) is documented to
# 1e-13 for moderate norms; reject anything beyond this envelope.
_NORM_T_LIMIT = 50.0

_RANK_TOL_FACTOR = 64.0
_AMBIGUITY_BAND = 10.0


@dataclass
class LtiSystem:
    """Finite-dimensional pair (A, B) with a horizon T."""

    A: np.ndarray
    B: np.ndarray
    T: float

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.asarray(self.B, dtype=float)
        if self.B.ndim == 1:
            self.B = self.B[:, None]
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValidationError("A must be square")
        if self.B.shape[0] != n or self.B.shape[1] < 1:
            raise ValidationError("B must be n x m with m >= 1")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B))):
            raise ValidationError("matrix entries must be finite")
        if self.T <= 0:
            raise ValidationError("horizon must be positive")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]


def _rank_with_flag(singular_values, n):
    """Rank at tol = n * sigma_max * eps * 64, flagging ambiguous values."""
    s = np.asarray(singular_values)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return 0, 0.0, False
    tol = n * smax * np.finfo(float).eps * _RANK_TOL_FACTOR
    ambiguous = bool(np.any((s > tol / _AMBIGUITY_BAND) & (s < tol * _AMBIGUITY_BAND)))
    return int(np.sum(s > tol)), tol, ambiguous


def kalman_matrix(A, B):
    sys = LtiSystem(A, B, 1.0)
    blocks = [sys.B]
    for _ in range(sys.n - 1):
        blocks.append(sys.A @ blocks[-1])
    return np.hstack(blocks)


def kalman_rank(A, B):
    """Rank of [B, AB, ..., A^{n-1}B] by singular values."""
    K = kalman_matrix(A, B)
    s = np.linalg.svd(K, compute_uv=False)
    rank, _, _ = _rank_with_flag(s, K.shape[0])
    return rank


def matrix_exponential(A, t=1.0):
    """Guarded matrix exponential; norms beyond the envelope are rejected."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    scale = float(np.linalg.norm(A, 2)) * abs(t)
    if scale > _NORM_T_LIMIT:
        raise ValidationError(
            f"||A|| * t = {scale:.3g} exceeds the documented envelope {_NORM_T_LIMIT}")
    return expm(A * t)


def gramian_factor(A, B, T, rtol=1e-12, max_panels=512, order=12):
    """Quadrature factor F with F F^T = int_0^T e^{As} B B^T e^{A^T s} ds.

    Columns are sqrt(w_k) e^{A s_k} B over Gauss-Legendre nodes, with panels
    doubled until the assembled Gramian stops changing in Frobenius norm.
    Rank decisions downstream use the singular values of F: they live on the
    linear scale of the problem, where the Gramian's eigenvalues (their
    squares) would drown in roundoff.
    """
    sys = LtiSystem(A, B, T)
    if float(np.linalg.norm(sys.A, 2)) * T > _NORM_T_LIMIT:
        raise ValidationError(
            f"||A|| * T exceeds the documented envelope {_NORM_T_LIMIT}")

    def assemble(panels):
        nodes, weights = panel_nodes(0.0, T, panels, order)
        cols = [np.sqrt(w) * (expm(sys.A * s) @ sys.B)
                for s, w in zip(nodes, weights)]
        return np.hstack(cols)

    panels = 1
    F_prev = assemble(panels)
    G_prev = F_prev @ F_prev.T
    while panels < max_panels:
        panels *= 2
        F = assemble(panels)
        G = F @ F.T
        scale = max(1.0, float(np.linalg.norm(G, "fro")))
        if float(np.linalg.norm(G - G_prev, "fro")) <= rtol * scale:
            return F
        F_prev, G_prev = F, G
    raise QuadratureDivergenceError(
        f"Gramian quadrature did not converge within {max_panels} panels")


def fd_gramian(A, B, T, rtol=1e-12, max_panels=512, order=12):
    """Controllability Gramian int_0^T e^{As} B B^T e^{A^T s} ds.

    Adaptive-panel Gauss-Legendre on matrix exponentials, doubled until the
    Frobenius change drops below rtol; non-convergence is an error, never a
    silently accepted estimate.
    """
    F = gramian_factor(A, B, T, rtol=rtol, max_panels=max_panels, order=order)
    G = F @ F.T
    return 0.5 * (G + G.T)


@dataclass
class EquivalenceReport:
    """Exact verification record of the four equivalent characterizations."""

    n: int
    kalman_rank: int
    gramian_rank: int
    codim: int
    exactly_controllable: bool
    observability_floor: float
    subspace_agreement: float
    rank_ambiguous: bool
    subspace_test_ok: bool
    compact_test_ok: bool

    def consistent(self):
        return (self.kalman_rank == self.gramian_rank
                and self.codim == self.n - self.kalman_rank
                and self.exactly_controllable == (self.codim == 0)
                and self.subspace_test_ok and self.compact_test_ok
                and not self.rank_ambiguous)

    def to_json_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "n": self.n,
            "kalman_rank": self.kalman_rank,
            "gramian_rank": self.gramian_rank,
            "codim": self.codim,
            "exactly_controllable": self.exactly_controllable,
            "observability_floor": self.observability_floor,
            "subspace_agreement": self.subspace_agreement,
            "rank_ambiguous": self.rank_ambiguous,
            "subspace_test_ok": self.subspace_test_ok,
            "compact_test_ok": self.compact_test_ok,
        }


def check_equivalences(A, B, T, tol=None):
    """Verify the rank/range/coercivity characterizations for one system.

    Gramian rank, range and observability floor come from the singular
    values of the quadrature factor (floor = sigma_r^2), so rank decisions
    for the Kalman matrix and the Gramian live on the same linear scale.
    The assertion-(4) style test uses C^2 = max(1, 1/floor): the kernel
    projector contributes at most |v|^2 to the right-hand side, so the
    constant can never be taken below 1 when the kernel is nontrivial.
    """
    sys = LtiSystem(A, B, T)
    n = sys.n

    K = kalman_matrix(sys.A, sys.B)
    Us, s, _ = np.linalg.svd(K)
    krank, _, kamb = _rank_with_flag(s, n)
    if tol is not None:
        krank = int(np.sum(s > tol))
        kamb = False

    F = gramian_factor(sys.A, sys.B, T)
    Ug, sg, _ = np.linalg.svd(F, full_matrices=True)
    grank, _, gamb = _rank_with_flag(sg, n)
    if tol is not None:
        grank = int(np.sum(sg > np.sqrt(tol)))
        gamb = False

    codim = n - krank
    floor = float(sg[grank - 1] ** 2) if grank > 0 else 0.0

    if krank == 0 or grank == 0:
        agreement = 0.0 if krank == grank else float(np.pi / 2)
    else:
        angles = subspace_angles(Us[:, :krank], Ug[:, :grank])
        agreement = float(np.max(angles)) if angles.size else 0.0

    # (3): coercivity on the range with C^2 = 1/floor is the spectral
    # statement floor = min of the form there; assert it on the factor.
    if grank == 0:
        subspace_ok = True  # empty range, nothing to certify
        compact_c2 = 1.0
    else:
        subspace_ok = bool(sg[grank - 1] ** 2 >= floor * (1.0 - 1e-9))
        compact_c2 = max(1.0, 1.0 / floor)

    # (4): |v|^2 <= C^2 (v^T G v + |P_ker v|^2).  G + P_ker is the Gram
    # matrix of [F, V_ker], so its smallest eigenvalue is sigma_min of the
    # stacked factor squared, again computed on the linear scale.
    stacked = np.hstack([F, Ug[:, grank:]])
    smin = float(np.linalg.svd(stacked, compute_uv=False)[-1])
    compact_ok = bool(compact_c2 * smin ** 2 >= 1.0 - 1e-6)

    return EquivalenceReport(
        n=n, kalman_rank=krank, gramian_rank=grank, codim=codim,
        exactly_controllable=(codim == 0), observability_floor=floor,
        subspace_agreement=agreement, rank_ambiguous=(kamb or gamb),
        subspace_test_ok=subspace_ok, compact_test_ok=compact_ok)


def random_system(rng, n_max=6, m_max=3):
    """One random (A, B) with entries uniform in [-1, 1]."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    B = rng.uniform(-1.0, 1.0, size=(n, m))
    return A, B


def random_sweep(count, seed, n_max=6, m_max=3, horizons=(0.5, 1.0, 2.0)):
    """Seeded randomized equivalence sweep; yields (A, B, T, report)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        A, B = random_system(rng, n_max, m_max)
        T = float(horizons[int(rng.integers(0, len(horizons)))])
        out.append((A, B, T, check_equivalences(A, B, T)))
    return out
