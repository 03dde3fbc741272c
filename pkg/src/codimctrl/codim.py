"""Spectral diagnostics for finite codimensionality of the reachable set.

The reachable set of the truncated system is the range of its Gramian, so
near-null Gramian eigendirections are numerically unreachable targets.  The
`defect count` at a threshold tau counts them; whether it stabilizes or
diverges along a ladder of truncations N is the numerical verdict on finite
codimensionality.  The ladder heuristic is a diagnostic of this toolkit, not
a certified decision procedure, and the verdict is labeled accordingly.

Two eigenstructure tests accompany the counts:

* `observability_subspace_test`: coercivity of the Gramian form on the
  orthocomplement of the bottom-k eigenspace (|v|^2 <= C^2 v^T G v there).
* `compact_perturbation_test`: the same coercivity restored on the whole
  space by adding the rank-k defect projector (|v|^2 <= C^2 (v^T G v +
  |P_k v|^2)).

Both reduce to eigenvalue comparisons and are equivalent up to an explicit
constant relation, mirroring the subspace/compact-perturbation duality the
Gramian realizes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from .errors import NumericalError, ValidationError
from .gramian import GramianMatrix, assemble_heat_gramian, assemble_wave_gramian
from .serialize import SCHEMA_VERSION

DEFAULT_TAU_FACTOR = 1e-8

FINITE_CODIM = "FiniteCodim"
NOT_FINITE_CODIM = "NotFiniteCodim"
INCONCLUSIVE = "Inconclusive"


def _entries_of(G):
    if isinstance(G, GramianMatrix):
        return G.entries
    M = np.asarray(G, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("spectrum needs a square symmetric matrix")
    return M


@dataclass
class SpectrumReport:
    """Eigenvalues of a Gramian with the defect set below a threshold."""

    N: int
    tau: float
    eigs: np.ndarray                # sorted descending
    defect_count: int
    defect_basis: np.ndarray        # orthonormal columns, eigs below tau

    @property
    def dimension(self):
        return self.eigs.size

    def optimal_constant(self):
        """1/sqrt of the smallest retained eigenvalue; inf if all defect."""
        if self.defect_count >= self.dimension:
            return float("inf")
        retained_min = self.eigs[self.dimension - self.defect_count - 1]
        if retained_min <= 0:
            return float("inf")
        return 1.0 / np.sqrt(retained_min)

    def to_json_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "N": self.N,
            "tau": self.tau,
            "eigs": [float(x) for x in self.eigs],
            "defect_count": self.defect_count,
        }


def spectrum(G, tau):
    """Full symmetric eigendecomposition with the defect set at threshold tau."""
    if tau <= 0:
        raise ValidationError("defect threshold tau must be positive")
    M = _entries_of(G)
    try:
        eigs, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    defect = eigs < tau
    count = int(np.sum(defect))
    order = np.argsort(eigs)[::-1]
    N = G.N if isinstance(G, GramianMatrix) else M.shape[0]
    return SpectrumReport(N=N, tau=float(tau), eigs=eigs[order],
                          defect_count=count, defect_basis=vecs[:, defect])


def observability_subspace_test(G, k, C):
    """Does |v|^2 <= C^2 v^T G v hold on the orthocomplement of the bottom-k
    eigenspace?

    True iff the (k+1)-th smallest eigenvalue of G is >= 1/C^2.  When false,
    returns the violating unit eigenvector as witness.
    """
    M = _entries_of(G)
    dim = M.shape[0]
    if not 0 <= k < dim:
        raise ValidationError(f"k must satisfy 0 <= k < {dim}, got {k}")
    if C <= 0:
        raise ValidationError("constant C must be positive")
    eigs, vecs = np.linalg.eigh(M)
    if eigs[k] >= 1.0 / C ** 2:
        return True, None
    return False, vecs[:, k]


def compact_perturbation_test(G, k, C):
    """Does |v|^2 <= C^2 (v^T G v + |P_k v|^2) hold on the whole space?

    P_k projects onto the bottom-k eigenspace of G.  True iff the smallest
    eigenvalue of C^2 (G + P_k) - I is nonnegative, which in the eigenbasis
    of G reads min(retained minimum, smallest defect eigenvalue + 1) >= 1/C^2.
    """
    M = _entries_of(G)
    dim = M.shape[0]
    if not 0 <= k <= dim:
        raise ValidationError(f"k must satisfy 0 <= k <= {dim}, got {k}")
    if C <= 0:
        raise ValidationError("constant C must be positive")
    eigs = np.linalg.eigvalsh(M)
    floor = np.inf
    if k < dim:
        floor = eigs[k]
    if k > 0:
        floor = min(floor, eigs[0] + 1.0)
    return bool(floor >= 1.0 / C ** 2)


def compact_constant_from_observability(C, smallest_defect_eig):
    """Constant C' for the compact test implied by the subspace test at C.

    C'^2 = C^2 / (1 - min(1, C^2 * e0)) with e0 the smallest defect
    eigenvalue, valid on C >= 1 with C^2 e0 < 1; outside that regime the
    sharp bound max(C^2, 1/(1 + e0)) is returned instead.
    """
    e0 = max(float(smallest_defect_eig), 0.0)
    c2 = C ** 2
    damp = 1.0 - min(1.0, c2 * e0)
    if C >= 1.0 and damp > 0.0:
        return float(np.sqrt(c2 / damp))
    return float(np.sqrt(max(c2, 1.0 / (1.0 + e0))))


@dataclass
class LadderVerdict:
    """Defect counts along a truncation ladder and their classification."""

    Ns: list
    counts: list
    verdict: str
    tau_rule: str
    tau: float
    min_eigs: list
    max_eigs: list
    defect_angles: list             # max principal angle between consecutive
                                    # defect spaces; None where undefined
    reports: list = None            # per-level SpectrumReport, not serialized

    @property
    def codimension(self):
        if self.verdict.startswith(FINITE_CODIM):
            return self.counts[-1]
        return None

    def to_json_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "Ns": list(map(int, self.Ns)),
            "counts": list(map(int, self.counts)),
            "verdict": self.verdict,
            "tau_rule": self.tau_rule,
            "tau": self.tau,
            "min_eigs": [float(x) for x in self.min_eigs],
            "max_eigs": [float(x) for x in self.max_eigs],
            "defect_angles": [None if a is None else float(a)
                              for a in self.defect_angles],
        }


def _resolve_tau(tau_rule, first_eigs):
    """Fix the absolute defect threshold from the rule and the first level.

    None -> 1e-8 times the largest eigenvalue at the smallest truncation;
    a float -> that absolute threshold; 'rel:X' -> X times the same largest
    eigenvalue.  The threshold is frozen across the ladder: a per-level
    relative threshold would mask divergence.
    """
    lmax = float(first_eigs[-1])
    if tau_rule is None:
        return DEFAULT_TAU_FACTOR * lmax, f"abs:{DEFAULT_TAU_FACTOR:g}*lmax(N0)"
    if isinstance(tau_rule, (int, float)):
        if tau_rule <= 0:
            raise ValidationError("absolute tau must be positive")
        return float(tau_rule), f"abs:{float(tau_rule):g}"
    if isinstance(tau_rule, str) and tau_rule.startswith("rel:"):
        factor = float(tau_rule[4:])
        if factor <= 0:
            raise ValidationError("relative tau factor must be positive")
        return factor * lmax, f"abs:{factor:g}*lmax(N0)"
    raise ValidationError(f"unrecognized tau rule {tau_rule!r}")


def _embed_defect_basis(basis, N_small, N_big, kind):
    """Zero-pad a defect basis from truncation N_small into N_big layout."""
    if kind == "heat":
        out = np.zeros((N_big, basis.shape[1]))
        out[:N_small] = basis
        return out
    out = np.zeros((2 * N_big, basis.shape[1]))
    out[:N_small] = basis[:N_small]
    out[N_big:N_big + N_small] = basis[N_small:]
    return out


def ladder_scan(kind, T, region, c, Ns, tau_rule=None):
    """Defect counts across a truncation ladder, with a stability verdict.

    A single absolute tau is resolved once at the smallest truncation and
    held fixed.  The verdict inspects the top half of the ladder only:
    constant counts there give FiniteCodim(k), strictly increasing counts
    give NotFiniteCodim, anything else is Inconclusive.  Principal angles
    between consecutive defect spaces are reported as convergence evidence
    but do not enter the verdict.
    """
    Ns = [int(n) for n in Ns]
    if len(Ns) < 3:
        raise ValidationError("ladder needs at least 3 truncation levels")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValidationError("ladder truncations must be strictly increasing")

    reports = []
    tau = None
    rule_text = None
    for N in Ns:
        if kind == "heat":
            G = assemble_heat_gramian(N, T, region)
        elif kind == "wave":
            G = assemble_wave_gramian(N, T, region, c)
        else:
            raise ValidationError(f"unknown equation kind {kind!r}")
        if tau is None:
            first_eigs = np.sort(G.eigenvalues())
            tau, rule_text = _resolve_tau(tau_rule, first_eigs)
        reports.append(spectrum(G, tau))

    counts = [r.defect_count for r in reports]
    angles = [None]
    for prev, cur, n_prev, n_cur in zip(reports, reports[1:], Ns, Ns[1:]):
        if prev.defect_count == 0 or cur.defect_count == 0:
            angles.append(None)
            continue
        embedded = _embed_defect_basis(prev.defect_basis, n_prev, n_cur, kind)
        angles.append(float(np.max(subspace_angles(embedded, cur.defect_basis))))

    top = counts[len(counts) // 2:]
    if all(x == top[0] for x in top):
        verdict = f"{FINITE_CODIM}({top[0]})"
    elif all(b > a for a, b in zip(top, top[1:])):
        verdict = NOT_FINITE_CODIM
    else:
        verdict = INCONCLUSIVE

    return LadderVerdict(
        Ns=Ns, counts=counts, verdict=verdict, tau_rule=rule_text, tau=tau,
        min_eigs=[float(r.eigs[-1]) for r in reports],
        max_eigs=[float(r.eigs[0]) for r in reports],
        defect_angles=angles, reports=reports,
    )


def eigenvalue_csv_rows(reports):
    """(N, j, eig_j) triples for plotting, eigenvalues descending."""
    rows = []
    for rep in reports:
        for j, e in enumerate(rep.eigs):
            rows.append((rep.N, j, float(e)))
    return rows
