"""Truncated controllability Gramians for the heat and wave systems.

The Gramian quadratic form on an adjoint datum equals the squared
L^2((0,T) x omega) norm of the observed adjoint trace:

    v^T G v = int_0^T |B* phi_v(s)|^2_{L^2(omega)} ds.

Heat Gramians are N x N on L^2 data; wave Gramians are 2N x 2N on stacked
(value, weighted velocity) data, with the H^-1 weight 1/(n pi) baked in so
all spectral analysis downstream is plain Euclidean.

Entries are closed-form time integrals; `gramian_quadrature_oracle` rebuilds
the same matrix by Gauss-Legendre integration of the adjoint traces and is
the independent validation route.
"""

from dataclasses import dataclass, field

import numpy as np

from . import trigprod
from .errors import QuadratureDivergenceError, ValidationError
from .propagators import wave_trace_components
from .quadrature import panel_nodes
from .serialize import SCHEMA_VERSION
from .spectral import ControlRegion, eigenvalues, overlap_matrix

_SYMMETRY_RTOL = 1e-12
_PSD_RTOL = 1e-10


@dataclass
class GramianMatrix:
    """Assembled Gramian with full provenance metadata."""

    kind: str
    N: int
    T: float
    region: ControlRegion
    potential: float
    entries: np.ndarray

    @property
    def dimension(self):
        return self.entries.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)

    def validate(self):
        """Assert symmetry and positive semidefiniteness within tolerances."""
        M = self.entries
        scale = float(np.max(np.abs(M))) or 1.0
        asym = float(np.max(np.abs(M - M.T)))
        if asym > _SYMMETRY_RTOL * scale:
            raise ValidationError(f"Gramian asymmetry {asym:.3e} exceeds tolerance")
        eigs = self.eigenvalues()
        if eigs[0] < -_PSD_RTOL * max(eigs[-1], 0.0):
            raise ValidationError(f"Gramian has eigenvalue {eigs[0]:.3e} below the PSD floor")
        return self

    def to_json_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "N": self.N,
            "T": self.T,
            "region": [self.region.a, self.region.b],
            "potential": self.potential,
            "entries": [float(x) for x in self.entries.ravel()],
        }

    @staticmethod
    def from_json_dict(doc):
        dim = 2 * doc["N"] if doc["kind"] == "wave" else doc["N"]
        entries = np.asarray(doc["entries"], dtype=float).reshape(dim, dim)
        return GramianMatrix(kind=doc["kind"], N=doc["N"], T=doc["T"],
                             region=ControlRegion(*doc["region"]),
                             potential=doc["potential"], entries=entries)


def _check_args(N, T):
    if N < 1:
        raise ValidationError(f"truncation order must be >= 1, got {N}")
    if T <= 0:
        raise ValidationError(f"horizon must be positive, got {T}")


def assemble_heat_gramian(N, T, region):
    """Heat Gramian G_mn = B_mn (1 - exp(-(lam_m + lam_n) T))/(lam_m + lam_n)."""
    _check_args(N, T)
    lam = eigenvalues(N)
    L = lam[:, None] + lam[None, :]
    K = (1.0 - np.exp(-L * T)) / L
    entries = overlap_matrix(region, N) * K
    return GramianMatrix("heat", N, T, region, 0.0, entries)


def _wave_entries_oscillatory(N, T, region, c):
    nu = np.sqrt(eigenvalues(N) + c)
    wgt = np.arange(1, N + 1) * np.pi / nu
    B = overlap_matrix(region, N)
    CC = trigprod.osc_cc(nu[:, None], nu[None, :], T)
    SS = trigprod.osc_ss(nu[:, None], nu[None, :], T)
    CS = trigprod.osc_cs(nu[:, None], nu[None, :], T)
    Gcc = B * CC
    Gcd = -B * CS * wgt[None, :]
    Gdd = B * SS * np.outer(wgt, wgt)
    return np.block([[Gcc, Gcd], [Gcd.T, Gdd]])


def _wave_entries_general(N, T, region, c):
    lam = eigenvalues(N)
    sigma = lam + c
    B = overlap_matrix(region, N)
    traces = [trigprod.mode_traces(n + 1, sigma[n]) for n in range(N)]
    G = np.zeros((2 * N, 2 * N))
    for i in range(N):
        (sc_i, rc_i, ac_i), (sd_i, rd_i, ad_i) = traces[i]
        for j in range(i, N):
            if B[i, j] == 0.0 and i != j:
                continue
            (sc_j, rc_j, ac_j), (sd_j, rd_j, ad_j) = traces[j]
            cc = ac_i * ac_j * trigprod.product_integral(sc_i, rc_i, sc_j, rc_j, T)
            cd = ac_i * ad_j * trigprod.product_integral(sc_i, rc_i, sd_j, rd_j, T)
            dc = ad_i * ac_j * trigprod.product_integral(sd_i, rd_i, sc_j, rc_j, T)
            dd = ad_i * ad_j * trigprod.product_integral(sd_i, rd_i, sd_j, rd_j, T)
            G[i, j] = G[j, i] = B[i, j] * cc
            G[i, N + j] = B[i, j] * cd
            G[N + j, i] = G[i, N + j]
            G[j, N + i] = B[i, j] * dc
            G[N + i, j] = G[j, N + i]
            G[N + i, N + j] = G[N + j, N + i] = B[i, j] * dd
    return G


def assemble_wave_gramian(N, T, region, c=0.0):
    """Wave Gramian in stacked (value, weighted velocity) coordinates.

    2N x 2N, symmetric PSD.  All-oscillatory spectra (lambda + c > 0
    throughout) assemble vectorized; zero and hyperbolic modes fall back to
    the scalar branch table.
    """
    _check_args(N, T)
    lam = eigenvalues(N)
    sigma = lam + c
    branches = [trigprod.classify_sigma(s, l) for s, l in zip(sigma, lam)]
    if all(b == trigprod.OSCILLATORY for b in branches):
        entries = _wave_entries_oscillatory(N, T, region, c)
    else:
        entries = _wave_entries_general(N, T, region, c)
    return GramianMatrix("wave", N, T, region, c, entries)


def _heat_trace_matrix(N, T, ts):
    lam = eigenvalues(N)
    return np.exp(-np.outer(lam, T - ts))


def _oracle_nodes(kind, N, T, panels, order):
    """Quadrature nodes and weights in backward time theta = T - s.

    The heat traces exp(-lambda theta) have a boundary layer of width
    1/lambda_max at theta = 0, so heat panels are graded geometrically from
    that scale; the oscillatory wave traces use uniform panels.
    """
    if kind == "heat":
        h0 = min(T, 0.5 / float(eigenvalues(N)[-1]))
        if h0 >= T:
            edges = np.linspace(0.0, T, panels + 1)
        else:
            edges = np.concatenate([[0.0], np.geomspace(h0, T, panels)])
    else:
        edges = np.linspace(0.0, T, panels + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gramian_quadrature_oracle(kind, N, T, region, c=0.0, panels=16,
                              order=16, rtol=1e-11):
    """Gramian assembled by numerical time integration of adjoint traces.

    Integrates <chi_omega phi_i(s), phi_j(s)> with composite Gauss-Legendre
    at `panels` panels and again at 2 * panels; raises if the two estimates
    disagree beyond rtol (relative to the largest entry).  Returns the
    refined matrix.
    """
    if panels < 8:
        raise ValidationError(f"oracle needs >= 8 panels, got {panels}")
    if kind not in ("heat", "wave"):
        raise ValidationError(f"unknown Gramian kind {kind!r}")
    _check_args(N, T)
    B = overlap_matrix(region, N)

    def assemble(p):
        theta, weights = _oracle_nodes(kind, N, T, p, order)
        if kind == "heat":
            out = np.zeros((N, N))
            E = _heat_trace_matrix(N, T, T - theta)
            for k, wk in enumerate(weights):
                e = E[:, k]
                out += wk * (B * np.outer(e, e))
            return out
        out = np.zeros((2 * N, 2 * N))
        for k, wk in enumerate(weights):
            Cval, _, Dval, _ = wave_trace_components(N, T - theta[k], T, c)
            out[:N, :N] += wk * (B * np.outer(Cval, Cval))
            out[:N, N:] += wk * (B * np.outer(Cval, Dval))
            out[N:, N:] += wk * (B * np.outer(Dval, Dval))
        out[N:, :N] = out[:N, N:].T
        return out

    coarse = assemble(panels)
    fine = assemble(2 * panels)
    scale = max(1.0, float(np.max(np.abs(fine))))
    if float(np.max(np.abs(fine - coarse))) > rtol * scale:
        raise QuadratureDivergenceError(
            f"Gramian oracle did not converge at {panels} -> {2 * panels} panels")
    return fine
