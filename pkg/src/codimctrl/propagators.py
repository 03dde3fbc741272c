"""Mode-wise forward and adjoint propagators for the 1D heat and wave systems.

States live in eigenbasis coefficients.  The wave state space H^1_0 x L^2 and
the adjoint data space L^2 x H^-1 are handled through a single weighted
coordinate convention:

* WaveState stores raw coefficients (pos_n of y, vel_n of y_t); its energy
  norm applies the H^1_0 weight n pi to pos.
* AdjointWaveData stores psi(T) raw and psi_t(T) scaled by 1/(n pi), so the
  stored 2N-vector carries the Euclidean (= L^2 x H^-1) norm.

With that convention the duality pairing <(y, y_t), (psi1, psi2)> =
<y_t, psi1> - <y, psi2> is a plain dot product of `pairing_vector(state)`
with `data.vector()`, and every Gramian downstream is an ordinary symmetric
matrix.

Time-sampled controls are integrated with composite Simpson on a uniform
grid.  The documented accuracy bound is dt <= min(0.01, 1/(10 * r_max)) with
r_max the largest retained modal rate (sqrt(lambda + c) for the wave system,
sqrt(lambda) for the heat system); coarser grids are rejected.
"""

from dataclasses import dataclass, field

import numpy as np

from . import trigprod
from .errors import DtTooCoarseError, ValidationError
from .quadrature import refine_integrate, simpson_weights
from .spectral import ControlRegion, eigenvalues, overlap_matrix

MODAL_ANALYTIC = "modal-analytic"
TIME_SAMPLED = "time-sampled"

_DT_CAP = 0.01
_DT_RATE_FACTOR = 10.0


def _as_vector(x, name):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D coefficient vector")
    return v


@dataclass
class HeatState:
    """L^2 state of the heat system as eigenbasis coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = _as_vector(self.coeffs, "coeffs")

    @property
    def n_modes(self):
        return self.coeffs.size

    def norm(self):
        return float(np.linalg.norm(self.coeffs))


@dataclass
class WaveState:
    """Wave state (y, y_t) in H^1_0 x L^2; raw modal coefficients."""

    pos: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        self.pos = _as_vector(self.pos, "pos")
        self.vel = _as_vector(self.vel, "vel")
        if self.pos.size != self.vel.size:
            raise ValidationError("pos and vel must have equal length")

    @property
    def n_modes(self):
        return self.pos.size

    def energy_norm(self):
        npi = np.arange(1, self.n_modes + 1) * np.pi
        return float(np.sqrt(np.sum((npi * self.pos) ** 2) + np.sum(self.vel ** 2)))

    def weighted(self):
        """Weighted coordinates (n pi * pos, vel) carrying the energy norm."""
        npi = np.arange(1, self.n_modes + 1) * np.pi
        return np.concatenate([npi * self.pos, self.vel])

    @staticmethod
    def from_weighted(w):
        w = np.asarray(w, dtype=float)
        n = w.size // 2
        npi = np.arange(1, n + 1) * np.pi
        return WaveState(pos=w[:n] / npi, vel=w[n:].copy())

    @staticmethod
    def zero(N):
        return WaveState(np.zeros(N), np.zeros(N))


@dataclass
class AdjointWaveData:
    """Backward-wave datum (psi(T), psi_t(T)) in L^2 x H^-1.

    `c` holds psi(T) raw; `d` holds psi_t(T)/(n pi), so (c, d) stacked is
    Euclidean and pairs with WaveState through `pairing`.
    """

    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.c = _as_vector(self.c, "c")
        self.d = _as_vector(self.d, "d")
        if self.c.size != self.d.size:
            raise ValidationError("c and d must have equal length")

    @property
    def n_modes(self):
        return self.c.size

    def norm(self):
        return float(np.sqrt(np.sum(self.c ** 2) + np.sum(self.d ** 2)))

    def vector(self):
        return np.concatenate([self.c, self.d])

    @staticmethod
    def from_vector(v):
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return AdjointWaveData(c=v[:n].copy(), d=v[n:].copy())

    def raw_velocity(self):
        npi = np.arange(1, self.n_modes + 1) * np.pi
        return self.d * npi


def pairing_vector(state):
    """Vector p with <(y, y_t), (psi1, psi2)> = p . (c, d) for any datum."""
    return np.concatenate([state.vel, -state.weighted()[:state.n_modes]])


def pairing(state, data):
    """Duality pairing <y_t, psi1>_{L^2} - <y, psi2>_{H^1_0 x H^-1}."""
    return float(pairing_vector(state) @ data.vector())


def state_from_pairing(p):
    """Invert pairing_vector: recover the WaveState a pairing vector encodes."""
    p = np.asarray(p, dtype=float)
    n = p.size // 2
    npi = np.arange(1, n + 1) * np.pi
    return WaveState(pos=-p[n:] / npi, vel=p[:n].copy())


@dataclass
class ControlSignal:
    """A control u in L^2(0,T; L^2(omega)), localized by the region.

    modal-analytic: u(t) = B* phi(t) for the adjoint solution phi generated by
    `datum` (heat: length-N vector; wave: stacked (c, d) of AdjointWaveData).
    time-sampled: `values[m, j]` are eigen-coefficients of u(t_j) on a uniform
    grid with step `dt`; the interval count must be even (Simpson).
    """

    kind: str
    equation: str
    region: ControlRegion
    T: float
    potential: float = 0.0
    datum: np.ndarray | None = None
    values: np.ndarray | None = None
    dt: float | None = None

    def __post_init__(self):
        if self.kind not in (MODAL_ANALYTIC, TIME_SAMPLED):
            raise ValidationError(f"unknown control kind {self.kind!r}")
        if self.equation not in ("heat", "wave"):
            raise ValidationError(f"unknown equation {self.equation!r}")
        if self.T <= 0:
            raise ValidationError("control horizon must be positive")
        if self.kind == MODAL_ANALYTIC:
            if self.datum is None:
                raise ValidationError("modal-analytic control needs a datum")
            self.datum = _as_vector(self.datum, "datum")
            if self.equation == "wave" and self.datum.size % 2 != 0:
                raise ValidationError("wave datum must stack (c, d) blocks")
        else:
            if self.values is None or self.dt is None:
                raise ValidationError("time-sampled control needs values and dt")
            self.values = np.asarray(self.values, dtype=float)
            if self.values.ndim != 2:
                raise ValidationError("values must be (modes, time nodes)")
            m = self.values.shape[1] - 1
            if m < 2 or m % 2 != 0:
                raise ValidationError("time-sampled control needs an even interval count >= 2")
            if abs(m * self.dt - self.T) > 1e-9 * max(self.T, 1.0):
                raise ValidationError("grid does not cover [0, T]: m * dt != T")

    @property
    def n_modes(self):
        if self.kind == MODAL_ANALYTIC:
            return self.datum.size // 2 if self.equation == "wave" else self.datum.size
        return self.values.shape[0]

    def trace(self, t):
        """Eigen-coefficients of u(t); t must be a grid node for sampled controls."""
        if self.kind == MODAL_ANALYTIC:
            if self.equation == "heat":
                return heat_adjoint(self.datum, t, self.T)
            data = AdjointWaveData.from_vector(self.datum)
            return wave_adjoint(data, t, self.T, self.potential).c
        j = int(round(t / self.dt))
        if abs(j * self.dt - t) > 1e-9 * max(self.T, 1.0):
            raise ValidationError("time-sampled control can only be read at grid nodes")
        return self.values[:, j]

    def sample(self, m):
        """Render the control on a uniform grid with m intervals (m even)."""
        ts = np.linspace(0.0, self.T, m + 1)
        return ts, np.stack([self.trace(t) for t in ts], axis=1)

    def norm(self):
        """L^2(0,T; L^2(omega)) norm via the declared quadrature rule.

        Time-sampled controls use their own Simpson grid; analytic controls
        use panel-doubling Gauss-Legendre in time.  Space is exact through
        the overlap matrix.
        """
        B = overlap_matrix(self.region, self.n_modes)
        if self.kind == TIME_SAMPLED:
            w = simpson_weights(self.values.shape[1] - 1, self.dt)
            sq = np.einsum("mj,mn,nj->j", self.values, B, self.values)
            return float(np.sqrt(max(w @ sq, 0.0)))

        def integrand(ts):
            tr = np.stack([self.trace(t) for t in ts], axis=0)
            return np.einsum("jm,mn,jn->j", tr, B, tr)

        val = refine_integrate(integrand, 0.0, self.T, tol=1e-12, start_panels=4)
        return float(np.sqrt(max(val, 0.0)))


def _check_time(t, T):
    if not (0.0 <= t <= T + 1e-12 * max(T, 1.0)):
        raise ValidationError(f"time {t} outside [0, {T}]")


def heat_adjoint(phi_T, t, T):
    """Backward heat solution phi(t) = exp(-lambda (T - t)) phi_T, mode-wise."""
    phi_T = _as_vector(phi_T, "phi_T")
    _check_time(t, T)
    lam = eigenvalues(phi_T.size)
    return np.exp(-lam * (T - t)) * phi_T


def wave_trace_components(N, t, T, c=0.0):
    """Per-mode (value, weighted-velocity) trace factors of unit adjoint data.

    Returns (Cval, Cvel, Dval, Dvel): the backward solution with unit c-datum
    on mode n has psi_n(t) = Cval[n] and psi_t(t)/(n pi) = Cvel[n]; similarly
    for the unit weighted-velocity datum.
    """
    lam = eigenvalues(N)
    sigma = lam + c
    npi = np.arange(1, N + 1) * np.pi
    th = t - T
    Cval = np.empty(N)
    Cvel = np.empty(N)
    Dval = np.empty(N)
    Dvel = np.empty(N)
    for i in range(N):
        branch = trigprod.classify_sigma(sigma[i], lam[i])
        if branch == trigprod.OSCILLATORY:
            nu = np.sqrt(sigma[i])
            Cval[i] = np.cos(nu * th)
            Cvel[i] = -(nu / npi[i]) * np.sin(nu * th)
            Dval[i] = (npi[i] / nu) * np.sin(nu * th)
            Dvel[i] = np.cos(nu * th)
        elif branch == trigprod.ZERO:
            Cval[i] = 1.0
            Cvel[i] = 0.0
            Dval[i] = npi[i] * th
            Dvel[i] = 1.0
        else:
            mu = np.sqrt(-sigma[i])
            trigprod.check_exp_argument(mu, abs(th))
            Cval[i] = np.cosh(mu * th)
            Cvel[i] = (mu / npi[i]) * np.sinh(mu * th)
            Dval[i] = (npi[i] / mu) * np.sinh(mu * th)
            Dvel[i] = np.cosh(mu * th)
    return Cval, Cvel, Dval, Dvel


def wave_adjoint(data, t, T, c=0.0):
    """Backward wave solution at time t, as (value, weighted velocity) data.

    Exact mode-wise solve of psi_tt - psi_xx + c psi = 0 from the datum at T.
    For c = 0 the map on stacked (c, d) coordinates is a rotation, hence an
    isometry.
    """
    _check_time(t, T)
    Cval, Cvel, Dval, Dvel = wave_trace_components(data.n_modes, t, T, c)
    return AdjointWaveData(c=Cval * data.c + Dval * data.d,
                           d=Cvel * data.c + Dvel * data.d)


def max_rate(N, equation, c=0.0):
    """Largest modal rate governing the sampled-control accuracy bound."""
    lam = eigenvalues(N)
    sigma = lam + c if equation == "wave" else lam
    return float(np.sqrt(np.max(np.abs(sigma))))


def dt_bound(N, equation, c=0.0):
    """Documented accuracy bound for time-sampled control grids."""
    return min(_DT_CAP, 1.0 / (_DT_RATE_FACTOR * max_rate(N, equation, c)))


def _check_dt(u, N, equation, c):
    bound = dt_bound(N, equation, c)
    if u.dt > bound * (1.0 + 1e-9):
        raise DtTooCoarseError(
            f"dt = {u.dt:.3g} exceeds the accuracy bound {bound:.3g} "
            f"for {equation} with N = {N}")


def _heat_kernel_matrix(N, T):
    # K_mn = int_0^T exp(-(lam_m + lam_n) theta) dtheta
    lam = eigenvalues(N)
    L = lam[:, None] + lam[None, :]
    return (1.0 - np.exp(-L * T)) / L


def _heat_duhamel_kernel(N, T, ts):
    """Per-mode Duhamel kernel exp(-lambda (T - t)) at the given times."""
    lam = eigenvalues(N)
    return np.exp(-np.outer(lam, T - np.asarray(ts, dtype=float)))


def heat_forward(y0, u, T):
    """Mild solution of the controlled heat system at time T.

    y_n(T) = exp(-lambda_n T) y0_n + int_0^T exp(-lambda_n (T-s)) f_n(s) ds
    with f = B u(s) the modal forcing of the localized control.  Analytic
    controls integrate in closed form; sampled controls use Simpson.
    """
    if T <= 0:
        raise ValidationError("horizon must be positive")
    lam = eigenvalues(y0.n_modes)
    out = np.exp(-lam * T) * y0.coeffs
    if u is None:
        return HeatState(out)
    if u.equation != "heat":
        raise ValidationError("control was built for the wave system")
    N = y0.n_modes
    if u.n_modes != N:
        raise ValidationError("truncation orders of state and control differ")
    B = overlap_matrix(u.region, N)
    if u.kind == MODAL_ANALYTIC:
        out = out + (B * _heat_kernel_matrix(N, T)) @ u.datum
        return HeatState(out)
    _check_dt(u, N, "heat", 0.0)
    m = u.values.shape[1] - 1
    w = simpson_weights(m, u.dt)
    ts = np.linspace(0.0, T, m + 1)
    F = B @ u.values
    out = out + (_heat_duhamel_kernel(N, T, ts) * F) @ w
    return HeatState(out)


def _wave_free(y0, T, c):
    N = y0.n_modes
    Cval, Cvel, Dval, Dvel = wave_trace_components(N, 0.0, T, c)
    # forward free flow over [0, T] equals the backward flow read at t = 0
    # with the roles of datum and value reversed; solve directly instead.
    lam = eigenvalues(N)
    sigma = lam + c
    pos = np.empty(N)
    vel = np.empty(N)
    for i in range(N):
        branch = trigprod.classify_sigma(sigma[i], lam[i])
        if branch == trigprod.OSCILLATORY:
            nu = np.sqrt(sigma[i])
            pos[i] = y0.pos[i] * np.cos(nu * T) + y0.vel[i] * np.sin(nu * T) / nu
            vel[i] = -y0.pos[i] * nu * np.sin(nu * T) + y0.vel[i] * np.cos(nu * T)
        elif branch == trigprod.ZERO:
            pos[i] = y0.pos[i] + y0.vel[i] * T
            vel[i] = y0.vel[i]
        else:
            mu = np.sqrt(-sigma[i])
            trigprod.check_exp_argument(mu, T)
            pos[i] = y0.pos[i] * np.cosh(mu * T) + y0.vel[i] * np.sinh(mu * T) / mu
            vel[i] = y0.pos[i] * mu * np.sinh(mu * T) + y0.vel[i] * np.cosh(mu * T)
    return WaveState(pos, vel)


def _wave_duhamel_kernels(N, c, theta):
    """Position and velocity Duhamel kernels sin(nu theta)/nu, cos(nu theta).

    theta is an array of backward times T - s; returns two (N, len(theta))
    arrays covering the oscillatory, zero and hyperbolic branches.
    """
    lam = eigenvalues(N)
    sigma = lam + c
    theta = np.asarray(theta, dtype=float)
    kp = np.empty((N, theta.size))
    kv = np.empty((N, theta.size))
    for i in range(N):
        branch = trigprod.classify_sigma(sigma[i], lam[i])
        if branch == trigprod.OSCILLATORY:
            nu = np.sqrt(sigma[i])
            kp[i] = np.sin(nu * theta) / nu
            kv[i] = np.cos(nu * theta)
        elif branch == trigprod.ZERO:
            kp[i] = theta
            kv[i] = 1.0
        else:
            mu = np.sqrt(-sigma[i])
            trigprod.check_exp_argument(mu, float(np.max(theta)))
            kp[i] = np.sinh(mu * theta) / mu
            kv[i] = np.cosh(mu * theta)
    return kp, kv


def _wave_analytic_increment(N, T, c, region, datum):
    """Closed-form Duhamel endpoint increment for u = B* psi_datum.

    Product-to-sum antiderivatives of kernel x trace pairs, with resonant
    branches; the bulk all-oscillatory case is vectorized.
    """
    B = overlap_matrix(region, N)
    lam = eigenvalues(N)
    sigma = lam + c
    vc, vd = datum[:N], datum[N:]
    branches = [trigprod.classify_sigma(s, l) for s, l in zip(sigma, lam)]
    if all(b == trigprod.OSCILLATORY for b in branches):
        nu = np.sqrt(sigma)
        wgt = np.arange(1, N + 1) * np.pi / nu
        CC = trigprod.osc_cc(nu[:, None], nu[None, :], T)
        SS = trigprod.osc_ss(nu[:, None], nu[None, :], T)
        CS = trigprod.osc_cs(nu[:, None], nu[None, :], T)
        SC = trigprod.osc_cs(nu[None, :], nu[:, None], T)
        dvel = (B * CC) @ vc - (B * CS * wgt[None, :]) @ vd
        dpos = ((B * SC) @ vc - (B * SS * wgt[None, :]) @ vd) / nu
        return dpos, dvel
    # general scalar path: explicit shape pairs per (n, m)
    dpos = np.zeros(N)
    dvel = np.zeros(N)
    traces = [trigprod.mode_traces(m + 1, sigma[m]) for m in range(N)]
    for i in range(N):
        bi = branches[i]
        if bi == trigprod.OSCILLATORY:
            nu = np.sqrt(sigma[i])
            kers = (("sin", nu, 1.0 / nu), ("cos", nu, 1.0))
        elif bi == trigprod.ZERO:
            kers = (("theta", 0.0, 1.0), ("one", 0.0, 1.0))
        else:
            mu = np.sqrt(-sigma[i])
            kers = (("sinh", mu, 1.0 / mu), ("cosh", mu, 1.0))
        for m in range(N):
            if B[i, m] == 0.0:
                continue
            (sc, rc, ac), (sd, rd, ad) = traces[m]
            coef_c, coef_d = vc[m], vd[m]
            for (kshape, krate, kamp), out in zip(kers, (dpos, dvel)):
                val = 0.0
                if coef_c != 0.0:
                    val += coef_c * ac * trigprod.product_integral(kshape, krate, sc, rc, T)
                if coef_d != 0.0:
                    val += coef_d * ad * trigprod.product_integral(kshape, krate, sd, rd, T)
                out[i] += B[i, m] * kamp * val
    return dpos, dvel


def wave_forward(y0, u, T, c=0.0):
    """Mild solution of the controlled wave system at time T.

    Free flow plus the per-mode Duhamel integral with the oscillator kernel.
    Analytic (trig-in-time) controls integrate in closed form; sampled
    controls use Simpson on their grid.
    """
    if T <= 0:
        raise ValidationError("horizon must be positive")
    out = _wave_free(y0, T, c)
    if u is None:
        return out
    if u.equation != "wave":
        raise ValidationError("control was built for the heat system")
    N = y0.n_modes
    if u.n_modes != N:
        raise ValidationError("truncation orders of state and control differ")
    if u.kind == MODAL_ANALYTIC:
        if u.potential != c:
            raise ValidationError("control potential differs from system potential")
        dpos, dvel = _wave_analytic_increment(N, T, c, u.region, u.datum)
        return WaveState(out.pos + dpos, out.vel + dvel)
    _check_dt(u, N, "wave", c)
    m = u.values.shape[1] - 1
    w = simpson_weights(m, u.dt)
    ts = np.linspace(0.0, T, m + 1)
    B = overlap_matrix(u.region, N)
    F = B @ u.values
    kp, kv = _wave_duhamel_kernels(N, c, T - ts)
    return WaveState(out.pos + (kp * F) @ w, out.vel + (kv * F) @ w)
