"""Control synthesis: HUM, regularized HUM, and endpoint-constrained LQ.

All synthesized controls are certified by independent forward simulation
through the propagators module; a solution object always carries its
certified endpoint error.

HUM (wave): solve G phi = target deficit in the duality pairing coordinates
by conjugate gradient and play back u = B* psi_phi.  The control cost
squared equals phi^T G phi exactly (integration by parts), which is asserted
in tests by quadrature.

Regularized HUM (heat): solve (G + eps I) phi = deficit.  The necessity of
eps > 0 is the computational face of the heat system's lack of finite
codimensionality: as eps decreases the endpoint error decreases while the
control cost grows without bound for rough targets.

LQ: minimize J = 1/2 int (alpha y^2 + beta u^2 restricted to omega) over
time-sampled modal controls subject to the endpoint constraint.  The wave
problem enforces equality; the heat problem relaxes to an endpoint ball
|y(T) - target| <= r via the regularized normal equations, since exact
equality is ill-posed.  Both reduce to the saddle-point KKT system through
the Schur complement G_hat = A H^-1 A^T in the multiplier.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from .codim import spectrum
from .errors import (CertificationError, CgStagnationError,
                     InfeasibleRelaxationError, KktSingularError,
                     NumericalError, ValidationError)
from .gramian import assemble_heat_gramian, assemble_wave_gramian
from .propagators import (MODAL_ANALYTIC, TIME_SAMPLED, AdjointWaveData,
                          ControlSignal, HeatState, WaveState,
                          _heat_duhamel_kernel, _wave_duhamel_kernels,
                          dt_bound, heat_forward, pairing_vector,
                          state_from_pairing, wave_forward)
from .quadrature import simpson_weights
from .serialize import SCHEMA_VERSION
from .spectral import eigenvalues, overlap_matrix

_DEFAULT_CG_TOL = 1e-10
_DEFAULT_STEPS_PER_UNIT_TIME = 200
_DEFAULT_RADIUS_FACTOR = 1e-3
_TINY = 1e-300


def conjugate_gradient(A, b, tol=_DEFAULT_CG_TOL, maxiter=None, callback=None):
    """Plain CG for a dense SPD matrix; returns (x, iterations, rel residual).

    Stagnation (no meaningful residual decrease while above tol) raises
    CgStagnationError carrying the operator's eigenvalues, so callers can
    attach the defect structure to their report.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    if maxiter is None:
        maxiter = max(10 * n, 200)
    x = np.zeros(n)
    r = b.copy()
    p = r.copy()
    rr = r @ r
    best = np.sqrt(rr) / bnorm
    window_best = best
    for k in range(1, maxiter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise CgStagnationError(
                "CG breakdown: operator is not positive definite on the Krylov space",
                spectrum=np.linalg.eigvalsh(A))
        alpha = rr / pAp
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        relres = np.sqrt(rr_new) / bnorm
        if callback is not None:
            callback(x.copy(), relres)
        if relres <= tol:
            return x, k, float(relres)
        best = min(best, relres)
        if k % 50 == 0:
            if best > 1e-3 and best > 0.999 * window_best:
                raise CgStagnationError(
                    f"CG stagnated at relative residual {best:.3e} after {k} iterations",
                    spectrum=np.linalg.eigvalsh(A))
            window_best = best
        beta = rr_new / rr
        rr = rr_new
        p = r + beta * p
    raise CgStagnationError(
        f"CG did not reach tol {tol:g} within {maxiter} iterations "
        f"(best relative residual {best:.3e})",
        spectrum=np.linalg.eigvalsh(A))


@dataclass
class EndpointReport:
    """Certified endpoint of a forward simulation against a target."""

    endpoint: object
    abs_error: float
    rel_error: float

    def to_json_dict(self):
        return {"abs_error": self.abs_error, "rel_error": self.rel_error}


def _state_error(kind, endpoint, target):
    if kind == "heat":
        abs_err = float(np.linalg.norm(endpoint.coeffs - target.coeffs))
        scale = target.norm()
    else:
        diff = WaveState(endpoint.pos - target.pos, endpoint.vel - target.vel)
        abs_err = diff.energy_norm()
        scale = target.energy_norm()
    rel = abs_err / scale if scale > 0 else abs_err
    return abs_err, rel


def verify_endpoint(control, kind, y0, target, T, region, c, N):
    """Independent endpoint certification by forward simulation.

    Returns absolute and relative errors in the natural state norm (L^2 for
    heat, energy norm for the wave system).
    """
    if control is not None:
        if control.equation != kind:
            raise ValidationError("control equation does not match kind")
        if control.n_modes != N:
            raise ValidationError("control truncation does not match N")
        if (control.region.a, control.region.b) != (region.a, region.b):
            raise ValidationError("control region does not match region")
    if kind == "heat":
        endpoint = heat_forward(y0, control, T)
    elif kind == "wave":
        endpoint = wave_forward(y0, control, T, c)
    else:
        raise ValidationError(f"unknown equation kind {kind!r}")
    abs_err, rel_err = _state_error(kind, endpoint, target)
    return EndpointReport(endpoint=endpoint, abs_error=abs_err, rel_error=rel_err)


def _sample_control(control, m):
    ts, vals = control.sample(m)
    return vals


def _control_json(control, sample_intervals=None):
    """Serialized control: modal rows, time columns, plus the analytic datum."""
    if control.kind == TIME_SAMPLED:
        dt = control.dt
        values = control.values
    else:
        m = sample_intervals or 2 * int(np.ceil(_DEFAULT_STEPS_PER_UNIT_TIME * control.T / 2))
        m = max(int(m), 2)
        dt = control.T / m
        values = _sample_control(control, m)
    doc = {
        "kind": control.kind,
        "equation": control.equation,
        "region": [control.region.a, control.region.b],
        "T": control.T,
        "potential": control.potential,
        "dt": dt,
        "values": [[float(x) for x in row] for row in values],
    }
    if control.datum is not None:
        doc["datum"] = [float(x) for x in control.datum]
    return doc


def control_profile_rows(control, m=None):
    """(t, |u(., t)|_{L^2(omega)}) rows for CSV export."""
    if control.kind == TIME_SAMPLED:
        ts = np.linspace(0.0, control.T, control.values.shape[1])
        vals = control.values
    else:
        m = m or 200
        ts = np.linspace(0.0, control.T, m + 1)
        vals = _sample_control(control, m)
    B = overlap_matrix(control.region, control.n_modes)
    mags = np.sqrt(np.maximum(np.einsum("mj,mn,nj->j", vals, B, vals), 0.0))
    return list(zip(ts.tolist(), mags.tolist()))


@dataclass
class HumSolution:
    """HUM output: adjoint datum, playback control, certification record."""

    adjoint_datum: np.ndarray
    control: ControlSignal
    predicted_endpoint: object
    cg_iters: int
    residual: float
    endpoint_abs_error: float
    endpoint_rel_error: float
    control_norm: float
    eps: float = 0.0

    def to_json_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "adjoint_datum": [float(x) for x in self.adjoint_datum],
            "cg_iters": self.cg_iters,
            "residual": self.residual,
            "endpoint_abs_error": self.endpoint_abs_error,
            "endpoint_rel_error": self.endpoint_rel_error,
            "control_norm": self.control_norm,
            "eps": self.eps,
            "control": _control_json(self.control),
        }


def hum_wave(target, y0, T, region, c, N, cg_tol=_DEFAULT_CG_TOL,
             cert_tol=1e-5):
    """Minimal-norm wave control steering y0 to target at time T.

    Solves G phi = (pairing of target) - (pairing of the free evolution) by
    CG in the weighted coordinates, plays back u = B* psi_phi, and certifies
    the endpoint by closed-form forward simulation.  CG stagnation reports
    the Gramian defect spectrum; a certified endpoint error above cert_tol
    raises CertificationError.
    """
    G = assemble_wave_gramian(N, T, region, c)
    free = wave_forward(y0, None, T, c)
    rhs = pairing_vector(target) - pairing_vector(free)
    try:
        phi, iters, relres = conjugate_gradient(G.entries, rhs, tol=cg_tol)
    except CgStagnationError as exc:
        exc.spectrum = spectrum(G, max(1e-8 * float(np.max(exc.spectrum)), _TINY))
        raise
    control = ControlSignal(kind=MODAL_ANALYTIC, equation="wave", region=region,
                            T=T, potential=c, datum=phi)
    predicted = state_from_pairing(G.entries @ phi + pairing_vector(free))
    report = verify_endpoint(control, "wave", y0, target, T, region, c, N)
    if relres <= cg_tol and report.rel_error > cert_tol:
        raise CertificationError(
            f"certified endpoint error {report.rel_error:.3e} exceeds {cert_tol:g} "
            f"although CG converged")
    return HumSolution(adjoint_datum=phi, control=control,
                       predicted_endpoint=predicted, cg_iters=iters,
                       residual=relres, endpoint_abs_error=report.abs_error,
                       endpoint_rel_error=report.rel_error,
                       control_norm=control.norm())


def hum_heat_regularized(target, y0, T, region, N, eps):
    """Tikhonov-regularized HUM for the heat system: (G + eps I) phi = deficit.

    Endpoint error decreases and control cost grows as eps decreases; exact
    inversion (eps = 0) is ill-posed because the truncated Gramian spectrum
    collapses with N.
    """
    if eps <= 0:
        raise ValidationError("regularization eps must be positive")
    G = assemble_heat_gramian(N, T, region)
    free = heat_forward(y0, None, T)
    rhs = target.coeffs - free.coeffs
    M = G.entries + eps * np.eye(N)
    try:
        factor = cho_factor(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"regularized normal equations not SPD: {exc}") from exc
    phi = cho_solve(factor, rhs)
    rhs_norm = np.linalg.norm(rhs)
    relres = float(np.linalg.norm(M @ phi - rhs) / rhs_norm) if rhs_norm > 0 else 0.0
    control = ControlSignal(kind=MODAL_ANALYTIC, equation="heat", region=region,
                            T=T, datum=phi)
    predicted = HeatState(free.coeffs + G.entries @ phi)
    report = verify_endpoint(control, "heat", y0, target, T, region, 0.0, N)
    return HumSolution(adjoint_datum=phi, control=control,
                       predicted_endpoint=predicted, cg_iters=0,
                       residual=relres, endpoint_abs_error=report.abs_error,
                       endpoint_rel_error=report.rel_error,
                       control_norm=control.norm(), eps=eps)


# ---------------------------------------------------------------------------
# Discrete LQ problem
# ---------------------------------------------------------------------------

class _LqOperators:
    """Operators of the discrete LQ problem on modal control samples W (N, M+1).

    Endpoint map A uses exact Duhamel kernels with Simpson weights, matching
    the time-sampled forward simulation semantics exactly.  State samples for
    the running cost use the trapezoid-in-time Duhamel prefix, evaluated as a
    causal convolution (FFT) with the exact per-mode kernel.
    """

    def __init__(self, kind, N, T, region, c, m, alpha, beta):
        self.kind = kind
        self.N = N
        self.T = T
        self.c = c
        self.alpha = alpha
        self.beta = beta
        self.m = m
        self.dt = T / m
        self.ts = np.linspace(0.0, T, m + 1)
        self.sig = simpson_weights(m, self.dt)
        self.B = overlap_matrix(region, N)
        # Mode combinations vanishing on omega are invisible to cost, forcing
        # and constraint alike; work on the numerical range of B throughout.
        d, V = eigh(self.B)
        keep = d > 1e-12 * max(d[-1], _TINY)
        self._B_vecs = V[:, keep]
        self._B_eigs = d[keep]
        npi = np.arange(1, N + 1) * np.pi
        if kind == "heat":
            # endpoint kernel e^{-lam (T - t_j)} and state kernel e^{-lam t}
            self.kend = _heat_duhamel_kernel(N, T, self.ts)
            self.kstate = _heat_duhamel_kernel(N, T, (T - self.ts))
            self.n_c = N
        else:
            kp, kv = _wave_duhamel_kernels(N, c, T - self.ts)
            self.kend_vel = kv
            self.kend_pw = -npi[:, None] * kp
            kp0, _ = _wave_duhamel_kernels(N, c, self.ts)
            self.kstate = kp0
            self.n_c = 2 * N
        self._fft_len = 1
        while self._fft_len < 2 * (m + 1):
            self._fft_len *= 2
        self._kstate_hat = np.fft.rfft(self.kstate, self._fft_len, axis=1)

    # -- endpoint map ------------------------------------------------------

    def A_apply(self, W):
        F = self.B @ W
        if self.kind == "heat":
            return (self.kend * F) @ self.sig
        top = (self.kend_vel * F) @ self.sig
        bot = (self.kend_pw * F) @ self.sig
        return np.concatenate([top, bot])

    def AT_apply(self, mu):
        if self.kind == "heat":
            V = self.kend * mu[:, None]
        else:
            V = (self.kend_vel * mu[:self.N, None]
                 + self.kend_pw * mu[self.N:, None])
        return self.B @ (V * self.sig[None, :])

    # -- state map (positions at all nodes, zero initial state) -------------

    def _causal_conv(self, F):
        Fh = np.fft.rfft(F, self._fft_len, axis=1)
        out = np.fft.irfft(self._kstate_hat * Fh, self._fft_len, axis=1)
        return out[:, :self.m + 1]

    def S_apply(self, F):
        """Trapezoid-prefix Duhamel positions from modal forcing samples F."""
        conv = self._causal_conv(F)
        Y = self.dt * conv
        Y -= 0.5 * self.dt * (self.kstate * F[:, :1] + self.kstate[:, :1] * F)
        return Y

    def ST_apply(self, Gres):
        rev = self._causal_conv(Gres[:, ::-1])[:, ::-1]
        out = self.dt * rev
        out -= 0.5 * self.dt * self.kstate[:, :1] * Gres
        out[:, 0] -= 0.5 * self.dt * np.sum(self.kstate * Gres, axis=1)
        return out

    # -- quadratic pieces ----------------------------------------------------

    def R_apply(self, W):
        return self.beta * (self.B @ W) * self.sig[None, :]

    def _B_pinv(self, V):
        return self._B_vecs @ ((self._B_vecs.T @ V) / self._B_eigs[:, None])

    def R_solve(self, V):
        """Pseudo-inverse of R on the range of B (exact for rhs = B x)."""
        return self._B_pinv(V) / (self.beta * self.sig[None, :])

    def H_apply(self, W):
        out = self.R_apply(W)
        if self.alpha != 0.0:
            F = self.B @ W
            Y = self.S_apply(F)
            out = out + self.alpha * (self.B @ self.ST_apply(Y * self.sig[None, :]))
        return out

    def H_solve(self, V, tol=1e-12, maxiter=400):
        """Apply H^-1 on the range of B; exact for alpha = 0, PCG otherwise.

        Convergence is measured in the preconditioned residual norm, which
        ignores components outside the numerical range of B: those are
        invisible to cost, forcing and constraint alike.
        """
        if self.alpha == 0.0:
            return self.R_solve(V)
        x = np.zeros_like(V)
        r = V.copy()
        z = self.R_solve(r)
        p = z.copy()
        rz = float(np.vdot(r, z))
        if rz <= 0.0:
            return x
        rz0 = rz
        for _ in range(maxiter):
            Hp = self.H_apply(p)
            alpha = rz / float(np.vdot(p, Hp))
            x += alpha * p
            r -= alpha * Hp
            z = self.R_solve(r)
            rz_new = float(np.vdot(r, z))
            if rz_new <= tol * tol * rz0:
                return x
            p = z + (rz_new / rz) * p
            rz = rz_new
        raise NumericalError("inner PCG for the LQ Hessian did not converge")

    def free_positions(self, y0):
        """Exact free-evolution position samples at the grid nodes."""
        if self.kind == "heat":
            return self.kstate * y0.coeffs[:, None]
        lam = eigenvalues(self.N)
        sigma = lam + self.c
        pos = np.empty((self.N, self.m + 1))
        for i in range(self.N):
            s = sigma[i]
            if s > 0:
                nu = np.sqrt(s)
                pos[i] = y0.pos[i] * np.cos(nu * self.ts) + y0.vel[i] * np.sin(nu * self.ts) / nu
            elif s == 0:
                pos[i] = y0.pos[i] + y0.vel[i] * self.ts
            else:
                mu = np.sqrt(-s)
                pos[i] = y0.pos[i] * np.cosh(mu * self.ts) + y0.vel[i] * np.sinh(mu * self.ts) / mu
        return pos

    def cost(self, W, y_free_pos):
        """J = 1/2 sum sig_j (alpha |y_j|^2 + beta w_j^T B w_j)."""
        ctrl = self.beta * float(np.einsum("j,mj,mn,nj->", self.sig, W, self.B, W))
        state = 0.0
        if self.alpha != 0.0:
            Y = y_free_pos + self.S_apply(self.B @ W)
            state = self.alpha * float(self.sig @ np.sum(Y * Y, axis=0))
        return 0.5 * (ctrl + state)


@dataclass
class LqSolution:
    """Endpoint-constrained LQ output with KKT diagnostics."""

    control: ControlSignal
    multiplier: np.ndarray
    cost: float
    kkt_residual: float
    constraint_residual: float
    gamma: float
    radius: float
    endpoint_abs_error: float
    endpoint_rel_error: float

    def to_json_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "multiplier": [float(x) for x in self.multiplier],
            "multiplier_norm": float(np.linalg.norm(self.multiplier)),
            "cost": self.cost,
            "kkt_residual": self.kkt_residual,
            "constraint_residual": self.constraint_residual,
            "gamma": self.gamma,
            "radius": self.radius,
            "endpoint_abs_error": self.endpoint_abs_error,
            "endpoint_rel_error": self.endpoint_rel_error,
            "control": _control_json(self.control),
        }


def default_time_grid(kind, N, T, c=0.0):
    """Even interval count: >= 200 per unit time and within the dt bound."""
    m = max(int(np.ceil(_DEFAULT_STEPS_PER_UNIT_TIME * T)),
            int(np.ceil(T / dt_bound(N, kind, c))))
    return m + (m % 2)


def lq_endpoint(kind, alpha, beta, target, y0, T, region, c, N,
                time_grid=None, radius=None):
    """Solve the endpoint-constrained LQ problem over time-sampled controls.

    kind = 'wave': exact endpoint equality through the KKT saddle system.
    kind = 'heat': endpoint ball |y(T) - target| <= radius (default
    1e-3 |target|), via the regularized normal equations; the reported
    multiplier is the equality-form multiplier 2 gamma (A x - b).
    """
    if beta <= 0:
        raise ValidationError("control weight beta must be positive")
    if alpha < 0:
        raise ValidationError("state weight alpha must be nonnegative")
    if kind not in ("heat", "wave"):
        raise ValidationError(f"unknown equation kind {kind!r}")
    if T <= 0:
        raise ValidationError("horizon must be positive")
    m = int(time_grid) if time_grid is not None else default_time_grid(kind, N, T, c)
    if m < 2 or m % 2 != 0:
        raise ValidationError("time grid needs an even interval count >= 2")
    if T / m > dt_bound(N, kind, c) * (1 + 1e-9):
        raise ValidationError(
            f"time grid too coarse: dt = {T/m:.3g} exceeds bound "
            f"{dt_bound(N, kind, c):.3g}")

    ops = _LqOperators(kind, N, T, region, c, m, alpha, beta)

    if kind == "heat":
        free = heat_forward(y0, None, T)
        b = target.coeffs - free.coeffs
        target_norm = target.norm()
    else:
        free = wave_forward(y0, None, T, c)
        b = pairing_vector(target) - pairing_vector(free)
        target_norm = target.energy_norm()

    y_free_pos = ops.free_positions(y0)
    if alpha != 0.0:
        q = alpha * (ops.B @ ops.ST_apply(y_free_pos * ops.sig[None, :]))
    else:
        q = np.zeros((N, m + 1))

    # Schur complement in the multiplier: G_hat = A H^-1 A^T
    n_c = ops.n_c
    Ghat = np.empty((n_c, n_c))
    for i in range(n_c):
        e = np.zeros(n_c)
        e[i] = 1.0
        Ghat[:, i] = ops.A_apply(ops.H_solve(ops.AT_apply(e)))
    Ghat = 0.5 * (Ghat + Ghat.T)
    w_vec = ops.A_apply(ops.H_solve(q)) if alpha != 0.0 else np.zeros(n_c)

    if kind == "wave":
        try:
            factor = cho_factor(Ghat)
        except np.linalg.LinAlgError as exc:
            raise KktSingularError(
                "equality KKT system is singular; the discrete Gramian is defective",
                spectrum=np.linalg.eigvalsh(Ghat)) from exc
        mu = cho_solve(factor, -(b + w_vec))
        gamma = 0.0
        r = 0.0
    else:
        if radius is None:
            radius = _DEFAULT_RADIUS_FACTOR * max(target_norm, _TINY)
        if radius <= 0:
            raise ValidationError("relaxation radius must be positive")
        r = float(radius)
        d_eigs, U = eigh(Ghat)
        z = U.T @ (b + w_vec)
        rho0 = float(np.linalg.norm(z))
        if rho0 <= r:
            gamma = 0.0
            mu = np.zeros(n_c)
        else:
            floor = float(np.linalg.norm(z[d_eigs <= 1e-14 * max(d_eigs[-1], _TINY)]))
            if floor >= r:
                raise InfeasibleRelaxationError(
                    f"relaxed endpoint ball of radius {r:.3e} is unreachable: "
                    f"residual floor {floor:.3e}")

            def rho(g):
                return float(np.linalg.norm(z / (1.0 + 2.0 * g * d_eigs)))

            lo, hi = 0.0, 1.0
            while rho(hi) > r:
                hi *= 4.0
                if hi > 1e40:
                    raise InfeasibleRelaxationError(
                        "no multiplier below 1e40 meets the relaxation radius")
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if rho(mid) > r:
                    lo = mid
                else:
                    hi = mid
            gamma = 0.5 * (lo + hi)
            mu = -2.0 * gamma * (U @ (z / (1.0 + 2.0 * gamma * d_eigs)))

    W = -ops.H_solve(q + ops.AT_apply(mu))

    endpoint_resid = ops.A_apply(W) - b
    stat = ops.H_apply(W) + q + ops.AT_apply(mu)
    stat_scale = max(1.0, float(np.linalg.norm(q + ops.AT_apply(mu))))
    kkt_res = float(np.linalg.norm(stat)) / stat_scale

    control = ControlSignal(kind=TIME_SAMPLED, equation=kind, region=region,
                            T=T, potential=c, values=W, dt=ops.dt)
    cost = ops.cost(W, y_free_pos if alpha != 0.0 else np.zeros_like(y_free_pos))
    report = verify_endpoint(control, kind, y0, target, T, region, c, N)
    return LqSolution(control=control, multiplier=mu, cost=cost,
                      kkt_residual=kkt_res,
                      constraint_residual=float(np.linalg.norm(endpoint_resid)),
                      gamma=gamma, radius=r,
                      endpoint_abs_error=report.abs_error,
                      endpoint_rel_error=report.rel_error)


def lq_cost(control, kind, alpha, beta, y0, T, region, c, N):
    """Recompute the LQ objective from a control signal alone.

    Rebuilds the discrete quadrature machinery from scratch; used to check
    the cost bookkeeping of lq_endpoint against its returned control.
    """
    if control.kind != TIME_SAMPLED:
        raise ValidationError("cost recomputation needs a time-sampled control")
    m = control.values.shape[1] - 1
    ops = _LqOperators(kind, N, T, region, c, m, alpha, beta)
    y_free = ops.free_positions(y0) if alpha != 0.0 else np.zeros((N, m + 1))
    return ops.cost(control.values, y_free)
