"""Closed-form time integrals of products of modal trace functions.

Each wave mode contributes trace functions drawn from {cos, sin, cosh, sinh,
1, theta} of the backward time theta = T - t, depending on the sign of
sigma = lambda + c.  Every Gramian entry and every modal-analytic Duhamel
integral is an amplitude-weighted integral of a product of two such shapes
over [0, T]; this module owns those antiderivatives.

Resonant branches (equal rates) are separate formulas, not limits of the
generic branch, because the generic branch carries a (rate difference)
denominator.
"""

import numpy as np

from .errors import HyperbolicOverflowError

# Rates closer than this trigger the resonant formula.
RESONANCE_TOL = 1e-9

# Hyperbolic branches refuse exp arguments beyond this.
EXP_ARG_LIMIT = 700.0

OSCILLATORY = "osc"
ZERO = "zero"
HYPERBOLIC = "hyp"

_ZERO_SIGMA_RTOL = 1e-10


def classify_sigma(sigma, lam):
    """Branch for a shifted mode: oscillatory, zero, or hyperbolic."""
    if abs(sigma) <= _ZERO_SIGMA_RTOL * max(lam, 1.0):
        return ZERO
    return OSCILLATORY if sigma > 0 else HYPERBOLIC


def check_exp_argument(rate, T):
    if rate * T > EXP_ARG_LIMIT:
        raise HyperbolicOverflowError(
            f"hyperbolic branch needs exp({rate * T:.3g}) > exp({EXP_ARG_LIMIT:g})")


def _guard(x):
    # avoid 0/0 warnings where a mask already excludes the entry
    return np.where(x == 0.0, 1.0, x)


def osc_cc(nu_i, nu_j, T):
    """int_0^T cos(nu_i th) cos(nu_j th) dth, elementwise on broadcast arrays."""
    nu_i, nu_j = np.broadcast_arrays(np.asarray(nu_i, float), np.asarray(nu_j, float))
    d = nu_i - nu_j
    s = nu_i + nu_j
    res = np.abs(d) < RESONANCE_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        gen = 0.5 * (np.sin(d * T) / _guard(d) + np.sin(s * T) / _guard(s))
        nu = 0.5 * s
        same = 0.5 * (T + np.sin(2 * nu * T) / _guard(2 * nu))
    return np.where(res, same, gen)


def osc_ss(nu_i, nu_j, T):
    """int_0^T sin(nu_i th) sin(nu_j th) dth."""
    nu_i, nu_j = np.broadcast_arrays(np.asarray(nu_i, float), np.asarray(nu_j, float))
    d = nu_i - nu_j
    s = nu_i + nu_j
    res = np.abs(d) < RESONANCE_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        gen = 0.5 * (np.sin(d * T) / _guard(d) - np.sin(s * T) / _guard(s))
        nu = 0.5 * s
        same = 0.5 * (T - np.sin(2 * nu * T) / _guard(2 * nu))
    return np.where(res, same, gen)


def osc_cs(nu_i, nu_j, T):
    """int_0^T cos(nu_i th) sin(nu_j th) dth (the sine carries nu_j)."""
    nu_i, nu_j = np.broadcast_arrays(np.asarray(nu_i, float), np.asarray(nu_j, float))
    d = nu_j - nu_i
    s = nu_j + nu_i
    res = np.abs(d) < RESONANCE_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        gen = 0.5 * ((1 - np.cos(s * T)) / _guard(s) + (1 - np.cos(d * T)) / _guard(d))
        same = 0.5 * (1 - np.cos(s * T)) / _guard(s)
    return np.where(res, same, gen)


def _pair_key(s1, s2):
    return (s1, s2)


def product_integral(shape1, rate1, shape2, rate2, T):
    """int_0^T f1(theta) f2(theta) dtheta for unit-amplitude shapes.

    Shapes: 'cos', 'sin', 'cosh', 'sinh' (rate > 0) and 'one', 'theta'
    (rate ignored).  Scalar arguments, scalar result.
    """
    order = {"cos": 0, "sin": 1, "cosh": 2, "sinh": 3, "one": 4, "theta": 5}
    if order[shape1] > order[shape2]:
        shape1, shape2, rate1, rate2 = shape2, shape1, rate2, rate1
    a, b = rate1, rate2
    key = _pair_key(shape1, shape2)

    if shape1 in ("cosh", "sinh"):
        check_exp_argument(a, T)
    if shape2 in ("cosh", "sinh"):
        check_exp_argument(b, T)

    if key == ("cos", "cos"):
        return float(osc_cc(a, b, T))
    if key == ("cos", "sin"):
        return float(osc_cs(a, b, T))
    if key == ("sin", "sin"):
        return float(osc_ss(a, b, T))

    if key == ("cosh", "cosh"):
        s, d = a + b, a - b
        if abs(d) < RESONANCE_TOL:
            return 0.5 * (np.sinh(s * T) / s + T)
        return 0.5 * (np.sinh(s * T) / s + np.sinh(d * T) / d)
    if key == ("sinh", "sinh"):
        s, d = a + b, a - b
        if abs(d) < RESONANCE_TOL:
            return 0.5 * (np.sinh(s * T) / s - T)
        return 0.5 * (np.sinh(s * T) / s - np.sinh(d * T) / d)
    if key == ("cosh", "sinh"):
        # sinh carries rate b
        s, d = b + a, b - a
        if abs(d) < RESONANCE_TOL:
            return 0.5 * (np.cosh(s * T) - 1.0) / s
        return 0.5 * ((np.cosh(s * T) - 1.0) / s + (np.cosh(d * T) - 1.0) / d)

    if key == ("cos", "cosh"):
        return (b * np.cos(a * T) * np.sinh(b * T) + a * np.sin(a * T) * np.cosh(b * T)) / (a * a + b * b)
    if key == ("cos", "sinh"):
        return (b * np.cos(a * T) * np.cosh(b * T) + a * np.sin(a * T) * np.sinh(b * T) - b) / (a * a + b * b)
    if key == ("sin", "cosh"):
        return (b * np.sin(a * T) * np.sinh(b * T) - a * np.cos(a * T) * np.cosh(b * T) + a) / (a * a + b * b)
    if key == ("sin", "sinh"):
        return (b * np.sin(a * T) * np.cosh(b * T) - a * np.cos(a * T) * np.sinh(b * T)) / (a * a + b * b)

    if key == ("cos", "one"):
        return np.sin(a * T) / a
    if key == ("cos", "theta"):
        return (np.cos(a * T) - 1.0 + a * T * np.sin(a * T)) / (a * a)
    if key == ("sin", "one"):
        return (1.0 - np.cos(a * T)) / a
    if key == ("sin", "theta"):
        return (np.sin(a * T) - a * T * np.cos(a * T)) / (a * a)
    if key == ("cosh", "one"):
        return np.sinh(a * T) / a
    if key == ("cosh", "theta"):
        return (a * T * np.sinh(a * T) - np.cosh(a * T) + 1.0) / (a * a)
    if key == ("sinh", "one"):
        return (np.cosh(a * T) - 1.0) / a
    if key == ("sinh", "theta"):
        return (a * T * np.cosh(a * T) - np.sinh(a * T)) / (a * a)
    if key == ("one", "one"):
        return T
    if key == ("one", "theta"):
        return 0.5 * T * T
    if key == ("theta", "theta"):
        return T ** 3 / 3.0

    raise ValueError(f"unsupported shape pair {shape1!r}, {shape2!r}")


def mode_traces(n, sigma):
    """Unit-datum trace descriptors (shape, rate, amplitude) of one wave mode.

    Returns (trace_c, trace_d) as functions of theta = T - t for the backward
    solution with unit value datum and unit weighted-velocity datum.  The
    weighted-velocity datum stores psi_t(T)/(n pi), so its trace amplitude
    carries n pi back in.
    """
    npi = n * np.pi
    branch = classify_sigma(sigma, npi * npi)
    if branch == OSCILLATORY:
        nu = np.sqrt(sigma)
        return ("cos", nu, 1.0), ("sin", nu, -npi / nu)
    if branch == ZERO:
        return ("one", 0.0, 1.0), ("theta", 0.0, -npi)
    mu = np.sqrt(-sigma)
    return ("cosh", mu, 1.0), ("sinh", mu, -npi / mu)
