"""Composite Gauss-Legendre quadrature with panel-doubling refinement.

Used as the independent time-integration route everywhere a closed form is
the production path: Gramian oracles, control norms, finite-dimensional
Gramians.  The integrand is always evaluated vectorized over nodes.
"""

import numpy as np

from .errors import QuadratureDivergenceError

_GL_CACHE = {}


def gl_nodes_weights(order):
    """Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1]."""
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def panel_nodes(a, b, panels, order):
    """All nodes and weights of the composite rule with `panels` panels."""
    x, w = gl_nodes_weights(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def fixed_panel_integrate(f, a, b, panels, order=16):
    """Integrate with a fixed panel count; f maps a node array to values.

    f(nodes) may return an array of shape (len(nodes), ...); the integral is
    taken along the first axis.
    """
    nodes, weights = panel_nodes(a, b, panels, order)
    vals = f(nodes)
    return np.tensordot(weights, vals, axes=(0, 0))


def refine_integrate(f, a, b, tol=1e-12, order=16, start_panels=1,
                     max_panels=4096):
    """Panel-doubling integration until successive estimates differ by < tol.

    The difference is measured in max norm, relative to max(1, |estimate|).
    Raises QuadratureDivergenceError when max_panels is reached without
    convergence.
    """
    panels = start_panels
    prev = fixed_panel_integrate(f, a, b, panels, order)
    while panels < max_panels:
        panels *= 2
        cur = fixed_panel_integrate(f, a, b, panels, order)
        scale = max(1.0, float(np.max(np.abs(cur))))
        if float(np.max(np.abs(cur - prev))) <= tol * scale:
            return cur
        prev = cur
    raise QuadratureDivergenceError(
        f"quadrature on [{a}, {b}] did not converge within {max_panels} panels")


def simpson_weights(m, dt):
    """Composite Simpson weights on m+1 uniform nodes; m must be even >= 2."""
    if m < 2 or m % 2 != 0:
        raise ValueError("Simpson rule needs an even interval count >= 2")
    w = np.full(m + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (dt / 3.0)
