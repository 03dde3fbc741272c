"""Dirichlet Laplacian eigenbasis on (0,1) and overlap matrices on a subinterval.

The basis is e_n(x) = sqrt(2) sin(n pi x) with eigenvalue (n pi)^2, so L2
coefficient vectors carry the Euclidean norm.  The control region omega =
(a, b) enters every downstream computation only through the overlap (restricted
mass) matrix  B_mn = int_a^b e_m e_n dx, assembled here in closed form.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Targets are drawn from a fixed named catalog so experiments reproduce from
# config alone: pure modes, the polynomial bump x(1-x), and a step function.
CATALOG_NAMES = ("mode:k", "sin:k", "bump", "step", "zero")

# Minimum samples per retained mode for sampled-function projection.
_SAMPLES_PER_MODE = 4


def eigenvalue(n):
    """Eigenvalue (n pi)^2 of mode n >= 1."""
    if n < 1 or int(n) != n:
        raise ValidationError(f"mode index must be a positive integer, got {n}")
    return (n * np.pi) ** 2


def eigenvalues(N):
    """Vector of the first N eigenvalues."""
    if N < 1:
        raise ValidationError(f"truncation order must be >= 1, got {N}")
    return (np.arange(1, N + 1) * np.pi) ** 2


@dataclass(frozen=True)
class Frequency:
    """Effective modal frequency sqrt(lambda + c); hyperbolic when lambda + c < 0.

    For hyperbolic modes `value` holds the growth rate sqrt(-(lambda + c)).
    """

    value: float
    hyperbolic: bool = False


@dataclass(frozen=True)
class EigenMode:
    """One Dirichlet mode: index, eigenvalue and potential-shifted frequency."""

    n: int

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValidationError(f"mode index must be >= 1, got {self.n}")

    @property
    def lam(self):
        return eigenvalue(self.n)

    def freq(self, c=0.0):
        sigma = self.lam + c
        if sigma > 0.0:
            return Frequency(np.sqrt(sigma))
        if sigma == 0.0:
            return Frequency(0.0)
        return Frequency(np.sqrt(-sigma), hyperbolic=True)

    def eval(self, x):
        """Pointwise values sqrt(2) sin(n pi x)."""
        return np.sqrt(2.0) * np.sin(self.n * np.pi * np.asarray(x))


@dataclass(frozen=True)
class ControlRegion:
    """Open control subinterval omega = (a, b) of (0, 1)."""

    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b <= 1.0):
            raise ValidationError(
                f"control region needs 0 <= a < b <= 1, got ({self.a}, {self.b})")

    def gcc_time(self):
        """Sharp 1D geometric-optics control time 2*max(a, 1-b)."""
        return 2.0 * max(self.a, 1.0 - self.b)

    @property
    def length(self):
        return self.b - self.a


def overlap_matrix(region, N):
    """Closed-form overlap matrix B_mn = int_a^b 2 sin(m pi x) sin(n pi x) dx.

    Symmetric, PSD, eigenvalues in [0, 1].  The diagonal (m = n) uses its own
    formula rather than the limit of the off-diagonal branch: the latter has
    an (m - n) denominator.
    """
    if N < 1:
        raise ValidationError(f"truncation order must be >= 1, got {N}")
    a, b = region.a, region.b
    n = np.arange(1, N + 1)
    m_, n_ = np.meshgrid(n, n, indexing="ij")
    d = (m_ - n_) * np.pi
    s = (m_ + n_) * np.pi
    with np.errstate(divide="ignore", invalid="ignore"):
        off = (np.sin(d * b) - np.sin(d * a)) / d - (np.sin(s * b) - np.sin(s * a)) / s
    diag = (b - a) - (np.sin(2 * n * np.pi * b) - np.sin(2 * n * np.pi * a)) / (2 * n * np.pi)
    out = np.where(m_ == n_, 0.0, off)
    out[np.arange(N), np.arange(N)] = diag
    return out


def _parse_indexed(name):
    head, _, tail = name.partition(":")
    try:
        k = int(tail)
    except ValueError:
        raise ValidationError(f"descriptor {name!r} needs an integer mode index")
    if k < 1:
        raise ValidationError(f"mode index in {name!r} must be >= 1")
    return head, k


def catalog_coefficients(name, N):
    """Eigenbasis coefficients of a named catalog function.

    mode:k  -> sqrt(2) sin(k pi x), the k-th unit coefficient vector
    sin:k   -> sin(k pi x), the k-th unit vector scaled by 1/sqrt(2)
    bump    -> x(1-x), coefficients 4 sqrt(2)/(n pi)^3 for odd n, 0 for even
    step    -> indicator of (1/2, 1)
    zero    -> zero vector
    """
    coeffs = np.zeros(N)
    if name == "zero":
        return coeffs
    if name == "bump":
        n = np.arange(1, N + 1)
        odd = n % 2 == 1
        coeffs[odd] = 4.0 * np.sqrt(2.0) / (n[odd] * np.pi) ** 3
        return coeffs
    if name == "step":
        n = np.arange(1, N + 1)
        coeffs[:] = np.sqrt(2.0) * (np.cos(n * np.pi / 2) - np.cos(n * np.pi)) / (n * np.pi)
        return coeffs
    if name.startswith(("mode:", "sin:")):
        head, k = _parse_indexed(name)
        if k <= N:
            coeffs[k - 1] = 1.0 if head == "mode" else 1.0 / np.sqrt(2.0)
        return coeffs
    raise ValidationError(f"unknown function descriptor {name!r}; "
                          f"catalog: {', '.join(CATALOG_NAMES)}")


def project_function(f, N):
    """First N eigenbasis coefficients <f, e_n> of a target function.

    f is either a catalog descriptor string or a (grid, samples) pair of
    equal-length arrays on [0, 1].  Sampled input is projected with the
    trapezoid rule and must supply at least 4*N + 1 samples so the highest
    retained mode is resolved.
    """
    if N < 1:
        raise ValidationError(f"truncation order must be >= 1, got {N}")
    if isinstance(f, str):
        return catalog_coefficients(f, N)
    grid, samples = f
    grid = np.asarray(grid, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if grid.shape != samples.shape or grid.ndim != 1:
        raise ValidationError("sampled input needs matching 1-D grid and value arrays")
    if grid.size < _SAMPLES_PER_MODE * N + 1:
        raise ValidationError(
            f"sample array shorter than quadrature requirement: "
            f"need >= {_SAMPLES_PER_MODE * N + 1} samples for N = {N}, got {grid.size}")
    n = np.arange(1, N + 1)
    basis = np.sqrt(2.0) * np.sin(np.outer(n, np.pi * grid))
    return np.trapz(basis * samples[None, :], grid, axis=1)
