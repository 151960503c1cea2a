"""Special-function kernel.

Gamma (Lanczos), modified Bessel functions of the second kind, and the three
Meijer-G instances needed by the capacity formulas, evaluated by
Mellin-Barnes integration along a vertical line.
"""
import logging
from typing import Callable, ClassVar, List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, model_validator
from scipy.optimize import brentq, minimize_scalar
from scipy.special import loggamma

from .errors import DomainError, GammaOverflowError, NonConvergenceError, UnsupportedMeijerGError
from .quadrature import integrate

logger = logging.getLogger("cellcap.specfun")

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))
_LOG_SQRT_2PI = float(0.5 * np.log(2.0 * np.pi))
_GAMMA_MAX_ARG = 171.6243769563027

# Bessel K integral is cut where the exponent is this many nats below its peak
_BESSEL_DROP = 60.0

# Mellin-Barnes contour controls
_MB_T0 = 8.0
_MB_MAX_DOUBLINGS = 10
_MB_TAIL = 1e-17
_MB_SEGMENT = 2.0


def _check_positive(name: str, x: float) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} requires a positive finite argument, got {x}")
    return x


def _lanczos_series(z: float) -> float:
    series = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        series += _LANCZOS_COEF[i] / (z + i)
    return series


def gamma_fn(x: float) -> float:
    """
    Gamma function for positive real arguments.

    Args:
        x: Argument, x > 0

    Returns:
        Gamma(x)

    Raises:
        DomainError: x <= 0
        GammaOverflowError: result exceeds the float range
    """
    x = _check_positive("gamma_fn", x)
    if x > _GAMMA_MAX_ARG:
        raise GammaOverflowError(f"gamma_fn({x}) overflows")

    if x < 0.5:
        # Reflection
        result = np.pi / (np.sin(np.pi * x) * gamma_fn(1.0 - x))
    else:
        z = x - 1.0
        t = z + _LANCZOS_G + 0.5
        half = t ** ((z + 0.5) / 2.0)
        result = _SQRT_2PI * half * (half * np.exp(-t)) * _lanczos_series(z)

    if not np.isfinite(result):
        raise GammaOverflowError(f"gamma_fn({x}) overflows")
    return float(result)


def log_gamma_fn(x: float) -> float:
    """Natural log of Gamma(x) for x > 0; stays finite where gamma_fn overflows."""
    x = _check_positive("log_gamma_fn", x)
    if x < 0.5:
        return float(np.log(np.pi / np.sin(np.pi * x)) - log_gamma_fn(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return float(_LOG_SQRT_2PI + (z + 0.5) * np.log(t) - t + np.log(_lanczos_series(z)))


def bessel_k_half_integer(n: int, x: float) -> float:
    """
    K_{n+1/2}(x) from the terminating series.

    Args:
        n: Non-negative integer
        x: Argument, x > 0

    Returns:
        K_{n+1/2}(x)
    """
    if isinstance(n, float) and n.is_integer():
        n = int(n)
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"bessel_k_half_integer requires a non-negative integer order, got {n!r}")
    x = _check_positive("bessel_k_half_integer", x)

    term = 1.0
    total = 1.0
    for k in range(int(n)):
        term *= (n + k + 1) * (n - k) / ((k + 1) * 2.0 * x)
        total += term
    return float(np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) * total)


def _half_integer_index(v: float) -> Optional[int]:
    """n when v = n + 1/2 for a non-negative integer n, else None."""
    two_v = 2.0 * v
    nearest = round(two_v)
    if abs(two_v - nearest) < 1e-12 and int(nearest) % 2 == 1:
        return (int(nearest) - 1) // 2
    return None


def bessel_k(v: float, x: float) -> float:
    """
    Modified Bessel function of the second kind for real order.

    Uses K_v(x) = int_0^inf exp(-x cosh t) cosh(v t) dt, with the exponent
    shifted by its maximum so that large orders and small arguments stay in
    range. Half-integer orders use the closed form.

    Args:
        v: Real order (K is even in v)
        x: Argument, x > 0

    Returns:
        K_v(x)
    """
    x = _check_positive("bessel_k", x)
    v = abs(float(v))

    n = _half_integer_index(v)
    if n is not None:
        return bessel_k_half_integer(n, x)

    t_peak = float(np.arcsinh(v / x))

    def exponent(t: float) -> float:
        return -x * np.cosh(t) + v * t

    peak = exponent(t_peak)

    step = 1.0
    while exponent(t_peak + step) - peak > -_BESSEL_DROP:
        step *= 2.0
    t_end = brentq(lambda t: exponent(t) - peak + _BESSEL_DROP, t_peak, t_peak + step, xtol=1e-10)

    def integrand(t: float) -> float:
        return np.exp(exponent(t) - peak) * 0.5 * (1.0 + np.exp(-2.0 * v * t))

    value, _ = integrate(
        integrand, 0.0, t_end,
        points=[t_peak] if t_peak > 0.0 else None,
        epsabs=0.0, epsrel=1e-12, accept_rel=1e-10,
        label=f"bessel_k({v}, {x})",
    )
    return float(value * np.exp(peak))


class MeijerGSpec(BaseModel):
    """Parameters of G^{m,n}_{p,q}(x | a; b)."""

    m: int
    n: int
    p: int
    q: int
    a: List[float] = []
    b: List[float] = []

    SUPPORTED: ClassVar[Set[Tuple[int, int, int, int]]] = {(1, 2, 2, 2), (2, 0, 0, 2), (4, 1, 2, 4)}

    @model_validator(mode="after")
    def check_instance(self):
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise UnsupportedMeijerGError(
                f"invalid orders m={self.m}, n={self.n}, p={self.p}, q={self.q}"
            )
        if (self.m, self.n, self.p, self.q) not in self.SUPPORTED:
            raise UnsupportedMeijerGError(
                f"G^{{{self.m},{self.n}}}_{{{self.p},{self.q}}} is not a supported instance"
            )
        if len(self.a) != self.p or len(self.b) != self.q:
            raise UnsupportedMeijerGError(
                f"expected {self.p} a-parameters and {self.q} b-parameters, "
                f"got {len(self.a)} and {len(self.b)}"
            )
        lo, hi = self.strip()
        if lo is not None and hi is not None and not lo < hi:
            raise UnsupportedMeijerGError(
                f"pole sets are not separable by a vertical line (strip {lo} .. {hi})"
            )
        return self

    def strip(self) -> Tuple[Optional[float], Optional[float]]:
        """Open interval of Re(s) separating the two pole families."""
        lo = max((self.a[j] - 1.0 for j in range(self.n)), default=None)
        hi = min((self.b[j] for j in range(self.m)), default=None)
        return lo, hi

    @classmethod
    def log1p(cls) -> "MeijerGSpec":
        """G^{1,2}_{2,2}(x | 1,1; 1,0) = ln(1 + x)."""
        return cls(m=1, n=2, p=2, q=2, a=[1.0, 1.0], b=[1.0, 0.0])

    @classmethod
    def bessel(cls, v: float) -> "MeijerGSpec":
        """G^{2,0}_{0,2}(x | ; v/2, -v/2) = 2 K_v(2 sqrt(x))."""
        return cls(m=2, n=0, p=0, q=2, a=[], b=[v / 2.0, -v / 2.0])

    @classmethod
    def miso_capacity(cls, v: float) -> "MeijerGSpec":
        """The G^{4,1}_{2,4} instance of the closed-form MISO capacity."""
        return cls(
            m=4, n=1, p=2, q=4,
            a=[-(v + 1.0) / 2.0, (1.0 - v) / 2.0],
            b=[-v / 2.0, v / 2.0, -(v + 1.0) / 2.0, -(v + 1.0) / 2.0],
        )


def _log_kernel(spec: MeijerGSpec, log_x: float) -> Callable[[np.ndarray], np.ndarray]:
    a = np.asarray(spec.a, dtype=float)
    b = np.asarray(spec.b, dtype=float)

    def log_kernel(s):
        s = np.asarray(s, dtype=complex)
        out = s * log_x
        for j in range(spec.m):
            out = out + loggamma(b[j] - s)
        for j in range(spec.n):
            out = out + loggamma(1.0 - a[j] + s)
        for j in range(spec.m, spec.q):
            out = out - loggamma(1.0 - b[j] + s)
        for j in range(spec.n, spec.p):
            out = out - loggamma(a[j] - s)
        return out

    return log_kernel


def meijer_g(spec: MeijerGSpec, x: float) -> float:
    """
    Evaluate a supported Meijer-G instance at x > 0.

    The contour is the vertical line Re(s) = c, with c placed at the minimum of
    the kernel on the real axis inside the separating strip. The line is
    truncated at |Im s| = T, doubling T until the kernel has decayed below
    1e-17 of its value at c.

    Args:
        spec: Supported parameter set
        x: Argument, x > 0

    Returns:
        G(x)

    Raises:
        NonConvergenceError: truncation budget exhausted or quadrature failure
    """
    x = _check_positive("meijer_g", x)
    log_x = float(np.log(x))
    log_kernel = _log_kernel(spec, log_x)

    lo, hi = spec.strip()
    if lo is None:
        lo = hi - (20.0 + 2.0 * np.sqrt(x))
    if hi is None:
        hi = lo + (20.0 + 2.0 * np.sqrt(x))
    margin = 1e-9 * max(1.0, hi - lo)

    opt = minimize_scalar(
        lambda c: float(np.real(log_kernel(c))),
        bounds=(lo + margin, hi - margin),
        method="bounded",
        options={"xatol": 1e-10},
    )
    c = float(opt.x)
    log_scale = float(np.real(log_kernel(c)))

    def relative(t):
        return np.exp(log_kernel(c + 1j * np.asarray(t)) - log_scale)

    T = _MB_T0
    for _ in range(_MB_MAX_DOUBLINGS):
        tail = np.abs(relative(np.array([T, 1.25 * T, 1.5 * T])))
        if np.all(tail < _MB_TAIL):
            break
        T *= 2.0
    else:
        raise NonConvergenceError(
            "Mellin-Barnes truncation did not converge",
            {"c": c, "T": T, "strip": (lo, hi), "x": x},
        )

    total = 0.0
    abserr = 0.0
    edges = np.linspace(0.0, T, int(np.ceil(T / _MB_SEGMENT)) + 1)
    for t0, t1 in zip(edges[:-1], edges[1:]):
        part, err = integrate(
            lambda t: float(np.real(relative(t))), float(t0), float(t1),
            epsabs=1e-16, epsrel=1e-13, limit=400, accept_rel=1e-9,
            label=f"meijer_g contour segment [{t0:g}, {t1:g}]",
        )
        total += part
        abserr += err

    if abserr > 1e-9 * abs(total) + 1e-15:
        raise NonConvergenceError(
            "Mellin-Barnes quadrature error too large",
            {"c": c, "T": T, "abserr": abserr, "value": total},
        )

    logger.debug(f"meijer_g({spec.m},{spec.n},{spec.p},{spec.q}) x={x:g}: c={c:.6g}, T={T:g}")
    return float(np.exp(log_scale) * total / np.pi)
