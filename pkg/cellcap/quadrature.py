"""Thin wrapper over QUADPACK that turns silent warnings into errors."""
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as _integrate

from .errors import NonConvergenceError

logger = logging.getLogger("cellcap.quadrature")


def integrate(
    func: Callable[[float], float],
    a: float,
    b: float,
    *,
    epsabs: float = 1e-13,
    epsrel: float = 1e-10,
    limit: int = 200,
    points: Optional[Sequence[float]] = None,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
    limlst: int = 100,
    accept_rel: float = 1e-7,
    label: str = "integral",
) -> Tuple[float, float]:
    """
    Integrate func over [a, b] and return (value, abserr).

    QUADPACK warnings (ier > 0) are tolerated only when the reported error is
    still below accept_rel of the value; otherwise NonConvergenceError is raised
    with the quadrature diagnostics attached.

    Args:
        func: Integrand
        a: Lower limit
        b: Upper limit (may be np.inf)
        epsabs: Absolute tolerance requested from QUADPACK
        epsrel: Relative tolerance requested from QUADPACK
        limit: Subinterval budget
        points: Interior breakpoints (finite intervals only)
        weight: Optional QUADPACK weight ('cos' or 'sin')
        wvar: Weight frequency
        limlst: Cycle budget for Fourier integrals on infinite ranges
        accept_rel: Largest relative error accepted from a warning result
        label: Name used in diagnostics

    Returns:
        (value, abserr)
    """
    kwargs = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit, "full_output": 1}
    if points is not None and np.isfinite(b):
        inner = sorted(p for p in points if a < p < b)
        if inner:
            kwargs["points"] = inner
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
        if not np.isfinite(b):
            kwargs["limlst"] = limlst

    out = _integrate.quad(func, a, b, **kwargs)
    value, abserr = float(out[0]), float(out[1])

    if len(out) > 3:
        message = out[3]
        if np.isfinite(value) and abserr <= max(epsabs, accept_rel * abs(value)):
            logger.debug(f"{label}: accepted QUADPACK warning ({message}), abserr={abserr:.3e}")
        else:
            raise NonConvergenceError(
                f"{label} did not converge",
                {"a": a, "b": b, "value": value, "abserr": abserr,
                 "limit": limit, "message": str(message).splitlines()[0]},
            )
    if not np.isfinite(value):
        raise NonConvergenceError(f"{label} is not finite", {"a": a, "b": b, "value": value})
    return value, abserr
