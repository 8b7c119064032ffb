"""Shooting solver: Floquet discriminant and its roots.

``lambda`` is an eigenvalue of ``L_t(q)`` exactly when the monodromy matrix
of ``-y'' + q y = lambda y`` over one period has eigenvalue ``e^{it}``,
i.e. when ``D(lambda) = c(1) + s'(1) = 2 cos t``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _integrate
from .errors import BracketingFailed, IntegrationDrift
from .galerkin import Method, PhaseParameter, Spectrum, assign_labels
from .potential import TWO_PI, Potential, PotentialKind

log = logging.getLogger(__name__)

DEFAULT_ODE_TOL = 1e-10
WRONSKIAN_TOL = 1e-9
TANGENCY_TOL = 1e-6
ROOT_TOL = 1e-10


@dataclass(frozen=True)
class TransferMatrix:
    c1: float
    s1: float
    dc1: float
    ds1: float
    lam: float

    @property
    def wronskian(self) -> float:
        return self.c1 * self.ds1 - self.s1 * self.dc1

    @property
    def trace(self) -> float:
        return self.c1 + self.ds1


@dataclass(frozen=True)
class _Sample:
    """Transfer matrix entries at one lambda together with their lambda-derivatives."""

    lam: float
    y: np.ndarray

    def transfer(self) -> TransferMatrix:
        c, dc, s, ds = self.y[:4]
        return TransferMatrix(float(c), float(s), float(dc), float(ds), self.lam)


def _kernel_args(p: Potential):
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f = np.zeros(0)
    if p.kind is PotentialKind.FOURIER:
        pos = [(n, c) for n, c in p.fourier.items() if n > 0]
        ns = np.array([n for n, _ in pos], dtype=np.int64)
        cre = np.array([c.real for _, c in pos], dtype=float)
        cim = np.array([c.imag for _, c in pos], dtype=float)
        return (_integrate.KIND_FOURIER, ns, cre, cim, p.mean(), empty_f)
    return (_integrate.KIND_SAMPLES, empty_i, empty_f, empty_f, 0.0,
            np.asarray(p.samples, dtype=float))


def _integrate_checked(args, lam: float, ode_tol: float) -> _Sample:
    if not ode_tol > 0:
        raise ValueError("ode_tol must be positive")
    y, _, ok = _integrate.fundamental(float(lam), float(ode_tol), *args)
    if not ok:
        raise IntegrationDrift(f"step size collapsed at lambda={lam!r}")
    c, dc, s, ds = y[:4]
    w = c * ds - s * dc
    # large |lambda| < 0 makes both products ~cosh^2; test the cancellation relative to them
    scale = max(1.0, abs(c * ds) + abs(s * dc))
    if abs(w - 1.0) > WRONSKIAN_TOL * scale:
        raise IntegrationDrift(f"Wronskian {w!r} at lambda={lam!r}")
    return _Sample(float(lam), y.copy())


def integrate_fundamental(p: Potential, lam: float, ode_tol: float = DEFAULT_ODE_TOL) -> TransferMatrix:
    """Endpoint values of the solutions with ``c(0)=1, c'(0)=0`` and ``s(0)=0, s'(0)=1``."""
    return _integrate_checked(_kernel_args(p), lam, ode_tol).transfer()


def discriminant(p: Potential, lam: float, ode_tol: float = DEFAULT_ODE_TOL) -> float:
    return integrate_fundamental(p, lam, ode_tol).trace


# -- root function ------------------------------------------------------------------

class _RootFunction:
    """``f(lambda)`` vanishing exactly on the spectrum of ``L_t(q)``, with ``f'``.

    For generic ``t`` this is ``D - 2 cos t``.  At ``t = 0`` and ``t = pi``
    the unit Wronskian rewrites ``D -/+ 2`` as

        s1 dc1 - (c1 - 1)(ds1 - 1)        (t = 0)
        (c1 + 1)(ds1 + 1) - s1 dc1        (t = pi)

    a difference of products of small factors near a band edge, so a nearly
    double root is resolved far below the integration noise in ``D``.
    """

    def __init__(self, p: Potential, tau: float, ode_tol: float):
        self.args = _kernel_args(p)
        self.ode_tol = ode_tol
        self.mode = 0 if tau == 0.0 else (1 if tau == math.pi else 2)
        self.target = 2.0 * math.cos(tau)
        self.cache: dict[float, tuple[float, float]] = {}

    def __call__(self, lam: float) -> tuple[float, float]:
        hit = self.cache.get(lam)
        if hit is not None:
            return hit
        y = _integrate_checked(self.args, lam, self.ode_tol).y
        c, dc, s, ds, c_l, dc_l, s_l, ds_l = (float(v) for v in y)
        if self.mode == 0:
            f = s * dc - (c - 1.0) * (ds - 1.0)
            df = s_l * dc + s * dc_l - c_l * (ds - 1.0) - (c - 1.0) * ds_l
        elif self.mode == 1:
            f = (c + 1.0) * (ds + 1.0) - s * dc
            df = c_l * (ds + 1.0) + (c + 1.0) * ds_l - s_l * dc - s * dc_l
        else:
            f = c + ds - self.target
            df = c_l + ds_l
        self.cache[lam] = (f, df)
        return f, df

    def value(self, lam: float) -> float:
        return self(lam)[0]

    def slope(self, lam: float) -> float:
        return self(lam)[1]


def _brent(fun, a: float, b: float) -> float:
    return brentq(fun, a, b, xtol=ROOT_TOL, rtol=ROOT_TOL, maxiter=200)


def _free_values(tau: float, upto: float) -> list[float]:
    """Distinct ``(2 pi n +/- tau)^2`` not exceeding ``upto``, ascending."""
    vals = set()
    n = 0
    while (TWO_PI * n - tau) ** 2 <= upto or n == 0:
        for v in ((TWO_PI * n + tau) ** 2, (TWO_PI * n - tau) ** 2):
            if v <= upto:
                vals.add(v)
        n += 1
    return sorted(vals)


def scan_parameters(p: Potential, tau: float, count: int) -> tuple[float, float, float]:
    """Lower end, step and upper end of the eigenvalue scan."""
    qmax = p.sup_bound()
    lo = -2.0 * qmax - 1.0
    free = []
    n = 0
    while len(free) < count:
        free.extend([(TWO_PI * n + tau) ** 2, (TWO_PI * -n + tau) ** 2] if n else [tau ** 2])
        n += 1
    # min-max: the count-th eigenvalue lies within qmax of the count-th free value
    hi = sorted(free)[count - 1] + qmax + 1.0
    distinct = _free_values(tau, hi)
    gaps = [b - a for a, b in zip(distinct, distinct[1:]) if b - a > 1e-12 * max(1.0, b)]
    step = max(0.5, 0.5 * min(gaps)) if gaps else 0.5
    return lo, step, hi + step


def spectrum_shooting(p: Potential, t: PhaseParameter, count: int = 10,
                      ode_tol: float = DEFAULT_ODE_TOL) -> Spectrum:
    """The ``count`` lowest roots of ``D(lambda) = 2 cos t``.

    Scans a uniform lambda grid for sign changes of the root function and
    of its derivative.  Each interval holding an extremum is split there,
    so close root pairs sharing one grid cell are still bracketed.  At
    ``t = 0, pi`` an extremum touching zero (within ``1e-6``) without a
    crossing is reported as a double root.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    tau = t.reduced
    fun = _RootFunction(p, tau, ode_tol)
    degenerate = fun.mode != 2
    lo, step, hi = scan_parameters(p, tau, count)

    roots: list[float] = []
    a = lo
    fa, da = fun(a)
    if fa == 0.0:
        roots.append(a)
    i = 1
    while len(roots) < count:
        b = lo + i * step
        if b > hi:
            raise BracketingFailed(f"found {len(roots)} of {count} roots below lambda={hi:.6g}")
        fb, db = fun(b)
        pieces = [(a, fa, b, fb)]
        if da * db < 0:
            m = _brent(fun.slope, a, b)
            fm = fun.value(m)
            pieces = [(a, fa, m, fm), (m, fm, b, fb)]
            if degenerate and fa * fm > 0 and fm * fb > 0 and abs(fm) < TANGENCY_TOL:
                roots.extend([m, m])
                pieces = []
        for x0, f0, x1, f1 in pieces:
            if f1 == 0.0 and x1 == b:
                roots.append(b)
            elif f1 == 0.0:
                roots.append(x1)
            elif f0 * f1 < 0:
                roots.append(_brent(fun.value, x0, x1))
        a, fa, da = b, fb, db
        i += 1

    roots.sort()
    values = tuple(float(v) for v in roots[:count])
    log.debug("shooting t=%r: %d roots, %d integrations", t.t, count, len(fun.cache))
    return Spectrum(values, Method.SHOOTING, t, assign_labels(count, t.t),
                    meta={"ode_tol": ode_tol, "integrations": len(fun.cache)})
