"""Inverse-spectral checks built on computed spectra.

* ``rayleigh_quotient`` -- the energy of the plane waves ``e^{itx}`` and
  ``e^{i(t - 2 pi)x}``, which equals ``t^2 + q_0`` (resp. ``(2 pi - t)^2 + q_0``)
  for every potential.
* ``estimate_q0`` / ``asymptotic_residuals_decay`` -- recover the mean of
  ``q`` from the offsets ``lambda_n - (2 pi n + t)^2`` at large ``|n|``.
* ``check_ambarzumyan`` -- test whether a spectrum satisfies the hypotheses
  under which the potential must vanish: a lower bound on the first
  eigenvalue and containment of one of the sets ``{(2 pi n -/+ t)^2}``.
* ``band_structure`` -- Hill-operator bands as the union over ``t``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InsufficientSpectrum, QuadratureMismatch
from .galerkin import (DiscretizationConfig, PhaseParameter, Spectrum, spectrum_galerkin,
                       unperturbed_value)
from .potential import TWO_PI, Potential, PotentialKind

DEFAULT_N_MAX = 8
DEFAULT_TOL = 1e-4
MIN_USABLE_LABELS = 6
MIN_LABEL = 3


class Wave(enum.Enum):
    PLUS = "plus"    # e^{itx}
    MINUS = "minus"  # e^{i(t - 2 pi)x}


class Variant(enum.Enum):
    MINUS = "minus"  # {(2 n pi - t)^2}
    PLUS = "plus"    # {(2 n pi + t)^2}
    MIXED = "mixed"  # for each n, either of the two


class Verdict(enum.Enum):
    CONSISTENT = "ConsistentWithZeroPotential"
    VIOLATED = "HypothesesViolated"


def rayleigh_quotient(p: Potential, t: PhaseParameter, which: Wave = Wave.PLUS,
                      points: int = 512) -> float:
    """Quadrature value of ``(<-y'', y> + <q y, y>) / <y, y>`` for a plane wave.

    Raises QuadratureMismatch if it differs from the closed form by more
    than ``1e-8``.
    """
    kappa = t.t if which is Wave.PLUS else t.t - TWO_PI
    m = max(points, 2 * p.support_width() + 2)
    if p.kind is PotentialKind.SAMPLES:
        # a multiple of the sample count integrates the linear interpolant exactly
        ms = len(p.samples)
        m = ms * math.ceil(m / ms)
    x = np.arange(m) / m
    y = np.exp(1j * kappa * x)
    d2y = -kappa ** 2 * y
    q = p.evaluate(x)
    num = np.mean(-np.conj(y) * d2y).real + np.mean(q * np.abs(y) ** 2)
    value = float(num / np.mean(np.abs(y) ** 2))
    closed = kappa ** 2 + p.mean()
    if abs(value - closed) > 1e-8:
        raise QuadratureMismatch(f"quadrature {value!r} vs closed form {closed!r}")
    return value


class Q0Estimate(NamedTuple):
    q0: float
    residuals: dict[int, float]
    window: tuple[int, ...]


def _offsets(s: Spectrum) -> dict[int, float]:
    if s.labels is None:
        raise InsufficientSpectrum("spectrum carries no Fourier labels")
    return {n: v - unperturbed_value(n, s.t.t) for n, v in zip(s.labels, s.values)}


def estimate_q0(s: Spectrum) -> Q0Estimate:
    """Mean of ``d_n = lambda_n - (2 pi n + t)^2`` over the largest-``|n|`` half.

    Needs at least six labelled eigenvalues reaching ``|n| >= 3``.
    Residuals ``d_n - q0`` are returned for every label.
    """
    d = _offsets(s)
    if len(d) < MIN_USABLE_LABELS or max(abs(n) for n in d) < MIN_LABEL:
        raise InsufficientSpectrum(f"need {MIN_USABLE_LABELS} labels reaching |n| >= {MIN_LABEL}, "
                                   f"got {sorted(d)}")
    ranked = sorted(d, key=lambda n: (-abs(n), n))
    window = tuple(ranked[: (len(ranked) + 1) // 2])
    q0 = float(np.mean([d[n] for n in window]))
    return Q0Estimate(q0, {n: d[n] - q0 for n in s.labels}, window)


@dataclass(frozen=True)
class DecayReport:
    q0_estimate: float
    n_max: int
    c_hat: float
    envelope: dict[int, float]  # |n| -> max(|r_n|, |r_-n|)
    floor: float
    decay_ok: bool


def asymptotic_residuals_decay(s: Spectrum, noise: float = 1e-9) -> DecayReport:
    """Compare the residuals against the ``ln|n| / |n|`` remainder profile.

    ``c_hat`` is ``max |r_n| |n| / ln|n|`` over ``3 <= |n| <= n_max``.  The
    decay check requires ``|r_m| <= 3 |r_n| + floor`` whenever ``|m| > |n|``,
    where ``floor`` is the spread of the offsets averaged into ``q0`` (the
    residuals cannot be resolved below it) or ``noise``, whichever is larger.
    """
    est = estimate_q0(s)
    n_max = max(abs(n) for n in est.residuals)
    if n_max < 8:
        raise InsufficientSpectrum(f"labels reach |n| = {n_max}, need 8")
    env: dict[int, float] = {}
    for n, r in est.residuals.items():
        if abs(n) >= MIN_LABEL:
            env[abs(n)] = max(env.get(abs(n), 0.0), abs(r))
    env = dict(sorted(env.items()))
    c_hat = max(r * n / math.log(n) for n, r in env.items())
    d = [est.residuals[n] for n in est.window]
    floor = max(noise, max(d) - min(d))
    ns = list(env)
    ok = all(env[m] <= 3.0 * env[n] + floor for i, n in enumerate(ns) for m in ns[i + 1:])
    return DecayReport(est.q0, n_max, float(c_hat), env, float(floor), ok)


class Evidence(NamedTuple):
    n: int
    target: float
    nearest_computed: float
    gap: float


@dataclass(frozen=True)
class AmbarzumyanReport:
    t: PhaseParameter
    variant: Variant
    first_eigenvalue_ok: bool
    margin: float
    containment_ok: bool
    containment_evidence: tuple[Evidence, ...]
    q0_estimate: float
    verdict: Verdict
    tol: float
    note: str

    @property
    def failing_n(self) -> list[int]:
        return [e.n for e in self.containment_evidence
                if e.gap > self.tol * (1.0 + e.target)]


CAVEAT = ("numerical check: a consistent verdict means the hypotheses hold for n <= n_max "
          "within tol; multiplicity of contained eigenvalues is not checked")


def check_ambarzumyan(s: Spectrum, variant: Variant = Variant.MINUS, n_max: int = DEFAULT_N_MAX,
                      tol: float = DEFAULT_TOL) -> AmbarzumyanReport:
    """Check the first-eigenvalue bound and target-set containment for ``s``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    t = s.t.t
    vals = np.asarray(s.values)
    floor = min(t ** 2, (TWO_PI - t) ** 2)
    margin = float(vals[0] - floor)
    first_ok = margin >= -tol

    def nearest(target):
        v = float(vals[np.argmin(np.abs(vals - target))])
        return Evidence(n, target, v, abs(v - target))

    evidence = []
    for n in range(1, n_max + 1):
        minus = nearest((TWO_PI * n - t) ** 2)
        plus = nearest((TWO_PI * n + t) ** 2)
        if variant is Variant.MINUS:
            evidence.append(minus)
        elif variant is Variant.PLUS:
            evidence.append(plus)
        else:
            # pick the better-matched candidate, judged on the relative scale
            evidence.append(min((minus, plus), key=lambda e: e.gap / (1.0 + e.target)))
    contained = all(e.gap <= tol * (1.0 + e.target) for e in evidence)
    try:
        q0 = estimate_q0(s).q0
    except InsufficientSpectrum:
        q0 = math.nan
    verdict = Verdict.CONSISTENT if first_ok and contained else Verdict.VIOLATED
    return AmbarzumyanReport(s.t, variant, first_ok, margin, contained, tuple(evidence), q0,
                             verdict, tol, CAVEAT)


def cos_moment(p: Potential) -> float:
    """``int_0^1 q(x) cos(2 pi x) dx``."""
    return p.fourier_coefficient(1).real


@dataclass(frozen=True)
class BandStructure:
    t_grid: tuple[float, ...]
    spectra: tuple[Spectrum, ...]
    bands: tuple[tuple[float, ...], ...]  # bands[m][j] = lambda_m(t_j)
    gaps: tuple[tuple[float, float], ...]

    def __iter__(self):
        return iter(zip(self.t_grid, self.spectra))


def _edge_drift(trace: np.ndarray, j: int) -> float:
    n = trace.size
    return float(max(abs(trace[j] - trace[(j - 1) % n]), abs(trace[j] - trace[(j + 1) % n])))


def detect_gaps(bands: np.ndarray) -> list[tuple[float, float]]:
    """Open intervals between consecutive bands that no sample covers.

    An apparent gap is kept only if it is wider than the drift of the two
    bounding traces between neighbouring samples at their extremes; a
    narrower one may be a sampling artefact.
    """
    gaps = []
    for m in range(bands.shape[0] - 1):
        below, above = bands[m], bands[m + 1]
        top = int(np.argmax(below))
        bottom = int(np.argmin(above))
        lo, hi = float(below[top]), float(above[bottom])
        if hi - lo > _edge_drift(below, top) + _edge_drift(above, bottom):
            gaps.append((lo, hi))
    return gaps


def band_structure(p: Potential, t_count: int = 33, k: int = 5,
                   cfg: DiscretizationConfig | None = None,
                   workers: int | None = None) -> BandStructure:
    """Lowest ``k`` bands sampled at ``t_j = 2 pi j / t_count``."""
    if t_count < 3:
        raise ValueError("t_count must be >= 3")
    phases = [PhaseParameter(TWO_PI * j / t_count) for j in range(t_count)]

    def solve(t):
        return spectrum_galerkin(p, t, cfg, k=k)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(solve, phases))
    else:
        spectra = [solve(t) for t in phases]
    bands = np.array([s.values for s in spectra]).T
    return BandStructure(tuple(t.t for t in phases), tuple(spectra),
                         tuple(tuple(float(v) for v in row) for row in bands),
                         tuple(detect_gaps(bands)))
