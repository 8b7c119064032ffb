"""Real-valued 1-periodic potentials.

A potential is stored either as a finite Fourier series
``q(x) = sum_n q_n exp(2i*pi*n*x)`` with ``q_{-n} = conj(q_n)``, or as
``M`` uniform samples ``q(j/M)``.  Both kinds expose the same three
queries: Fourier coefficients, pointwise values and the mean.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class PotentialKind(enum.Enum):
    FOURIER = "fourier"
    SAMPLES = "samples"


@dataclass(frozen=True)
class Potential:
    kind: PotentialKind
    fourier: Mapping[int, complex] | None = None
    samples: tuple[float, ...] | None = None
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.kind is PotentialKind.FOURIER:
            if self.fourier is None:
                raise ValueError("Fourier potential needs coefficients")
            for n, c in self.fourier.items():
                if self.fourier.get(-n, 0j) != complex(c).conjugate():
                    raise ValueError(f"coefficients not conjugate-symmetric at n={n}")
        else:
            if not self.samples:
                raise ValueError("sampled potential needs at least one value")
            arr = np.asarray(self.samples, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError("samples must be finite reals")
            # rfft keeps q_{-n} = conj(q_n) bit-exact when we mirror it below
            object.__setattr__(self, "_rfft", np.fft.rfft(arr) / arr.size)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_fourier(cls, coeffs: Mapping[int, complex], name: str = "custom") -> Potential:
        """Build from coefficients, completing ``q_{-n} = conj(q_n)``.

        Only one of each ``(n, -n)`` pair needs to be given; if both are
        present they must already agree.  ``q_0`` must be real.
        """
        full: dict[int, complex] = {}
        for n, c in coeffs.items():
            n = int(n)
            c = complex(c)
            if n == 0:
                if c.imag != 0.0:
                    raise ValueError("q_0 must be real")
                c = complex(c.real, 0.0)
            for m, v in ((n, c), (-n, c.conjugate())):
                if m in full and full[m] != v:
                    raise ValueError(f"inconsistent coefficients at n={m}")
                full[m] = v
        full = {n: c for n, c in sorted(full.items()) if c != 0}
        return cls(PotentialKind.FOURIER, fourier=MappingProxyType(full), name=name)

    @classmethod
    def from_samples(cls, values: Sequence[float], name: str = "custom") -> Potential:
        return cls(PotentialKind.SAMPLES, samples=tuple(float(v) for v in values), name=name)

    # -- queries --------------------------------------------------------------

    def fourier_coefficient(self, n: int) -> complex:
        """``q_n = int_0^1 q(x) exp(-2i*pi*n*x) dx``.

        Exact lookup for Fourier potentials (absent indices give 0); the
        uniform trapezoid/DFT rule for sampled ones.
        """
        n = int(n)
        if self.kind is PotentialKind.FOURIER:
            return complex(self.fourier.get(n, 0j))
        m = len(self.samples)
        r = n % m
        if r <= m // 2:
            return complex(self._rfft[r])
        return complex(self._rfft[m - r]).conjugate()

    def evaluate(self, x):
        """Value of ``q`` at ``x`` (scalar or array), periodic with period 1."""
        x = np.asarray(x, dtype=float)
        if self.kind is PotentialKind.FOURIER:
            z = np.zeros(x.shape, dtype=complex)
            for n, c in self.fourier.items():
                z = z + c * np.exp(1j * TWO_PI * n * np.mod(x, 1.0))
            re, im = z.real, z.imag
            assert np.all(np.abs(im) <= 1e-12 * (1.0 + np.abs(re))), "imaginary leakage"
            out = re
        else:
            vals = np.asarray(self.samples)
            m = vals.size
            u = np.mod(x, 1.0) * m
            j = np.floor(u).astype(int) % m
            w = u - np.floor(u)
            out = (1.0 - w) * vals[j] + w * vals[(j + 1) % m]
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        return self.fourier_coefficient(0).real

    def sup_bound(self) -> float:
        """An upper bound on ``max |q|`` (exact for samples)."""
        if self.kind is PotentialKind.FOURIER:
            return float(sum(abs(c) for c in self.fourier.values()))
        return float(np.max(np.abs(self.samples)))

    def support_width(self) -> int:
        """Largest ``|n|`` with a nonzero coefficient (``M // 2`` for samples)."""
        if self.kind is PotentialKind.FOURIER:
            return max((abs(n) for n in self.fourier), default=0)
        return len(self.samples) // 2

    def shift(self, c: float) -> Potential:
        """``q + c``."""
        if self.kind is PotentialKind.FOURIER:
            coeffs = dict(self.fourier)
            coeffs[0] = coeffs.get(0, 0j) + c
            return Potential.from_fourier(coeffs, name=f"shifted:{c:g},{self.name}")
        return Potential.from_samples([v + c for v in self.samples], name=f"shifted:{c:g},{self.name}")

    def translate(self, a: float) -> Potential:
        """``q(x + a)``, realised by rotating the phase of each coefficient."""
        if self.kind is not PotentialKind.FOURIER:
            raise NotImplementedError("translation is defined for Fourier potentials only")
        rotated = {n: c * complex(math.cos(TWO_PI * n * a), math.sin(TWO_PI * n * a))
                   for n, c in self.fourier.items() if n >= 0}
        return Potential.from_fourier(rotated, name=self.name)

    def to_json(self) -> dict:
        if self.kind is PotentialKind.FOURIER:
            return {"kind": "fourier",
                    "coeffs": [{"n": n, "re": c.real, "im": c.imag}
                               for n, c in self.fourier.items() if n >= 0]}
        return {"kind": "samples", "values": list(self.samples)}


# -- free functions mirroring the methods ---------------------------------------

def fourier_coefficient(p: Potential, n: int) -> complex:
    return p.fourier_coefficient(n)


def evaluate(p: Potential, x):
    return p.evaluate(x)


def mean(p: Potential) -> float:
    return p.mean()


# -- named potentials -----------------------------------------------------------

def zero() -> Potential:
    return Potential.from_fourier({}, name="zero")


def mathieu(a: float) -> Potential:
    """``q(x) = 2a cos(2 pi x)``."""
    return Potential.from_fourier({1: a}, name=f"mathieu:{a:g}")


def two_mode(a: float, b: float) -> Potential:
    """``q(x) = 2a cos(2 pi x) + 2b cos(4 pi x)``."""
    return Potential.from_fourier({1: a, 2: b}, name=f"two-mode:{a:g},{b:g}")


def shifted(c: float, base: Potential) -> Potential:
    return base.shift(c)


def parse_builtin(spec: str) -> Potential:
    """Parse ``name[:param[,param]]``, e.g. ``mathieu:0.5`` or ``shifted:3,mathieu:1``."""
    name, _, args = spec.strip().partition(":")
    name = name.strip().lower()
    try:
        if name == "zero":
            if args:
                raise ValueError("zero takes no parameters")
            return zero()
        if name == "mathieu":
            return mathieu(float(args))
        if name in ("two-mode", "two_mode", "twomode"):
            a, b = args.split(",")
            return two_mode(float(a), float(b))
        if name == "shifted":
            c, base = args.split(",", 1)
            return shifted(float(c), parse_builtin(base))
    except ValueError as exc:
        raise ValueError(f"bad potential spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown potential {name!r}")


def potential_from_json(data: dict) -> Potential:
    kind = data.get("kind")
    if kind == "fourier":
        coeffs: dict[int, complex] = {}
        for entry in data["coeffs"]:
            n = int(entry["n"])
            c = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            if n == 0 and c.imag != 0.0:
                raise ValueError("n=0 must have im=0")
            if n in coeffs:
                raise ValueError(f"duplicate coefficient n={n}")
            coeffs[n] = c
        return Potential.from_fourier(coeffs)
    if kind == "samples":
        return Potential.from_samples(data["values"])
    raise ValueError(f"unknown potential kind {kind!r}")


def load_potential(path: str | Path) -> Potential:
    with open(path) as fh:
        p = potential_from_json(json.load(fh))
    return Potential(p.kind, p.fourier, p.samples, name=str(path))
