"""Fourier-Galerkin discretisation of ``-y'' + q y`` under ``y(1) = e^{it} y(0)``.

In the basis ``exp(i(2 pi n + t)x)``, ``|n| <= N``, the operator becomes the
Hermitian matrix ``H[n, m] = (2 pi n + t)^2 delta_{nm} + q_{n-m}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NonHermitianInput, NotConverged
from .potential import TWO_PI, Potential


@dataclass(frozen=True)
class PhaseParameter:
    """Boundary phase, normalised into ``[0, 2 pi)``."""

    t: float

    def __post_init__(self):
        t = float(self.t) % TWO_PI
        if t == TWO_PI:  # float modulo can round up onto the period
            t = 0.0
        object.__setattr__(self, "t", t)

    @classmethod
    def from_pi_fraction(cls, a: int, b: int) -> PhaseParameter:
        return cls(math.pi * a / b)

    @property
    def is_periodic(self) -> bool:
        return self.t == 0.0

    @property
    def is_antiperiodic(self) -> bool:
        return self.t == math.pi

    @property
    def reduced(self) -> float:
        """Representative of ``{t, 2 pi - t}`` in ``[0, pi]``.

        Computed from the member in ``[pi, 2 pi)`` so that the subtraction
        is exact; ``t`` and ``2 pi - t`` then map to the same float.
        """
        upper = self.t if self.t >= math.pi else TWO_PI - self.t
        return TWO_PI - upper


@dataclass(frozen=True)
class DiscretizationConfig:
    N: int = 64
    eig_tol: float = 1e-12

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.eig_tol > 0:
            raise ValueError("eig_tol must be positive")


class Method(enum.Enum):
    GALERKIN = "galerkin"
    SHOOTING = "shooting"
    EXTERNAL = "external"


@dataclass(frozen=True)
class Spectrum:
    values: tuple[float, ...]
    method: Method
    t: PhaseParameter
    labels: tuple[int, ...] | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("spectrum values must be finite")
        if np.any(np.diff(vals) < 0):
            raise ValueError("spectrum values must be ascending")
        if self.labels is not None and len(self.labels) != len(self.values):
            raise ValueError("labels and values differ in length")

    def __len__(self):
        return len(self.values)


def unperturbed_value(n: int, t: float) -> float:
    return (TWO_PI * n + t) ** 2


def assign_labels(count: int, t: float) -> tuple[int, ...]:
    """Fourier labels for the ``count`` lowest eigenvalues at phase ``t``.

    The i-th sorted eigenvalue gets the index of the i-th smallest free
    value ``(2 pi n + t)^2``; exact ties go to the smaller ``|n|`` first,
    then to the negative index.
    """
    reach = count // 2 + 2
    ns = sorted(range(-reach, reach + 1), key=lambda n: (unperturbed_value(n, t), abs(n), n))
    return tuple(ns[:count])


def assemble_matrix(p: Potential, t: PhaseParameter, cfg: DiscretizationConfig) -> np.ndarray:
    N = cfg.N
    n = np.arange(-N, N + 1)
    col = np.array([p.fourier_coefficient(k) for k in range(2 * N + 1)])
    row = np.array([p.fourier_coefficient(-k) for k in range(2 * N + 1)])
    H = scipy.linalg.toeplitz(col, row).astype(complex)
    H[np.diag_indices_from(H)] += (TWO_PI * n + t.t) ** 2
    scale = max(np.max(np.abs(H)), 1.0)
    assert np.max(np.abs(H - H.conj().T)) <= 1e-14 * scale, "assembled matrix is not Hermitian"
    return H


def _check_hermitian(H: np.ndarray, herm_tol: float) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {H.shape}")
    scale = max(np.max(np.abs(H)), 1.0) if H.size else 1.0
    skew = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if skew > herm_tol * scale:
        raise NonHermitianInput(f"asymmetry {skew:.3e} exceeds {herm_tol:g} * {scale:.3e}")
    return H


def hermitian_eigenvalues(H: np.ndarray, herm_tol: float = 1e-14) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending."""
    return scipy.linalg.eigh(_check_hermitian(H, herm_tol), eigvals_only=True)


def _lowest_ritz(H: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` lowest eigenvalues, refined by Rayleigh-Ritz on their eigenvectors.

    A dense solve is accurate to ``eps * ||H||``, which for this graded
    diagonal is far worse than ``eps * lambda`` at the bottom of the
    spectrum.  Projecting onto the computed invariant subspace recovers
    eigenvalues with error relative to their own size.
    """
    H = _check_hermitian(H, 1e-14)
    _, V = scipy.linalg.eigh(H, subset_by_index=[0, k - 1])
    P = V.conj().T @ (H @ V)
    return scipy.linalg.eigh(0.5 * (P + P.conj().T), eigvals_only=True)


def spectrum_galerkin(p: Potential, t: PhaseParameter, cfg: DiscretizationConfig | None = None,
                      k: int = 20, guard: int = 8) -> Spectrum:
    """The ``k`` lowest eigenvalues of ``L_t(q)``.

    Raises NotConverged when the values at ``N`` and ``N + guard`` differ by
    more than ``1e-8`` relative.
    """
    cfg = cfg or DiscretizationConfig()
    if not 1 <= k <= 2 * cfg.N + 1:
        raise ValueError(f"k={k} outside [1, 2N+1] for N={cfg.N}")
    vals = _lowest_ritz(assemble_matrix(p, t, cfg), k)
    finer = DiscretizationConfig(cfg.N + guard, cfg.eig_tol)
    check = _lowest_ritz(assemble_matrix(p, t, finer), k)
    drift = np.abs(vals - check) / np.maximum(1.0, np.abs(check))
    if np.max(drift) > 1e-8:
        worst = int(np.argmax(drift))
        raise NotConverged(f"eigenvalue {worst} moved by {drift[worst]:.2e} (relative) "
                           f"between N={cfg.N} and N={finer.N}")
    return Spectrum(tuple(float(v) for v in vals), Method.GALERKIN, t, assign_labels(k, t.t),
                    meta={"N": cfg.N})
