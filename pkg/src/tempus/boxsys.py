"""Particle confined to [-l, l] with the twisted boundary condition
phi(-l) = exp(-2i gamma) phi(l): energies, eigenfunctions and position
matrix elements in the energy eigenbasis.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, InvalidParam

GL_NODES = 32


@dataclass(frozen=True)
class SystemConfig:
    """Physical constants in atomic units plus the boundary phase.

    ``gamma`` is kept exactly as given (within (-pi, pi]) so that a system
    and its phase-reversed partner index their bases the same way.
    """

    mass: float = 1.0
    half_length: float = 1.0
    hbar: float = 1.0
    gamma: float = math.pi / 2

    def __post_init__(self):
        if not (self.mass > 0 and self.half_length > 0 and self.hbar > 0):
            raise InvalidParam("mass, half_length and hbar must be positive")
        if not (-math.pi < self.gamma <= math.pi):
            raise InvalidParam(f"gamma={self.gamma} outside (-pi, pi]")

    def with_gamma(self, gamma: float) -> "SystemConfig":
        return SystemConfig(self.mass, self.half_length, self.hbar, gamma)

    def reversed(self) -> "SystemConfig":
        """The same system with the boundary phase reversed."""
        return self.with_gamma(-self.gamma if self.gamma != math.pi else math.pi)

    @property
    def is_periodic(self) -> bool:
        return self.gamma == 0.0


@dataclass(frozen=True)
class EnergyBasis:
    config: SystemConfig
    cutoff: int = 50

    def __post_init__(self):
        if self.cutoff < 0 or int(self.cutoff) != self.cutoff:
            raise InvalidParam("cutoff must be a non-negative integer")

    @property
    def size(self) -> int:
        return 2 * self.cutoff + 1

    @cached_property
    def indices(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        cfg = self.config
        return (cfg.gamma + self.indices * np.pi) / cfg.half_length

    @cached_property
    def energies(self) -> np.ndarray:
        cfg = self.config
        return (cfg.hbar * self.wavenumbers) ** 2 / (2 * cfg.mass)

    @property
    def degenerate(self) -> bool:
        """True when two basis states share an energy (gamma a multiple of pi/2)."""
        e = np.sort(self.energies)
        return bool(np.any(np.diff(e) <= 1e-12 * max(1.0, e[-1])))

    def position(self, k: int) -> int:
        """Array position of basis index ``k``."""
        if abs(k) > self.cutoff:
            raise IndexError(f"k={k} outside the truncation window")
        return k + self.cutoff

    def with_cutoff(self, cutoff: int) -> "EnergyBasis":
        return EnergyBasis(self.config, cutoff)

    def reversed(self) -> "EnergyBasis":
        return EnergyBasis(self.config.reversed(), self.cutoff)

    def functions(self, q) -> np.ndarray:
        """Matrix of phi_k(q): rows follow ``q``, columns follow k."""
        q = np.asarray(q, dtype=float)
        norm = 1 / math.sqrt(2 * self.config.half_length)
        return norm * np.exp(1j * np.multiply.outer(q, self.wavenumbers))

    def synthesize(self, coeffs, q) -> np.ndarray:
        """psi(q) = sum_k c_k phi_k(q)."""
        return self.functions(q) @ np.asarray(coeffs)


@dataclass
class EnergyMatrix:
    """Truncated operator in the energy eigenbasis, rows and columns k = -N..N."""

    basis: EnergyBasis
    entries: np.ndarray
    label: str = ""
    projection_defect: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        return self.basis.config.gamma

    def hermitian_defect(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def element(self, k: int, kp: int) -> complex:
        return complex(self.entries[self.basis.position(k), self.basis.position(kp)])

    def to_csv(self, path) -> None:
        """One row per k; each column k' becomes a (re, im) pair."""
        ks = self.basis.indices
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            header = ["k"]
            for kp in ks:
                header += [f"re_{kp}", f"im_{kp}"]
            w.writerow(header)
            for i, k in enumerate(ks):
                row = [int(k)]
                for z in self.entries[i]:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                w.writerow(row)


def read_matrix_csv(path, basis: EnergyBasis) -> EnergyMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    entries = data[:, 0::2] + 1j * data[:, 1::2]
    if entries.shape != (basis.size, basis.size):
        raise InvalidParam("matrix CSV does not match the basis size")
    return EnergyMatrix(basis, entries)


def energy(k: int, cfg: SystemConfig) -> float:
    return cfg.hbar**2 * (cfg.gamma + k * math.pi) ** 2 / (2 * cfg.mass * cfg.half_length**2)


def eigenfunction(k: int, q: float, cfg: SystemConfig) -> complex:
    l = cfg.half_length
    if abs(q) > l:
        raise DomainError(f"|q|={abs(q)} exceeds half-length {l}")
    return complex(np.exp(1j * q * (cfg.gamma + k * math.pi) / l) / math.sqrt(2 * l))


def composite_gauss_legendre(a: float, b: float, panels: int, nodes: int = GL_NODES):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    x0, w0 = leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    x = (edges[:-1, None] + (x0[None, :] + 1) * h[:, None] / 2).ravel()
    w = (w0[None, :] * h[:, None] / 2).ravel()
    return x, w


def panel_count(basis: EnergyBasis, per_oscillation: int = 4) -> int:
    """Panels needed so the fastest plane wave gets ``per_oscillation`` panels per period."""
    l = basis.config.half_length
    wmax = float(np.abs(basis.wavenumbers).max()) if basis.size else 0.0
    oscillations = wmax * 2 * l / (2 * math.pi)
    return max(4, int(math.ceil(per_oscillation * oscillations)))


def gram_matrix(basis: EnergyBasis) -> np.ndarray:
    """<phi_k|phi_k'> by composite quadrature; the identity up to rounding."""
    l = basis.config.half_length
    x, w = composite_gauss_legendre(-l, l, panel_count(basis))
    phi = basis.functions(x)
    return (phi.conj() * w[:, None]).T @ phi


def position_matrix(basis: EnergyBasis, power: int) -> EnergyMatrix:
    """<phi_k| q^power |phi_k'> for power 1 or 2.

    Basis wavenumbers differ by integer multiples of pi/l, which makes the
    integrals elementary.  Only the upper triangle is evaluated; the rest is
    its conjugate mirror.
    """
    if power not in (1, 2):
        raise InvalidParam("power must be 1 or 2")
    l = basis.config.half_length
    k = basis.indices
    n = k[None, :] - k[:, None]
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if power == 1:
            upper = -1j * l * sign / (n * np.pi)
            diag = 0.0
        else:
            upper = 2 * l**2 * sign / (n * np.pi) ** 2 + 0j
            diag = l**2 / 3
    out = np.triu(np.where(n > 0, upper, 0))
    out = out + out.conj().T
    np.fill_diagonal(out, diag)
    return EnergyMatrix(basis, out, label=f"q^{power}")
