"""Time operators of the confined particle.

Two families are supported:

* ArrivalTime(s): the quantized arrival time with ordering parameter ``s``,
  given by its position-space kernel and projected into the energy basis.
* Characteristic(alpha): iħ/(E_k - E_k') off the diagonal plus a real
  diagonal ``alpha`` sequence, built directly in the energy basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .boxsys import (
    GL_NODES,
    EnergyBasis,
    EnergyMatrix,
    SystemConfig,
    composite_gauss_legendre,
    energy,
    panel_count,
    read_matrix_csv,
)
from .errors import DegenerateSpectrum, DomainError, InvalidParam, QuadratureFailure, SingularGamma

SIN_GAMMA_FLOOR = 1e-12
PROJECTION_DEFECT_LIMIT = 1e-8


@dataclass(frozen=True)
class AlphaSequence:
    """Diagonal of the characteristic time operator.

    rule "zero" gives the plain characteristic operator, "power" gives
    alpha_k = c * E_k**(-p), "explicit" takes a table of (k, alpha_k) pairs
    (indices missing from the table get 0).
    """

    rule: str = "zero"
    c: float = 0.0
    p: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.rule not in {"zero", "power", "explicit"}:
            raise InvalidParam(f"unknown alpha rule {self.rule!r}")

    @classmethod
    def parse(cls, text: str) -> "AlphaSequence":
        """Parse "zero", "power:C,P" or "explicit:k=v;k=v"."""
        text = text.strip()
        if text in ("", "0", "zero"):
            return cls()
        kind, _, rest = text.partition(":")
        if kind == "power":
            try:
                c, p = (float(x) for x in rest.split(","))
            except ValueError:
                raise InvalidParam(f"bad power rule {text!r}; expected power:C,P") from None
            return cls("power", c=c, p=p)
        if kind == "explicit":
            pairs = []
            for item in filter(None, rest.split(";")):
                k, _, v = item.partition("=")
                pairs.append((int(k), float(v)))
            return cls("explicit", table=tuple(sorted(pairs)))
        raise InvalidParam(f"cannot parse alpha rule {text!r}")

    @property
    def label(self) -> str:
        if self.rule == "zero":
            return "zero"
        if self.rule == "power":
            return f"power:{self.c:g},{self.p:g}"
        return "explicit:" + ";".join(f"{k}={v:g}" for k, v in self.table)

    def values(self, basis: EnergyBasis) -> np.ndarray:
        if self.rule == "zero":
            out = np.zeros(basis.size)
        elif self.rule == "power":
            with np.errstate(divide="ignore"):
                out = self.c * basis.energies ** (-self.p)
        else:
            lookup = dict(self.table)
            out = np.array([lookup.get(int(k), 0.0) for k in basis.indices])
        if not np.all(np.isfinite(out)):
            raise InvalidParam(f"alpha rule {self.label} is not finite on this basis")
        return out


@dataclass(frozen=True)
class ArrivalTime:
    s: float = 0.0

    @property
    def label(self) -> str:
        return f"s={self.s:g}"


@dataclass(frozen=True)
class Characteristic:
    alpha: AlphaSequence = AlphaSequence()

    @property
    def label(self) -> str:
        return f"alpha={self.alpha.label}"


Family = Union[ArrivalTime, Characteristic]


@dataclass(frozen=True)
class OperatorSpec:
    family: Family
    gamma: float

    def __post_init__(self):
        if isinstance(self.family, Characteristic) and math.sin(self.gamma) == 0:
            raise DegenerateSpectrum(
                f"characteristic operator undefined at gamma={self.gamma:g}: "
                "E_k = E_-k makes iħ/(E_k - E_k') singular"
            )

    @property
    def is_arrival(self) -> bool:
        return isinstance(self.family, ArrivalTime)

    @property
    def family_name(self) -> str:
        if self.is_arrival:
            return "arrival"
        return "cto" if self.family.alpha.rule == "zero" else "gto"

    @property
    def label(self) -> str:
        return self.family.label

    def at_gamma(self, gamma: float) -> "OperatorSpec":
        return OperatorSpec(self.family, gamma)

    def check_basis(self, basis: EnergyBasis) -> None:
        if not math.isclose(basis.config.gamma, self.gamma, rel_tol=0, abs_tol=1e-15):
            raise InvalidParam(
                f"operator gamma {self.gamma} does not match basis gamma {basis.config.gamma}"
            )


def _sin_gamma(gamma: float) -> float:
    sg = math.sin(gamma)
    if abs(sg) < SIN_GAMMA_FLOOR:
        raise SingularGamma(f"sin(gamma) underflows at gamma={gamma!r}")
    return sg


def arrival_kernel(q, qp, spec: OperatorSpec, cfg: SystemConfig):
    """<q|T|q'> for the arrival-time family; broadcasts over ``q``, ``qp``."""
    if not spec.is_arrival:
        raise InvalidParam("arrival_kernel needs an ArrivalTime operator")
    q = np.asarray(q, dtype=float)
    qp = np.asarray(qp, dtype=float)
    l, mu, hbar = cfg.half_length, cfg.mass, cfg.hbar
    if np.any(np.abs(q) > l) or np.any(np.abs(qp) > l):
        raise DomainError("kernel arguments must lie in [-l, l]")
    s = spec.family.s
    g = spec.gamma
    lin = (q + qp) + 1j * s * (q - qp)
    if g == 0.0:
        out = -(mu * 1j / (4 * hbar)) * lin * np.sign(q - qp)
        out = out + (mu * 1j / (4 * hbar * l)) * ((q**2 - qp**2) - 1j * s * (q - qp) ** 2)
        return out
    pref = -mu / (4 * hbar * _sin_gamma(g))
    step = np.heaviside(q - qp, 0.5)
    return pref * (np.exp(1j * g) * step + np.exp(-1j * g) * (1 - step)) * lin


def gto_element(k: int, kp: int, spec: OperatorSpec, cfg: SystemConfig) -> complex:
    """Single entry of the characteristic operator; needs E_k != E_k' when k != k'."""
    if spec.is_arrival:
        raise InvalidParam("gto_element needs a Characteristic operator")
    if k == kp:
        basis = EnergyBasis(cfg, max(abs(k), 0))
        return complex(spec.family.alpha.values(basis)[basis.position(k)])
    diff = energy(k, cfg) - energy(kp, cfg)
    if diff == 0:
        raise DegenerateSpectrum(f"E_{k} = E_{kp}")
    return 1j * cfg.hbar / diff


def gto_matrix(spec: OperatorSpec, basis: EnergyBasis) -> EnergyMatrix:
    if spec.is_arrival:
        raise InvalidParam("gto_matrix needs a Characteristic operator")
    spec.check_basis(basis)
    e = basis.energies
    diff = e[:, None] - e[None, :]
    off = ~np.eye(basis.size, dtype=bool)
    scale = max(1.0, float(np.abs(e).max()))
    if np.any(np.abs(diff[off]) <= 1e-12 * scale):
        raise DegenerateSpectrum("two basis states share an energy; iħ/(E_k-E_k') undefined")
    hbar = basis.config.hbar
    entries = np.zeros((basis.size, basis.size), dtype=complex)
    entries[off] = 1j * hbar / diff[off]
    entries[np.diag_indices(basis.size)] = spec.family.alpha.values(basis)
    return EnergyMatrix(basis, entries, label=f"{spec.family_name} {spec.label} gamma={spec.gamma:.12g}")


def _partial_moments(basis: EnergyBasis, panels: int, nodes: int):
    """Quadrature pieces for integrals split along q = q'.

    Returns outer nodes/weights, basis values there, and the one-sided
    moments lo_j(x) = int_{-l}^{x} q'^j phi_k'(q') dq' for j = 0, 1 together
    with the full-interval totals.
    """
    l = basis.config.half_length
    x, wts = composite_gauss_legendre(-l, l, panels, nodes)
    phi = basis.functions(x)
    x0, w0 = leggauss(nodes)
    edges = np.linspace(-l, l, panels + 1)

    full0 = (wts[:, None] * phi).reshape(panels, nodes, -1).sum(axis=1)
    full1 = (wts[:, None] * x[:, None] * phi).reshape(panels, nodes, -1).sum(axis=1)
    before0 = np.vstack([np.zeros((1, basis.size)), np.cumsum(full0, axis=0)])
    before1 = np.vstack([np.zeros((1, basis.size)), np.cumsum(full1, axis=0)])

    lo0 = np.empty_like(phi)
    lo1 = np.empty_like(phi)
    for p in range(panels):
        xs = x[p * nodes:(p + 1) * nodes]
        a = edges[p]
        half = (xs - a) / 2
        inner = a + np.outer(half, x0 + 1)              # (outer, inner)
        iw = np.outer(half, w0)
        vals = basis.functions(inner)                    # (outer, inner, K)
        lo0[p * nodes:(p + 1) * nodes] = before0[p] + np.einsum("ij,ijk->ik", iw, vals)
        lo1[p * nodes:(p + 1) * nodes] = before1[p] + np.einsum("ij,ijk->ik", iw * inner, vals)
    return x, wts, phi, lo0, lo1, before0[-1], before1[-1]


def project_kernel(
    spec: OperatorSpec,
    basis: EnergyBasis,
    per_oscillation: int = 4,
    nodes: int = GL_NODES,
) -> EnergyMatrix:
    """Energy representation of an arrival-time kernel.

    The kernel is linear in q and q' on each side of the diagonal, so the
    double integral is done as an outer composite Gauss-Legendre rule whose
    inner integrals stop exactly at the kink.  The result is Hermitized and
    the discarded anti-Hermitian part is kept as ``projection_defect``.
    """
    if not spec.is_arrival:
        raise InvalidParam("project_kernel needs an ArrivalTime operator")
    spec.check_basis(basis)
    cfg = basis.config
    mu, hbar, l = cfg.mass, cfg.hbar, cfg.half_length
    s = spec.family.s
    g = spec.gamma
    panels = panel_count(basis, per_oscillation)
    x, wts, phi, lo0, lo1, tot0, tot1 = _partial_moments(basis, panels, nodes)
    hi0, hi1 = tot0 - lo0, tot1 - lo1
    bra = (wts[:, None] * phi.conj()).T                   # (K, M)
    xq = x[:, None]
    below = (1 + 1j * s) * xq * lo0 + (1 - 1j * s) * lo1  # q' < q
    above = (1 + 1j * s) * xq * hi0 + (1 - 1j * s) * hi1  # q' > q
    if g == 0.0:
        t = -(mu * 1j / (4 * hbar)) * (bra @ (below - above))
        m0 = phi.T @ wts
        m1 = phi.T @ (wts * x)
        m2 = phi.T @ (wts * x**2)
        c0, c1, c2 = bra.sum(axis=1), bra @ x, bra @ x**2
        t += (mu * 1j / (4 * hbar * l)) * (
            (1 - 1j * s) * np.outer(c2, m0)
            - (1 + 1j * s) * np.outer(c0, m2)
            + 2j * s * np.outer(c1, m1)
        )
    else:
        pref = -mu / (4 * hbar * _sin_gamma(g))
        t = pref * (np.exp(1j * g) * (bra @ below) + np.exp(-1j * g) * (bra @ above))
    defect = float(np.abs(t - t.conj().T).max())
    if defect > PROJECTION_DEFECT_LIMIT:
        raise QuadratureFailure(f"projected kernel anti-Hermitian part {defect:.2e} too large")
    entries = (t + t.conj().T) / 2
    return EnergyMatrix(
        basis,
        entries,
        label=f"arrival {spec.label} gamma={g:.12g}",
        projection_defect=defect,
        meta={"panels": panels, "nodes": nodes},
    )


def build_matrix(spec: OperatorSpec, basis: EnergyBasis) -> EnergyMatrix:
    if spec.is_arrival:
        return project_kernel(spec, basis)
    return gto_matrix(spec, basis)


def hamiltonian_diagonal(basis: EnergyBasis) -> np.ndarray:
    return basis.energies.copy()
