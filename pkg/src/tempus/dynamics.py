"""Free evolution inside the box and the diagnostics built on it.

States live in the energy basis, where evolution is a diagonal phase, so
every quantity here is exact up to the basis truncation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .boxsys import EnergyBasis, position_matrix
from .errors import InvalidParam, NormDrift
from .spectra import Eigenpair

NORM_TOL = 1e-6
DEFAULT_SAMPLES = 2001
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class EvolvingState:
    coeffs: np.ndarray
    basis: EnergyBasis

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.basis.size,):
            raise InvalidParam("coefficient vector does not match the basis")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_eigenpair(cls, pair: Eigenpair) -> "EvolvingState":
        c = np.asarray(pair.coeffs, dtype=complex)
        return cls(c / np.linalg.norm(c), pair.basis)

    @classmethod
    def basis_state(cls, basis: EnergyBasis, k: int) -> "EvolvingState":
        c = np.zeros(basis.size, dtype=complex)
        c[basis.position(k)] = 1
        return cls(c, basis)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def wavefunction(self, q) -> np.ndarray:
        return self.basis.synthesize(self.coeffs, q)


def phases(basis: EnergyBasis, t) -> np.ndarray:
    """exp(-i E_k t / hbar); rows follow ``t`` when it is an array."""
    hbar = basis.config.hbar
    return np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), basis.energies) / hbar)


def evolve(state: EvolvingState, t: float) -> EvolvingState:
    return EvolvingState(phases(state.basis, t) * state.coeffs, state.basis)


def trajectory(state: EvolvingState, tgrid) -> np.ndarray:
    """Coefficients at every time in ``tgrid``, shape (len(tgrid), K)."""
    return phases(state.basis, tgrid) * state.coeffs[None, :]


def reverse_state(state: EvolvingState) -> EvolvingState:
    """Time reversal psi -> conj(psi), expressed in the phase-reversed basis.

    conj(phi_k) at gamma is phi_{-k} at -gamma, so the coefficients are
    conjugated and mirrored.
    """
    return EvolvingState(state.coeffs[::-1].conj(), state.basis.reversed())


def default_tgrid(span: float, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, 2 * abs(span), samples)


def _parabolic(t: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex of the parabola through samples i-1, i, i+1."""
    if i <= 0 or i >= t.size - 1:
        return float(t[i]), float(y[i])
    t0, t1, t2 = t[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    d01, d12 = (y1 - y0) / (t1 - t0), (y2 - y1) / (t2 - t1)
    curv = (d12 - d01) / (t2 - t0)
    if curv == 0:
        return float(t1), float(y1)
    slope = d01 + curv * (t1 - t0)  # derivative at t1
    tv = float(np.clip(t1 - slope / (2 * curv), t0, t2))
    yv = float(y1 + slope * (tv - t1) + curv * (tv - t1) ** 2)
    return tv, yv


def _extremum(t: np.ndarray, y: np.ndarray, sign: int) -> tuple[float, float]:
    """Global extremum (sign=+1 max, -1 min), earliest on ties, refined locally."""
    z = sign * y
    best = z.max()
    tol = TIE_RTOL * max(1.0, float(np.abs(z).max()))
    i = int(np.flatnonzero(z >= best - tol)[0])
    tv, zv = _parabolic(t, z, i)
    return tv, sign * zv


@dataclass
class CarpetGrid:
    qgrid: np.ndarray
    tgrid: np.ndarray
    density: np.ndarray
    norms: np.ndarray = field(repr=False)


def _trapezoid_weights(q: np.ndarray) -> np.ndarray:
    w = np.zeros_like(q)
    d = np.diff(q)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def carpet(state: EvolvingState, qgrid, tgrid, norm_tol: float = NORM_TOL) -> CarpetGrid:
    """|psi(q, t)|^2 with rows following ``tgrid`` and columns ``qgrid``.

    Each time slice is integrated with the trapezoid rule; ``qgrid`` should
    therefore span [-l, l] densely enough to resolve the highest mode.
    """
    q = np.asarray(qgrid, dtype=float)
    t = np.asarray(tgrid, dtype=float)
    l = state.basis.config.half_length
    if np.any(np.abs(q) > l):
        raise InvalidParam("qgrid must lie inside [-l, l]")
    psi = trajectory(state, t) @ state.basis.functions(q).T
    density = np.abs(psi) ** 2
    norms = density @ _trapezoid_weights(q)
    drift = float(np.abs(norms - 1).max()) if norms.size else 0.0
    if drift > norm_tol:
        raise NormDrift(f"time-slice norm deviates from 1 by {drift:.2e} (limit {norm_tol:g})")
    return CarpetGrid(q, t, density, norms)


@dataclass
class VarianceSeries:
    tgrid: np.ndarray
    sigma2: np.ndarray
    t_min: float
    sigma2_min: float
    tau: Optional[float] = None
    sigma2_at_tau: Optional[float] = None

    @property
    def arrival_offset(self) -> Optional[float]:
        return None if self.tau is None else abs(self.t_min - self.tau)


def variance_from_coeffs(coeffs: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """sigma^2 for each row of ``coeffs``."""
    c = np.atleast_2d(coeffs)
    norm = np.einsum("ij,ij->i", c.conj(), c).real
    mean = np.einsum("ij,ij->i", c.conj(), c @ q1.T).real / norm
    mean2 = np.einsum("ij,ij->i", c.conj(), c @ q2.T).real / norm
    return mean2 - mean**2


def variance_series(state: EvolvingState, tgrid=None, tau: Optional[float] = None) -> VarianceSeries:
    """Position variance along ``tgrid`` and its refined minimum.

    With no ``tgrid`` the default covers [0, 2|tau|].
    """
    if tgrid is None:
        if tau is None:
            raise InvalidParam("give either tgrid or tau")
        tgrid = default_tgrid(tau)
    t = np.asarray(tgrid, dtype=float)
    q1 = position_matrix(state.basis, 1).entries
    q2 = position_matrix(state.basis, 2).entries
    sigma2 = variance_from_coeffs(trajectory(state, t), q1, q2)
    t_min, s_min = _extremum(t, sigma2, -1)
    at_tau = None
    if tau is not None:
        at_tau = float(variance_from_coeffs(evolve(state, tau).coeffs, q1, q2)[0])
    return VarianceSeries(t, sigma2, t_min, s_min, tau, at_tau)


@dataclass
class TransitionSeries:
    tgrid: np.ndarray
    prob: np.ndarray
    t_max: float
    p_max: float
    pair: tuple
    tau_diff: float


def transition_series(first: Eigenpair, second: Eigenpair, tgrid=None) -> TransitionSeries:
    """P_t = |<c', U_t c>|^2 for the transition first -> second."""
    if first.basis != second.basis:
        raise InvalidParam("eigenpairs come from different bases")
    tau_diff = second.tau - first.tau
    t = default_tgrid(tau_diff) if tgrid is None else np.asarray(tgrid, dtype=float)
    amp = trajectory(EvolvingState(first.coeffs, first.basis), t) @ second.coeffs.conj()
    prob = np.clip(np.abs(amp) ** 2, 0.0, 1.0)
    t_max, p_max = _extremum(t, prob, +1)
    return TransitionSeries(t, prob, t_max, min(p_max, 1.0), (first.index, second.index), tau_diff)


@dataclass
class TransitionLaw:
    tau_diff: np.ndarray
    t_max: np.ndarray
    heights: np.ndarray
    slope: float
    slope_band: tuple = (0.9, 1.1)
    min_height: float = 0.9

    @property
    def slope_ok(self) -> bool:
        return self.slope_band[0] <= self.slope <= self.slope_band[1]

    @property
    def heights_ok(self) -> bool:
        return bool(np.all(self.heights > self.min_height))

    @property
    def holds(self) -> bool:
        return self.slope_ok and self.heights_ok


def adjacent_pairs(pairs: Sequence[Eigenpair], count: int = 10) -> list[tuple[Eigenpair, Eigenpair]]:
    """Neighbouring eigenvalues among the first ``count`` (by |tau|), in
    ascending order of tau so each transition runs forward in time."""
    chosen = sorted(sorted(pairs, key=lambda p: abs(p.tau))[:count], key=lambda p: p.tau)
    return list(zip(chosen[:-1], chosen[1:]))


def transition_law(
    pairs: Sequence[Eigenpair],
    count: int = 10,
    slope_band: tuple = (0.9, 1.1),
    min_height: float = 0.9,
    samples: int = DEFAULT_SAMPLES,
) -> TransitionLaw:
    """Regress peak times on eigenvalue gaps through the origin."""
    diffs, tmax, heights = [], [], []
    for a, b in adjacent_pairs(pairs, count):
        series = transition_series(a, b, default_tgrid(b.tau - a.tau, samples))
        diffs.append(series.tau_diff)
        tmax.append(series.t_max)
        heights.append(series.p_max)
    x, y = np.array(diffs), np.array(tmax)
    slope = float(x @ y / (x @ x))
    return TransitionLaw(x, y, np.array(heights), slope, tuple(slope_band), min_height)


def write_carpet_csv(path, grid: CarpetGrid) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "t", "density"])
        for i, t in enumerate(grid.tgrid):
            for j, q in enumerate(grid.qgrid):
                w.writerow([repr(float(q)), repr(float(t)), repr(float(grid.density[i, j]))])


def write_variance_csv(path, series: VarianceSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "sigma2"])
        for t, v in zip(series.tgrid, series.sigma2):
            w.writerow([repr(float(t)), repr(float(v))])
        w.writerow(["t_min", repr(series.t_min)])
        w.writerow(["sigma2_min", repr(series.sigma2_min)])
        if series.tau is not None:
            w.writerow(["tau", repr(float(series.tau))])
            w.writerow(["sigma2_at_tau", repr(series.sigma2_at_tau)])


def write_transition_csv(path, series: TransitionSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "prob"])
        for t, p in zip(series.tgrid, series.prob):
            w.writerow([repr(float(t)), repr(float(p))])
        w.writerow(["t_max", repr(series.t_max)])
        w.writerow(["p_max", repr(series.p_max)])
        w.writerow(["tau_diff", repr(float(series.tau_diff))])
