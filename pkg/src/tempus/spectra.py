"""Eigenvalues and eigenvectors of the time operators.

Two independent routes are provided.  Route A diagonalizes the truncated
energy-basis matrix.  Route B finds the roots r of the closed-form
characteristic equations built from confluent hypergeometric functions and
converts them to eigenvalues through tau = mu l^2 / (2 hbar r).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .boxsys import EnergyBasis, EnergyMatrix, SystemConfig
from .errors import (
    AmbiguousRoot,
    FormUnavailable,
    InvalidParam,
    NonConvergent,
    NoRootInRange,
    NotHermitian,
)
from .specfun import hyp_1f1, hyp_2f2
from .timeops import OperatorSpec, build_matrix

HERMITIAN_LIMIT = 1e-8
ROOT_TOL = 1e-8
# refined minima above this fraction of the bracket maximum are not roots
NON_ROOT_FLOOR = 1e-3
MATCH_GUARD = 0.10
SECTORS = ("general", "even", "odd")
VARIANTS = ("corrected", "printed", "half")


@dataclass(frozen=True)
class ClosedForm:
    """Parameters of a hypergeometric eigenfunction.

    ``alpha1_or_A1`` is the odd-part coefficient: alpha_1 for the general
    form, A_1 for the odd sector, and the constant mixing coefficient for
    the even sector at gamma = 0.
    """

    A0: complex
    alpha1_or_A1: complex
    r: float
    nu: int
    sector: str
    variant: str = "corrected"


@dataclass
class Eigenpair:
    tau: float
    coeffs: Optional[np.ndarray] = None
    basis: Optional[EnergyBasis] = None
    sector: str = "general"
    route: str = "A"
    closed_form: Optional[ClosedForm] = None
    convergence_delta: float = float("nan")
    index: int = 0

    @property
    def r(self) -> float:
        cfg = self.basis.config if self.basis is not None else SystemConfig()
        return tau_to_r(self.tau, cfg)


def tau_to_r(tau: float, cfg: SystemConfig) -> float:
    return cfg.mass * cfg.half_length**2 / (2 * cfg.hbar * tau)


def r_to_tau(r: float, cfg: SystemConfig) -> float:
    return cfg.mass * cfg.half_length**2 / (2 * cfg.hbar * r)


# ---------------------------------------------------------------- Route A

def parity_partner(basis: EnergyBasis) -> np.ndarray:
    """Position of phi_j with phi_k(-q) = phi_j(q) for every k, or -1 when j
    falls outside the window.  Only defined when 2*gamma/pi is an integer."""
    m = 2 * basis.config.gamma / math.pi
    if abs(m - round(m)) > 1e-12:
        raise InvalidParam("parity does not preserve this basis")
    partner = -basis.indices - int(round(m))
    pos = partner + basis.cutoff
    return np.where((pos >= 0) & (pos < basis.size), pos, -1)


def parity_expectation(coeffs: np.ndarray, basis: EnergyBasis) -> float:
    pos = parity_partner(basis)
    ok = pos >= 0
    return float(np.real(np.vdot(coeffs[pos[ok]], coeffs[ok])))


def has_parity(gamma: float) -> bool:
    m = 2 * gamma / math.pi
    return abs(m - round(m)) < 1e-12


def diagonalize(matrix: EnergyMatrix, reference: Optional[EnergyMatrix] = None) -> list[Eigenpair]:
    """Full spectrum of a Hermitian energy matrix, sorted by |tau| ascending.

    Eigenvectors carry a parity sector label when the basis is closed under
    parity.  If ``reference`` (the same operator at a larger cutoff) is given,
    each eigenvalue records the relative distance to its nearest reference
    eigenvalue as ``convergence_delta``.
    """
    entries = matrix.entries
    defect = float(np.abs(entries - entries.conj().T).max()) if entries.size else 0.0
    if defect > HERMITIAN_LIMIT:
        raise NotHermitian(f"matrix anti-Hermitian part {defect:.2e} exceeds {HERMITIAN_LIMIT:g}")
    vals, vecs = np.linalg.eigh(entries)
    order = np.argsort(np.abs(vals), kind="stable")
    ref = None
    if reference is not None:
        ref = np.sort(np.linalg.eigvalsh(reference.entries))
    basis = matrix.basis
    parity = has_parity(basis.config.gamma)
    pairs = []
    for n, j in enumerate(order):
        c = vecs[:, j]
        # fix the global phase so the largest coefficient is real positive
        big = np.argmax(np.abs(c))
        c = c * (abs(c[big]) / c[big])
        sector = "general"
        if parity:
            sector = "even" if parity_expectation(c, basis) > 0 else "odd"
        delta = float("nan")
        if ref is not None:
            near = ref[np.argmin(np.abs(ref - vals[j]))]
            delta = float(abs(near - vals[j]) / max(abs(vals[j]), np.finfo(float).tiny))
        pairs.append(Eigenpair(float(vals[j]), c, basis, sector, "A", None, delta, n))
    return pairs


def solve(spec: OperatorSpec, basis: EnergyBasis, reference: bool = True) -> list[Eigenpair]:
    """Route A at cutoff N, with a 2N rerun for the convergence flag."""
    matrix = build_matrix(spec, basis)
    ref = build_matrix(spec, basis.with_cutoff(2 * basis.cutoff)) if reference else None
    return diagonalize(matrix, ref)


def in_sector(pairs: Sequence[Eigenpair], sector: str) -> list[Eigenpair]:
    if sector == "general":
        return list(pairs)
    return [p for p in pairs if p.sector == sector]


def pairing_defect(taus: Sequence[float], count: Optional[int] = None, floor: float = 1e-12) -> float:
    """Worst relative mismatch between each positive eigenvalue and the
    nearest negative eigenvalue in magnitude.  ``count`` limits the check to
    that many positive eigenvalues of smallest magnitude; eigenvalues below
    ``floor`` times the largest magnitude count as zero and are skipped."""
    taus = np.asarray(taus, dtype=float)
    if taus.size:
        taus = taus[np.abs(taus) > floor * np.abs(taus).max()]
    pos = np.sort(taus[taus > 0])
    neg = np.sort(-taus[taus < 0])
    if count is not None:
        pos = pos[:count]
    if pos.size == 0 or neg.size == 0:
        return float("inf")
    nearest = neg[np.abs(neg[None, :] - pos[:, None]).argmin(axis=1)]
    return float(np.max(np.abs(nearest - pos) / pos))


# ---------------------------------------------------------------- Route B

@dataclass(frozen=True)
class CharacteristicSystem:
    """The 2x2 system whose determinant vanishes at an eigenvalue."""

    T11: Callable
    T12: Callable
    T21: Callable
    T22: Callable

    def determinant(self, r):
        return self.T11(r) * self.T22(r) - self.T21(r) * self.T12(r)


def _params(s: float):
    return (3 + 1j * s) / 4, (5 + 1j * s) / 4


def characteristic_system(spec: OperatorSpec, cfg: SystemConfig) -> CharacteristicSystem:
    if not spec.is_arrival:
        raise InvalidParam("closed forms exist only for the arrival-time family")
    g = spec.gamma
    sg = math.sin(g)
    if abs(sg) < 1e-12:
        raise InvalidParam("the general characteristic system is singular at gamma = 0")
    s = spec.family.s
    l = cfg.half_length
    a, b = _params(s)
    em, ep = np.exp(-1j * g), np.exp(1j * g)

    def F(p, q, r):
        return hyp_1f1(p, q, -1j * np.asarray(r, dtype=float), fallback=True)

    return CharacteristicSystem(
        T11=lambda r: F(a, 0.5, r) - r * em * (1 + 1j * s) / sg * F(a, 1.5, r),
        T12=lambda r: -l * F(b, 1.5, r) + r * em * l * (1 - 1j * s) / (3 * sg) * F(b, 2.5, r),
        T21=lambda r: F(a, 0.5, r) + r * ep * (1 + 1j * s) / sg * F(a, 1.5, r),
        T22=lambda r: l * F(b, 1.5, r) + r * ep * l * (1 - 1j * s) / (3 * sg) * F(b, 2.5, r),
    )


def _sector_allowed(gamma: float, sector: str) -> None:
    if sector not in SECTORS:
        raise InvalidParam(f"unknown sector {sector!r}")
    if sector == "general":
        if gamma == 0.0:
            raise InvalidParam("at gamma = 0 choose the even or odd sector")
        return
    if gamma not in (0.0, math.pi / 2):
        raise InvalidParam("parity sectors exist only at gamma = 0 and gamma = pi/2")


def characteristic_function(
    spec: OperatorSpec, sector: str, cfg: SystemConfig, variant: str = "corrected"
) -> Callable:
    """f(r) whose real roots give the eigenvalues of one sector.

    ``variant`` picks between the consistent form of each equation
    ("corrected") and alternative forms kept for comparison ("printed").
    """
    if not spec.is_arrival:
        raise InvalidParam("closed forms exist only for the arrival-time family")
    if variant not in VARIANTS:
        raise InvalidParam(f"unknown variant {variant!r}")
    g = spec.gamma
    _sector_allowed(g, sector)
    s = spec.family.s
    a, b = _params(s)
    l = cfg.half_length

    def F(p, q, r):
        return hyp_1f1(p, q, -1j * np.asarray(r, dtype=float), fallback=True)

    if sector == "general":
        return characteristic_system(spec, cfg).determinant
    if g != 0.0:  # gamma = pi/2
        if sector == "even":
            if variant == "printed":
                return lambda r: -1j * r * (1 + 1j * s) / l * F(a, 1.5, r) + F(a, 0.5, r)
            return lambda r: F(a, 0.5, r) + 1j * r * (1 + 1j * s) * F(a, 1.5, r)
        return lambda r: F(b, 1.5, r) + 1j * r * (1 - 1j * s) / 3 * F(b, 2.5, r)
    if sector == "odd":
        kappa = (1 - 1j * s) if variant == "printed" else (1 - 3j * s)
        return lambda r: F(b, 1.5, r) + 1j * r * kappa / 3 * F(b, 2.5, r)

    def even0(r):
        r = np.asarray(r, dtype=float)
        head = 1j * r * (1 + 1j * s) / 3 * hyp_2f2(1.5, a, 0.5, 2.5, -1j * r, fallback=True)
        mid = (2 * (1 - 1j * s) - 2 * r * s * (3 + 1j * s) + 2j * r / 3 * (1 + s**2)) / (1 + 3j * s)
        return head + mid * F(a, 1.5, r) + F(a, 0.5, r)

    return even0


def _refine(f: Callable, lo: float, hi: float) -> tuple[float, float]:
    """Bounded Brent on |f|, then Gauss-Newton steps on the complex residual."""
    lo, hi = min(lo, hi), max(lo, hi)
    res = minimize_scalar(
        lambda r: float(np.abs(f(r))),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13 * max(abs(lo), abs(hi)), "maxiter": 500},
    )
    r, val = float(res.x), complex(f(res.x))
    h = 1e-6 * (hi - lo)
    for _ in range(4):
        slope = (complex(f(r + h)) - complex(f(r - h))) / (2 * h)
        if slope == 0:
            break
        trial = r - (np.conj(slope) * val).real / abs(slope) ** 2
        if not lo <= trial <= hi:
            break
        new = complex(f(trial))
        if abs(new) >= abs(val):
            break
        r, val = trial, new
    return r, abs(val)


@dataclass
class RootScan:
    roots: list
    window: float
    truncated: bool
    rejected: list = field(default_factory=list)


def scan_roots(
    f: Callable,
    sign: int,
    r_min: float = 0.05,
    r_max: float = 500.0,
    points_per_decade: int = 400,
    tol: float = ROOT_TOL,
    stop_after: Optional[int] = None,
    chunk: int = 64,
) -> RootScan:
    """Roots of |f| along one sign of r, in order of increasing |r|.

    |f| is sampled on a geometric grid.  Each local minimum is refined and
    accepted when |f| falls below ``tol`` times the largest |f| between its
    neighbouring minima.  Sampling stops after ``stop_after`` roots, at
    ``r_max``, or where f raises NonConvergent.
    """
    count = max(3, int(math.ceil(points_per_decade * math.log10(r_max / r_min))) + 1)
    grid = sign * np.geomspace(r_min, r_max, count)
    mags = np.empty(0)
    truncated = False
    verdicts: dict[int, tuple[str, float]] = {}
    while mags.size < grid.size:
        part = grid[mags.size:mags.size + chunk]
        try:
            mags = np.concatenate([mags, np.abs(np.atleast_1d(f(part)))])
        except NonConvergent:
            truncated = True
            break
        done = mags.size == grid.size
        minima = [i for i in range(1, mags.size - 1)
                  if mags[i] <= mags[i - 1] and mags[i] < mags[i + 1]]
        cuts = [0] + minima + [mags.size - 1]
        for j, i in enumerate(minima):
            if i in verdicts or (j == len(minima) - 1 and not done):
                continue  # bracket not closed yet
            scale = float(mags[cuts[j]:cuts[j + 2] + 1].max())
            r, val = _refine(f, grid[i - 1], grid[i + 1])
            if val < tol * scale:
                verdicts[i] = ("root", r)
            elif val > NON_ROOT_FLOOR * scale:
                verdicts[i] = ("rejected", r)
            else:
                raise AmbiguousRoot(
                    f"minimum of |f| near r={r:.6g} stalls at {val:.2e} relative to {scale:.2e}"
                )
        roots = [v for _, (kind, v) in sorted(verdicts.items()) if kind == "root"]
        if stop_after is not None and len(roots) >= stop_after:
            return RootScan(roots[:stop_after], abs(roots[stop_after - 1]), False,
                            [v for kind, v in verdicts.values() if kind == "rejected"])
    roots = [v for _, (kind, v) in sorted(verdicts.items()) if kind == "root"]
    window = float(abs(grid[mags.size - 1])) if mags.size else r_min
    return RootScan(roots, window, truncated, [v for kind, v in verdicts.values() if kind == "rejected"])


def characteristic_roots(
    spec: OperatorSpec,
    sector: str,
    count: int,
    cfg: Optional[SystemConfig] = None,
    branch: str = "both",
    variant: str = "corrected",
    r_min: float = 0.05,
    r_max: float = 500.0,
    points_per_decade: int = 400,
) -> list[float]:
    """The ``count`` roots of smallest |r|, signed so that sign(r) = sign(tau).

    ``branch`` is "+", "-" or "both".  When both branches are scanned, only
    roots inside the range reached by both scans are eligible so no smaller
    root on the shorter side can be skipped.
    """
    if count < 1:
        raise InvalidParam("count must be at least 1")
    cfg = cfg or SystemConfig(gamma=spec.gamma)
    f = characteristic_function(spec, sector, cfg, variant)
    signs = {"+": (1,), "-": (-1,), "both": (1, -1)}.get(branch)
    if signs is None:
        raise InvalidParam(f"unknown branch {branch!r}")
    scans = [scan_roots(f, sg, r_min, r_max, points_per_decade, stop_after=count) for sg in signs]
    window = min(sc.window for sc in scans)
    roots = sorted((r for sc in scans for r in sc.roots if abs(r) <= window), key=abs)
    if len(roots) < count:
        raise NoRootInRange(
            f"found {len(roots)} of {count} roots with |r| <= {window:.4g} "
            f"({'series range exhausted' if any(sc.truncated for sc in scans) else 'scan window exhausted'})"
        )
    return roots[:count]


def alpha1_ratio(spec: OperatorSpec, r: float, cfg: SystemConfig) -> complex:
    """Odd-part coefficient of the general eigenfunction for A_0 = 1."""
    s = spec.family.s
    a, b = _params(s)
    g = spec.gamma
    z = -1j * r
    num = 3 * hyp_1f1(a, 1.5, z) * (1j - s) * r
    den = cfg.half_length * math.tan(g) * (
        r * (1 - 1j * s) * hyp_1f1(b, 2.5, z) - 3j * hyp_1f1(b, 1.5, z)
    )
    return complex(num / den)


def _shape(spec: OperatorSpec, cf: ClosedForm, q: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    s = spec.family.s
    a, b = _params(s)
    l = cfg.half_length
    z = -1j * cf.r * q**2 / l**2
    g = spec.gamma
    if cf.sector == "odd":
        return cf.alpha1_or_A1 * q * hyp_1f1(b, 1.5, z)
    if cf.sector == "general":
        return cf.A0 * hyp_1f1(a, 0.5, z) + cf.alpha1_or_A1 * q * hyp_1f1(b, 1.5, z)
    if g != 0.0:
        return cf.A0 * hyp_1f1(a, 0.5, z)
    mix = cf.alpha1_or_A1
    if cf.variant == "corrected":
        return cf.A0 * (hyp_1f1(a, 0.5, z) + mix * hyp_1f1(a, 1.5, -1j * cf.r))
    if cf.variant == "half":
        return cf.A0 * (hyp_1f1(a, 0.5, z) + mix * hyp_1f1(a, 1.5, z))
    return cf.A0 * (1 + mix) * hyp_1f1(a, 1.5, z)


def closed_form_for(spec: OperatorSpec, sector: str, r: float, cfg: SystemConfig,
                    variant: str = "corrected") -> ClosedForm:
    """Unnormalized closed-form parameters for a root ``r``."""
    g = spec.gamma
    _sector_allowed(g, sector)
    s = spec.family.s
    nu = 1 if r > 0 else -1
    if sector == "general":
        return ClosedForm(1.0, alpha1_ratio(spec, r, cfg), r, nu, sector, variant)
    if sector == "odd":
        return ClosedForm(0.0, 1.0, r, nu, sector, variant)
    mix = 2 * (1 - 1j * s) / (1 + 3j * s) if g == 0.0 else 0.0
    return ClosedForm(1.0, mix, r, nu, sector, variant)


def route_b(
    spec: OperatorSpec,
    sector: str,
    count: int,
    cfg: Optional[SystemConfig] = None,
    **kw,
) -> list[Eigenpair]:
    """Eigenpairs from the characteristic equations, closed form attached."""
    cfg = cfg or SystemConfig(gamma=spec.gamma)
    variant = kw.get("variant", "corrected")
    out = []
    for n, r in enumerate(characteristic_roots(spec, sector, count, cfg, **kw)):
        cf = closed_form_for(spec, sector, r, cfg, variant)
        out.append(Eigenpair(r_to_tau(r, cfg), None, None, sector, "B", cf, float("nan"), n))
    return out


@dataclass
class RouteMatch:
    route_b: Eigenpair
    route_a: Optional[Eigenpair]
    rel_error: float

    @property
    def matched(self) -> bool:
        return self.route_a is not None


def match_routes(b_pairs: Sequence[Eigenpair], a_pairs: Sequence[Eigenpair],
                 guard: float = MATCH_GUARD) -> list[RouteMatch]:
    """Nearest Route-A eigenvalue for each Route-B root.

    Matches further away than ``guard`` (relative) are reported with
    ``route_a=None`` rather than dropped.
    """
    out = []
    for bp in b_pairs:
        pool = in_sector(a_pairs, bp.sector)
        if not pool:
            out.append(RouteMatch(bp, None, float("inf")))
            continue
        taus = np.array([p.tau for p in pool])
        j = int(np.argmin(np.abs(taus - bp.tau)))
        rel = abs(taus[j] - bp.tau) / abs(bp.tau)
        out.append(RouteMatch(bp, pool[j] if rel <= guard else None, float(rel)))
    return out


@dataclass
class EigenfunctionSample:
    q: np.ndarray
    values: np.ndarray
    overlap: Optional[float]


def _weights(q: np.ndarray) -> np.ndarray:
    # trapezoid weights on an arbitrary increasing grid
    w = np.zeros_like(q)
    d = np.diff(q)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def assemble_eigenfunction(
    pair: Eigenpair,
    spec: OperatorSpec,
    qgrid,
    cfg: Optional[SystemConfig] = None,
    reference: Optional[Eigenpair] = None,
    weights=None,
) -> EigenfunctionSample:
    """Closed-form eigenfunction on ``qgrid``, normalized by quadrature.

    When ``reference`` (a Route-A eigenpair) is given, the modulus of its
    overlap with the closed form is reported.  ``weights`` default to the
    trapezoid rule on the sorted grid.
    """
    if pair.closed_form is None:
        raise FormUnavailable("eigenpair carries no closed-form parameters")
    cf = pair.closed_form
    if cf.sector != "general" and not (spec.gamma in (0.0, math.pi / 2)):
        raise FormUnavailable(f"no {cf.sector} closed form at gamma={spec.gamma}")
    if cf.sector == "general" and spec.gamma in (0.0, math.pi / 2):
        raise FormUnavailable("the general closed form degenerates at this gamma")
    cfg = cfg or SystemConfig(gamma=spec.gamma)
    q = np.asarray(qgrid, dtype=float)
    w = _weights(q) if weights is None else np.asarray(weights, dtype=float)
    vals = np.asarray(_shape(spec, cf, q, cfg), dtype=complex)
    norm = math.sqrt(float(np.sum(w * np.abs(vals) ** 2)))
    vals = vals / norm
    overlap = None
    if reference is not None:
        ref = reference.basis.synthesize(reference.coeffs, q)
        ref_norm = math.sqrt(float(np.sum(w * np.abs(ref) ** 2)))
        overlap = float(abs(np.sum(w * vals.conj() * ref)) / ref_norm)
    return EigenfunctionSample(q, vals, overlap)


# ---------------------------------------------------------------- CCR

@dataclass(frozen=True)
class CanonicalTrialVector:
    """Zero-sum coefficient vector supported away from the window edges."""

    coeffs: np.ndarray
    basis: EnergyBasis
    margin: int = 5

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.basis.size,):
            raise InvalidParam("trial vector length must match the basis")
        if abs(c.sum()) > 1e-12 * max(1.0, float(np.abs(c).sum())):
            raise InvalidParam("trial vector coefficients must sum to zero")
        edge = np.abs(self.basis.indices) > self.basis.cutoff - self.margin
        if np.any(c[edge] != 0):
            raise InvalidParam(f"trial vector support must stay {self.margin} indices from +-N")

    @classmethod
    def random(cls, basis: EnergyBasis, rng: np.random.Generator, margin: int = 5,
               support: Optional[int] = None) -> "CanonicalTrialVector":
        inner = np.flatnonzero(np.abs(basis.indices) <= basis.cutoff - margin)
        if inner.size < 2:
            raise InvalidParam("basis too small for an interior trial vector")
        if support is not None:
            inner = np.sort(rng.choice(inner, size=min(support, inner.size), replace=False))
        c = np.zeros(basis.size, dtype=complex)
        c[inner] = rng.normal(size=inner.size) + 1j * rng.normal(size=inner.size)
        c[inner] -= c[inner].mean()
        return cls(c / np.linalg.norm(c), basis, margin)

    @classmethod
    def difference(cls, basis: EnergyBasis, k: int, kp: int) -> "CanonicalTrialVector":
        c = np.zeros(basis.size, dtype=complex)
        c[basis.position(k)] = 1 / math.sqrt(2)
        c[basis.position(kp)] = -1 / math.sqrt(2)
        return cls(c, basis)


def commutator(matrix: EnergyMatrix) -> np.ndarray:
    """TH - HT with H diagonal in the energy basis."""
    e = matrix.basis.energies
    return matrix.entries * (e[None, :] - e[:, None])


def ccr_residual(matrix: EnergyMatrix, trial, sign: int = 1) -> float:
    """|| (TH - HT)c - sign*i*hbar*c || / ||c||.

    ``trial`` may also be a bare coefficient vector so residuals off the
    canonical domain can be reported.
    """
    c = np.asarray(trial.coeffs if isinstance(trial, CanonicalTrialVector) else trial, dtype=complex)
    hbar = matrix.basis.config.hbar
    out = commutator(matrix) @ c - sign * 1j * hbar * c
    return float(np.linalg.norm(out) / np.linalg.norm(c))


# ---------------------------------------------------------------- export

SPECTRUM_HEADER = ["n", "tau", "route", "sector", "s_or_alpha_rule", "N", "convergence_delta"]


def write_spectrum_csv(path, groups: Sequence[tuple[str, Sequence[Eigenpair]]],
                       cutoff: Optional[int] = None) -> None:
    """``groups`` pairs an operator label (s value or alpha rule) with its eigenpairs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for rule, pairs in groups:
            for p in pairs:
                n_val = p.basis.cutoff if p.basis is not None else ("" if cutoff is None else cutoff)
                delta = "" if math.isnan(p.convergence_delta) else repr(float(p.convergence_delta))
                w.writerow([p.index, repr(p.tau), p.route, p.sector, rule, n_val, delta])
