"""Parity and time reversal acting on energy-basis matrices.

Both maps send the basis at gamma to the basis at -gamma:
phi_k(-q) and conj(phi_k(q)) at gamma are both phi_{-k} at -gamma.  On a
symmetric window k = -N..N this is an index flip, so the relations between
an operator at gamma and its partner at -gamma are checked entry by entry
in the -gamma basis.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .boxsys import EnergyBasis, EnergyMatrix
from .timeops import OperatorSpec, build_matrix

EXACT_TOL = 1e-6
PROJECTED_TOL = 1e-4


def apply_parity(matrix: EnergyMatrix) -> EnergyMatrix:
    """Pi^-1 M Pi, expressed in the phase-reversed basis."""
    return EnergyMatrix(matrix.basis.reversed(), matrix.entries[::-1, ::-1].copy(),
                        label=f"parity({matrix.label})")


def apply_time_reversal(matrix: EnergyMatrix) -> EnergyMatrix:
    """Theta^-1 M Theta, expressed in the phase-reversed basis."""
    return EnergyMatrix(matrix.basis.reversed(), matrix.entries[::-1, ::-1].conj(),
                        label=f"reversal({matrix.label})")


def relative_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))


@dataclass(frozen=True)
class SymmetryReport:
    relation: str
    residual: float
    tolerance: float
    gamma: float
    partner_gamma: float
    family: str
    param: str

    @property
    def holds(self) -> bool:
        return self.residual < self.tolerance

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "broken"


def check_relations(
    spec: OperatorSpec,
    basis: EnergyBasis,
    matrix: Optional[EnergyMatrix] = None,
    partner: Optional[EnergyMatrix] = None,
) -> list[SymmetryReport]:
    """Evaluate the internal-symmetry relations of ``spec``.

    For gamma != 0 three relations connect T at gamma with the partner at
    -gamma: combined parity and reversal (conj T = -T), reversal alone
    (tau symmetry) and parity alone.  At gamma = 0 the operator is its own
    partner and two relations remain: reversal and parity.  Prebuilt
    matrices may be passed to avoid recomputation.
    """
    spec.check_basis(basis)
    m = build_matrix(spec, basis) if matrix is None else matrix
    tol = PROJECTED_TOL if spec.is_arrival else EXACT_TOL
    g = spec.gamma

    def report(name, lhs, rhs, partner_gamma):
        return SymmetryReport(name, relative_residual(lhs, rhs), tol, g, partner_gamma,
                              spec.family_name, spec.label)

    if g == 0.0:
        return [
            report("time_reversal", apply_time_reversal(m).entries, -m.entries, g),
            report("parity", apply_parity(m).entries, m.entries, g),
        ]
    if partner is None:
        rbasis = basis.reversed()
        partner = build_matrix(spec.at_gamma(rbasis.config.gamma), rbasis)
    pg = partner.gamma
    return [
        report("parity_time_reversal", m.entries.conj(), -m.entries, g),
        report("tau_symmetry", apply_time_reversal(m).entries, -partner.entries, pg),
        report("parity", apply_parity(m).entries, partner.entries, pg),
    ]


def classify(reports: Sequence[SymmetryReport]) -> str:
    verdicts = {r.relation: r.holds for r in reports}
    if verdicts.get("tau_symmetry"):
        return "tau-symmetric"
    if verdicts.get("time_reversal"):
        return "time-reversal symmetric"
    return "neither"


REPORT_HEADER = ["relation_id", "gamma", "family", "param", "residual", "verdict"]


def write_report_csv(path, reports: Sequence[SymmetryReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in reports:
            w.writerow([r.relation, repr(r.gamma), r.family, r.param, repr(r.residual), r.verdict])
