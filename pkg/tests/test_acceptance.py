"""Acceptance suite: one PASS/FAIL line per criterion.

Each test prints its verdict line directly to the terminal and then
asserts it, so ``pytest -v`` shows both the line and the outcome.  Run the
file as a script for just the verdict lines.  Thresholds are fixed; a
criterion that the model cannot meet fails here rather than being relaxed.
"""
import cmath
import math
import sys

import numpy as np
import pytest
from scipy.integrate import quad

from tempus.boxsys import EnergyBasis, SystemConfig, eigenfunction, position_matrix
from tempus.dynamics import EvolvingState, evolve, transition_law, variance_series
from tempus.specfun import hyp_1f1
from tempus.spectra import (
    CanonicalTrialVector,
    ccr_residual,
    match_routes,
    pairing_defect,
    route_b,
)
from tempus.symmetry import check_relations

from conftest import HALF_PI, arrival, characteristic, matrix_for, spectrum_for

QUARTER_PI = math.pi / 4
S_VALUES = (0, 5, 10, 15)
GTO_RULES = ("power:50,1", "power:50,20", "power:50,25")


def _emit(line: str) -> None:
    print(line)


def _check(emit, label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    emit(line)
    assert ok, line


@pytest.fixture
def verdict(request):
    """Write the verdict line past output capture, then assert it."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def emit(line):
        with capman.global_and_fixture_disabled():
            sys.stdout.write("\n" + line + "\n")

    return lambda label, ok, detail: _check(emit, label, ok, detail)


def leading(spec, sector, cutoff=50):
    """Positive eigenpairs of one sector, largest tau first."""
    pool = [p for p in spectrum_for(spec, cutoff) if p.sector == sector and p.tau > 0]
    return sorted(pool, key=lambda p: -p.tau)


# 1 ------------------------------------------------------------------------

def test_c1_two_route_agreement(verdict):
    worst50, shrinks, rows = 0.0, True, []
    for s in S_VALUES:
        spec = arrival(s)
        for sector in ("even", "odd"):
            b = route_b(spec, sector, 5, SystemConfig(gamma=HALF_PI))
            e50 = [m.rel_error for m in match_routes(b, spectrum_for(spec, 50))]
            e100 = [m.rel_error for m in match_routes(b, spectrum_for(spec, 100))]
            worst50 = max(worst50, max(e50))
            shrinks &= all(y < x for x, y in zip(e50, e100))
            rows.append(f"s={s} {sector} max={max(e50):.1e}")
    detail = f"worst N=50 error {worst50:.2e} (limit 1e-3), decreases at N=100: {shrinks}; " + ", ".join(rows)
    verdict("C1 two-route eigenvalues", worst50 <= 1e-3 and shrinks, detail)


# 2 ------------------------------------------------------------------------

def test_c2_ccr_exactness(rng, verdict):
    basis = EnergyBasis(SystemConfig(gamma=QUARTER_PI), 50)
    worst = {}
    for rule in ("zero",) + GTO_RULES:
        m = matrix_for(characteristic(rule), 50)
        worst[rule] = max(ccr_residual(m, CanonicalTrialVector.random(basis, rng)) for _ in range(20))
    ok = all(v < 1e-12 for v in worst.values())
    detail = ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " (limit 1e-12, gamma=pi/4)"
    verdict("C2 CCR on CTO/GTO", ok, detail)


# 3 ------------------------------------------------------------------------

def _residuals(spec, gamma, cutoff=50):
    basis = EnergyBasis(SystemConfig(gamma=gamma), cutoff)
    return {r.relation: r.residual for r in check_relations(spec, basis)}


def test_c3_symmetry_suite(verdict):
    failures, notes = [], []

    half = {s: _residuals(arrival(s), HALF_PI) for s in S_VALUES}
    if max(half[0].values()) >= 1e-4:
        failures.append("gamma=pi/2 relations not all holding at s=0")
    for rel in half[0]:
        series = [half[s][rel] for s in S_VALUES]
        notes.append(f"{rel}: " + "/".join(f"{x:.1e}" for x in series))
        if min(series[1:]) <= 1e-4:
            failures.append(f"{rel} not broken for s>0")
        elif not all(b > a for a, b in zip(series[1:], series[2:])):
            failures.append(f"{rel} not increasing in s")

    zero = {s: _residuals(arrival(s, 0.0), 0.0) for s in S_VALUES}
    if max(zero[0].values()) >= 1e-4:
        failures.append("gamma=0 relations not all holding at s=0")
    for rel in zero[0]:
        notes.append(f"gamma=0 {rel}: " + "/".join(f"{zero[s][rel]:.1e}" for s in S_VALUES))
        if min(zero[s][rel] for s in S_VALUES[1:]) <= 1e-4:
            failures.append(f"gamma=0 {rel} not broken for s>0")

    cto = _residuals(characteristic("zero"), QUARTER_PI)["tau_symmetry"]
    gto = _residuals(characteristic("power:50,1"), QUARTER_PI)["tau_symmetry"]
    notes.append(f"CTO tau={cto:.1e}, GTO tau={gto:.1e}")
    if not (cto < 1e-10 and gto > 1e-3):
        failures.append("CTO/GTO contrast")

    detail = ("; ".join(failures) if failures else "all relations as required") + " | " + ", ".join(notes)
    verdict("C3 symmetry suite", not failures, detail)


# 4 ------------------------------------------------------------------------

def test_c4_tau_pairing(verdict):
    d0 = pairing_defect([p.tau for p in spectrum_for(arrival(0), 50)])
    d15 = pairing_defect([p.tau for p in spectrum_for(arrival(15), 50)], count=10)
    ok = d0 < 1e-6 and d15 > 1e-3
    verdict("C4 tau pairing", ok, f"s=0 defect {d0:.1e} (<1e-6), s=15 defect {d15:.1e} (>1e-3)")


# 5 ------------------------------------------------------------------------

def test_c5_unitary_arrival(verdict):
    rows, ok = [], True
    for gamma, sector in ((HALF_PI, "odd"), (0.0, "even")):
        for p in leading(arrival(0, gamma), sector)[:3]:
            v = variance_series(EvolvingState.from_eigenpair(p), tau=p.tau)
            off = v.arrival_offset / p.tau
            dvar = abs(v.sigma2_min - v.sigma2_at_tau) / v.sigma2_at_tau
            ok &= off <= 0.05 and dvar <= 0.05
            rows.append(f"{sector} tau={p.tau:.4f} offset={off:.3f} dvar={dvar:.3f}")
    verdict("C5 unitary arrival", ok, "; ".join(rows))


# 6 ------------------------------------------------------------------------

ARRIVAL_INDEX = 3


def test_c6_arrival_divergence(verdict):
    rows, ok = [], True
    for gamma, sector in ((HALF_PI, "odd"), (0.0, "even")):
        offs = []
        for s in S_VALUES:
            p = leading(arrival(s, gamma), sector)[ARRIVAL_INDEX - 1]
            offs.append(variance_series(EvolvingState.from_eigenpair(p), tau=p.tau).arrival_offset)
        ok &= all(b > a for a, b in zip(offs, offs[1:]))
        rows.append(f"{sector} n={ARRIVAL_INDEX}: " + "/".join(f"{x:.4f}" for x in offs))
    verdict("C6 arrival divergence with s", ok, "; ".join(rows))


# 7 ------------------------------------------------------------------------

def test_c7_transition_law(verdict):
    cto = transition_law(spectrum_for(characteristic("zero"), 50))
    gto = transition_law(spectrum_for(characteristic("power:50,1"), 50))
    ok = cto.holds and not gto.holds
    detail = (f"CTO slope {cto.slope:.4f} min height {cto.heights.min():.3f} holds={cto.holds}; "
              f"GTO 50E^-1 slope {gto.slope:.4f} min height {gto.heights.min():.3f} "
              f"holds={gto.holds} (must fail); gamma=pi/4")
    verdict("C7 transition-time law", ok, detail)


# 8 ------------------------------------------------------------------------

def test_c8_numerical_hygiene(verdict):
    rng = np.random.default_rng(8)
    kummer = deriv = 0.0
    for _ in range(100):
        a = complex(rng.uniform(-2, 2), rng.uniform(-3, 3))
        b = complex(rng.uniform(0.5, 3), 0)
        z = cmath.rect(rng.uniform(0.1, 10), rng.uniform(-math.pi, math.pi))
        kw = dict(kummer="never", cancellation_limit=1e-12, fallback=True)
        lhs = hyp_1f1(a, b, z, **kw)
        kummer = max(kummer, abs(lhs - cmath.exp(z) * hyp_1f1(b - a, b, -z, **kw)) / abs(lhs))
        h = 1e-5 * max(1.0, abs(z))
        fd = (hyp_1f1(a, b, z + h) - hyp_1f1(a, b, z - h)) / (2 * h)
        exact = a / b * hyp_1f1(a + 1, b + 1, z)
        deriv = max(deriv, abs(fd - exact) / max(abs(exact), 1e-8))

    cfg = SystemConfig(gamma=0.6)
    basis = EnergyBasis(cfg, 4)
    quad_err = 0.0
    for power in (1, 2):
        m = position_matrix(basis, power)
        for k in basis.indices:
            for kp in basis.indices:
                def f(q, part):
                    v = np.conj(eigenfunction(k, q, cfg)) * q**power * eigenfunction(kp, q, cfg)
                    return v.real if part == 0 else v.imag
                opts = dict(limit=200, epsabs=1e-14, epsrel=1e-13)
                ref = quad(f, -1, 1, args=(0,), **opts)[0] + 1j * quad(f, -1, 1, args=(1,), **opts)[0]
                quad_err = max(quad_err, abs(m.element(k, kp) - ref))

    drift = 0.0
    for p in spectrum_for(arrival(5), 50)[:10]:
        st = EvolvingState.from_eigenpair(p)
        drift = max(drift, max(abs(evolve(st, t).norm - 1) for t in np.linspace(-3, 3, 61)))

    ok = kummer <= 1e-11 and deriv <= 1e-6 and quad_err < 1e-10 and drift < 1e-12
    detail = (f"Kummer {kummer:.1e}, derivative {deriv:.1e}, position quad {quad_err:.1e} (<1e-10), "
              f"norm drift {drift:.1e} (<1e-12)")
    verdict("C8 numerical hygiene", ok, detail)


if __name__ == "__main__":
    script_verdict = lambda label, ok, detail: _check(_emit, label, ok, detail)
    for name, fn in list(globals().items()):
        if name.startswith("test_c"):
            args = [np.random.default_rng(20240611)] if name == "test_c2_ccr_exactness" else []
            try:
                fn(*args, script_verdict)
            except AssertionError:
                pass
