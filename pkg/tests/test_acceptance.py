"""Acceptance criteria 1-11, each at its stated tolerance and runtime budget.

Every test prints one ``criterion k: PASS|FAIL`` line to the terminal.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from beurlinglab.charfun import (beurling_residual, default_degree, inner_defect,
                                 intertwining_residual, limit_product_What,
                                 theta_coefficients, theta_eval)
from beurlinglab.cocycle import (ToyCocycle, beurling_report, convergence_analyze,
                                 exactness_residual, gauge_modify, ergodic_chain,
                                 vacuum_unit)
from beurlinglab.contraction import defect_data, random_contraction, truncation_degree
from beurlinglab.cpmaps import KrausMap, equivalence_report
from beurlinglab.dilation import DilationVector, power_factorization_residual
from beurlinglab.harness import COMMANDS, run, to_json
from beurlinglab.instances import (amplitude_damping_cocycle, amplitude_damping_kraus,
                                   identity_cocycle, nonergodic_cocycle,
                                   random_ergodic_cocycle, random_invariant_kraus,
                                   random_nonergodic_kraus, random_star_stable)
from beurlinglab.numeric import dag, opnorm, random_unitary, unitarity_defect


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail, elapsed, budget=None):
        over = budget is not None and elapsed >= budget
        verdict = "PASS" if ok and not over else "FAIL"
        limit = f" / {budget:g} s" if budget else ""
        with capsys.disabled():
            print(f"\ncriterion {k}: {verdict}  {detail}  [{elapsed:.2f} s{limit}]")
        assert ok, detail
        assert not over, f"runtime {elapsed:.2f} s exceeds {budget} s"
    return emit


def gen(seed):
    return np.random.default_rng(seed)


def unit(rng, shape):
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return x / np.linalg.norm(x)


def test_criterion_01_rotation_unitarity(report):
    t0 = time.perf_counter()
    rng = gen(101)
    worst = 0.0
    for _ in range(500):
        d = int(rng.integers(1, 7))
        T = random_contraction(rng, d, float(rng.choice([0.0, rng.uniform(0, 0.5)])))
        worst = max(worst, unitarity_defect(defect_data(T).R))
    report(1, worst <= 1e-10, f"max unitarity_defect(R) = {worst:.2e} over 500",
           time.perf_counter() - t0, 5)


def test_criterion_02_power_factorization(report):
    t0 = time.perf_counter()
    rng = gen(102)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 5))
        n = int(rng.integers(1, 9))
        dd = defect_data(random_contraction(rng, d))
        N = n + 6
        f = np.zeros((N, dd.defect_dim), dtype=complex)
        f[:N - n] = unit(rng, (N - n, dd.defect_dim)) if dd.defect_dim else 0
        v = DilationVector.make(unit(rng, d), f)
        worst = max(worst, power_factorization_residual(dd, n, v))
    report(2, worst <= 1e-10, f"max factorization residual = {worst:.2e} over 200",
           time.perf_counter() - t0, 10)


def test_criterion_03_blaschke(report):
    t0 = time.perf_counter()
    rng = gen(103)
    worst = 0.0
    for _ in range(50):
        c = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        dd = defect_data(np.array([[c]]))
        cf = theta_coefficients(dd, truncation_degree(dd.T, 1e-12))
        zs = np.sqrt(rng.uniform(size=100)) * np.exp(2j * np.pi * rng.uniform(size=100))
        for z in zs:
            exact = (z - c) / (1 - np.conj(c) * z)
            worst = max(worst, abs(theta_eval(cf, z)[0, 0] - exact))
    report(3, worst <= 1e-10, f"max |Theta(z) - Blaschke(z)| = {worst:.2e}",
           time.perf_counter() - t0, 2)


def test_criterion_04_inner(report):
    t0 = time.perf_counter()
    rng = gen(104)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 5))
        dd = defect_data(random_star_stable(rng, d, radius=0.9))
        zs = np.exp(2j * np.pi * rng.uniform(size=20))
        worst = max(worst, inner_defect(dd, zs, default_degree(dd)))
    report(4, worst <= 1e-6, f"max ||Theta^*Theta - I|| on the circle = {worst:.2e}",
           time.perf_counter() - t0, 60)


def test_criterion_05_intertwining(report):
    t0 = time.perf_counter()
    rng = gen(105)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 5))
        dd = defect_data(random_star_stable(rng, d, radius=0.9))
        N = default_degree(dd)
        f = unit(rng, (int(rng.integers(1, 6)), dd.defect_dim))
        v = DilationVector.make(unit(rng, d), f, N=N)
        worst = max(worst, intertwining_residual(dd, v, N))
    report(5, worst <= 1e-8, f"max ||WU v - SW v|| = {worst:.2e} over 100",
           time.perf_counter() - t0, 30)


def test_criterion_06_limit_formula(report):
    t0 = time.perf_counter()
    rng = gen(106)
    worst_final = worst_h = worst_ratio = 0.0
    bounded = True
    for _ in range(20):
        d = int(rng.integers(1, 5))
        dd = defect_data(random_star_stable(rng, d, radius=0.9))
        ts = dag(dd.T)
        pw = [opnorm(np.linalg.matrix_power(ts, n)) for n in range(1, 201)]
        # f = 0: the H-component norm is ||T^{*n} h|| exactly
        h = unit(rng, d)
        lp = limit_product_What(dd, 200, DilationVector.make(h, None, N=200, r=dd.defect_dim))
        direct = [np.linalg.norm(np.linalg.matrix_power(ts, n) @ h) for n in range(1, 201)]
        worst_h = max(worst_h, float(np.max(np.abs(lp.h_norms - direct))))
        # generic vector with f of low degree
        f = np.zeros((200, dd.defect_dim), dtype=complex)
        f[:4] = rng.standard_normal((4, dd.defect_dim))
        v = DilationVector.make(rng.standard_normal(d), f)
        lp = limit_product_What(dd, 200, v)
        K = lp.constant
        bound = K * np.asarray(pw) * v.norm()
        # the bound is checked above a round-off floor
        bounded &= bool(np.all(lp.errors[4:] <= bound[4:] * (1 + 1e-9) + 1e-13 * v.norm()))
        worst_ratio = max(worst_ratio, K)
        worst_final = max(worst_final, lp.errors[-1] / v.norm())
    ok = bounded and worst_final <= 1e-8 and worst_h <= 1e-10
    report(6, ok, f"final error {worst_final:.2e}, max K {worst_ratio:.3g}, "
                  f"h-norm match {worst_h:.1e}", time.perf_counter() - t0, 30)


def test_criterion_07_beurling_subspace(report):
    t0 = time.perf_counter()
    rng = gen(107)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 4))
        worst = max(worst, beurling_residual(defect_data(random_star_stable(rng, d, 0.9))))
    worst_nil = 0.0
    for d in (1, 2, 3, 4):
        for _ in range(3):
            A = np.triu(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)), 1)
            T = A / max(opnorm(A), 1.0) if d > 1 else np.zeros((1, 1))
            worst_nil = max(worst_nil, beurling_residual(defect_data(T), 3 * d + 20, 2 * d + 10))
    ok = worst <= 1e-6 and worst_nil <= 1e-10
    report(7, ok, f"*-stable max {worst:.2e}, nilpotent max {worst_nil:.2e}",
           time.perf_counter() - t0, 60)


def test_criterion_08_absorbing_iff_ergodic(report):
    t0 = time.perf_counter()
    rng = gen(108)
    agree = 0
    slack = np.inf
    limit = 0.0
    for i in range(200):
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, 7))
        if i % 5 == 4 and d >= 2:
            Z, delta = random_nonergodic_kraus(rng, d, k)
        else:
            Z, delta = random_invariant_kraus(rng, d, k)
        rep = equivalence_report(Z, delta)
        agree += rep.agree
        slack = min(slack, rep.monotone_slack)
        if rep.is_ergodic:
            limit = max(limit, rep.limit_defect)
    # engineered counterexamples
    phase = equivalence_report(KrausMap(np.diag([1.0, 1j])[None]), [1.0, 0])
    ad = equivalence_report(KrausMap(amplitude_damping_kraus(0.75)), [1.0, 0])
    engineered = (not phase.is_ergodic and not phase.is_absorbing
                  and ad.is_ergodic and ad.is_absorbing)
    ok = agree == 200 and engineered and slack >= -1e-9 and limit <= 1e-5
    report(8, ok, f"{agree}/200 agree, engineered {engineered}, slack {slack:.1e}, "
                  f"limit defect {limit:.1e}", time.perf_counter() - t0, 30)


def test_criterion_09_theorem_chain(report):
    t0 = time.perf_counter()
    c = amplitude_damping_cocycle(40, 0.75)
    omega = vacuum_unit(c)
    cert = convergence_analyze(gauge_modify(c))
    delta = cert.delta_curve
    geometric = bool(np.allclose(delta[1:] / delta[:-1], 0.5, rtol=1e-9))
    ch = ergodic_chain(c)
    br = ch["beurling"]
    ok_ad = (np.allclose(omega, [1, 0]) and geometric and cert.cauchy_violation <= 1e-12
             and cert.q_defect <= 1e-6 and len(ch["exactness"]) == 5
             and max(ch["exactness"]) <= 1e-6 and br.restriction_pass
             and br.conjugacy_pass and all(ch[k] for k in "abcde"))
    ne = ergodic_chain(nonergodic_cocycle(20))
    ok_ne = ne["coherent"] and not any(ne[k] for k in "acde")
    report(9, ok_ad and ok_ne,
           f"q_defect {cert.q_defect:.1e}, exactness max {max(ch['exactness']):.1e}, "
           f"Cauchy slack {cert.cauchy_violation:.1e}, non-ergodic coherent {ok_ne}",
           time.perf_counter() - t0, 120)


def test_criterion_10_exactness(report):
    t0 = time.perf_counter()
    rng = gen(110)
    tol = 1e-6
    cases = [amplitude_damping_cocycle(40), identity_cocycle(1, 2, 12),
             ToyCocycle(random_unitary(rng, 3), 1, 3, 12, [1.0])]
    for d, m, N in ((2, 2, 20), (2, 3, 16), (3, 3, 24), (1, 2, 12), (2, 2, 24)):
        cases.append(random_ergodic_cocycle(rng, d, m, N))
    checked = 0
    worst = 0.0
    for c in cases:
        cg = gauge_modify(c)
        cert = convergence_analyze(cg, tol=tol)
        if cert.convergent and cert.q_defect <= tol:
            checked += 1
            ex = max(exactness_residual(cg, cert.w_hat, n)
                     for n in range(1, min(5, c.N // 2) + 1))
            worst = max(worst, ex)
    ident = identity_cocycle(2, 2, 12)
    cert = convergence_analyze(ident)
    denied = (cert.convergent and abs(cert.q_defect - 1) < 1e-12
              and not beurling_report(ident).conjugacy_pass)
    ok = checked == len(cases) and worst <= 10 * tol and denied
    report(10, ok, f"{checked}/{len(cases)} certified, exactness max {worst:.1e}, "
                   f"identity d_H=2 denied {denied}", time.perf_counter() - t0, 10)


SUITE = [{"command": c, "seed": 42} for c in COMMANDS] + [
    {"command": "cpcheck", "seed": 42, "instance": {"kind": "nonergodic_cocycle"}},
    {"command": "thm42", "seed": 42, "instance": {"kind": "nonergodic_cocycle"}},
    {"command": "cocycle", "seed": 42, "instance": {"kind": "random_cocycle"}},
]


def test_criterion_11_determinism(report, tmp_path):
    t0 = time.perf_counter()
    first = [to_json(run(cfg)[0]) for cfg in SUITE]
    second = [to_json(run(cfg)[0]) for cfg in SUITE]
    same = first == second
    # and across processes through the CLI
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SUITE[0]))
    out = subprocess.run([sys.executable, "-m", "beurlinglab", SUITE[0]["command"],
                          "--config", str(path), "--out", str(tmp_path / "o")],
                         capture_output=True, check=False)
    cli_same = (tmp_path / "o" / "report.json").read_text() == first[0]
    report(11, same and cli_same and out.returncode == 0,
           f"{len(SUITE)} reports byte-identical in-process {same}, via CLI {cli_same}",
           time.perf_counter() - t0)
