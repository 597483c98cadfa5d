"""Acceptance suite. Each test records a single PASS/FAIL line, shown in the terminal summary."""

import itertools
import math
import time

import numpy as np
import pytest

from rice_delta import cli
from rice_delta.degenerate import (
    concentration_metrics,
    effective_width,
    peak_ratio,
    ratio_pairing,
    solve_k,
)
from rice_delta.distributions import (
    RiceParams,
    bivariate_rice_log_pdf_array,
    marginal_from_joint,
    rectangle_probabilities,
    rice_log_pdf_array,
    rice_pdf,
    rice_quantile,
    total_mass,
)
from rice_delta.moments import summarize
from rice_delta.stochastic import generator, outage_sweep, pearson_corr, sample_pairs

UNIT = RiceParams(1.0, 1.0)


def test_normalization_and_marginalization(criterion):
    start = time.perf_counter()
    worst_mass = worst_marginal = 0.0
    for k, beta, rho in itertools.product((0, 1, 5), (0.5, 1, 2), (0, 0.5, 0.9)):
        p = RiceParams(k, beta)
        worst_mass = max(worst_mass, abs(total_mass(p, rho) - 1.0))
        x = np.arange(1, 17) * 0.25 * math.sqrt(2 * beta)
        worst_marginal = max(worst_marginal, np.max(np.abs(marginal_from_joint(p, rho, x) - rice_pdf(p, x))))
    elapsed = time.perf_counter() - start
    ok = worst_mass < 1e-5 and worst_marginal < 1e-6 and elapsed < 60
    detail = f"max |mass-1| = {worst_mass:.2e}, max marginal error = {worst_marginal:.2e}, {elapsed:.1f} s"
    assert criterion(1, ok, detail), detail


def test_independence_factorization(criterion):
    worst = 0.0
    for k, beta in itertools.product((0, 1, 5), (0.5, 1, 2)):
        p = RiceParams(k, beta)
        axis = np.linspace(0.05, 4.5, 32) * math.sqrt(2 * beta)
        joint = bivariate_rice_log_pdf_array(p, 0.0, axis[:, None], axis[None, :])
        marginal = rice_log_pdf_array(p, axis)
        worst = max(worst, np.max(np.abs(np.expm1(joint - marginal[:, None] - marginal[None, :]))))
    detail = f"max relative deviation = {worst:.2e} over 32x32 grids"
    assert criterion(2, worst < 1e-9, detail), detail


def test_delta_limit(criterion):
    start = time.perf_counter()
    rhos = (0.9, 0.99, 0.999, 0.9999)
    monotone, top_mass, peak_errors = True, [], []
    for x0 in (0.5, 1.0, 2.0):
        masses = [concentration_metrics(UNIT, r, x0, 0.2).mass_in_window for r in rhos]
        monotone &= all(a < b for a, b in zip(masses, masses[1:])) and masses[-1] <= 1 + 1e-12
        top_mass.append(masses[-1])
        peak = peak_ratio(UNIT, 0.9999, x0)
        manual = math.exp(bivariate_rice_log_pdf_array(UNIT, 0.9999, x0, x0)) * math.sqrt(math.pi) \
            * effective_width(UNIT, 0.9999)
        assert peak == pytest.approx(manual, rel=1e-12)
        peak_errors.append(abs(peak / rice_pdf(UNIT, x0) - 1))
    elapsed = time.perf_counter() - start
    ok = monotone and min(top_mass) > 0.999 and max(peak_errors) < 0.01 and elapsed < 120
    detail = (f"monotone = {monotone}, min mass at 0.9999 = {min(top_mass):.6f}, "
              f"max peak error = {max(peak_errors):.2e}, {elapsed:.1f} s")
    assert criterion(3, ok, detail), detail


def test_weak_limit_pairing(criterion):
    tests = {"1": np.ones_like, "y": lambda y: y, "exp(-y)": lambda y: np.exp(-y)}
    ok, parts = True, []
    for name, h in tests.items():
        target = float(h(np.array(1.0)))
        gaps = [abs(ratio_pairing(UNIT, r, 1.0, h) - target) for r in (0.9, 0.99, 0.999)]
        ok &= gaps[0] > gaps[1] > gaps[2] and gaps[2] < 5e-3
        parts.append(f"h={name}: {gaps[2]:.2e}")
    detail = "gap at 0.999 " + ", ".join(parts)
    assert criterion(4, ok, detail), detail


def test_sampler_fidelity(criterion):
    start = time.perf_counter()
    n = 10**6
    edges = np.linspace(0.0, 5.0, 41)
    batch = sample_pairs(UNIT, 0.5, n, seed=2024)
    counts, _, _ = np.histogram2d(batch.x, batch.y, bins=[edges, edges])
    prob = rectangle_probabilities(UNIT, 0.5, edges, edges)
    expected = n * prob
    used = expected >= 20
    z = np.abs(counts - expected) / np.sqrt(expected * (1 - prob))
    fraction = float(np.mean(z[used] < 4))
    elapsed = time.perf_counter() - start
    ok = fraction >= 0.99 and elapsed < 60
    detail = f"{fraction:.4f} of {int(used.sum())} bins within 4 SE, max {z[used].max():.2f} SE, {elapsed:.1f} s"
    assert criterion(5, ok, detail), detail


def test_correlation_endpoints(criterion):
    unity = sample_pairs(UNIT, 1.0, 10**5, seed=5)
    rho_unity = pearson_corr(unity)
    k_unity = solve_k(unity.moments()).value
    # exactly symmetric zero-mean x; mirror y = -x + 2 mu with mu = 0
    half = generator(6).standard_normal(50_000)
    x = np.concatenate([half, -half])
    y = -x
    rho_mirror = pearson_corr((x, y))
    k_mirror = solve_k(summarize(x, y)).value
    # shifted mirror with nonzero mean still has rho = -1 but mismatched mean signs
    shifted = pearson_corr((x + 3.0, -x + 3.0))
    k_shifted = solve_k(summarize(x + 3.0, -x + 3.0))
    mismatched = solve_k(summarize(x + 3.0, x - 3.0))
    ok = (rho_unity == 1.0 and k_unity == 1 and rho_mirror == -1.0 and k_mirror == -1
          and shifted == -1.0 and k_shifted.value is None and mismatched.value is None)
    detail = (f"unity rho={rho_unity!r} k={k_unity}, mirror rho={rho_mirror!r} k={k_mirror}, "
              f"nonzero-mean mirror k={k_shifted}, mismatched means k={mismatched}")
    assert criterion(6, ok, detail), detail


def test_diversity_collapse(criterion):
    threshold = rice_quantile(UNIT, 0.5)
    outage = outage_sweep(UNIT, [0.0, 0.5, 0.9, 1.0], threshold, 10**6, seed=0)
    ok = (abs(outage[0] - 0.25) < 0.002 and abs(outage[-1] - 0.5) < 0.002
          and all(a <= b for a, b in zip(outage, outage[1:])))
    detail = "outage at rho_c 0/0.5/0.9/1 = " + "/".join(f"{v:.6f}" for v in outage)
    assert criterion(7, ok, detail), detail


DETERMINISM_RUNS = [
    ["pdf-grid", "--rho", "0.5", "--x", "0:6:32", "--y", "0:6:32"],
    ["marginal"],
    ["limit-scan"],
    ["delta-demo"],
    ["sample", "--n", "2000", "--seed", "9"],
    ["estimate", "--n", "20000", "--seed", "9", "--rho", "1"],
    ["diversity", "--n", "50000", "--threshold-quantile", "0.5"],
]


def test_determinism(tmp_path, criterion):
    mismatches = []
    for i, argv in enumerate(DETERMINISM_RUNS):
        for fmt in ("csv", "json"):
            first, second = tmp_path / f"{i}.{fmt}", tmp_path / f"{i}.re.{fmt}"
            assert cli.main([*argv, "--format", fmt, "-o", str(first)]) == 0
            assert cli.main(["rerun", str(first), "-o", str(second)]) == 0
            if first.read_bytes() != second.read_bytes():
                mismatches.append(f"{argv[0]}/{fmt}")
    detail = f"{2 * len(DETERMINISM_RUNS)} artifacts rerun, mismatches: {mismatches or 'none'}"
    assert criterion(8, not mismatches, detail), detail
