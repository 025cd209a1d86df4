"""Acceptance harness: ten end-to-end checks with pinned tolerances and time
budgets.  Each prints one PASS/FAIL line (run pytest with -s to see them all)
and fails its test on any miss."""

import json
import math
import time
from fractions import Fraction

import numpy as np

from dyngcd.orbit_engine import OrdCache, parse_polynomial
from dyngcd.prime_lab import (
    anomalous_report,
    low_rank_growth,
    mertens_pretty_product,
    scan_primes,
    tail_partial_sum,
)
from dyngcd.orbit_engine import nu_p_of_a
from dyngcd.density_lab import (
    GcdQuery,
    _gcd_vector,
    b_nonempty,
    a_nonempty,
    count_oracle,
    count_sieve,
    ell,
    floor_identity_B,
    linear_coprime_report,
    series_density_A,
    small_prime_hit_density,
)
from dyngcd.verify import run_all, _b_mask

F1 = parse_polynomial("x^2+1")
F2 = parse_polynomial("x^2+x+1")
F3 = parse_polynomial("x^3+x^2+1")
POLYS = (F1, F2, F3)
GRID_K = (1, 2, 5, 6)
GRID_X = (100, 1000, 5000)


def _line(num, ok, msg):
    print(f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {msg}")
    assert ok, f"criterion {num}: {msg}"


def test_acceptance_01_three_routes_agree():
    t0 = time.time()
    bad = []
    for F in POLYS:
        for k in GRID_K:
            q = GcdQuery(F, k)
            for x in GRID_X:
                o = count_oracle(q, x)
                s = count_sieve(q, x)
                f = floor_identity_B(q, x)
                if not (o == s and f == s[1]):
                    bad.append((str(F), k, x, o, s, f))
    dt = time.time() - t0
    _line(1, not bad and dt < 60,
          f"oracle = sieve = floor sum on {len(POLYS)}x{len(GRID_K)}x{len(GRID_X)} grid, "
          f"tolerance 0, {dt:.1f}s (budget 60s); mismatches: {bad or 'none'}")


def test_acceptance_02_exact_gcd_counts_agree():
    bad = []
    for F in POLYS:
        for k in GRID_K:
            q = GcdQuery(F, k)
            for x in GRID_X:
                if count_oracle(q, x)[0] != count_sieve(q, x)[0]:
                    bad.append((str(F), k, x))
    _line(2, not bad, f"exact-gcd counts by sieve match brute force on the grid; mismatches: {bad or 'none'}")


def test_acceptance_03_frozen_count_anchors():
    got = {k: count_oracle(GcdQuery(F1, k), 100)[0] for k in (1, 2, 5)}
    got[3] = count_oracle(GcdQuery(F1, 3), 10**4)[0]
    expected = {1: 47, 2: 46, 5: 3, 3: 0}
    _line(3, got == expected, f"x^2+1 anchors k=1,2,5 at x=100 and k=3 at x=10^4: {got} == {expected}")


def test_acceptance_04_invariant_suites():
    t0 = time.time()
    results = run_all(bound=300)
    dt = time.time() - t0
    fails = [(r.name, r.poly) for r in results if not r.ok]
    _line(4, not fails and dt < 120,
          f"{len(results)} invariant suite runs at bound 300, {dt:.1f}s (budget 120s); failures: {fails or 'none'}")


def test_acceptance_05_series_tracks_density_at_scale():
    t0 = time.time()
    q = GcdQuery(F1, 1)
    cache = OrdCache.for_poly(F1)
    truncs = {T: series_density_A(q, T, cache) for T in (500, 1000, 2000)}
    ca, cb = count_sieve(q, 10**5, cache)
    fi = floor_identity_B(q, 10**5, cache)
    ratio = ca / 10**5
    gap = abs(truncs[2000].value - ratio)
    steps_ok = (
        abs(truncs[1000].value - truncs[500].value) <= truncs[1000].last_block + 1e-12
        and abs(truncs[2000].value - truncs[1000].value) <= truncs[2000].last_block + 1e-12
    )
    dt = time.time() - t0
    _line(5, gap <= 0.02 and fi == cb and steps_ok and dt < 300,
          f"series T=2000 value {truncs[2000].value:.6f} vs count ratio {ratio:.6f} at x=10^5 "
          f"(gap {gap:.2e} <= 0.02), floor sum {fi} == count {cb}, increments within blocks, "
          f"{dt:.1f}s (budget 300s)")


def test_acceptance_06_rigid_valuations():
    bad = []
    checked = 0
    for F in (F1, F3):  # zero linear coefficient
        pretty = [r.p for r in scan_primes(F, 2, 100) if r.pretty][:3]
        for p in pretty:
            emax = min(int(61 * math.log(2) / math.log(p)), 40)
            for n in range(1, 41):
                v = nu_p_of_a(F, n, p, emax)
                if v.value == 0 or v.saturated:
                    continue
                checked += 1
                for t in (2, 3):
                    v2 = nu_p_of_a(F, n * t, p, emax)
                    if v2.value != v.value or v2.saturated:
                        bad.append((str(F), p, n, t))
    _line(6, checked > 50 and not bad,
          f"{checked} prime-power valuations frozen along index multiples, tolerance 0; violations: {bad or 'none'}")


def test_acceptance_07_anomalous_primes_are_injective():
    t0 = time.time()
    details = []
    ok = True
    for F in POLYS:
        recs = scan_primes(F, 2, 10**4)
        anom = [r.p for r in recs if r.anomalous]
        if any(not r.injective for r in recs if r.anomalous):
            ok = False
        if F.degree == 2 and any(p > 2 for p in anom):
            ok = False  # odd primes cannot carry an injective quadratic
        details.append(f"{F}: {anom or 'none'}")
    dt = time.time() - t0
    _line(7, ok and dt < 60,
          f"anomalous primes to 10^4 all injective ({'; '.join(details)}), {dt:.1f}s (budget 60s)")


def test_acceptance_08_linear_form_desk_check():
    q = GcdQuery(F1, 1, linear=(2, 1))
    d13 = small_prime_hit_density(q, 13, 15000).exact
    d5 = small_prime_hit_density(q, 5, 15000).exact
    fractions_ok = (
        d5 == Fraction(1, 15)
        and d13 == Fraction(1, 15) + Fraction(1, 52) - Fraction(1, 780)
    )
    rep = linear_coprime_report(q, 10**4, (5, 13, 677))  # raises on a bound breach
    union = small_prime_hit_density(q, 677, 10**4).exact
    near = abs(rep.density - (1 - float(union)))
    _line(8, fractions_ok and rep.density >= 0.85 and near <= 0.01,
          f"gcd(2n+1, a_n)=1 density {rep.density:.4f} >= 0.85, within {near:.2e} <= 0.01 of "
          f"1 - exact union {float(union):.6f}; small cutoffs exactly 1/15 and 11/130")


def test_acceptance_09_nonemptiness_criteria():
    probe = 10**4
    g = _gcd_vector(F1, probe, None)
    cache = OrdCache.for_poly(F1)
    bad = []
    for k in range(1, 51):
        q = GcdQuery(F1, k)
        nb, na = b_nonempty(q, cache), a_nonempty(q, cache)
        lk = ell(F1, k, cache)
        bm = _b_mask(g[1:], k)
        bfirst = int(np.nonzero(bm)[0][0]) + 1 if bm.any() else None
        am = g[1:] == k
        afirst = int(np.nonzero(am)[0][0]) + 1 if am.any() else None
        if nb.holds != (bfirst is not None) or (nb.holds and bfirst != lk):
            bad.append(("B", k, bfirst, nb.holds))
        if na.holds != (afirst is not None) or (na.holds and afirst != lk):
            bad.append(("A", k, afirst, na.holds))
    _line(9, not bad,
          f"criteria match a member search to {probe} for every k <= 50 "
          f"(first member is ell(k) exactly); disagreements: {bad or 'none'}")


def test_acceptance_10_diagnostics_emit():
    t0 = time.time()
    rows, flagged = low_rank_growth(F1, 0.5, (1000, 10**4))
    tail, comp = tail_partial_sum(F1, 20, 2000, 0.25, 0.75)
    mp, nfac = mertens_pretty_product(F1, 1000)
    rep = json.loads(anomalous_report(F1, 1000).to_json())
    shape_ok = (
        len(rows) == 2
        and all(len(r) == 4 for r in rows)
        and tail > 0
        and comp > 0
        and 0 < mp < 1
        and nfac > 0
        and rep["verdict"] in ("plausibly nice", "inconclusive")
    )
    dt = time.time() - t0
    _line(10, shape_ok and dt < 60,
          f"diagnostic surfaces emit: {len(rows)} growth rows (flagged={flagged}), "
          f"tail {tail:.3e} vs comparator {comp:.3e}, product {mp:.4f} over {nfac} primes, "
          f"survey verdict '{rep['verdict']}', {dt:.1f}s (budget 60s)")
