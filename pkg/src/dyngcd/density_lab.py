"""Counting and density analysis of the gcd sets

    A(k) = { n >= 1 : gcd(G(n), a_n) = k }
    B(k) = { n >= 1 : k | gcd(G(n), a_n) and every prime of the gcd divides k }

for the orbit sequence a_n of a wandering polynomial and G either the identity
or a linear form a*x+b with coprime coefficients.

Three independent routes to the same counts are kept side by side on purpose:
a brute-force oracle (one modular orbit per index), a structural sieve driven
by the joint ranks ell(p), and for B an exact floor-sum identity over pretty
squarefree numbers.  They must agree bit for bit; the verify suites and the
CLI's --method both insist on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .arith_core import crt_pair, factorize, lcm_checked
from .orbit_engine import (
    INF,
    IntPolynomial,
    OrdCache,
    a_mod,
    ell,
    ord_crt,
    require_wandering,
)
from .prime_lab import scan_primes


class SelfCheckError(AssertionError):
    """A dual-route computation disagreed with itself; nothing should catch
    this except the CLI, which turns it into exit code 4."""


@dataclass(frozen=True)
class GcdQuery:
    """A polynomial together with the gcd target k and the index form G.

    linear is None for G(x) = x, else the pair (a, b) meaning G(x) = a*x + b
    with a, b >= 1 and gcd(a, b) = 1.  Density operations with k > 1 are only
    defined for the identity form.
    """

    F: IntPolynomial
    k: int
    linear: tuple[int, int] | None = None

    def __post_init__(self):
        require_wandering(self.F)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.linear is not None:
            a, b = self.linear
            if a < 1 or b < 1:
                raise ValueError("linear form needs a >= 1 and b >= 1")
            if math.gcd(a, b) != 1:
                raise ValueError("linear form needs gcd(a, b) = 1")

    def g_of(self, n: int) -> int:
        if self.linear is None:
            return n
        a, b = self.linear
        return a * n + b

    def g_str(self) -> str:
        if self.linear is None:
            return "x"
        a, b = self.linear
        return f"{a}*x+{b}"

    def _identity_only(self, what: str) -> None:
        if self.linear is not None:
            raise ValueError(f"{what} is defined for the identity form only")


class MembershipVerdict(NamedTuple):
    n: int
    g: int
    in_A: bool
    in_B: bool


def _strip_primes(g: int, primes: tuple[int, ...]) -> int:
    for p in primes:
        while g % p == 0:
            g //= p
    return g


def membership(q: GcdQuery, n: int) -> MembershipVerdict:
    """Exact membership of a single index, straight from the definitions."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = q.g_of(n)
    g = 1 if m == 1 else math.gcd(m, a_mod(q.F, n, m))
    in_a = g == q.k
    in_b = g % q.k == 0 and _strip_primes(g, factorize(q.k).prime_set()) == 1
    return MembershipVerdict(n, g, in_a, in_b)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


@lru_cache(maxsize=6)
def _gcd_vector(F: IntPolynomial, x: int, linear: tuple[int, int] | None) -> np.ndarray:
    """g[n] = gcd(G(n), a_n) for 1 <= n <= x (g[0] = 0, unused).

    One triangular pass: index n needs a_n mod G(n), so every index keeps its
    own modulus and position n is captured at step n, after which the slice
    shrinks.  Work is about x^2/2 Horner steps regardless of how many k values
    are later queried against the same vector.
    """
    require_wandering(F)
    idx = np.arange(0, x + 1, dtype=np.int64)
    if linear is None:
        mods = idx.copy()
        mods[0] = 1
    else:
        a, b = linear
        mods = a * idx + b
    if int(mods.max()) ** 2 >= 2**63:
        raise ValueError("oracle moduli too large for the int64 kernel")
    coeffs = F.coeffs
    v = np.zeros(x + 1, dtype=np.int64)
    out = np.zeros(x + 1, dtype=np.int64)
    scratch = np.empty(x + 1, dtype=np.int64)
    for i in range(1, x + 1):
        vv = v[i:]
        mm = mods[i:]
        acc = scratch[: vv.size]
        acc.fill(coeffs[-1])
        acc %= mm
        for c in coeffs[-2::-1]:
            acc *= vv
            acc += c
            acc %= mm
        v[i:] = acc
        out[i] = acc[0]
    g = np.gcd(mods, out)
    g[0] = 0
    g.setflags(write=False)
    return g


def _counts_from_gvec(g: np.ndarray, k: int, x: int) -> tuple[int, int]:
    gx = g[1 : x + 1]
    count_a = int((gx == k).sum())
    if k == 1:
        return count_a, count_a
    mask = gx % k == 0
    h = np.where(mask, gx, 1)
    for p, _ in factorize(k).factors:
        while True:
            div = h % p == 0
            if not div.any():
                break
            h = np.where(div, h // p, h)
    count_b = int((mask & (h == 1)).sum())
    return count_a, count_b


def count_oracle(q: GcdQuery, x: int) -> tuple[int, int]:
    """(#A(x), #B(x)) by direct evaluation of every index up to x."""
    if x < 1:
        raise ValueError("x must be >= 1")
    if q.linear is not None and q.k != 1:
        q._identity_only("count_oracle with k > 1")
    g = _gcd_vector(q.F, x, q.linear)
    return _counts_from_gvec(g, q.k, x)


def oracle_first_A(q: GcdQuery, bound: int) -> int | None:
    """Least n <= bound with gcd(G(n), a_n) exactly k, or None."""
    g = _gcd_vector(q.F, bound, q.linear)
    hits = np.nonzero(g[1:] == q.k)[0]
    return int(hits[0]) + 1 if hits.size else None


# ---------------------------------------------------------------------------
# structural sieve
# ---------------------------------------------------------------------------


def count_sieve(q: GcdQuery, x: int, cache: OrdCache | None = None) -> tuple[int, int]:
    """(#A(x), #B(x)) from the rank structure, no per-index orbit work.

    B(k) is exactly the multiples of ell(k) that avoid every ell(p) for
    pretty p not dividing k.  Inside that set, membership in A(k) is decided
    prime by prime over p | k with e = nu_p(k): either nu_p(n) = e exactly,
    or nu_p(n) > e while ord(p^(e+1)) does not divide n (so the orbit term
    contributes no extra factor of p).  ord(p^e) | n holds automatically for
    multiples of ell(k).
    """
    q._identity_only("count_sieve")
    if x < 1:
        raise ValueError("x must be >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    if ord_crt(F, k, cache) == INF:
        return 0, 0
    lk = ell(F, k, cache)
    if lk == INF or lk > x:
        return 0, 0
    lk = int(lk)
    M = x // lk
    alive = np.ones(M + 1, dtype=bool)
    alive[0] = False
    for rec in scan_primes(F, 2, x, sieve_bound=x):
        if k % rec.p == 0:
            continue
        lp = rec.ell
        if lp is None or lp == INF or lp > x:
            continue
        s = int(lp) // math.gcd(int(lp), lk)
        if s <= M:
            alive[s::s] = False
    count_b = int(alive.sum())

    for p, e in factorize(k).factors:
        if cache.rank_of(F, p**e) == INF:
            # unreachable once ord(k) is finite; kept as a hard guard
            return 0, count_b
        pe1 = p ** (e + 1)
        if pe1 > 2**62:
            o1 = INF  # modulus out of range: p^(e+1) never divides a_n here
        else:
            o1 = cache.rank_of(F, pe1)
        v0 = 0
        t = lk
        while t % p == 0:
            t //= p
            v0 += 1
        s1 = None if o1 == INF else int(o1) // math.gcd(int(o1), lk)
        if v0 == e:
            # candidates with p | (n/lk) overshoot unless ord(p^(e+1)) misses n
            if s1 is not None:
                step = p * s1 // math.gcd(p, s1)
                if step <= M:
                    alive[step::step] = False
        else:
            # every candidate already has nu_p(n) > e
            if s1 is not None:
                if s1 <= M:
                    alive[s1::s1] = False
            else:
                pass  # ord(p^(e+1)) infinite: excess index valuation is harmless
    count_a = int(alive.sum())
    return count_a, count_b


# ---------------------------------------------------------------------------
# pretty squarefree enumeration, floor identity, series
# ---------------------------------------------------------------------------


def _pretty_prime_pool(
    F: IntPolynomial, bound: int, cache: OrdCache, coprime_to: int = 1
) -> list[tuple[int, int]]:
    """(p, ord(p)) for every pretty prime p <= bound not dividing coprime_to.
    Needs an exact scan, so bound should stay at desk scale."""
    pool = []
    for rec in scan_primes(F, 2, bound):
        if coprime_to % rec.p == 0 or rec.ord == INF:
            continue
        pool.append((rec.p, int(rec.ord)))
        cache.put(rec.p, int(rec.ord))
    return pool


def floor_identity_B(q: GcdQuery, x: int, cache: OrdCache | None = None) -> int:
    """#B(x) as the exact finite sum over pretty squarefree d coprime to k:

        sum mu(d) * floor(x / ell(d*k))

    Terms with ell(d*k) > x vanish, and ell is monotone in d, so the sum is a
    pruned walk over products of pretty primes with ell(p) <= x.  This equals
    the sieve and oracle counts exactly, not asymptotically.
    """
    q._identity_only("floor_identity_B")
    if x < 1:
        raise ValueError("x must be >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    rk = ord_crt(F, k, cache)
    if rk == INF:
        return 0
    lk = ell(F, k, cache)
    if lk == INF or lk > x:
        return 0
    pool = []
    for rec in scan_primes(F, 2, x, sieve_bound=x):
        if k % rec.p == 0:
            continue
        if rec.ord is None or rec.ord == INF:
            continue
        if rec.ell is not None and rec.ell != INF and rec.ell <= x:
            pool.append((rec.p, int(rec.ord)))
    total = 0

    def walk(i: int, d: int, ord_d: int, mu: int) -> None:
        nonlocal total
        ord_dk = lcm_checked(ord_d, int(rk)) if rk > 1 else ord_d
        ld = lcm_checked(d * k, ord_dk) if ord_dk is not None else None
        if ld is None:
            cache.note_overflow(d * k)
            return
        if ld > x:
            return  # ell only grows when d picks up more primes
        total += mu * (x // ld)
        for j in range(i, len(pool)):
            p, op = pool[j]
            if d * p > x:
                break
            o2 = lcm_checked(ord_d, op)
            if o2 is None:
                cache.note_overflow(d * p)
                continue
            walk(j + 1, d * p, o2, -mu)

    walk(0, 1, 1, 1)
    return total


@dataclass(frozen=True)
class SeriesTruncation:
    T: int
    value: float
    last_block: float


def series_density_B(
    q: GcdQuery, T: int, cache: OrdCache | None = None
) -> SeriesTruncation:
    """Truncation at T of the density series for B(k):

        sum over squarefree d <= T coprime to k of mu(d) / ell(d*k).

    Only pretty d contribute (infinite ell kills the term).  last_block is
    the absolute tail sum over T/2 < d <= T, the reported convergence gauge.
    """
    q._identity_only("series_density_B")
    if T < 1:
        raise ValueError("T must be >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    rk = ord_crt(F, k, cache)
    if rk == INF:
        return SeriesTruncation(T, 0.0, 0.0)
    pool = _pretty_prime_pool(F, T, cache, coprime_to=k)
    total = 0.0
    block = 0.0
    half = T // 2

    def walk(i: int, d: int, ord_d: int, mu: int) -> None:
        nonlocal total, block
        ord_dk = lcm_checked(ord_d, int(rk))
        ld = lcm_checked(d * k, ord_dk) if ord_dk is not None else None
        if ld is None:
            cache.note_overflow(d * k)
        else:
            total += mu / ld
            if d > half:
                block += 1.0 / ld
        for j in range(i, len(pool)):
            p, op = pool[j]
            if d * p > T:
                break
            o2 = lcm_checked(ord_d, op)
            if o2 is None:
                cache.note_overflow(d * p)
                continue
            walk(j + 1, d * p, o2, -mu)

    walk(0, 1, 1, 1)
    return SeriesTruncation(T, total, block)


def _ell_of_product(
    F: IntPolynomial, t: int, k: int, cache: OrdCache
) -> int | float:
    """ell(t*k) with the prime powers of t*k assembled explicitly."""
    n = t * k
    acc = 1
    for p, e in factorize(n).factors:
        q = p**e
        if q > 2**62:
            return INF
        r = cache.rank_of(F, q)
        if r == INF:
            return INF
        a2 = lcm_checked(acc, int(r))
        if a2 is None:
            cache.note_overflow(n)
            return INF
        acc = a2
    v = lcm_checked(n, acc)
    if v is None:
        cache.note_overflow(n)
        return INF
    return v


def series_density_A(
    q: GcdQuery, T: int, cache: OrdCache | None = None
) -> SeriesTruncation:
    """Truncation at T of the density series for A(k):

        sum over all squarefree t <= T of mu(t) / ell(t*k),

    with no coprimality restriction; t sharing primes with k raises the
    corresponding prime power inside ell(t*k).  Terms with ell infinite drop.
    """
    q._identity_only("series_density_A")
    if T < 1:
        raise ValueError("T must be >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    if ord_crt(F, k, cache) == INF:
        return SeriesTruncation(T, 0.0, 0.0)
    kprimes = [p for p, _ in factorize(k).factors if p <= T]
    pool_set = {p for p, _ in _pretty_prime_pool(F, T, cache)} | set(kprimes)
    pool = sorted(pool_set)
    total = 0.0
    block = 0.0
    half = T // 2

    def walk(i: int, t: int, mu: int) -> None:
        nonlocal total, block
        lt = _ell_of_product(F, t, k, cache)
        if lt != INF:
            total += mu / int(lt)
            if t > half:
                block += 1.0 / int(lt)
        for j in range(i, len(pool)):
            p = pool[j]
            if t * p > T:
                break
            walk(j + 1, t * p, -mu)

    walk(0, 1, 1)
    return SeriesTruncation(T, total, block)


def count_A_inclusion_exclusion(
    q: GcdQuery, x: int, cache: OrdCache | None = None
) -> int:
    """#A(x) = sum over squarefree d | k~ of mu(d) * #B(d*k)(x), where k~ is
    the radical of k.  A finite-x consistency route, used by the checks."""
    q._identity_only("count_A_inclusion_exclusion")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    primes = factorize(q.k).prime_set()
    total = 0
    for bits in range(1 << len(primes)):
        d = 1
        mu = 1
        for i, p in enumerate(primes):
            if bits >> i & 1:
                d *= p
                mu = -mu
        sub = GcdQuery(q.F, d * q.k)
        total += mu * count_sieve(sub, x, cache)[1]
    return total


# ---------------------------------------------------------------------------
# nonemptiness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonemptyVerdict:
    holds: bool
    witness: int | None
    reason: str


_WITNESS_CHECK_MAX = 10**6


def b_nonempty(q: GcdQuery, cache: OrdCache | None = None) -> NonemptyVerdict:
    """Whether B(k) has any element at all: k must be pretty, and no prime p
    outside k may have ell(p) | ell(k).  Only primes dividing ell(k) can
    violate that, so the check is finite; when it passes, n = ell(k) itself
    is a member."""
    q._identity_only("b_nonempty")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    if ord_crt(F, k, cache) == INF:
        return NonemptyVerdict(False, None, f"k={k} is not pretty (infinite rank)")
    lk = ell(F, k, cache)
    if lk == INF:
        return NonemptyVerdict(False, None, f"ell({k}) exceeds the analysis range")
    lk = int(lk)
    for p in factorize(lk).prime_set():
        if k % p == 0:
            continue
        lp = ell(F, p, cache)
        if lp != INF and lk % int(lp) == 0:
            return NonemptyVerdict(
                False,
                None,
                f"prime {p} outside k has ell({p})={int(lp)} dividing ell({k})={lk}",
            )
    if lk <= _WITNESS_CHECK_MAX and not membership(q, lk).in_B:
        raise SelfCheckError(f"witness {lk} failed the direct B membership check")
    return NonemptyVerdict(True, lk, f"ell({k})={lk} is a member of B")


def a_nonempty(q: GcdQuery, cache: OrdCache | None = None) -> NonemptyVerdict:
    """Whether A(k) has any element: exactly when gcd(ell(k), a_ell(k)) = k,
    in which case n = ell(k) is the witness."""
    q._identity_only("a_nonempty")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    if ord_crt(F, k, cache) == INF:
        return NonemptyVerdict(False, None, f"k={k} is not pretty (infinite rank)")
    lk = ell(F, k, cache)
    if lk == INF:
        return NonemptyVerdict(False, None, f"ell({k}) exceeds the analysis range")
    lk = int(lk)
    g = 1 if lk == 1 else math.gcd(lk, a_mod(F, lk, lk))
    if lk <= _WITNESS_CHECK_MAX:
        mv = membership(q, lk)
        if mv.in_A != (g == k):
            raise SelfCheckError(f"membership({lk}) disagrees with the gcd test")
    if g == k:
        return NonemptyVerdict(True, lk, f"gcd(ell({k}), a_ell({k})) = {g} = k")
    return NonemptyVerdict(False, None, f"gcd(ell({k}), a_ell({k})) = {g} != {k}")


# ---------------------------------------------------------------------------
# divisor-avoidance lower bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LkSet:
    """The avoidance set for k up to a bound: the primes dividing k, plus the
    ratios ell(k*p)/ell(k) contributed by pretty primes p not dividing k.
    ratio_sources maps each ratio element to the smallest prime producing it."""

    k: int
    bound: int
    elements: tuple[int, ...]
    prime_elements: tuple[int, ...]
    ratio_sources: dict[int, int]


def build_Lk(
    q: GcdQuery, bound: int, cache: OrdCache | None = None
) -> tuple[LkSet, float]:
    """The avoidance set with all elements <= bound drawn from primes
    p <= bound, together with sum 1/s over its elements (the convergence
    gauge: a finite sum keeps the avoiding set positive-density)."""
    q._identity_only("build_Lk")
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    F, k = q.F, q.k
    lk = ell(F, k, cache)
    if lk == INF:
        raise ValueError("avoidance set needs pretty k")
    lk = int(lk)
    prime_elements = tuple(p for p in factorize(k).prime_set() if p <= bound)
    ratio_sources: dict[int, int] = {}
    for p, op in _pretty_prime_pool(F, bound, cache, coprime_to=k):
        lkp = _ell_of_product(F, p, k, cache)
        if lkp == INF:
            continue
        r = int(lkp) // lk
        if r <= bound and r not in ratio_sources:
            ratio_sources[r] = p
    elements = tuple(sorted(set(prime_elements) | set(ratio_sources)))
    partial = float(sum(Fraction(1, s) for s in elements)) if elements else 0.0
    return LkSet(k, bound, elements, prime_elements, ratio_sources), partial


def non_multiples_count(elements, x: int) -> int:
    """#{1 <= m <= x : no s in elements divides m}; elements must be >= 2."""
    if x < 0:
        raise ValueError("x must be >= 0")
    elems = sorted(set(int(s) for s in elements))
    if any(s < 2 for s in elems):
        raise ValueError("elements must all be >= 2")
    alive = np.ones(x + 1, dtype=bool)
    alive[0] = False
    for s in elems:
        if s <= x:
            alive[s::s] = False
    return int(alive.sum())


def y_k_lower_bound(q: GcdQuery, x: int, cache: OrdCache | None = None) -> int:
    """#(ell(k) * N(L_k)) up to x: a certified lower bound for #B(x), and for
    #A(x) when F has zero linear coefficient (rigid divisibility)."""
    q._identity_only("y_k_lower_bound")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    lk = ell(q.F, q.k, cache)
    if lk == INF or lk > x:
        return 0
    lset, _ = build_Lk(q, x, cache)
    if 1 in lset.elements:
        return 0
    M = x // int(lk)
    return non_multiples_count([s for s in lset.elements if s <= M], M)


# ---------------------------------------------------------------------------
# linear forms: small-prime hit density and the coprimality report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HitDensity:
    """Density of indices n caught by some pretty prime p <= z, meaning
    p | gcd(a*n+b, a_n).  Each such prime pins n to one residue class modulo
    ell(p); exact is the inclusion-exclusion union density of those classes
    (None when the modulus lcm is out of range), marked_count the realized
    count up to x."""

    z: int
    x: int
    progressions: tuple[tuple[int, int], ...]
    marked_count: int
    exact: Fraction | None

    @property
    def marked_density(self) -> float:
        return self.marked_count / self.x


_UNION_NODE_MAX = 200_000


def _hit_progressions(
    q: GcdQuery, z: int, cache: OrdCache
) -> list[tuple[int, int]]:
    a, b = q.linear
    progs = []
    for p, op in _pretty_prime_pool(q.F, z, cache):
        if a % p == 0:
            continue  # a*n+b is never divisible by p
        rp = (-b * pow(a, -1, p)) % p
        sol = crt_pair(rp, p, 0, op)
        if sol is None:
            continue  # p | a_n forces p | n, incompatible with p | a*n+b
        progs.append(sol)
    return progs


def small_prime_hit_density(
    q: GcdQuery, z: int, x: int, cache: OrdCache | None = None
) -> HitDensity:
    """How much of [1, x] is hit by pretty primes up to z (linear form only)."""
    if q.linear is None:
        raise ValueError("hit density is defined for linear forms")
    if z < 2 or x < 1:
        raise ValueError("need z >= 2 and x >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    progs = _hit_progressions(q, z, cache)
    mask = np.zeros(x + 1, dtype=bool)
    for r, m in progs:
        start = r if r >= 1 else m
        if start <= x:
            mask[start::m] = True
    marked = int(mask[1:].sum())
    exact = _union_density(progs)
    return HitDensity(z, x, tuple(progs), marked, exact)


def _union_density(progs) -> Fraction | None:
    """Inclusion-exclusion density of a union of residue classes, walking only
    the compatible subsets (an incompatible pair kills its whole branch).
    None if the walk exceeds its node budget."""
    total = Fraction(0)
    nodes = 0

    def walk(i: int, r: int, m: int, sign: int) -> bool:
        nonlocal total, nodes
        for j in range(i, len(progs)):
            sol = crt_pair(r, m, progs[j][0], progs[j][1])
            if sol is None:
                continue
            nodes += 1
            if nodes > _UNION_NODE_MAX:
                return False
            total += Fraction(sign, sol[1])
            if not walk(j + 1, sol[0], sol[1], -sign):
                return False
        return True

    if not walk(0, 0, 1, 1):
        return None
    return total


@dataclass(frozen=True)
class CoprimeCheckpoint:
    z: int
    hit_exact: float
    residual: float
    lower_bound: float


@dataclass(frozen=True)
class CoprimeReport:
    """Empirical density of gcd(a*n+b, a_n) = 1 against the structural lower
    bound 1 - delta_z - residual at each z of the schedule."""

    poly: str
    a: int
    b: int
    x: int
    count_coprime: int
    density: float
    checkpoints: tuple[CoprimeCheckpoint, ...]

    def to_json(self) -> str:
        payload = {
            "poly": self.poly,
            "a": self.a,
            "b": self.b,
            "x": self.x,
            "count_coprime": self.count_coprime,
            "density": self.density,
            "checkpoints": [
                {
                    "z": c.z,
                    "hit_exact": c.hit_exact,
                    "residual": c.residual,
                    "lower_bound": c.lower_bound,
                }
                for c in self.checkpoints
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def linear_coprime_report(
    q: GcdQuery, x: int, z_schedule, cache: OrdCache | None = None
) -> CoprimeReport:
    """Count gcd(a*n+b, a_n) = 1 up to x and check it against the bound

        density >= 1 - delta_z - sum over pretty p in (z, a*x+b] of 1/(p ord(p))

    at every z in the schedule, with a boundary allowance of one index per
    progression (a progression mod M meets [1, x] at most x/M + 1 times).
    Violations raise SelfCheckError.
    """
    if q.linear is None or q.k != 1:
        raise ValueError("coprime report needs a linear form with k = 1")
    if x < 1:
        raise ValueError("x must be >= 1")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    a, b = q.linear
    g = _gcd_vector(q.F, x, q.linear)
    count = int((g[1:] == 1).sum())
    density = count / x
    pmax = a * x + b
    tail_pool = _pretty_prime_pool(q.F, pmax, cache)
    checkpoints = []
    for z in sorted(set(int(z) for z in z_schedule)):
        hd = small_prime_hit_density(q, z, x, cache)
        if hd.exact is not None:
            hit = float(hd.exact)
        else:
            hit = hd.marked_density
        residual = 0.0
        n_tail = 0
        for p, op in tail_pool:
            if z < p <= pmax and a % p != 0:
                residual += 1.0 / (p * op)
                n_tail += 1
        allowance = (len(hd.progressions) + n_tail) / x
        lower = 1.0 - hit - residual - allowance
        if density < lower:
            raise SelfCheckError(
                f"coprime density {density:.6f} below structural bound {lower:.6f} at z={z}"
            )
        checkpoints.append(CoprimeCheckpoint(z, hit, residual, lower))
    return CoprimeReport(
        q.F.coeff_key(), a, b, x, count, density, tuple(checkpoints)
    )


# ---------------------------------------------------------------------------
# consolidated report
# ---------------------------------------------------------------------------


@dataclass
class DensityReport:
    poly: str
    k: int
    g_form: str
    x: int
    count_A: int
    count_B: int
    floor_identity: int
    series: list[SeriesTruncation]
    series_A: list[SeriesTruncation]
    nonempty_A: bool
    nonempty_B: bool
    witness: int | None
    checkpoints: list[tuple[int, int, int]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "poly": self.poly,
            "k": self.k,
            "g_form": self.g_form,
            "x": self.x,
            "count_A": self.count_A,
            "count_B": self.count_B,
            "floor_identity": self.floor_identity,
            "series": [
                {"T": s.T, "value": s.value, "last_block": s.last_block}
                for s in self.series
            ],
            "series_A": [
                {"T": s.T, "value": s.value, "last_block": s.last_block}
                for s in self.series_A
            ],
            "nonempty_A": self.nonempty_A,
            "nonempty_B": self.nonempty_B,
            "witness": self.witness,
            "flags": self.flags,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def checkpoints_csv(self) -> str:
        lines = ["x,count_A,count_B,ratio_A,ratio_B"]
        for cx, ca, cb in self.checkpoints:
            lines.append(f"{cx},{ca},{cb},{ca / cx:.9f},{cb / cx:.9f}")
        return "\n".join(lines) + "\n"


def build_density_report(
    q: GcdQuery,
    x: int,
    method: str = "both",
    T: int = 2000,
    cache: OrdCache | None = None,
) -> DensityReport:
    """Assemble counts, the floor identity, series truncations at T/4, T/2, T
    and the nonemptiness verdicts into one report.  method 'both' recomputes
    the counts through the oracle and the sieve and insists they agree."""
    q._identity_only("build_density_report")
    if method not in ("oracle", "sieve", "both"):
        raise ValueError(f"unknown method {method!r}")
    if cache is None:
        cache = OrdCache.for_poly(q.F)
    flags: list[str] = []
    cps = sorted(set(cx for cx in (x // 4, x // 2, x) if cx >= 1))
    if method in ("sieve", "both"):
        counts = {cx: count_sieve(q, cx, cache) for cx in cps}
    else:
        gv = _gcd_vector(q.F, x, None)
        counts = {cx: _counts_from_gvec(gv, q.k, cx) for cx in cps}
    count_a, count_b = counts[x]
    if method == "both":
        oa, ob = count_oracle(q, x)
        if (oa, ob) != (count_a, count_b):
            raise SelfCheckError(
                f"oracle ({oa}, {ob}) and sieve ({count_a}, {count_b}) disagree at x={x}"
            )
    fi = floor_identity_B(q, x, cache)
    if method == "both" and fi != count_b:
        raise SelfCheckError(f"floor identity {fi} != count_B {count_b} at x={x}")
    ts = sorted(set(t for t in (T // 4, T // 2, T) if t >= 1))
    series_b = [series_density_B(q, t, cache) for t in ts]
    series_a = [series_density_A(q, t, cache) for t in ts]
    nb = b_nonempty(q, cache)
    na = a_nonempty(q, cache)
    if ord_crt(q.F, q.k, cache) == INF:
        flags.append(f"k={q.k} is not pretty; identity and series are empty sums")
    if not na.holds and series_a and abs(series_a[-1].value) > series_a[-1].last_block:
        flags.append(
            "A is empty but its series truncation exceeds the last-block gauge"
        )
    if cache.overflow_events:
        flags.append(
            "lcm overflow on moduli: " + ",".join(str(m) for m in cache.overflow_events)
        )
    return DensityReport(
        poly=q.F.coeff_key(),
        k=q.k,
        g_form=q.g_str(),
        x=x,
        count_A=count_a,
        count_B=count_b,
        floor_identity=fi,
        series=series_b,
        series_A=series_a,
        nonempty_A=na.holds,
        nonempty_B=nb.holds,
        witness=na.witness,
        checkpoints=[(cx, counts[cx][0], counts[cx][1]) for cx in cps],
        flags=flags,
    )
