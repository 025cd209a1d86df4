"""Orbits of 0 under an integer polynomial F and their divisibility structure.

The sequence studied everywhere in this package is

    a_0 = 0,   a_n = F(a_{n-1})

for F of degree >= 2 with positive leading coefficient.  When the orbit of 0
escapes to infinity (the "wandering" case) the sequence is a divisibility
sequence: n | m implies a_n | a_m.  The central quantity is the rank of
apparition

    ord(n) = least r >= 1 with n | a_r   (infinite when no such r exists)

together with ell(n) = lcm(n, ord(n)), the period of the indices r at which
n divides gcd(r, a_r).

Infinite ranks are represented by math.inf (exposed here as INF); the capped
search additionally uses None for "not determined within the cap".
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .arith_core import MODULUS_MAX, factorize, lcm_checked

INF = math.inf

# a_value refuses to materialize orbit values past this index; their size is
# doubly exponential in n and nothing in the package needs them.
_EXACT_INDEX_MAX = 64


class ParseError(ValueError):
    """Raised for text that does not describe an admissible polynomial."""


class PreperiodicOrbitError(ValueError):
    """Raised when an operation requires a wandering orbit but 0 is preperiodic."""

    def __init__(self, poly: "IntPolynomial", orbit_prefix: list[int]):
        self.poly = poly
        self.orbit_prefix = orbit_prefix
        chain = " -> ".join(str(v) for v in orbit_prefix)
        super().__init__(f"orbit of 0 under {poly} is preperiodic: {chain}")


class CacheMismatchError(RuntimeError):
    """Raised when a rank cache is used with a different polynomial than the
    one it was computed for."""


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial c_0 + c_1 x + ... + c_d x^d, degree d >= 2, c_d >= 1.

    coeffs are stored ascending, so coeffs[i] is the coefficient of x^i.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) < 3:
            raise ParseError("degree must be at least 2")
        if self.coeffs[-1] < 1:
            raise ParseError("leading coefficient must be positive")
        if any(not isinstance(c, int) for c in self.coeffs):
            raise ParseError("coefficients must be integers")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def escape_radius(self) -> int:
        """R = 1 + sum |c_i| over i < d.  Any |z| > R has |F(z)| > |z|, so an
        orbit value beyond R never comes back."""
        return 1 + sum(abs(c) for c in self.coeffs[:-1])

    def eval_int(self, v: int) -> int:
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * v + c
        return acc

    def eval_mod(self, v: int, m: int) -> int:
        acc = self.coeffs[-1] % m
        for c in reversed(self.coeffs[:-1]):
            acc = (acc * v + c) % m
        return acc

    def coeff_key(self) -> str:
        """Canonical ascending coefficient list, e.g. '1,0,1' for x^2+1."""
        return ",".join(str(c) for c in self.coeffs)

    def __str__(self) -> str:
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                term = str(abs(c))
            else:
                xs = "x" if i == 1 else f"x^{i}"
                term = xs if abs(c) == 1 else f"{abs(c)}*{xs}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(f"+ {term}" if c > 0 else f"- {term}")
        return " ".join(parts) if parts else "0"


_TERM_RE = re.compile(r"^(?:(\d+)\*?)?x(?:\^(\d+))?$|^(\d+)$")


def parse_polynomial(text: str) -> IntPolynomial:
    """Parse either an ascending coefficient list '1,0,1' or an expression
    like 'x^2+1', '2*x^3-x+5'.  Both forms produce the same polynomial."""
    s = text.strip()
    if not s:
        raise ParseError("empty polynomial")
    if "," in s:
        try:
            coeffs = tuple(int(p.strip()) for p in s.split(","))
        except ValueError as e:
            raise ParseError(f"bad coefficient list {text!r}") from e
        return IntPolynomial(coeffs)
    # expression form: split into signed terms
    s = s.replace(" ", "").replace("X", "x")
    if s[0] not in "+-":
        s = "+" + s
    tokens = re.findall(r"[+-][^+-]+", s)
    if "".join(tokens) != s:
        raise ParseError(f"cannot parse {text!r}")
    degree_coeffs: dict[int, int] = {}
    for tok in tokens:
        sign = -1 if tok[0] == "-" else 1
        m = _TERM_RE.match(tok[1:])
        if not m:
            raise ParseError(f"cannot parse term {tok!r} in {text!r}")
        if m.group(3) is not None:
            exp, coeff = 0, int(m.group(3))
        else:
            coeff = int(m.group(1)) if m.group(1) else 1
            exp = int(m.group(2)) if m.group(2) else 1
        degree_coeffs[exp] = degree_coeffs.get(exp, 0) + sign * coeff
    deg = max(degree_coeffs)
    return IntPolynomial(tuple(degree_coeffs.get(i, 0) for i in range(deg + 1)))


# ---------------------------------------------------------------------------
# orbit classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitClass:
    """Orbit type of 0: wandering, or preperiodic with the least m and cycle
    length period >= 1 such that a_m = a_{m+period} over the integers."""

    wandering: bool
    preperiod: int | None = None
    period: int | None = None
    prefix: tuple[int, ...] = ()


@lru_cache(maxsize=None)
def classify_orbit(F: IntPolynomial) -> OrbitClass:
    """Decide wandering vs preperiodic by exact iteration.

    Values that stay within [-R, R] must repeat within 2R+2 steps; the first
    value beyond R certifies escape.
    """
    R = F.escape_radius
    seen: dict[int, int] = {}
    orbit = []
    v = 0
    for i in range(2 * R + 3):
        if abs(v) > R:
            return OrbitClass(True, prefix=tuple(orbit))
        if v in seen:
            return OrbitClass(
                False, preperiod=seen[v], period=i - seen[v], prefix=tuple(orbit + [v])
            )
        seen[v] = i
        orbit.append(v)
        v = F.eval_int(v)
    raise AssertionError("orbit classification did not terminate")


def require_wandering(F: IntPolynomial) -> None:
    cls = classify_orbit(F)
    if not cls.wandering:
        raise PreperiodicOrbitError(F, list(cls.prefix))


# ---------------------------------------------------------------------------
# orbit values
# ---------------------------------------------------------------------------


def _check_modulus(m: int) -> None:
    if m < 1:
        raise ValueError("modulus must be positive")
    if m > MODULUS_MAX:
        raise ValueError(f"modulus {m} exceeds the 2^62 bound")


def a_value(F: IntPolynomial, n: int) -> int:
    """Exact a_n.  Only sensible for small n; the value has about d^n digits."""
    if n < 0 or n > _EXACT_INDEX_MAX:
        raise ValueError(f"exact orbit values limited to 0 <= n <= {_EXACT_INDEX_MAX}")
    v = 0
    for _ in range(n):
        v = F.eval_int(v)
    return v


def a_mod(F: IntPolynomial, n: int, m: int) -> int:
    """a_n mod m by n reduced Horner steps."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    _check_modulus(m)
    if m == 1:
        return 0
    v = 0
    for _ in range(n):
        v = F.eval_mod(v, m)
    return v


def ord_direct_capped(F: IntPolynomial, n: int, cap: int) -> int | float | None:
    """First r <= cap with a_r = 0 mod n; INF when cap >= n exhausts the state
    space without a hit (0 can only recur within n steps); None otherwise.
    """
    _check_modulus(n)
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if n == 1:
        return 1
    v = 0
    for r in range(1, cap + 1):
        v = F.eval_mod(v, n)
        if v == 0:
            return r
    return INF if cap >= n else None


def ord_direct(F: IntPolynomial, n: int) -> int | float:
    """Rank of apparition of n by direct iteration: least r >= 1 with
    n | a_r, else INF.  The search stops at r = n, after which the residue
    orbit has already cycled without passing through 0."""
    return ord_direct_capped(F, n, n)  # cap = n always resolves


# ---------------------------------------------------------------------------
# vectorized orbit kernels (numpy int64; moduli must stay below 2^31 so that
# a product of two residues fits int64)
# ---------------------------------------------------------------------------

_VEC_MODULUS_MAX = 2**31


def _horner_vec(coeffs: tuple[int, ...], v: np.ndarray, m: np.ndarray) -> np.ndarray:
    acc = np.full(v.shape, coeffs[-1], dtype=np.int64)
    acc %= m
    for c in reversed(coeffs[:-1]):
        acc *= v
        acc += c
        acc %= m
    return acc


def first_zero_scan(
    F: IntPolynomial, mods: np.ndarray, caps: np.ndarray
) -> np.ndarray:
    """For each modulus mods[i], the least r <= caps[i] with a_r = 0 mod
    mods[i], or 0 when there is none.  Semantically one ord_direct_capped per
    entry, run in lockstep across all moduli still alive."""
    mods = np.asarray(mods, dtype=np.int64)
    caps = np.asarray(caps, dtype=np.int64)
    if mods.size and int(mods.max()) >= _VEC_MODULUS_MAX:
        raise ValueError("vector kernel limited to moduli below 2^31")
    if mods.size and int(mods.min()) < 2:
        raise ValueError("vector kernel needs moduli >= 2")
    found = np.zeros(mods.shape, dtype=np.int64)
    idx = np.arange(mods.size)
    v = np.zeros(mods.size, dtype=np.int64)
    r = 0
    while mods.size:
        r += 1
        v = _horner_vec(F.coeffs, v, mods)
        zero = v == 0
        if zero.any():
            found[idx[zero]] = r
        retire = zero | (caps <= r)
        if retire.any():
            keep = ~retire
            mods, caps, idx, v = mods[keep], caps[keep], idx[keep], v[keep]
    return found


@lru_cache(maxsize=8)
def ord_table(F: IntPolynomial, limit: int) -> np.ndarray:
    """Ranks of apparition for every modulus up to limit, as an int64 array t
    with t[n] = ord(n) and 0 meaning infinite.  t[1] = 1.  Read-only."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    t = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 1:
        t[1] = 1
    if limit >= 2:
        mods = np.arange(2, limit + 1, dtype=np.int64)
        t[2:] = first_zero_scan(F, mods, mods)
    t.setflags(write=False)
    return t


# ---------------------------------------------------------------------------
# rank cache
# ---------------------------------------------------------------------------

_CACHE_VERSION = 1


@dataclass
class OrdCache:
    """Persistent map modulus -> rank of apparition for a fixed polynomial.

    Stored entries are exact: a finite value r means a_r is the first orbit
    value divisible by the key, and INF means no orbit value ever is.  The
    CSV on disk encodes INF as 0 and carries the polynomial fingerprint.
    """

    poly_key: str
    ranks: dict[int, int | float] = field(default_factory=dict)
    overflow_events: list[int] = field(default_factory=list)

    @classmethod
    def for_poly(cls, F: IntPolynomial) -> "OrdCache":
        return cls(F.coeff_key())

    def _check_poly(self, F: IntPolynomial) -> None:
        if F.coeff_key() != self.poly_key:
            raise CacheMismatchError(
                f"cache built for {self.poly_key!r}, used with {F.coeff_key()!r}"
            )

    def get(self, n: int) -> int | float | None:
        return self.ranks.get(n)

    def put(self, n: int, rank: int | float) -> None:
        old = self.ranks.get(n)
        if old is not None and old != rank:
            raise CacheMismatchError(f"conflicting ranks for {n}: {old} vs {rank}")
        self.ranks[n] = rank

    def rank_of(self, F: IntPolynomial, n: int) -> int | float:
        """Cached ord_direct."""
        self._check_poly(F)
        r = self.ranks.get(n)
        if r is None:
            r = ord_direct(F, n)
            self.ranks[n] = r
        return r

    def merge(self, other: "OrdCache") -> None:
        if other.poly_key != self.poly_key:
            raise CacheMismatchError(
                f"cannot merge cache for {other.poly_key!r} into {self.poly_key!r}"
            )
        for n, r in other.ranks.items():
            self.put(n, r)

    def note_overflow(self, n: int) -> None:
        if n not in self.overflow_events:
            self.overflow_events.append(n)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# poly={self.poly_key}\n")
            fh.write(f"# version={_CACHE_VERSION}\n")
            fh.write("p,ord\n")
            for n in sorted(self.ranks):
                r = self.ranks[n]
                fh.write(f"{n},{0 if r == INF else int(r)}\n")

    @classmethod
    def load(cls, path, expect: IntPolynomial | str | None = None) -> "OrdCache":
        meta: dict[str, str] = {}
        ranks: dict[int, int | float] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key.strip()] = val.strip()
                    continue
                if line == "p,ord":
                    continue
                ps, _, rs = line.partition(",")
                n, r = int(ps), int(rs)
                ranks[n] = INF if r == 0 else r
        if "poly" not in meta:
            raise CacheMismatchError(f"{path}: missing polynomial fingerprint")
        if meta.get("version") != str(_CACHE_VERSION):
            raise CacheMismatchError(f"{path}: unsupported cache version")
        if expect is not None:
            want = expect.coeff_key() if isinstance(expect, IntPolynomial) else expect
            if meta["poly"] != want:
                raise CacheMismatchError(
                    f"{path}: cache is for poly {meta['poly']!r}, expected {want!r}"
                )
        return cls(meta["poly"], ranks)


# ---------------------------------------------------------------------------
# composite ranks via CRT, and the joint rank ell
# ---------------------------------------------------------------------------


def ord_crt(F: IntPolynomial, n: int, cache: OrdCache | None = None) -> int | float:
    """Rank of apparition of n composed from its prime powers:
    ord(n) = lcm of ord(p^e) over p^e || n, infinite as soon as one factor is.

    An lcm that leaves the 64-bit range is treated as infinite for analysis
    purposes and recorded on the cache as an overflow event.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1
    if cache is None:
        cache = OrdCache.for_poly(F)
    acc = 1
    for p, e in factorize(n).factors:
        r = cache.rank_of(F, p**e)
        if r == INF:
            return INF
        acc2 = lcm_checked(acc, int(r))
        if acc2 is None:
            cache.note_overflow(n)
            return INF
        acc = acc2
    return acc


def ell(F: IntPolynomial, n: int, cache: OrdCache | None = None) -> int | float:
    """ell(n) = lcm(n, ord(n)): the exact period of indices r with
    n | gcd(r, a_r).  Infinite when n is not pretty or on lcm overflow."""
    r = ord_crt(F, n, cache)
    if r == INF:
        return INF
    v = lcm_checked(n, int(r))
    if v is None:
        if cache is not None:
            cache.note_overflow(n)
        return INF
    return v


def gcd_index_term(F: IntPolynomial, n: int) -> int:
    """gcd(n, a_n), computed from a_n mod n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1
    return math.gcd(n, a_mod(F, n, n))


class Valuation(NamedTuple):
    """A p-adic valuation capped at e_max.  saturated means the true value is
    >= e_max and only the cap is reported."""

    value: int
    saturated: bool


def nu_p_of_a(F: IntPolynomial, n: int, p: int, e_max: int) -> Valuation:
    """nu_p(a_n) truncated at e_max, via a single orbit pass mod p^e_max."""
    if e_max < 1:
        raise ValueError("e_max must be >= 1")
    q = p**e_max
    _check_modulus(q)
    r = a_mod(F, n, q)
    if r == 0:
        return Valuation(e_max, True)
    v = 0
    while r % p == 0:
        r //= p
        v += 1
    return Valuation(v, False)


# ---------------------------------------------------------------------------
# growth constant
# ---------------------------------------------------------------------------


def growth_constant_estimate(F: IntPolynomial, n_iters: int) -> float:
    """log|a_n| / d^n at n = n_iters; the sequence converges to the growth
    constant of the orbit (positive for wandering F).

    Exact integers are used until |a_n| > 2R; after that the iteration runs in
    log space with the dominant-term correction log1p((F(a)-c_d a^d)/(c_d a^d)),
    which is exact to double precision because the correction shrinks like
    |a|^(-1).
    """
    if n_iters < 5:
        raise ValueError("n_iters must be at least 5")
    require_wandering(F)
    d = F.degree
    cd = F.coeffs[-1]
    R = F.escape_radius
    v = 0
    n = 0
    while n < n_iters and abs(v) <= 2 * R:
        v = F.eval_int(v)
        n += 1
    if n == n_iters:
        return math.log(abs(v)) / d**n
    L = math.log(abs(v))
    s = 1 if v > 0 else -1
    logcd = math.log(cd)
    while n < n_iters:
        # a = s*e^L, so c_i a^(i-d) / c_d = (c_i/c_d) * s^(i-d) * e^((i-d)L)
        delta = 0.0
        for i, c in enumerate(F.coeffs[:-1]):
            if c == 0:
                continue
            sgn = 1 if (d - i) % 2 == 0 else s
            delta += (c / cd) * sgn * math.exp((i - d) * L)
        L = logcd + d * L + math.log1p(delta)
        s = s if d % 2 == 1 else 1
        n += 1
    return L / d**n
