"""Divisibility structure of polynomial orbit sequences: ranks of apparition,
prime scans, and exact densities of the gcd sets."""

__version__ = "0.1.0"

from .arith_core import factorize, mobius_sieve, sieve_primes
from .orbit_engine import (
    INF,
    CacheMismatchError,
    IntPolynomial,
    OrbitClass,
    OrdCache,
    ParseError,
    PreperiodicOrbitError,
    a_mod,
    a_value,
    classify_orbit,
    ell,
    gcd_index_term,
    growth_constant_estimate,
    nu_p_of_a,
    ord_crt,
    ord_direct,
    ord_table,
    parse_polynomial,
    require_wandering,
)
from .prime_lab import (
    AnomalousReport,
    PrimeRecord,
    anomalous_report,
    is_injective_mod_p,
    low_rank_primes,
    mertens_pretty_product,
    pretty_prime_density,
    scan_csv,
    scan_primes,
    tail_partial_sum,
)
from .density_lab import (
    DensityReport,
    GcdQuery,
    LkSet,
    MembershipVerdict,
    NonemptyVerdict,
    SelfCheckError,
    SeriesTruncation,
    a_nonempty,
    b_nonempty,
    build_Lk,
    build_density_report,
    count_A_inclusion_exclusion,
    count_oracle,
    count_sieve,
    floor_identity_B,
    linear_coprime_report,
    membership,
    non_multiples_count,
    series_density_A,
    series_density_B,
    small_prime_hit_density,
    y_k_lower_bound,
)
from .verify import SuiteResult, run_all, run_suites

__all__ = [
    "INF",
    "AnomalousReport",
    "CacheMismatchError",
    "DensityReport",
    "GcdQuery",
    "IntPolynomial",
    "LkSet",
    "MembershipVerdict",
    "NonemptyVerdict",
    "OrbitClass",
    "OrdCache",
    "ParseError",
    "PreperiodicOrbitError",
    "PrimeRecord",
    "SelfCheckError",
    "SeriesTruncation",
    "SuiteResult",
    "a_mod",
    "a_nonempty",
    "a_value",
    "anomalous_report",
    "b_nonempty",
    "build_Lk",
    "build_density_report",
    "classify_orbit",
    "count_A_inclusion_exclusion",
    "count_oracle",
    "count_sieve",
    "ell",
    "factorize",
    "floor_identity_B",
    "gcd_index_term",
    "growth_constant_estimate",
    "is_injective_mod_p",
    "linear_coprime_report",
    "low_rank_primes",
    "membership",
    "mertens_pretty_product",
    "mobius_sieve",
    "non_multiples_count",
    "nu_p_of_a",
    "ord_crt",
    "ord_direct",
    "ord_table",
    "parse_polynomial",
    "pretty_prime_density",
    "require_wandering",
    "run_all",
    "run_suites",
    "scan_csv",
    "scan_primes",
    "series_density_A",
    "series_density_B",
    "sieve_primes",
    "small_prime_hit_density",
    "tail_partial_sum",
    "y_k_lower_bound",
]
