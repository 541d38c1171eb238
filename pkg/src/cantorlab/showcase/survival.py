"""Survival probabilities of edge percolation on the binary tree.

Each edge is kept with probability q = 2/3. p_n is the probability that the
root keeps a path of length n; p_0 = 1 and

    p_{n+1} = 2q(1-q) p_n + q^2 (2 p_n - p_n^2) = -(4/9) p_n^2 + (4/3) p_n.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2

from ..exact import coprime_fraction

Q_KEEP = Fraction(2, 3)
LIMIT = Fraction(3, 4)


def iterate_map(x: Fraction) -> Fraction:
    """One step of the recurrence, for any rational x."""
    q = Q_KEEP
    return 2 * q * (1 - q) * x + q * q * (2 * x - x * x)


def survival_prob(n: int) -> Fraction:
    """p_n, exactly.

    With p_n = a_n / 9^(2^n - 1) the recurrence becomes
    a_{n+1} = 4 a_n (3·9^(2^n - 1) - a_n). Since a_n ≡ 2 (mod 3) for n >= 1 the
    fraction is already reduced, so no gcd is ever taken; the numerator of
    p_20 has about a million digits.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    a = gmpy2.mpz(1)
    d = gmpy2.mpz(1)
    for _ in range(n):
        a = 4 * a * (3 * d - a)
        d = d * d * 9
    return coprime_fraction(int(a), int(d))


def survival_sequence(n: int) -> list[Fraction]:
    """p_0, ..., p_n via the plain Fraction recurrence (fine for small n)."""
    out = [Fraction(1)]
    for _ in range(n):
        out.append(iterate_map(out[-1]))
    return out
