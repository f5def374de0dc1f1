"""Small exact number-theory helpers: factorization and square roots modulo m."""

from __future__ import annotations

from math import isqrt


def factorize(n: int) -> dict:
    """Prime factorization by trial division; fine for the desk-scale sizes
    (up to ~10^12) this package produces."""
    n = abs(n)
    out = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
        p += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def sqrt_mod_prime(a: int, p: int):
    """One square root of a modulo an odd prime p, or None (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _sqrts_mod_odd_prime_power(a: int, p: int, k: int):
    """All roots of x^2 = a modulo p^k for an odd prime p."""
    pk = p ** k
    a %= pk
    if a == 0:
        step = p ** ((k + 1) // 2)
        return list(range(0, pk, step))
    v = 0
    aa = a
    while aa % p == 0:
        aa //= p
        v += 1
    if v % 2:
        return []
    r0 = sqrt_mod_prime(aa % p, p)
    if r0 is None:
        return []
    # Hensel-lift the unit part to modulus p^(k - v).
    ku = k - v
    r = r0
    mod = p
    while mod < p ** ku:
        # f(r) = r^2 - aa; f'(r) = 2r invertible mod p
        mod *= p
        inv = pow(2 * r, -1, mod)
        r = (r - (r * r - aa) * inv) % mod
    # x = p^(v/2) * y with y = +-r (mod p^(k-v)), taken modulo p^(k - v/2).
    base = p ** (v // 2)
    modu = p ** ku
    out = set()
    for root in (r % modu, (-r) % modu):
        x0 = (base * root) % pk
        period = base * modu
        for x in range(x0, pk, period):
            out.add(x)
    return sorted(out)


def _sqrts_mod_power_of_two(a: int, k: int):
    pk = 1 << k
    a %= pk
    roots = [r for r in range(min(pk, 8)) if (r * r - a) % min(pk, 8) == 0]
    mod = min(pk, 8)
    while mod < pk:
        mod <<= 1
        half = mod >> 1
        nxt = set()
        for r in roots:
            for cand in (r, r + half):
                if (cand * cand - a) % mod == 0:
                    nxt.add(cand % mod)
        roots = sorted(nxt)
    return roots


def sqrts_mod(a: int, m: int):
    """All x in [0, m) with x^2 = a (mod m)."""
    if m == 1:
        return [0]
    a %= m
    roots = [0]
    modulus = 1
    for p, k in sorted(factorize(m).items()):
        pk = p ** k
        local = (_sqrts_mod_power_of_two(a, k) if p == 2
                 else _sqrts_mod_odd_prime_power(a, p, k))
        if not local:
            return []
        combined = []
        for r in roots:
            for s in local:
                # CRT: x = r (mod modulus), x = s (mod pk)
                t = ((s - r) * pow(modulus, -1, pk)) % pk
                combined.append(r + modulus * t)
        modulus *= pk
        roots = sorted(set(x % modulus for x in combined))
    return roots


def square_divisors(n: int):
    """All f >= 1 with f^2 dividing n (n != 0)."""
    fact = factorize(n)
    out = [1]
    for p, k in fact.items():
        out = [f * p ** e for f in out for e in range(k // 2 + 1)]
    return sorted(out)
