"""Writes moduli.txt: for each odd prime p < 100 and 1 <= k <= 4, the least
monic irreducible polynomial of degree k over F_p, where x^k + c_{k-1}x^{k-1}
+ ... + c_0 is ranked by the integer c_0 + c_1 p + ... + c_{k-1} p^{k-1}."""

from itertools import product


def primes(n):
    return [p for p in range(3, n) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


def divides(f, g, p):
    # does monic g divide f over F_p (coefficients low to high)
    r = list(f)
    dg = len(g) - 1
    for i in range(len(r) - 1, dg - 1, -1):
        c = r[i] % p
        if c:
            for j in range(dg + 1):
                r[i - dg + j] = (r[i - dg + j] - c * g[j]) % p
    return all(x % p == 0 for x in r[:dg])


def irreducible(f, p):
    k = len(f) - 1
    for d in range(1, k // 2 + 1):
        for low in product(range(p), repeat=d):
            if divides(f, list(low) + [1], p):
                return False
    return True


def least(p, k):
    for n in range(p ** k):
        low = [(n // p ** i) % p for i in range(k)]
        f = low + [1]
        if irreducible(f, p):
            return low


with open("moduli.txt", "w") as out:
    out.write("# p k c_0 .. c_{k-1}   (monic modulus x^k + c_{k-1}x^{k-1} + ... + c_0)\n")
    for p in primes(100):
        for k in range(1, 5):
            out.write(" ".join(map(str, [p, k] + least(p, k))) + "\n")
