"""Independent reference computations used to derive frozen test values.

Nothing here imports the package's numerical kernels; everything is done by
brute force or by a different library routine.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate, special


def mathieu_pair(n: int) -> tuple[float, float]:
    """Eigenvalues of -y'' + 2cos(2x) y with y(x+pi) = (-1)^n y(x), near n^2."""
    return float(special.mathieu_b(n, 1.0)), float(special.mathieu_a(n, 1.0))


def mathieu_dirichlet(n: int) -> float:
    """Sine-type characteristic value: y(0) = y(pi) = 0."""
    return float(special.mathieu_b(n, 1.0))


def sawtooth_dirichlet_entry(n: int, m: int) -> float:
    """(2/pi) * integral of (x - pi/2) sin(nx) sin(mx) over [0, pi], plus n^2 on the diagonal."""
    val, _ = integrate.quad(lambda x: (x - math.pi / 2) * math.sin(n * x) * math.sin(m * x), 0, math.pi, limit=200)
    return 2 / math.pi * val + (n * n if n == m else 0.0)


def chain_sums(V, n: int, z: complex, depth: int, J: int):
    """S_k^{11}, S_k^{12}, S_k^{21} for k = 1..depth by explicit enumeration of index chains.

    V is a callable on even integers.  Chains run over j = n mod 2, j != +-n, |j| <= J.
    """
    idx = [j for j in range(-J, J + 1) if (j - n) % 2 == 0 and abs(j) != n]
    d = {j: n * n - j * j + z for j in idx}
    out = []
    for k in range(1, depth + 1):
        s11 = s12 = s21 = 0j
        for chain in itertools.product(idx, repeat=k):
            prod = 1.0 + 0j
            for a, b in zip(chain, chain[1:]):
                prod *= V(a - b)
            for j in chain:
                prod /= d[j]
            first, last = chain[0], chain[-1]
            s21 += V(n - first) * prod * V(last + n)
            s12 += V(-n - first) * prod * V(last - n)
            s11 += V(-n - first) * prod * V(last + n)
        out.append((s11, s12, s21))
    return out


def inverse_gap_direct(n: int, b: float, J: int) -> float:
    js = np.arange(-J + ((J - n) % 2), J + 1, 2)
    js = js[np.abs(js) != n]
    return float(np.sum(np.abs(float(n * n) - js.astype(float) ** 2) ** (-b)))


def inverse_gap_extrapolated(n: int, b: float, J: int = 10**5) -> float:
    """Direct sums at J and 10J with the J^(1-2b) tail removed by extrapolation."""
    lo, hi = inverse_gap_direct(n, b, J), inverse_gap_direct(n, b, 10 * J)
    r = 10.0 ** (2 * b - 1)
    return (hi * r - lo) / (r - 1)
