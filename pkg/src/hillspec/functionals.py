"""The functionals alpha_n(z), beta_n^-(z), beta_n^+(z) as perturbation series.

Each series term is a bilinear form <w, T^{k-1} u> over the index set
{j = n mod 2, j != +-n, |j| <= J}, where T x_j = sum V(j - j') x_j' / (n^2 - j^2 + z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.special

from .potentials import FourierPotential

DENSE_LIMIT = 2000
DEFAULT_K_MAX = 400
DEFAULT_TOL_REL = 1e-12
DEFAULT_TOL_ABS = 1e-30


class SeriesError(RuntimeError):
    pass


class SeriesDivergence(SeriesError):
    """Ratio estimate of the series terms is >= 1 at the depth limit."""


class TruncationTooSmall(SeriesError):
    pass


class NTooSmall(ValueError):
    """Smallness condition of the weighted tail bound fails."""


@dataclass(frozen=True)
class WeightContext:
    """Weighted-norm data used for the a priori tail bound."""

    norm: float
    A: float
    C: float
    omega_2n: float = 1.0


@dataclass(frozen=True)
class BetaEval:
    n: int
    z: complex
    alpha: complex
    beta_minus: complex
    beta_plus: complex
    J: int
    K: int
    tail_bound: float
    converged: bool
    escape: float = 0.0  # change when J shrinks by 2n
    weighted_tail_bound: Optional[float] = None
    per_term: Optional[tuple] = field(default=None, repr=False)  # (k, S11, S12, S21)

    def as_dict(self) -> dict:
        d = {
            "n": self.n,
            "z": self.z,
            "alpha": self.alpha,
            "beta_minus": self.beta_minus,
            "beta_plus": self.beta_plus,
            "J": self.J,
            "K": self.K,
            "tail_bound": self.tail_bound,
            "converged": self.converged,
            "escape": self.escape,
            "weighted_tail_bound": self.weighted_tail_bound,
        }
        if self.per_term is not None:
            d["per_term"] = [list(t) for t in self.per_term]
        return d


@dataclass(frozen=True)
class SigmaPartial:
    m: int
    sigma_minus: complex
    sigma_plus: complex


def default_J(P: FourierPotential, n: int) -> int:
    J = 8 * n
    if P.support_bound is not None:
        J = max(J, 2 * n + 4 * P.support_bound)
    return max(J, 2 * n + 2)


class _Transfer:
    """The operator T and the vectors u+-, w+- for fixed (n, z, J)."""

    def __init__(self, P: FourierPotential, n: int, z: complex, J: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        if abs(z) > n / 2:
            raise ValueError(f"|z| = {abs(z):.4g} exceeds n/2 = {n / 2:g}")
        if J < 2 * n + 2:
            raise ValueError(f"J must be >= 2n + 2 = {2 * n + 2}")
        start = -J if (J - n) % 2 == 0 else -J + 1
        js = np.arange(start, J + 1, 2)
        self.js = js
        self.mask = np.abs(js) != n
        d = (n * n - js.astype(float) ** 2) + z
        d[~self.mask] = 1.0
        if np.any(d == 0):
            raise SeriesError("vanishing denominator n^2 - j^2 + z")
        self.d = d
        size = len(js)
        lags = 2 * np.arange(size)
        self.col = P.coeffs(lags)  # V(j_i - j_0)
        self.row = P.coeffs(-lags)  # V(j_0 - j_i)
        self.dense = None
        if size <= DENSE_LIMIT:
            self.dense = scipy.linalg.toeplitz(self.col, self.row)
        m = self.mask
        self.u_plus = np.where(m, P.coeffs(js + n) / d, 0)
        self.u_minus = np.where(m, P.coeffs(js - n) / d, 0)
        self.w_plus = np.where(m, P.coeffs(n - js), 0)
        self.w_minus = np.where(m, P.coeffs(-n - js), 0)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            y = self.dense @ x
        else:
            y = scipy.linalg.matmul_toeplitz((self.col, self.row), x)
        return np.where(self.mask, y / self.d, 0)


def _run_series(tr: _Transfer, K_max: int, tol_rel: float, tol_abs: float, fixed_depth: Optional[int], keep: bool):
    """Accumulate S11, S12, S21 until the norm-based geometric tail is below tolerance."""
    w_norm = (np.linalg.norm(tr.w_minus), np.linalg.norm(tr.w_minus), np.linalg.norm(tr.w_plus))
    acc = np.zeros(3, dtype=complex)
    xp, xm = tr.u_plus, tr.u_minus
    prev = None
    ratios: list[np.ndarray] = []
    terms = []
    satisfied = 0
    tail = np.full(3, math.inf)
    k = 0
    depth = fixed_depth if fixed_depth is not None else K_max
    while k < depth:
        k += 1
        s = np.array([np.dot(tr.w_minus, xp), np.dot(tr.w_minus, xm), np.dot(tr.w_plus, xp)])
        acc += s
        if keep:
            terms.append((k, complex(s[0]), complex(s[1]), complex(s[2])))
        bound = np.array([w_norm[0] * np.linalg.norm(xp), w_norm[1] * np.linalg.norm(xm), w_norm[2] * np.linalg.norm(xp)])
        if prev is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios.append(np.where(prev > 0, bound / prev, 0.0))
        prev = bound
        if ratios:
            rho = ratios[-1] if len(ratios) == 1 else np.maximum(ratios[-1], ratios[-2])
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = np.where(bound == 0, 0.0, np.where(rho < 1, bound * rho / (1 - rho), math.inf))
        elif not np.any(bound):
            tail = np.zeros(3)
        if fixed_depth is None:
            ok = np.all(tail <= np.maximum(tol_rel * np.abs(acc), tol_abs))
            satisfied = satisfied + 1 if ok else 0
            if satisfied >= 2:
                break
        if not np.any(bound):
            tail = np.zeros(3)
            if fixed_depth is None:
                break
        xp, xm = tr.apply(xp), tr.apply(xm)
    converged = bool(np.all(tail <= np.maximum(tol_rel * np.abs(acc), tol_abs)))
    if fixed_depth is None and not converged and ratios and np.any(ratios[-1] >= 1):
        raise SeriesDivergence(f"series ratio estimate {float(np.max(ratios[-1])):.3g} >= 1 at depth {k}")
    return acc, k, float(np.max(tail)), converged, tuple(terms) if keep else None


def transfer_eval(
    P: FourierPotential,
    n: int,
    z: complex = 0.0,
    J: Optional[int] = None,
    K_max: int = DEFAULT_K_MAX,
    tol_rel: float = DEFAULT_TOL_REL,
    *,
    tol_abs: float = DEFAULT_TOL_ABS,
    per_term: bool = False,
    escape_check: bool = True,
    weight_context: Optional[WeightContext] = None,
) -> BetaEval:
    """alpha_n(z), beta_n^-(z), beta_n^+(z) with an adaptive series depth.

    With ``escape_check`` the evaluation is repeated at J - 2n and the change
    is reported as ``escape``; for finite-support potentials a change above
    sqrt(tol_rel) of the result raises TruncationTooSmall.
    """
    z = complex(z)
    J = default_J(P, n) if J is None else int(J)
    tr = _Transfer(P, n, z, J)
    acc, K, tail, converged, terms = _run_series(tr, K_max, tol_rel, tol_abs, None, per_term)
    alpha, s12, s21 = acc
    beta_minus = complex(P.coeff(-2 * n) + s12)
    beta_plus = complex(P.coeff(2 * n) + s21)
    escape = 0.0
    if escape_check and J - 2 * n >= 2 * n + 2:
        lo, *_ = _run_series(_Transfer(P, n, z, J - 2 * n), K_max, tol_rel, tol_abs, None, False)
        escape = float(np.max(np.abs(lo - acc)))
        scale = max(abs(alpha), abs(beta_minus), abs(beta_plus))
        if P.support_bound is not None and escape > math.sqrt(tol_rel) * max(scale, tol_abs):
            raise TruncationTooSmall(f"J={J} too small for n={n}: truncation change {escape:.2e}")
    wtb = None
    if weight_context is not None:
        try:
            wtb = tail_bound_weighted(weight_context.norm, weight_context.A, weight_context.C, n, K) / weight_context.omega_2n
        except NTooSmall:
            wtb = None
    return BetaEval(n, z, complex(alpha), beta_minus, beta_plus, J, K, tail, converged, escape, wtb, terms)


def series_terms(P: FourierPotential, n: int, z: complex, depth: int, J: Optional[int] = None) -> tuple:
    """The first ``depth`` terms (k, S11, S12, S21) without early stopping."""
    J = default_J(P, n) if J is None else int(J)
    _, _, _, _, terms = _run_series(_Transfer(P, n, complex(z), J), depth, 0.0, 0.0, depth, True)
    return terms


def partial_sigma(P: FourierPotential, n: int, z: complex, m: int, J: Optional[int] = None) -> SigmaPartial:
    """V(+-2n) plus the first m terms of the beta series."""
    if m < 0:
        raise ValueError("m must be >= 0")
    s12 = s21 = 0j
    if m > 0:
        for _, _, a12, a21 in series_terms(P, n, z, m, J):
            s12 += a12
            s21 += a21
    return SigmaPartial(m, complex(P.coeff(-2 * n) + s12), complex(P.coeff(2 * n) + s21))


def sum_inverse_gap(n: int, beta_exponent: float, *, tail_terms: int = 40) -> float:
    """sum over j = n mod 2, j != +-n of |n^2 - j^2|^(-beta).

    Summed directly up to |j| <= 4n; beyond that the binomial expansion of
    (j^2 - n^2)^(-beta) gives a tail in Hurwitz zeta values.
    """
    b = float(beta_exponent)
    if not 0.5 < b <= 1.0:
        raise ValueError("beta_exponent must lie in (1/2, 1]")
    if n < 2:
        raise ValueError("n must be >= 2")
    J0 = 4 * n
    js = np.arange(n % 2, J0 + 1, 2)
    js = js[js != n]
    vals = np.abs(float(n * n) - js.astype(float) ** 2) ** (-b)
    weights = np.where(js == 0, 1.0, 2.0)
    direct = float(np.sum(weights * vals))
    first = int(js[-1]) + 2  # first j beyond the direct range, same parity as n
    tail = 0.0
    coef = 1.0
    for m in range(tail_terms):
        if m > 0:
            coef *= (b + m - 1) / m
        s = 2 * b + 2 * m
        term = coef * n ** (2 * m) * 2.0 ** (-s) * float(scipy.special.zeta(s, first / 2))
        tail += term
        if term < 1e-17 * (direct + tail):
            break
    return direct + 2.0 * tail


def tail_bound_weighted(norm: float, A: float, C: float, n: int, K: int, omega_2n: float = 1.0) -> float:
    """sum_{k>K} norm^{k+1} (2AC)^k (2 log(6n)/n)^k, divided by omega_2n."""
    if norm < 0:
        raise ValueError("norm must be >= 0")
    if norm == 0:
        return 0.0
    r = norm * 2 * A * C * 2 * math.log(6 * n) / n
    if r >= 0.5:
        raise NTooSmall(f"n={n} too small: 4 |v| A C log(6n)/n = {r:.3g} >= 1/2")
    return norm * r ** (K + 1) / (1 - r) / omega_2n
