"""Roots of (z - alpha(z))^2 = beta^-(z) beta^+(z) near z = 0, and their oracle check."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .functionals import DEFAULT_K_MAX, BetaEval, transfer_eval
from .matrix_spectra import OracleError, convergence_probe, parity_ok
from .potentials import FourierPotential

REAL_RTOL = 1e-10


class SolveError(RuntimeError):
    pass


class RootEscape(SolveError):
    """An iterate left the disc |z| < n/4."""


@dataclass(frozen=True)
class SpectralTriple:
    n: int
    lambda_minus: complex
    lambda_plus: complex
    z_minus: complex
    z_plus: complex
    z_star: complex
    gamma: complex
    source: str
    residual: float = 0.0
    mu: Optional[complex] = None
    delta: Optional[complex] = None
    w_plus: complex = 0j  # branch value with z_plus = alpha(z_plus) + w_plus
    degenerate: bool = False
    iterations: int = 0

    @classmethod
    def from_roots(cls, n: int, z_minus: complex, z_plus: complex, source: str, **extra) -> "SpectralTriple":
        z_minus, z_plus = complex(z_minus), complex(z_plus)
        lm, lp = n * n + z_minus, n * n + z_plus
        # the gap from the offsets keeps digits that n^2 + z would drop
        return cls(n, lm, lp, z_minus, z_plus, (z_minus + z_plus) / 2, z_plus - z_minus, source, **extra)

    def with_dirichlet(self, mu: complex) -> "SpectralTriple":
        mu = complex(mu)
        source = "both" if self.source == "series" else self.source
        return replace(self, mu=mu, delta=mu - self.lambda_plus, source=source)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda_minus": self.lambda_minus,
            "lambda_plus": self.lambda_plus,
            "mu": self.mu,
            "z_minus": self.z_minus,
            "z_plus": self.z_plus,
            "z_star": self.z_star,
            "gamma": self.gamma,
            "delta": self.delta,
            "source": self.source,
            "residual": self.residual,
            "degenerate": self.degenerate,
            "iterations": self.iterations,
        }


def _iterate_branch(evaluate, n: int, sign: int, w_seed: complex, tol: float, max_iter: int):
    z, w_prev = 0j, w_seed
    for it in range(1, max_iter + 1):
        be = evaluate(z)
        w = cmath.sqrt(be.beta_minus * be.beta_plus)
        if abs(-w - w_prev) < abs(w - w_prev):
            w = -w
        z_new = be.alpha + sign * w
        if abs(z_new) >= n / 4:
            raise RootEscape(f"n={n}: iterate {z_new:.4g} left the disc |z| < n/4")
        w_prev = w
        if abs(z_new - z) < tol:
            return z_new, w, it
        z = z_new
    raise SolveError(f"n={n}: fixed point did not converge in {max_iter} iterations")


def _residual(be: BetaEval, z: complex) -> float:
    return abs((z - be.alpha) ** 2 - be.beta_minus * be.beta_plus)


def solve_basic(
    P: FourierPotential,
    n: int,
    J: Optional[int] = None,
    K_max: int = DEFAULT_K_MAX,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> SpectralTriple:
    """Two fixed-point branches z <- alpha(z) +- w(z), w^2 = beta^- beta^+, from z = 0.

    w follows the root closest to its previous value, seeded by the principal
    root at z = 0.  Real root pairs are ordered z_minus <= z_plus.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def evaluate(z):
        return transfer_eval(P, n, z, J, K_max, escape_check=False)

    be0 = evaluate(0j)
    w0 = cmath.sqrt(be0.beta_minus * be0.beta_plus)
    if w0 == 0:
        z, _, it = _iterate_branch(evaluate, n, 1, 0j, tol, max_iter)
        be = evaluate(z)
        return SpectralTriple.from_roots(
            n, z, z, "series", residual=_residual(be, z), w_plus=0j, degenerate=True, iterations=it
        )
    zp, wp, itp = _iterate_branch(evaluate, n, 1, w0, tol, max_iter)
    zm, _, itm = _iterate_branch(evaluate, n, -1, w0, tol, max_iter)
    scale = max(1.0, abs(zp), abs(zm))
    if abs(zp.imag) <= REAL_RTOL * scale and abs(zm.imag) <= REAL_RTOL * scale and zm.real > zp.real:
        zp, zm, wp = zm, zp, -wp
    bp, bm = evaluate(zp), evaluate(zm)
    residual = max(_residual(bp, zp), _residual(bm, zm))
    degenerate = zp == zm
    return SpectralTriple.from_roots(
        n, zm, zp, "series", residual=residual, w_plus=wp, degenerate=degenerate, iterations=max(itp, itm)
    )


@dataclass(frozen=True)
class RhoBound:
    n: int
    epsilon_n: float
    bound: float
    C1: float
    C2: float


def _q_tail_l2(P: FourierPotential, k_from: int, k_max: int = 2**20) -> float:
    """(sum over even |k| >= k_from of |q(k)|^2)^(1/2) with a power-law tail estimate."""
    k0 = max(2, k_from + (k_from % 2))
    ks = np.arange(k0, k_max + 1, 2)
    sq = np.abs(P.q(ks)) ** 2 + np.abs(P.q(-ks)) ** 2
    total = float(np.sum(sq))
    hi, lo = sq[-1], sq[len(sq) // 2]
    if hi > 0:
        s = math.log(lo / hi) / math.log(ks[-1] / ks[len(sq) // 2]) if lo > 0 else math.inf
        if s <= 1.05:
            raise ValueError(f"{P.spec}: q(k) not square summable over the scanned range")
        total += hi * ks[-1] / (2 * (s - 1))
    return math.sqrt(total)


def rho_bound(P: FourierPotential, n: int, C1: float = 1.0, C2: float = 1.0) -> RhoBound:
    """A priori radius n [eps + sqrt((eps + 2|q(-2n)|)(eps + 2|q(2n)|))] for the roots."""
    eps = C1 * _q_tail_l2(P, math.ceil(math.sqrt(n))) + C2 / math.sqrt(n)
    qm, qp = abs(P.q(-2 * n)), abs(P.q(2 * n))
    bound = n * (eps + math.sqrt((eps + 2 * qm) * (eps + 2 * qp)))
    return RhoBound(n, eps, bound, C1, C2)


@dataclass(frozen=True)
class CrossValidation:
    n: int
    series: SpectralTriple
    matrix: SpectralTriple
    max_abs_discrepancy: float
    passed: bool
    oracle_deltas: tuple

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "series": self.series.as_dict(),
            "matrix": self.matrix.as_dict(),
            "max_abs_discrepancy": self.max_abs_discrepancy,
            "pass": self.passed,
            "oracle_deltas": list(self.oracle_deltas),
        }


def cross_validate(
    P: FourierPotential,
    n: int,
    oracle_N_list: Sequence[int] = (80, 160),
    tol: float = 1e-6,
    *,
    oracle_tol: Optional[float] = None,
    triple: Optional[SpectralTriple] = None,
    J: Optional[int] = None,
) -> CrossValidation:
    """Compare series roots with the two disc eigenvalues of the truncated matrix."""
    bc = "per_plus" if parity_ok("per_plus", n) else "per_minus"
    oracle_tol = tol / 10 if oracle_tol is None else oracle_tol
    probe = convergence_probe(P, bc, n, oracle_N_list, oracle_tol)
    if not probe.stable:
        raise OracleError(f"n={n}: oracle not stable to {oracle_tol:g} (last delta {probe.deltas[-1]:.2e})")
    series = triple if triple is not None else solve_basic(P, n, J)
    a, b = (lam - n * n for lam in probe.final)
    if abs(b - series.z_minus) + abs(a - series.z_plus) < abs(a - series.z_minus) + abs(b - series.z_plus):
        a, b = b, a
    disc = max(abs(a - series.z_minus), abs(b - series.z_plus))
    matrix = SpectralTriple.from_roots(n, a, b, "matrix")
    return CrossValidation(n, series, matrix, float(disc), bool(disc <= tol), probe.deltas)
