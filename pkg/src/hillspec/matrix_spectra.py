"""Truncated Fourier/sine-basis matrices of the Hill operator and their spectra.

This is the independent route: eigenvalues come from dense matrices, with no
use of the perturbation series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .potentials import FourierPotential

BCS = ("per_plus", "per_minus", "dirichlet")
_BC_ALIASES = {"per+": "per_plus", "per-": "per_minus", "dir": "dirichlet"}

# relative distance under which two eigenvalues count as one double eigenvalue
CLUSTER_RTOL = 1e-9


class OracleError(RuntimeError):
    """Eigensolver failure, disc-count mismatch, or unstable refinement."""


class DegenerateEigenvalue(OracleError):
    pass


class DirichletUndefined(OracleError):
    """The cosine coefficients of v on [0, pi] do not converge."""


def parse_bc(bc: str) -> str:
    bc = _BC_ALIASES.get(bc, bc)
    if bc not in BCS:
        raise ValueError(f"unknown boundary condition '{bc}'")
    return bc


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    bc: str
    N: int
    basis_indices: np.ndarray
    entries: np.ndarray = field(repr=False)


def _odd_cosine_coeffs(P: FourierPotential, ps: np.ndarray, k_cut: int) -> np.ndarray:
    """(1/pi) int_0^pi v(x) cos(px) dx for odd p, from the V(k).

    Uses c(p) = (2i/pi) sum_{k>0 even} k (V(k) - V(-k)) / (k^2 - p^2) with a
    power-law tail correction fitted on the last octave.  Raises
    DirichletUndefined when the sums at k_cut/2 and k_cut disagree.
    """
    ks = np.arange(2, k_cut + 1, 2, dtype=float)
    diff = P.coeffs(ks.astype(np.int64)) - P.coeffs(-ks.astype(np.int64))
    if not np.any(diff):
        return np.zeros(len(ps), dtype=complex)
    weighted = (2j / math.pi) * ks * diff

    def corrected(terms: np.ndarray, m: int) -> np.ndarray:
        part = terms[:, :m].sum(axis=1)
        t_hi, t_lo = terms[:, m - 1], terms[:, m // 2 - 1]
        mag_hi, mag_lo = np.abs(t_hi), np.abs(t_lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.log(mag_lo / mag_hi) / math.log(ks[m - 1] / ks[m // 2 - 1])
            tail = np.where(mag_hi == 0, 0.0, t_hi * ks[m - 1] / (2.0 * (s - 1.0)))
        tail = np.where((mag_hi > 0) & (s <= 1.0), np.inf, tail)
        return part + tail

    full = np.empty(len(ps), dtype=complex)
    half = np.empty(len(ps), dtype=complex)
    for start in range(0, len(ps), 32):
        chunk = ps[start : start + 32].astype(float)
        terms = weighted[None, :] / (ks[None, :] ** 2 - chunk[:, None] ** 2)
        full[start : start + 32] = corrected(terms, len(ks))
        half[start : start + 32] = corrected(terms, len(ks) // 2)
    scale = max(float(np.max(np.abs(diff))), 1e-300)
    if not np.all(np.isfinite(full)) or np.max(np.abs(full - half)) > 1e-6 * max(scale, float(np.max(np.abs(full)))):
        raise DirichletUndefined(
            f"{P.spec}: cosine coefficients on [0, pi] do not converge; Dirichlet data unavailable"
        )
    return full


def build_matrix(P: FourierPotential, bc: str, N: int, *, k_cut: int = 2**16) -> TruncatedOperator:
    """Per+: even k, |k| <= 2N.  Per-: odd k, |k| <= 2N+1.  Dir: sin(nx), n = 1..N.

    Per entries are k^2 delta_km + V(k - m).  Dirichlet entries are
    n^2 delta_nm + c(n - m) - c(n + m) with c(p) the cosine coefficients of v
    on [0, pi]; c(p) = (V(p) + V(-p))/2 for even p, and the odd-p couplings
    vanish exactly when V(k) = V(-k).
    """
    bc = parse_bc(bc)
    if N < 1:
        raise ValueError("truncation N must be >= 1")
    if bc in ("per_plus", "per_minus"):
        top = 2 * N if bc == "per_plus" else 2 * N + 1
        idx = np.arange(-top, top + 1, 2)
        lags = np.arange(-2 * top, 2 * top + 1, 2)
        V = P.coeffs(lags)
        entries = V[(idx[:, None] - idx[None, :] + 2 * top) // 2]
        entries = entries + np.diag(idx.astype(float) ** 2)
        return TruncatedOperator(bc, N, idx, entries)

    idx = np.arange(1, N + 1)
    ps = np.arange(0, 2 * N + 1)
    c = np.zeros(len(ps), dtype=complex)
    even = ps[ps % 2 == 0]
    c[even] = 0.5 * (P.coeffs(even) + P.coeffs(-even))
    odd = ps[ps % 2 == 1]
    c[odd] = _odd_cosine_coeffs(P, odd, k_cut)
    entries = c[np.abs(idx[:, None] - idx[None, :])] - c[idx[:, None] + idx[None, :]]
    entries = entries + np.diag(idx.astype(float) ** 2)
    return TruncatedOperator(bc, N, idx, entries)


@dataclass(frozen=True, eq=False)
class Spectrum:
    bc: str
    N: int
    values: np.ndarray
    vectors: np.ndarray = field(repr=False)  # columns, unit Euclidean norm
    backward_errors: np.ndarray = field(repr=False)


def eigen_all(T: TruncatedOperator, tol_backward: float = 1e-10) -> Spectrum:
    """Full eigendecomposition with a per-pair backward-error check."""
    A = T.entries
    try:
        # Hermitian matrices get orthonormal vectors even for tight pairs
        if np.array_equal(A, A.conj().T):
            vals, vecs = scipy.linalg.eigh(A, check_finite=True)
            vals = vals.astype(complex)
        else:
            vals, vecs = scipy.linalg.eig(A, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise OracleError(f"eigensolver failed: {exc}") from exc
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    norm_A = np.linalg.norm(A)
    resid = np.linalg.norm(A @ vecs - vecs * vals, axis=0) / max(norm_A, 1e-300)
    if np.any(resid > tol_backward):
        raise OracleError(f"backward error {resid.max():.2e} exceeds {tol_backward:.1e}")
    order = np.lexsort((vals.imag, vals.real))
    return Spectrum(T.bc, T.N, vals[order], vecs[:, order], resid[order])


@dataclass(frozen=True)
class DiscMatch:
    n: int
    disc_center: float
    disc_radius: float
    eigenvalues_in_disc: tuple
    expected_count: int
    matched: bool
    positions: tuple = ()  # indices into Spectrum.values

    @property
    def double(self) -> bool:
        if len(self.eigenvalues_in_disc) != 2:
            return False
        a, b = self.eigenvalues_in_disc
        return abs(a - b) <= CLUSTER_RTOL * max(abs(a), abs(b), 1.0)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "eigenvalues": list(self.eigenvalues_in_disc),
            "expected_count": self.expected_count,
            "matched": self.matched,
            "double": self.double,
        }


def parity_ok(bc: str, n: int) -> bool:
    if bc == "per_plus":
        return n % 2 == 0
    if bc == "per_minus":
        return n % 2 == 1
    return True


def match_discs(spec: Spectrum, n_values: Iterable[int]) -> list[DiscMatch]:
    """Eigenvalues in D_n = {|lambda - n^2| < n/4}; wrong-parity n are skipped."""
    out = []
    expected = 1 if spec.bc == "dirichlet" else 2
    for n in n_values:
        if not parity_ok(spec.bc, n):
            continue
        if n > spec.N / 2:
            raise ValueError(f"n={n} is outside the reliable zone n <= N/2 = {spec.N / 2:g}")
        inside = np.nonzero(np.abs(spec.values - n * n) < n / 4)[0]
        vals = tuple(complex(v) for v in spec.values[inside])
        out.append(DiscMatch(n, float(n * n), n / 4, vals, expected, len(vals) == expected, tuple(int(i) for i in inside)))
    return out


@dataclass(frozen=True)
class PairAngle:
    n: int
    inner: complex
    sin_angle: float


def pair_angle(spec: Spectrum, n: int) -> PairAngle:
    """Angle between the unit eigenvectors of the two eigenvalues in D_n."""
    (m,) = match_discs(spec, [n])
    if not m.matched:
        raise OracleError(f"n={n}: found {len(m.eigenvalues_in_disc)} eigenvalues in the disc")
    if m.double:
        raise DegenerateEigenvalue(f"n={n}: double eigenvalue {m.eigenvalues_in_disc[0]}")
    u, v = (spec.vectors[:, i] for i in m.positions)
    inner = complex(np.vdot(u, v))
    return PairAngle(n, inner, math.sqrt(max(0.0, 1.0 - abs(inner) ** 2)))


def _pair_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    if len(a) != len(b):
        return math.inf
    if len(a) == 1:
        return abs(a[0] - b[0])
    straight = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
    swapped = max(abs(a[0] - b[1]), abs(a[1] - b[0]))
    return min(straight, swapped)


@dataclass(frozen=True)
class ProbeResult:
    n: int
    bc: str
    N_list: tuple
    eigenvalues: tuple  # per N, tuple of disc eigenvalues
    deltas: tuple  # between consecutive N
    stable: bool
    tol: float

    @property
    def final(self) -> tuple:
        return self.eigenvalues[-1]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "bc": self.bc,
            "N_list": list(self.N_list),
            "eigenvalues": [list(e) for e in self.eigenvalues],
            "deltas": list(self.deltas),
            "stable": self.stable,
            "tol": self.tol,
        }


def disc_eigenvalues(P: FourierPotential, bc: str, N: int, n_values: Iterable[int]) -> dict[int, DiscMatch]:
    spec = eigen_all(build_matrix(P, bc, N))
    return {m.n: m for m in match_discs(spec, n_values)}


def convergence_probe(
    P: FourierPotential, bc: str, n: int, N_list: Sequence[int], tol: float = 1e-8
) -> ProbeResult:
    """Disc eigenvalues for increasing truncations; stable when the last step moves < tol."""
    bc = parse_bc(bc)
    if list(N_list) != sorted(N_list) or len(N_list) < 2:
        raise ValueError("N_list must hold at least two increasing truncations")
    if n > min(N_list) / 2:
        raise ValueError("n must satisfy n <= min(N_list)/2")
    found = []
    for N in N_list:
        (m,) = disc_eigenvalues(P, bc, N, [n]).values()
        found.append(m)
    if not found[-1].matched:
        raise OracleError(
            f"n={n}, N={N_list[-1]}: {len(found[-1].eigenvalues_in_disc)} eigenvalues in D_n, "
            f"expected {found[-1].expected_count}"
        )
    eigs = tuple(m.eigenvalues_in_disc for m in found)
    deltas = tuple(_pair_distance(a, b) for a, b in zip(eigs, eigs[1:]))
    return ProbeResult(n, bc, tuple(N_list), eigs, deltas, bool(deltas[-1] < tol), tol)
