"""Weight sequences on the even integers and their structural checks.

A weight is stored through its logarithm ``h(k) = log Omega(k)`` on the
nonnegative even integers; evenness is built in by evaluating at ``|k|``.
All structural verdicts are over a finite range and carry that range.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

K_LIMIT = 2**21

# relative slack for floating comparisons of log-weights
_LOG_RTOL = 1e-12


class WeightError(ValueError):
    """Invalid weight parameters, table, or evaluation outside the stored range."""


@dataclass(frozen=True, eq=False)
class WeightSeq:
    family: str
    params: tuple
    log_values: np.ndarray = field(repr=False)  # h at k = 0, 2, 4, ...
    k_max_validated: int
    monotone: bool

    @property
    def k_limit(self) -> int:
        return 2 * (len(self.log_values) - 1)

    def _index(self, k):
        k = np.asarray(k)
        if np.any(k % 2):
            raise WeightError("weights are defined on even integers only")
        idx = np.abs(k) // 2
        if np.any(idx >= len(self.log_values)):
            raise WeightError(f"|k| exceeds the stored range {self.k_limit} of {self.spec}")
        return idx

    def h(self, k):
        """log Omega(k)."""
        out = self.log_values[self._index(k)]
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, k):
        out = np.exp(self.log_values[self._index(k)])
        return float(out) if np.ndim(out) == 0 else out

    @property
    def spec(self) -> str:
        if not self.params:
            return self.family
        if self.family == "table":
            return f"table:{dict(self.params)['source']}"
        body = ",".join(f"{key}={val:g}" for key, val in self.params)
        return f"{self.family}:{body}"

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "params": dict(self.params),
            "k_max_validated": self.k_max_validated,
            "monotone": self.monotone,
        }


def _finalize(family: str, params: tuple, h: np.ndarray, *, require_monotone: bool) -> WeightSeq:
    h = np.asarray(h, dtype=float).copy()
    h[0] = 0.0
    if np.any(np.isnan(h)):
        raise WeightError(f"{family}: weight values must be positive")
    finite = np.isfinite(h) & (h < 709.0)
    if not finite.all():
        last = int(np.argmin(finite))
        h = h[:last]
    if len(h) < 2:
        raise WeightError(f"{family}: weight overflows immediately")
    steps = np.diff(h)
    monotone = bool(np.all(steps >= -_LOG_RTOL * np.maximum(1.0, np.abs(h[1:]))))
    if require_monotone and not monotone:
        bad = int(np.argmax(steps < -_LOG_RTOL * np.maximum(1.0, np.abs(h[1:]))))
        raise WeightError(f"{family}: weight decreases between k={2 * bad} and k={2 * bad + 2}")
    h.setflags(write=False)
    return WeightSeq(family, params, h, 2 * (len(h) - 1), monotone)


def _grid(k_limit: int = K_LIMIT) -> np.ndarray:
    return np.arange(0, k_limit + 1, 2, dtype=float)


def unit() -> WeightSeq:
    return _finalize("unit", (), np.zeros(K_LIMIT // 2 + 1), require_monotone=True)


def sobolev(a: float) -> WeightSeq:
    if not a > 0:
        raise WeightError("sobolev weight needs a > 0")
    k = _grid()
    h = np.zeros_like(k)
    h[1:] = a * np.log(k[1:])
    return _finalize("sobolev", (("a", a),), h, require_monotone=True)


def gevrey(c: float, gamma: float) -> WeightSeq:
    if not c > 0 or not 0 < gamma < 1:
        raise WeightError("gevrey weight needs c > 0 and gamma in (0, 1)")
    k = _grid()
    return _finalize("gevrey", (("c", c), ("gamma", gamma)), c * k**gamma, require_monotone=True)


def gevpow(c: float, gamma: float, a: float) -> WeightSeq:
    """exp(c|k|^gamma) / |k|^a.  Not monotone near 0 when a is large."""
    if not c > 0 or not 0 < gamma < 1 or a < 0:
        raise WeightError("gevpow weight needs c > 0, gamma in (0, 1), a >= 0")
    k = _grid()
    h = c * k**gamma
    h[1:] -= a * np.log(k[1:])
    return _finalize("gevpow", (("c", c), ("gamma", gamma), ("a", a)), h, require_monotone=False)


def gevsob(c: float, gamma: float, a: float) -> WeightSeq:
    """|k|^a exp(c|k|^gamma): a Sobolev factor times a Gevrey factor."""
    if not c > 0 or not 0 < gamma < 1 or a < 0:
        raise WeightError("gevsob weight needs c > 0, gamma in (0, 1), a >= 0")
    k = _grid()
    h = c * k**gamma
    h[1:] += a * np.log(k[1:])
    return _finalize("gevsob", (("c", c), ("gamma", gamma), ("a", a)), h, require_monotone=True)


def log_weight() -> WeightSeq:
    k = _grid()
    h = np.zeros_like(k)
    h[1:] = np.log(np.log(math.e * k[1:]))
    return _finalize("log", (), h, require_monotone=True)


def table(values: dict[int, float], *, source: str = "") -> WeightSeq:
    """Weight from explicit values at nonnegative even k; mirrored to k < 0.

    Rows at negative k are accepted only if they agree with the mirrored value.
    """
    pos: dict[int, float] = {}
    for k, val in values.items():
        k = int(k)
        if k % 2:
            raise WeightError(f"table row at odd k={k}")
        if not (val > 0 and math.isfinite(val)):
            raise WeightError(f"table value at k={k} must be positive and finite")
        if abs(k) in pos and not math.isclose(pos[abs(k)], val, rel_tol=1e-12):
            raise WeightError(f"table violates evenness at k={k}")
        pos[abs(k)] = float(val)
    kmax = max(pos, default=0)
    missing = [k for k in range(0, kmax + 1, 2) if k not in pos and k != 0]
    if missing:
        raise WeightError(f"table is missing k={missing[0]}")
    h = np.array([0.0] + [math.log(pos[k]) for k in range(2, kmax + 1, 2)])
    params = (("source", source),) if source else ()
    w = _finalize("table", (), h, require_monotone=True)
    return WeightSeq("table", params, w.log_values, w.k_max_validated, w.monotone)


def from_log_values(family: str, h: np.ndarray) -> WeightSeq:
    """Wrap precomputed log-values (used for quotients); monotonicity is only recorded."""
    return _finalize(family, (), h, require_monotone=False)


def load_table(path) -> WeightSeq:
    path = Path(path)
    values: dict[int, float] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["k", "omega"]:
            raise WeightError(f"{path}: expected header 'k,omega'")
        for row in reader:
            try:
                k, val = int(row["k"]), float(row["omega"])
            except (TypeError, ValueError) as exc:
                raise WeightError(f"{path}: cannot parse row {row}") from exc
            if k < 0:
                raise WeightError(f"{path}: table rows must have nonnegative k")
            if k in values:
                raise WeightError(f"{path}: duplicate k={k}")
            values[k] = val
    return table(values, source=str(path))


def _parse_kv(body: str) -> dict[str, float]:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise WeightError(f"malformed parameter '{part}'")
        key, val = part.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise WeightError(f"parameter {key} is not a number: {val}") from exc
    return out


def make_weight(spec: str) -> WeightSeq:
    """Build a weight from the CLI mini-language, e.g. ``gevrey:c=1,gamma=0.5``."""
    spec = spec.strip()
    name, _, body = spec.partition(":")
    if name == "table":
        return load_table(body)
    kv = _parse_kv(body)
    try:
        if name == "unit":
            return unit()
        if name == "log":
            return log_weight()
        if name == "sobolev":
            return sobolev(kv["a"])
        if name == "gevrey":
            return gevrey(kv["c"], kv["gamma"])
        if name == "gevpow":
            return gevpow(kv["c"], kv["gamma"], kv.get("a", 0.0))
        if name == "gevsob":
            return gevsob(kv["c"], kv["gamma"], kv.get("a", 0.0))
    except KeyError as exc:
        raise WeightError(f"weight '{spec}' is missing parameter {exc}") from exc
    raise WeightError(f"unknown weight family '{name}'")


# ---------------------------------------------------------------- checks


@dataclass(frozen=True)
class SubmultVerdict:
    kind: str  # exact | almost | fail
    C: float
    witness: Optional[tuple[int, int]]
    k_max: int

    def as_dict(self) -> dict:
        return {"kind": self.kind, "C": self.C, "witness": self.witness, "k_max": self.k_max}


def _check_range(W: WeightSeq, k_needed: int) -> None:
    if k_needed > W.k_max_validated:
        raise WeightError(
            f"{W.spec}: check needs k up to {k_needed}, weight is finite only up to {W.k_max_validated}"
        )


def submultiplicativity_check(W: WeightSeq, k_max: int = 2048) -> SubmultVerdict:
    """Largest Omega(k+m) / (Omega(k) Omega(m)) over even 0 <= k, m <= k_max."""
    if k_max < 4 or k_max % 2:
        raise WeightError("k_max must be even and >= 4")
    _check_range(W, 2 * k_max)
    h = W.log_values
    idx = np.arange(k_max // 2 + 1)
    excess = h[idx[:, None] + idx[None, :]] - h[idx][:, None] - h[idx][None, :]
    if not np.all(np.isfinite(excess)):
        return SubmultVerdict("fail", math.inf, None, k_max)
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[i, j])
    scale = _LOG_RTOL * max(1.0, float(np.max(np.abs(h[: k_max + 1]))))
    if worst <= scale:
        return SubmultVerdict("exact", 1.0, None, k_max)
    return SubmultVerdict("almost", math.exp(worst), (int(2 * i), int(2 * j)), k_max)


@dataclass(frozen=True)
class SlowIncrease:
    A: float
    k_at: int
    diverging: bool
    last_octave_growth: float
    k_max: int

    def as_dict(self) -> dict:
        return {
            "A": self.A,
            "k_at": self.k_at,
            "diverging": self.diverging,
            "last_octave_growth": self.last_octave_growth,
            "k_max": self.k_max,
        }


def slow_increase_constant(W: WeightSeq, k_max: int = 2**20, plateau: float = 0.05) -> SlowIncrease:
    """sup Omega(2k)/Omega(k) over even 2 <= k <= k_max/2, with a plateau test.

    The running max is called diverging when it grew by more than ``plateau``
    (relative) over the last octave k in (k_max/4, k_max/2].
    """
    if k_max < 8:
        raise WeightError("k_max must be >= 8")
    k_max = min(k_max, W.k_max_validated)
    k_max -= k_max % 4
    ks = np.arange(2, k_max // 2 + 1, 2)
    log_ratio = W.h(2 * ks) - W.h(ks)
    running = np.maximum.accumulate(log_ratio)
    at = int(np.argmax(log_ratio))
    quarter = np.searchsorted(ks, k_max // 4, side="right") - 1
    growth = math.expm1(float(running[-1] - running[max(quarter, 0)]))
    return SlowIncrease(
        A=math.exp(float(running[-1])),
        k_at=int(ks[at]),
        diverging=growth > plateau,
        last_octave_growth=growth,
        k_max=k_max,
    )


@dataclass(frozen=True)
class SubexpEstimate:
    estimate: float
    octaves: list  # (k, h(k)/k) at k = 2^j
    k_max: int

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "octaves": self.octaves, "k_max": self.k_max}


def subexponential_type(W: WeightSeq, k_max: int = 2**16) -> SubexpEstimate:
    """h(k_max)/k_max together with the octave sequence h(2^j)/2^j."""
    k_max = min(k_max, W.k_max_validated)
    k_max -= k_max % 2
    octaves = []
    k = 2
    while k <= k_max:
        octaves.append((k, W.h(k) / k))
        k *= 2
    return SubexpEstimate(W.h(k_max) / k_max, octaves, k_max)


@dataclass(frozen=True)
class ConcavityVerdict:
    passed: bool
    first_violation: Optional[int]
    k_from: int
    k_max: int

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "first_violation": self.first_violation,
            "k_from": self.k_from,
            "k_max": self.k_max,
        }


def concavity_check(W: WeightSeq, k_from: int = 0, k_max: int = 2048) -> ConcavityVerdict:
    """h(k+4) - h(k+2) <= h(k+2) - h(k) for even k in [k_from, k_max]."""
    if k_from < 0 or k_from % 2 or k_max % 2:
        raise WeightError("k_from and k_max must be even, k_from >= 0")
    _check_range(W, k_max + 4)
    ks = np.arange(k_from, k_max + 1, 2)
    second = W.h(ks + 4) - 2 * W.h(ks + 2) + W.h(ks)
    slack = _LOG_RTOL * np.maximum(1.0, np.abs(W.h(ks + 4)))
    bad = np.nonzero(second > slack)[0]
    first = int(ks[bad[0]]) if len(bad) else None
    return ConcavityVerdict(first is None, first, k_from, k_max)


@dataclass(frozen=True)
class FactorizationReport:
    omega: WeightSeq
    omega_tilde: WeightSeq
    A: float
    M: float
    M_tail: float
    C: float
    converged: bool
    submultiplicativity: SubmultVerdict
    slow_increase: SlowIncrease
    k_max: int

    def as_dict(self) -> dict:
        return {
            "omega": self.omega.spec,
            "omega_tilde_monotone": self.omega_tilde.monotone,
            "A": self.A,
            "M": self.M,
            "M_tail": self.M_tail,
            "C": self.C,
            "converged": self.converged,
            "omega_tilde_submultiplicativity": self.submultiplicativity.as_dict(),
            "omega_slow_increase": self.slow_increase.as_dict(),
            "k_max": self.k_max,
        }


def _sum_with_tail(ks: np.ndarray, terms: np.ndarray) -> tuple[float, float]:
    """Sum of 2*terms over positive even ks, plus a power-law tail estimate.

    The decay exponent s is read off the last octave; s <= 1 means divergent.
    """
    partial = 2.0 * float(np.sum(terms))
    k_hi, k_lo = ks[-1], ks[len(ks) // 2]
    t_hi, t_lo = terms[-1], terms[len(ks) // 2]
    if t_hi <= 0:
        return partial, 0.0
    s = math.log(t_lo / t_hi) / math.log(k_hi / k_lo)
    if s <= 1.0:
        return partial, math.inf
    # both signs of k, spacing 2: 2 * (1/2) * integral of t(k) from k_hi
    return partial, float(t_hi * k_hi / (s - 1.0))


def factorize(
    W: WeightSeq,
    omega: WeightSeq | str,
    k_max: int = 2**20,
    sub_k_max: int = 2048,
    *,
    allow_divergent: bool = False,
) -> FactorizationReport:
    """Split W = omega * omega_tilde and report the constants A, M, C.

    M is the sum of 1/(|k| omega(k)) over 0 < |k| <= k_max; it counts as
    converged when the estimated tail is below 1e-6 of the partial sum.
    Raises WeightError on a divergent M unless ``allow_divergent``.
    """
    if isinstance(omega, str):
        omega = make_weight(omega)
    k_max = min(k_max, W.k_max_validated, omega.k_max_validated)
    k_max -= k_max % 4
    n = k_max // 2 + 1
    h_tilde = W.log_values[:n] - omega.log_values[:n]
    quotient = from_log_values("quotient", h_tilde)
    sub_k_max = min(sub_k_max, quotient.k_max_validated // 2)
    sub_k_max -= sub_k_max % 2
    sub = submultiplicativity_check(quotient, sub_k_max)
    slow = slow_increase_constant(omega, k_max)
    ks = np.arange(2, k_max + 1, 2, dtype=float)
    terms = 1.0 / (ks * omega(ks.astype(np.int64)))
    M, tail = _sum_with_tail(ks, terms)
    converged = tail < 1e-6 * M
    if not converged and not allow_divergent:
        raise WeightError(f"M sum diverging for omega={omega.spec} (tail estimate {tail:g}, partial {M:g})")
    return FactorizationReport(
        omega=omega,
        omega_tilde=quotient,
        A=slow.A,
        M=M,
        M_tail=tail,
        C=sub.C,
        converged=converged,
        submultiplicativity=sub,
        slow_increase=slow,
        k_max=k_max,
    )
