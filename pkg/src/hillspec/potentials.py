"""Potentials v(x) = sum_{k in 2Z} V(k) e^{ikx} given by their Fourier coefficients."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .weights import WeightSeq, gevpow, gevsob, make_weight

# keys that start a new top-level parameter in a potential spec; anything
# else (c=, gamma=, a=) belongs to the weight spec before it
_POTENTIAL_KEYS = {"omega", "xi", "eta", "alpha", "q", "m"}

EXAMPLE1_DEFAULT_OMEGA = "gevsob:c=0.1,gamma=0.5,a=1.1"
EX_DEFAULT_OMEGA = "gevpow:c=0.1,gamma=0.5,a=0"


class PotentialError(ValueError):
    """Malformed potential spec, table, or coefficient request."""


CoeffRule = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FourierPotential:
    family: str
    rule: CoeffRule = field(repr=False)
    spec: str = ""
    support_bound: Optional[int] = None
    q_rule: Optional[CoeffRule] = field(default=None, repr=False)
    weight: Optional[WeightSeq] = field(default=None, repr=False)
    shift: complex = 0.0

    def coeffs(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        if np.any(k % 2):
            raise PotentialError("Fourier coefficients live on even k only")
        out = np.asarray(self.rule(k), dtype=complex)
        if self.support_bound is not None:
            out = np.where(np.abs(k) > self.support_bound, 0.0, out)
        if self.shift:
            out = out + np.where(k == 0, self.shift, 0.0)
        return out

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs(np.array([k]))[0])

    __call__ = coeff

    def q(self, k) -> np.ndarray:
        """q(k) with V(k) = i k q(k); undefined at k = 0."""
        k = np.asarray(k, dtype=np.int64)
        if np.any(k == 0):
            raise PotentialError("q(0) is not determined by V")
        if self.q_rule is not None:
            return np.asarray(self.q_rule(k), dtype=complex)
        return self.coeffs(k) / (1j * k)

    def shifted(self, c: complex) -> "FourierPotential":
        """Same potential plus the constant c (changes V(0) only)."""
        return replace(self, shift=self.shift + c, spec=f"{self.spec}+{c}")


# ----------------------------------------------------------- families


def _table_rule(entries: dict[int, complex]) -> CoeffRule:
    def rule(k):
        return np.array([entries.get(int(kk), 0.0) for kk in np.ravel(k)], dtype=complex).reshape(np.shape(k))

    return rule


def trig_table(entries: dict[int, complex], spec: str = "trig") -> FourierPotential:
    for k in entries:
        if int(k) % 2:
            raise PotentialError(f"odd index k={k} in trigonometric table")
    entries = {int(k): complex(v) for k, v in entries.items()}
    bound = max((abs(k) for k in entries), default=0)
    return FourierPotential("trig_table", _table_rule(entries), spec, support_bound=bound)


def zero() -> FourierPotential:
    return trig_table({}, spec="zero")


def mathieu() -> FourierPotential:
    """v(x) = 2 cos 2x."""
    return FourierPotential("mathieu", _table_rule({2: 1.0, -2: 1.0}), "mathieu", support_bound=2)


def sawtooth(m: int = 0) -> FourierPotential:
    """v(x) = x - pi/2 on [0, pi] (m = 0), and its m-fold antiderivatives in Fourier space."""
    if m < 0:
        raise PotentialError("sawtooth order m must be >= 0")

    def rule(k):
        k = np.asarray(k)
        safe = np.where(k == 0, 1, k).astype(float)
        out = (1j / safe) * (1j * safe) ** (-m)
        return np.where(k == 0, 0.0, out)

    return FourierPotential("sawtooth_smooth", rule, f"sawtooth:m={m}")


def _resolve_weight(omega: WeightSeq | str) -> WeightSeq:
    return make_weight(omega) if isinstance(omega, str) else omega


def example1(omega: WeightSeq | str = EXAMPLE1_DEFAULT_OMEGA) -> FourierPotential:
    """V = eta/Omega with eta(2n) = log n / n, eta(-2n) = (log n)^{1 or 2} / n by parity of n."""
    W = _resolve_weight(omega)

    def rule(k):
        k = np.asarray(k)
        n = np.maximum(np.abs(k) // 2, 1).astype(float)
        eta = np.log(n) / n
        odd_neg = (k < 0) & ((np.abs(k) // 2) % 2 == 1)
        eta = np.where(odd_neg, np.log(n) ** 2 / n, eta)
        return np.where(k == 0, 0.0, eta / W(k))

    return FourierPotential("example1", rule, f"example1:omega={W.spec}", weight=W)


def example2() -> FourierPotential:
    """V(2n) = 1, V(-2n) = n^{-1/2} (n even) or 1 (n odd), V(0) = 0."""

    def rule(k):
        k = np.asarray(k)
        n = np.abs(k) // 2
        neg_even = (k < 0) & (n % 2 == 0)
        out = np.where(neg_even, 1.0 / np.sqrt(np.maximum(n, 1)), 1.0)
        return np.where(k == 0, 0.0, out)

    return FourierPotential("example2", rule, "example2")


_SEQUENCE_RULES = {
    "1/log": lambda p: 1.0 / np.log(p + 2.0),
    "1/sqrt": lambda p: 1.0 / np.sqrt(p),
}


def sequence_rule(name: str) -> Callable[[np.ndarray], np.ndarray]:
    """Named nonnegative sequences p -> xi_p used by the ex1/ex2 families."""
    if name in _SEQUENCE_RULES:
        return _SEQUENCE_RULES[name]
    if name.startswith("const:"):
        try:
            c = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise PotentialError(f"bad constant rule '{name}'") from exc
        if c < 0:
            raise PotentialError("sequence rules must be nonnegative")
        return lambda p: np.full(np.shape(p), c)
    raise PotentialError(f"unknown sequence rule '{name}' (use 1/log, 1/sqrt, const:<c>)")


def _ex_rule(W: WeightSeq, xi, eta, *, log_skew: bool) -> CoeffRule:
    def rule(k):
        k = np.asarray(k)
        a = np.abs(k)
        s = np.sign(k).astype(float)
        w = W(np.where(a == 0, 2, a))
        p0 = np.maximum(a // 4, 1).astype(float)  # p for |k| = 4p
        p2 = np.maximum((a - 2) // 4, 1).astype(float)  # p for |k| = 4p + 2
        out = np.zeros(np.shape(k), dtype=complex)
        out = np.where(a == 2, s / w, out)
        mult4 = (a % 4 == 0) & (a > 0)
        if log_skew:
            pos4 = 1.0 / (np.log(4 * p0) * w)
            out = np.where(mult4 & (k > 0), pos4, out)
            out = np.where(mult4 & (k < 0), -1.0 / w, out)
        else:
            out = np.where(mult4, s / w, out)
        rest = (a % 4 == 2) & (a > 2)
        pos = xi(p2) / (p2 * w)
        if log_skew:
            pos = pos / np.log(4 * p2)
        neg = -eta(p2) / (p2 * w)
        out = np.where(rest & (k > 0), pos, out)
        out = np.where(rest & (k < 0), neg, out)
        return out

    return rule


def ex1(omega: WeightSeq | str = EX_DEFAULT_OMEGA, xi: str = "1/log", eta: str = "1/log") -> FourierPotential:
    W = _resolve_weight(omega)
    rule = _ex_rule(W, sequence_rule(xi), sequence_rule(eta), log_skew=False)
    return FourierPotential("ex1", rule, f"ex1:omega={W.spec},xi={xi},eta={eta}", weight=W)


def ex2(omega: WeightSeq | str = EX_DEFAULT_OMEGA, xi: str = "1/log", eta: str = "1/log") -> FourierPotential:
    W = _resolve_weight(omega)
    rule = _ex_rule(W, sequence_rule(xi), sequence_rule(eta), log_skew=True)
    return FourierPotential("ex2", rule, f"ex2:omega={W.spec},xi={xi},eta={eta}", weight=W)


def singular_from_q(q_rule: CoeffRule, spec: str = "q", support_bound: Optional[int] = None) -> FourierPotential:
    """V(k) = i k q(k); V(0) = 0."""

    def rule(k):
        k = np.asarray(k)
        return 1j * k * np.asarray(q_rule(k), dtype=complex)

    return FourierPotential("singular_from_q", rule, spec, support_bound=support_bound, q_rule=q_rule)


def q_rule(name: str, W: WeightSeq) -> CoeffRule:
    """q(k) = eta(k) / Omega(k) for named bounded eta: flat, odd, skew:<s>."""
    if name == "flat":
        eta = lambda k: np.ones(np.shape(k))
    elif name == "odd":
        eta = lambda k: np.sign(k).astype(float)
    elif name.startswith("skew:"):
        s = float(name.split(":", 1)[1])
        eta = lambda k: np.where(k < 0, np.maximum(np.abs(k) // 2, 1).astype(float) ** (-s), 1.0)
    else:
        raise PotentialError(f"unknown q rule '{name}' (use flat, odd, skew:<s>)")

    def rule(k):
        k = np.asarray(k)
        return np.where(k == 0, 0.0, eta(k) / W(k))

    return rule


def alpha_class(alpha: float, omega: WeightSeq | str, q: str = "flat") -> FourierPotential:
    """V(k) = |k|^alpha q(k) with alpha in (0, 1/2)."""
    if not 0 < alpha < 0.5:
        raise PotentialError("alpha must lie in (0, 1/2)")
    W = _resolve_weight(omega)
    qr = q_rule(q, W)

    def rule(k):
        k = np.asarray(k)
        return np.abs(k).astype(float) ** alpha * qr(k)

    return FourierPotential("alpha_class", rule, f"alpha:alpha={alpha:g},omega={W.spec},q={q}", weight=W)


# ----------------------------------------------------------- tables


def _read_complex_table(path) -> dict[int, complex]:
    path = Path(path)
    entries: dict[int, complex] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["k", "re", "im"]:
            raise PotentialError(f"{path}: expected header 'k,re,im'")
        for row in reader:
            try:
                k = int(row["k"])
                val = complex(float(row["re"]), float(row["im"]))
            except (TypeError, ValueError) as exc:
                raise PotentialError(f"{path}: cannot parse row {row}") from exc
            if k % 2:
                raise PotentialError(f"{path}: odd index k={k}")
            if k in entries:
                raise PotentialError(f"{path}: duplicate k={k}")
            entries[k] = val
    return entries


def load_trig_table(path) -> FourierPotential:
    return trig_table(_read_complex_table(path), spec=f"trig:{path}")


def load_q_table(path) -> FourierPotential:
    entries = _read_complex_table(path)
    entries.pop(0, None)
    bound = max((abs(k) for k in entries), default=0)
    return singular_from_q(_table_rule(entries), spec=f"qfile:{path}", support_bound=bound)


# ----------------------------------------------------------- spec language


def _split_params(body: str) -> dict[str, str]:
    params: dict[str, str] = {}
    current = None
    for token in filter(None, body.split(",")):
        key = token.split("=", 1)[0].strip()
        if "=" in token and key in _POTENTIAL_KEYS:
            current = key
            params[key] = token.split("=", 1)[1]
        elif current is not None:
            params[current] += "," + token
        else:
            raise PotentialError(f"cannot parse parameter '{token}'")
    return params


def make_potential(spec: str) -> FourierPotential:
    """Build a potential from the CLI mini-language, e.g. ``ex1:omega=gevrey:c=1,gamma=0.5,xi=1/log``."""
    spec = spec.strip()
    name, _, body = spec.partition(":")
    if name == "trig":
        return load_trig_table(body)
    if name == "qfile":
        return load_q_table(body)
    params = _split_params(body)
    try:
        if name == "zero":
            return zero()
        if name == "mathieu":
            return mathieu()
        if name == "sawtooth":
            return sawtooth(int(params.get("m", "0")))
        if name == "example1":
            return example1(params.get("omega", EXAMPLE1_DEFAULT_OMEGA))
        if name == "example2":
            return example2()
        if name in ("ex1", "ex2"):
            build = ex1 if name == "ex1" else ex2
            return build(
                params.get("omega", EX_DEFAULT_OMEGA),
                params.get("xi", "1/log"),
                params.get("eta", "1/log"),
            )
        if name == "alpha":
            return alpha_class(float(params["alpha"]), params["omega"], params.get("q", "flat"))
    except KeyError as exc:
        raise PotentialError(f"potential '{spec}' is missing parameter {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, PotentialError):
            raise
        raise PotentialError(f"potential '{spec}': {exc}") from exc
    raise PotentialError(f"unknown potential family '{name}'")


# ----------------------------------------------------------- analysis


def is_real_valued(P: FourierPotential, k_max: int = 512, rtol: float = 1e-14) -> bool:
    """True when V(-k) = conj(V(k)) on the scanned range."""
    k = np.arange(0, k_max + 1, 2)
    a, b = P.coeffs(-k), np.conj(P.coeffs(k))
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(np.abs(a), 1e-300) + 1e-300))


@dataclass(frozen=True)
class WeightedNormReport:
    norm: float
    attained_k: int
    ks: np.ndarray = field(repr=False)  # 0, 2, ..., k_max
    r: np.ndarray = field(repr=False)  # max(r(k), r(-k)) on ks
    R: np.ndarray = field(repr=False)  # sup_{|k| >= m} r(k) on m = ks
    decays_to_zero: bool
    k_max: int

    def R_at(self, m: int) -> float:
        """sup of r over |k| >= m (m is rounded up to even)."""
        if m > self.k_max:
            return 0.0
        return float(self.R[(max(m, 0) + 1) // 2])

    def as_dict(self) -> dict:
        return {
            "norm": self.norm,
            "attained_k": self.attained_k,
            "decays_to_zero": self.decays_to_zero,
            "k_max": self.k_max,
        }


def weighted_norm(P: FourierPotential, W: WeightSeq, k_max: int = 4096) -> WeightedNormReport:
    """sup |V(k)| Omega(k) over |k| <= k_max, its tail suprema, and a decay verdict.

    The decay verdict is a plateau test: the tail sup over the last octave
    must be at most half of the tail sup three octaves earlier.
    """
    if k_max < 2:
        raise PotentialError("k_max must be >= 2")
    k_max -= k_max % 2
    ks = np.arange(0, k_max + 1, 2)
    w = W(ks)
    r_pos = np.abs(P.coeffs(ks)) * w
    r_neg = np.abs(P.coeffs(-ks)) * w
    r = np.maximum(r_pos, r_neg)
    R = np.maximum.accumulate(r[::-1])[::-1]
    i = int(np.argmax(r))
    attained = int(ks[i]) if r_pos[i] >= r_neg[i] else -int(ks[i])
    late, early = R[len(ks) // 2], R[len(ks) // 8]
    decays = bool(late == 0.0 or late <= 0.5 * early)
    return WeightedNormReport(float(r[i]), attained, ks, r, R, decays, k_max)


def sample(P: FourierPotential, x, k_max: int) -> np.ndarray:
    """Partial Fourier sum over |k| <= k_max at the points x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k_max -= k_max % 2
    ks = np.arange(-k_max, k_max + 1, 2)
    return np.exp(1j * np.outer(x, ks)) @ P.coeffs(ks)
