"""Riesz-basis diagnostics and asymptotic-law tables over finite index ranges.

Every verdict here is relative to the scanned n-range; "bounded" means the
constant model fits the data best, not that a limsup was proven finite.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .basic_eq import SpectralTriple, solve_basic
from .functionals import BetaEval, partial_sigma, transfer_eval
from .matrix_spectra import build_matrix, eigen_all, match_discs, pair_angle, parity_ok
from .potentials import FourierPotential

VERDICTS = ("basis", "no_basis", "inconclusive")
DEFAULT_CAP = 50.0
DEFAULT_MIN_GROWTH = 1.1
DEFAULT_GUARD_EPS = 0.1


class DiagnosticError(RuntimeError):
    pass


class UndefinedRatio(DiagnosticError):
    """Both beta values vanish."""


class EmptyIndexSet(DiagnosticError):
    pass


class GuardViolation(DiagnosticError):
    pass


def t_ratio(beta_minus: complex | BetaEval, beta_plus: Optional[complex] = None) -> float:
    """max(|b-/b+|, |b+/b-|); +inf when exactly one of them vanishes."""
    if isinstance(beta_minus, BetaEval):
        beta_minus, beta_plus = beta_minus.beta_minus, beta_minus.beta_plus
    a, b = abs(beta_minus), abs(beta_plus)
    if a == 0 and b == 0:
        raise UndefinedRatio("both beta values vanish")
    if a == 0 or b == 0:
        return math.inf
    return max(a / b, b / a)


# --------------------------------------------------------------- trend fit

_MODELS = {
    "bounded": lambda n: np.zeros_like(n),
    "~log n": lambda n: np.log(np.log(n)),
    "~sqrt n": lambda n: 0.5 * np.log(n),
    "~n": lambda n: np.log(n),
}


@dataclass(frozen=True)
class TrendFit:
    model: str
    coefficient: float  # t ~ coefficient * f(n)
    rss: Mapping[str, float]
    growth: float  # t_last / t_first

    def as_dict(self) -> dict:
        return {"model": self.model, "coefficient": self.coefficient, "rss": dict(self.rss), "growth": self.growth}


def trend_fit(ns: Sequence[int], ts: Sequence[float]) -> TrendFit:
    """Least squares of log t against log f(n) + const for f in {1, log n, sqrt n, n}."""
    n = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(ts, dtype=float))
    if len(n) < 3 or np.any(n < 2):
        raise ValueError("trend fit needs at least three indices n >= 2")
    rss, coef = {}, {}
    for name, logf in _MODELS.items():
        r = y - logf(n)
        c = float(np.mean(r))
        rss[name] = float(np.sum((r - c) ** 2))
        coef[name] = math.exp(c)
    best = min(rss, key=rss.get)
    return TrendFit(best, coef[best], rss, float(ts[-1] / ts[0]))


def verdict_from_trend(fit: TrendFit, ts: Sequence[float], cap: float = DEFAULT_CAP, min_growth: float = DEFAULT_MIN_GROWTH) -> str:
    if fit.model == "bounded":
        return "basis" if max(ts) < cap else "inconclusive"
    return "no_basis" if fit.growth >= min_growth else "inconclusive"


@dataclass(frozen=True)
class RieszReport:
    criterion: str
    parity: str
    n_values: tuple
    t_values: tuple
    verdict: str
    sup_estimate: float
    trend_fit: Optional[TrendFit] = None
    guard_flags: tuple = ()
    details: Mapping = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "parity": self.parity,
            "n_range": [min(self.n_values), max(self.n_values)] if self.n_values else [],
            "n_values": list(self.n_values),
            "t_values": list(self.t_values),
            "verdict": self.verdict,
            "sup_estimate": self.sup_estimate,
            "trend_fit": self.trend_fit.as_dict() if self.trend_fit else None,
            "guard_flags": list(self.guard_flags),
            "details": dict(self.details),
        }


def _report(criterion, parity, ns, ts, flags=(), details=None, cap=DEFAULT_CAP) -> RieszReport:
    ns, ts = tuple(int(n) for n in ns), tuple(float(t) for t in ts)
    if not ns:
        raise EmptyIndexSet(f"{criterion}: no indices left to test")
    if not all(math.isfinite(t) for t in ts):
        return RieszReport(criterion, parity, ns, ts, "inconclusive", math.inf, None, tuple(flags) + ("infinite_t",), details or {})
    if len(ns) < 3:
        return RieszReport(criterion, parity, ns, ts, "inconclusive", max(ts), None, tuple(flags) + ("too_few_indices",), details or {})
    fit = trend_fit(ns, ts)
    return RieszReport(criterion, parity, ns, ts, verdict_from_trend(fit, ts, cap), max(ts), fit, tuple(flags), details or {})


def parity_indices(parity: str, n_range: Iterable[int]) -> list[int]:
    bc = _parity_bc(parity)
    return [n for n in n_range if parity_ok(bc, n)]


def _parity_bc(parity: str) -> str:
    if parity in ("even", "per+", "per_plus"):
        return "per_plus"
    if parity in ("odd", "per-", "per_minus"):
        return "per_minus"
    raise ValueError(f"unknown parity '{parity}' (use even or odd)")


def _parity_name(parity: str) -> str:
    return "even" if _parity_bc(parity) == "per_plus" else "odd"


# --------------------------------------------------------------- criteria


def disc_grid(points: int = 16, radius: float = 1.0) -> np.ndarray:
    """Center plus ``points`` equally spaced points on |z| = radius."""
    ring = radius * np.exp(2j * np.pi * np.arange(points) / points)
    return np.concatenate([[0j], ring])


def criterion1(
    P: FourierPotential,
    parity: str,
    n_range: Iterable[int],
    J: Optional[int] = None,
    K_max: int = 400,
    tol: float = 1e-12,
    *,
    a2_points: int = 16,
    cap: float = DEFAULT_CAP,
) -> RieszReport:
    """t_n(0) trend, with beta^+-(0) != 0 and the disc comparability constant per n."""
    ns = parity_indices(parity, n_range)
    ts, a2, flags = [], [], []
    for n in ns:
        vals = [transfer_eval(P, n, z, J, K_max, tol, escape_check=False) for z in disc_grid(a2_points)]
        be0 = vals[0]
        if be0.beta_minus == 0 or be0.beta_plus == 0:
            flags.append(f"a1_failed:n={n}")
        mods = np.array([[abs(b.beta_minus), abs(b.beta_plus)] for b in vals])
        with np.errstate(divide="ignore"):
            a2.append(float(np.max(mods.max(axis=0) / mods.min(axis=0))))
        try:
            ts.append(t_ratio(be0))
        except UndefinedRatio:
            ts.append(math.inf)
    rep = _report("crit1", _parity_name(parity), ns, ts, flags, {"a2_constant": a2}, cap)
    if flags:
        return RieszReport(rep.criterion, rep.parity, rep.n_values, rep.t_values, "inconclusive", rep.sup_estimate, rep.trend_fit, rep.guard_flags, rep.details)
    return rep


def series_triples(P: FourierPotential, ns: Iterable[int], J: Optional[int] = None, **kw) -> dict[int, SpectralTriple]:
    return {n: solve_basic(P, n, J, **kw) for n in ns}


def betas_at(P: FourierPotential, triples: Mapping[int, SpectralTriple], J: Optional[int] = None) -> dict[int, BetaEval]:
    return {n: transfer_eval(P, n, tr.z_star, J, escape_check=False) for n, tr in triples.items()}


def _distinct(tr: SpectralTriple) -> bool:
    return not tr.degenerate and tr.gamma != 0


def _degenerate_flag(triples: Mapping[int, SpectralTriple], ns) -> tuple:
    merged = [n for n in ns if not _distinct(triples[n])]
    return (f"degenerate_pair:n={merged}",) if merged else ()


def criterion2(
    triples: Mapping[int, SpectralTriple],
    betas_at_zstar: Mapping[int, BetaEval],
    delta: Optional[Iterable[int]] = None,
    *,
    parity: str = "",
    cap: float = DEFAULT_CAP,
) -> RieszReport:
    """t_n(z_n^*) trend over the indices of ``delta`` with distinct pair eigenvalues."""
    ns = sorted(triples) if delta is None else sorted(delta)
    ns = [n for n in ns if n in triples]
    flags = _degenerate_flag(triples, ns)
    ns = [n for n in ns if _distinct(triples[n])]
    if not ns:
        raise EmptyIndexSet("crit2: no index with distinct eigenvalues")
    ts = [t_ratio(betas_at_zstar[n]) for n in ns]
    if not parity:
        parity = "even" if ns[0] % 2 == 0 else "odd"
    return _report("crit2", parity, ns, ts, flags, {}, cap)


def deviation_to_t(rho: float) -> float:
    """Invert rho = (s + 1/s + 2)/4 to t = s^2 (s >= 1); rho < 1 maps to 1."""
    if rho <= 1.0:
        return 1.0
    c = 4.0 * rho - 2.0
    s = 0.5 * (c + math.sqrt(c * c - 4.0))
    return s * s


def criterion3(
    triples: Mapping[int, SpectralTriple], *, parity: str = "", cap: float = DEFAULT_CAP, min_gap_rel: float = 0.0
) -> RieszReport:
    """Trend of max(|lambda^+ - mu|, |lambda^- - mu|) / |gamma| over distinct pairs.

    The ratio is mapped to the t scale of the two-by-two model so the same
    trend models apply.  Pairs with |gamma| <= min_gap_rel |lambda^+| are
    dropped (and flagged) since mu from a matrix oracle cannot resolve them.
    """
    flags = _degenerate_flag(triples, sorted(triples))
    ns = [n for n in sorted(triples) if _distinct(triples[n])]
    unresolved = [n for n in ns if abs(triples[n].gamma) <= min_gap_rel * abs(triples[n].lambda_plus)]
    ns = [n for n in ns if n not in unresolved]
    if unresolved:
        flags += (f"gap_below_resolution:n={unresolved}",)
    if not ns:
        raise EmptyIndexSet("crit3: no index with distinct eigenvalues")
    missing = [n for n in ns if triples[n].mu is None]
    if missing:
        raise DiagnosticError(f"crit3: missing Dirichlet data for n={missing}")
    rhos = []
    for n in ns:
        tr = triples[n]
        rhos.append(max(abs(tr.lambda_plus - tr.mu), abs(tr.lambda_minus - tr.mu)) / abs(tr.gamma))
    ts = [deviation_to_t(r) for r in rhos]
    if not parity:
        parity = "even" if ns[0] % 2 == 0 else "odd"
    return _report("crit3", parity, ns, ts, flags, {"deviation_ratio": rhos}, cap)


def makin_check(P: FourierPotential, parity: str, n_range: Iterable[int], window: float = 10.0) -> RieszReport:
    """|V(2n)/V(-2n)| within [1/window, window] for every n of the parity class."""
    if window < 1:
        raise ValueError("window must be >= 1")
    ns = parity_indices(parity, n_range)
    if not ns:
        raise EmptyIndexSet("makin: empty index range")
    ratios = []
    for n in ns:
        vm, vp = P.coeff(-2 * n), P.coeff(2 * n)
        if vm == 0 or vp == 0:
            raise DiagnosticError(f"makin: vanishing coefficient at n={n}")
        ratios.append(abs(vp / vm))
    ts = [max(r, 1 / r) for r in ratios]
    inside = all(1 / window <= r <= window for r in ratios)
    fit = trend_fit(ns, ts) if len(ns) >= 3 and min(ns) >= 2 else None
    details = {"window": window, "min_ratio": min(ratios), "max_ratio": max(ratios)}
    return RieszReport("makin", _parity_name(parity), tuple(ns), tuple(ts), "basis" if inside else "no_basis", max(ts), fit, (), details)


# --------------------------------------------------------------- oracle data


def dirichlet_mu(P: FourierPotential, ns: Iterable[int], N: int = 240) -> dict[int, complex]:
    """The single Dirichlet eigenvalue in each disc, from the sine-basis matrix."""
    spec = eigen_all(build_matrix(P, "dirichlet", N))
    out = {}
    for m in match_discs(spec, ns):
        if not m.matched:
            raise DiagnosticError(f"n={m.n}: {len(m.eigenvalues_in_disc)} Dirichlet eigenvalues in the disc")
        out[m.n] = m.eigenvalues_in_disc[0]
    return out


@dataclass(frozen=True)
class AngleRow:
    n: int
    t: float
    sin_angle: float
    t_from_angle: float


@dataclass(frozen=True)
class AngleTable:
    rows: tuple
    t_verdict: str
    angle_verdict: str

    @property
    def consistent(self) -> bool:
        return self.t_verdict == self.angle_verdict

    def as_dict(self) -> dict:
        return {
            "rows": [r.__dict__ for r in self.rows],
            "t_verdict": self.t_verdict,
            "angle_verdict": self.angle_verdict,
            "consistent": self.consistent,
        }


def angle_vs_t(P: FourierPotential, parity: str, n_range: Iterable[int], N: int = 160, J: Optional[int] = None) -> AngleTable:
    """t_n(z_n^*) next to the eigenvector angle of the truncated matrix.

    For the two-by-two model |<u-, u+>| = (t - 1)/(t + 1), so the angle is also
    converted back to a t value and run through the same trend verdict.
    """
    ns = parity_indices(parity, n_range)
    spec = eigen_all(build_matrix(P, _parity_bc(parity), N))
    rows = []
    for n in ns:
        tr = solve_basic(P, n, J)
        t = t_ratio(transfer_eval(P, n, tr.z_star, J, escape_check=False))
        pa = pair_angle(spec, n)
        c = min(abs(pa.inner), 1 - 1e-16)
        rows.append(AngleRow(n, t, pa.sin_angle, (1 + c) / (1 - c)))
    ts = [r.t for r in rows]
    ta = [r.t_from_angle for r in rows]
    v_t = verdict_from_trend(trend_fit(ns, ts), ts)
    v_a = verdict_from_trend(trend_fit(ns, ta), ta)
    return AngleTable(tuple(rows), v_t, v_a)


# --------------------------------------------------------------- asymptotic laws

LAWS = (
    "gap_61_3",
    "dev_plus_61_4",
    "dev_minus_61_5",
    "dev_mid_61_7",
    "gap_50_3",
    "dev_plus_50_4",
    "dev_minus_50_8",
    "dev_mid_500_4",
    "beta_sim_V_thm1",
    "beta_sim_V_thm2",
    "beta_sim_sigma_thm20",
    "beta_sim_V_thm22",
)
LAW_ALIASES = {
    "gap61.3": "gap_61_3",
    "dev61.4": "dev_plus_61_4",
    "dev61.5": "dev_minus_61_5",
    "dev61.7": "dev_mid_61_7",
    "gap50.3": "gap_50_3",
    "dev50.4": "dev_plus_50_4",
    "dev50.8": "dev_minus_50_8",
    "dev500.4": "dev_mid_500_4",
    "beta-thm1": "beta_sim_V_thm1",
    "beta-thm2": "beta_sim_V_thm2",
    "beta-thm20": "beta_sim_sigma_thm20",
    "beta-thm22": "beta_sim_V_thm22",
}


def parse_law(law: str) -> str:
    law = LAW_ALIASES.get(law, law)
    if law not in LAWS:
        raise ValueError(f"unknown law '{law}'")
    return law


@dataclass(frozen=True)
class AsymptoticTable:
    law: str
    n_values: tuple
    lhs: tuple
    rhs: tuple
    ratio: tuple  # None where rhs == 0
    converging_to_one: bool
    plateau_tol: float
    modulus_ratio: tuple = ()
    labels: tuple = ()  # row tags for laws with several rows per n
    degenerate: tuple = ()  # n values with rhs == 0
    guard_flags: tuple = ()
    refused: bool = False
    guard_distance: Optional[float] = None

    def last_deviation(self) -> float:
        vals = [abs(r - 1) for r in self.ratio if r is not None]
        return vals[-1] if vals else math.inf

    def as_dict(self) -> dict:
        return {
            "law": self.law,
            "n_values": list(self.n_values),
            "labels": list(self.labels),
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "ratio": list(self.ratio),
            "modulus_ratio": list(self.modulus_ratio),
            "converging_to_one": self.converging_to_one,
            "plateau_tol": self.plateau_tol,
            "degenerate": list(self.degenerate),
            "guard_flags": list(self.guard_flags),
            "refused": self.refused,
            "guard_distance": self.guard_distance,
        }


def _align(root: complex, target: complex) -> complex:
    """The sign of ``root`` closest to ``target``."""
    return -root if abs(-root - target) < abs(root - target) else root


def _plateau(ns, ratios, tol) -> bool:
    """Last-n ratio within tol of 1 and no farther from 1 than at the first n."""
    devs = [abs(r - 1) for r in ratios if r is not None]
    if not devs:
        return False
    return devs[-1] <= tol and devs[-1] <= devs[0] + 1e-12


def _refused(law, ns, distance, flag) -> AsymptoticTable:
    return AsymptoticTable(law, tuple(ns), (), (), (), False, 0.0, guard_flags=(flag,), refused=True, guard_distance=distance)


def asymptotic_check(
    law: str,
    P: FourierPotential,
    delta: Sequence[int],
    *,
    triples: Optional[Mapping[int, SpectralTriple]] = None,
    mus: Optional[Mapping[int, complex]] = None,
    dirichlet_N: int = 240,
    guard_eps: float = DEFAULT_GUARD_EPS,
    plateau_tol: float = 0.2,
    z_samples: Optional[Sequence[complex]] = None,
    sigma_depth: int = 1,
    J: Optional[int] = None,
) -> AsymptoticTable:
    """Ratio table lhs/rhs for one asymptotic law over the indices in ``delta``.

    Square-root branches follow the solver: the product sqrt(b-) sqrt(b+) is
    taken with the sign closest to gamma/2, and the ratio sqrt(b-)/sqrt(b+)
    is that product divided by b+.  A guard refuses the law when this ratio
    (or b-/b+ for the midpoint laws) comes within guard_eps of the excluded
    point on the scanned range.
    """
    law = parse_law(law)
    ns = sorted(delta)
    if law.startswith("beta_sim"):
        return _beta_table(law, P, ns, z_samples, sigma_depth, plateau_tol, J, triples)

    if triples is None:
        triples = series_triples(P, ns, J)
    use_beta = law.endswith(("50_3", "50_4", "50_8", "500_4"))
    bm, bp = {}, {}
    for n in ns:
        if use_beta:
            be = transfer_eval(P, n, triples[n].z_star, J, escape_check=False)
            bm[n], bp[n] = be.beta_minus, be.beta_plus
        else:
            bm[n], bp[n] = complex(P.coeff(-2 * n)), complex(P.coeff(2 * n))
    prod = {n: _align(cmath.sqrt(bm[n] * bp[n]), triples[n].gamma / 2) for n in ns}

    kind = law.split("_")[0] + ("_" + law.split("_")[1] if law.startswith("dev") else "")
    if kind in ("dev_plus", "dev_minus", "dev_mid"):
        if kind == "dev_mid":
            seq = [bm[n] / bp[n] if bp[n] != 0 else math.inf for n in ns]
            excluded = -1.0
        else:
            seq = [prod[n] / bp[n] if bp[n] != 0 else math.inf for n in ns]
            excluded = -1.0 if kind == "dev_plus" else 1.0
        dist = min(abs(s - excluded) for s in seq)
        if dist < guard_eps:
            return _refused(law, ns, float(dist), f"{law}: ratio within {guard_eps:g} of {excluded:+g} (distance {dist:.3g})")
        if mus is None:
            mus = dirichlet_mu(P, ns, dirichlet_N)

    lhs, rhs = [], []
    for n in ns:
        tr = triples[n]
        half_sum = -0.5 * (bm[n] + bp[n])
        if kind == "gap":
            lhs.append(tr.gamma)
            rhs.append(2 * prod[n])
        elif kind == "dev_plus":
            lhs.append(mus[n] - tr.lambda_plus)
            rhs.append(half_sum - prod[n])
        elif kind == "dev_minus":
            lhs.append(mus[n] - tr.lambda_minus)
            rhs.append(half_sum + prod[n])
        else:
            lhs.append(mus[n] - 0.5 * (tr.lambda_plus + tr.lambda_minus))
            rhs.append(half_sum)
    return _table(law, ns, lhs, rhs, plateau_tol, modulus=(kind == "gap"))


def _table(law, ns, lhs, rhs, plateau_tol, modulus=False, labels=()) -> AsymptoticTable:
    ratio = tuple(complex(a / b) if b != 0 else None for a, b in zip(lhs, rhs))
    degenerate = tuple(n for n, b in zip(ns, rhs) if b == 0)
    mod = tuple(abs(a) / abs(b) if b != 0 else None for a, b in zip(lhs, rhs)) if modulus else ()
    check = [complex(m) for m in mod] if modulus else ratio
    conv = _plateau(ns, check, plateau_tol)
    return AsymptoticTable(
        law, tuple(ns), tuple(complex(x) for x in lhs), tuple(complex(x) for x in rhs), ratio, conv, plateau_tol, mod, tuple(labels), degenerate
    )


def default_z_samples(n: int) -> list[complex]:
    return [0j, n / 4 + 0j, 1j * n / 4, n / 2 * cmath.exp(1j * math.pi / 3)]


def _beta_table(law, P, ns, z_samples, depth, plateau_tol, J, triples) -> AsymptoticTable:
    """beta^+-(z) against V(+-2n) (or the partial sums); per n the worst sampled z is kept."""
    lhs, rhs, labels, n_rows = [], [], [], []
    worst = []
    for n in ns:
        if law == "beta_sim_sigma_thm20":
            if triples is None:
                triples = {}
            tr = triples.get(n) or solve_basic(P, n, J)
            zs = [tr.z_star]
        else:
            zs = default_z_samples(n) if z_samples is None else list(z_samples)
        best = None
        for z in zs:
            be = transfer_eval(P, n, z, J, escape_check=False)
            if law == "beta_sim_sigma_thm20":
                sp = partial_sigma(P, n, z, depth, J)
                refs = (sp.sigma_minus, sp.sigma_plus)
            else:
                refs = (complex(P.coeff(-2 * n)), complex(P.coeff(2 * n)))
            for sign, val, ref in (("-", be.beta_minus, refs[0]), ("+", be.beta_plus, refs[1])):
                dev = abs(val / ref - 1) if ref != 0 else math.inf
                if best is None or dev > best[0]:
                    best = (dev, val, ref, f"{sign}@z={z:.4g}")
        worst.append(best)
        lhs.append(best[1])
        rhs.append(best[2])
        labels.append(best[3])
        n_rows.append(n)
    tab = _table(law, n_rows, lhs, rhs, plateau_tol, labels=labels)
    devs = [w[0] for w in worst]
    decreasing = all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
    return AsymptoticTable(
        tab.law, tab.n_values, tab.lhs, tab.rhs, tab.ratio, bool(decreasing and devs[-1] <= plateau_tol), plateau_tol, (), tab.labels, tab.degenerate
    )
