"""Command dispatch and preset reproduction, returning report envelopes."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .basic_eq import cross_validate, solve_basic
from .diagnostics import (
    EmptyIndexSet,
    asymptotic_check,
    betas_at,
    criterion1,
    criterion2,
    criterion3,
    dirichlet_mu,
    makin_check,
    parity_indices,
    series_triples,
    t_ratio,
    trend_fit,
)
from .functionals import transfer_eval
from .matrix_spectra import DirichletUndefined, OracleError, build_matrix, eigen_all, match_discs, parse_bc
from .potentials import make_potential
from .presets import DEFAULTS_VERSION, preset
from .report import ReportEnvelope
from .weights import (
    concavity_check,
    factorize,
    make_weight,
    slow_increase_constant,
    subexponential_type,
    submultiplicativity_check,
)

COMMANDS = ("spectrum", "beta", "solve", "riesz", "asym", "weights", "reproduce")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    potential_spec: str = ""
    weight_spec: Optional[str] = None
    bc: str = "per+"
    n_min: int = 0
    n_max: int = 0
    trunc_N: int = 160
    J: Optional[int] = None
    K_max: int = 400
    tol: float = 1e-10
    out_format: str = "json"
    out_path: Optional[str] = None
    preset_params: dict = field(default_factory=dict)
    # command-specific options
    n: int = 0
    z: complex = 0j
    per_term: bool = False
    cross_validate: bool = False
    parity: str = "even"
    criterion: str = "1"
    window: float = 10.0
    assert_basis: bool = False
    law: str = ""
    check: str = "sub"
    kmax: int = 2048
    preset: str = ""

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        if self.n_min > self.n_max:
            raise ConfigError("n_min must not exceed n_max")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.out_format not in ("json", "csv"):
            raise ConfigError("out format must be json or csv")

    def echo(self) -> dict:
        d = asdict(self)
        d["z"] = complex(self.z)
        return d


def _range_warning(label: str, ns) -> str:
    return f"range_relative: {label} verdict covers n in [{min(ns)}, {max(ns)}] only"


def run(config: RunConfig) -> ReportEnvelope:
    """Dispatch one command.  ConfigError for bad input; other errors propagate."""
    config.validate()
    handler = {
        "spectrum": _run_spectrum,
        "beta": _run_beta,
        "solve": _run_solve,
        "riesz": _run_riesz,
        "asym": _run_asym,
        "weights": _run_weights,
        "reproduce": lambda c: reproduce(c.preset, c.preset_params),
    }[config.command]
    return handler(config)


def _potential(config: RunConfig):
    try:
        return make_potential(config.potential_spec)
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _run_spectrum(config: RunConfig) -> ReportEnvelope:
    P = _potential(config)
    try:
        bc = parse_bc(config.bc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if config.n_max > config.trunc_N / 2:
        raise ConfigError(f"n_max must be <= trunc/2 = {config.trunc_N // 2}")
    spec = eigen_all(build_matrix(P, bc, config.trunc_N), tol_backward=config.tol)
    rows, warnings = [], []
    for m in match_discs(spec, range(config.n_min, config.n_max + 1)):
        vals = m.eigenvalues_in_disc
        row = {"n": m.n, "count": len(vals), "matched": m.matched, "double": m.double}
        if bc == "dirichlet":
            row["mu"] = vals[0] if m.matched else None
        else:
            row["lambda_minus"] = vals[0] if m.matched else None
            row["lambda_plus"] = vals[1] if m.matched else None
        if not m.matched:
            warnings.append(f"disc_mismatch: n={m.n} holds {len(vals)} eigenvalues, expected {m.expected_count}")
        rows.append(row)
    payload = {"bc": bc, "N": config.trunc_N, "max_backward_error": float(spec.backward_errors.max()), "rows": rows}
    return ReportEnvelope("spectrum", config.echo(), payload, warnings)


def _run_beta(config: RunConfig) -> ReportEnvelope:
    P = _potential(config)
    be = transfer_eval(P, config.n, config.z, config.J, config.K_max, config.tol, per_term=config.per_term)
    payload = be.as_dict()
    payload["t"] = t_ratio(be) if (be.beta_minus != 0 or be.beta_plus != 0) else None
    terms = payload.pop("per_term", None)
    if terms is not None:
        payload["rows"] = [{"k": k, "S11": a, "S12": b, "S21": c} for k, a, b, c in terms]
    warnings = [] if be.converged else [f"series_unconverged: tail bound {be.tail_bound:.3g} at depth {be.K}"]
    return ReportEnvelope("beta", config.echo(), payload, warnings)


def _run_solve(config: RunConfig) -> ReportEnvelope:
    P = _potential(config)
    rows, warnings = [], []
    for n in range(config.n_min, config.n_max + 1):
        tr = solve_basic(P, n, config.J, config.K_max)
        row = tr.as_dict()
        if config.cross_validate:
            try:
                cv = cross_validate(P, n, (config.trunc_N // 2, config.trunc_N), tol=1e-6, triple=tr, oracle_tol=1e-8)
                row["oracle_discrepancy"] = cv.max_abs_discrepancy
                row["oracle_pass"] = cv.passed
            except OracleError as exc:
                row["oracle_discrepancy"] = None
                row["oracle_pass"] = None
                warnings.append(f"oracle_unstable: {exc}")
        rows.append(row)
    return ReportEnvelope("solve", config.echo(), {"rows": rows}, warnings)


def _riesz_report(P, parity, ns, criterion, window=10.0, dirichlet_N=240, cap=50.0, min_gap_rel=0.0):
    if criterion in ("1", "crit1"):
        return criterion1(P, parity, ns, cap=cap)
    if criterion in ("makin",):
        return makin_check(P, parity, ns, window)
    ns = parity_indices(parity, ns)
    triples = series_triples(P, ns)
    if criterion in ("2", "crit2"):
        return criterion2(triples, betas_at(P, triples), parity=parity, cap=cap)
    if criterion in ("3", "crit3"):
        mus = dirichlet_mu(P, ns, dirichlet_N)
        return criterion3({n: triples[n].with_dirichlet(mus[n]) for n in ns}, parity=parity, cap=cap, min_gap_rel=min_gap_rel)
    raise ConfigError(f"unknown criterion '{criterion}'")


def _run_riesz(config: RunConfig) -> ReportEnvelope:
    P = _potential(config)
    ns = range(config.n_min, config.n_max + 1)
    rep = _riesz_report(P, config.parity, ns, config.criterion, config.window)
    warnings = [_range_warning(f"{rep.criterion} {rep.parity}", rep.n_values)]
    warnings += [f"criterion_flag: {f}" for f in rep.guard_flags]
    payload = rep.as_dict()
    payload["rows"] = [{"n": n, "t": t} for n, t in zip(rep.n_values, rep.t_values)]
    return ReportEnvelope("riesz", config.echo(), payload, warnings)


def _run_asym(config: RunConfig) -> ReportEnvelope:
    P = _potential(config)
    ns = list(range(config.n_min, config.n_max + 1))
    try:
        tab = asymptotic_check(config.law, P, ns)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    warnings = [f"guard_refused: {f}" for f in tab.guard_flags]
    payload = tab.as_dict()
    payload["rows"] = [
        {"n": n, "lhs": a, "rhs": b, "ratio": r} for n, a, b, r in zip(tab.n_values, tab.lhs, tab.rhs, tab.ratio)
    ]
    return ReportEnvelope("asym", config.echo(), payload, warnings)


def _run_weights(config: RunConfig) -> ReportEnvelope:
    try:
        W = make_weight(config.weight_spec or "")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    check, _, arg = config.check.partition(":")
    k = config.kmax
    if check == "sub":
        res = submultiplicativity_check(W, k)
    elif check == "slow":
        res = slow_increase_constant(W, k)
    elif check == "subexp":
        res = subexponential_type(W, k)
    elif check == "concave":
        res = concavity_check(W, 0, k)
    elif check == "factorize":
        if not arg.startswith("omega="):
            raise ConfigError("factorize needs factorize:omega=<weightspec>")
        # --kmax bounds the structural scan; the M series keeps its own long range
        res = factorize(W, arg[len("omega="):], sub_k_max=k, allow_divergent=True)
    else:
        raise ConfigError(f"unknown weight check '{config.check}'")
    warnings = [f"range_relative: weight verdict checked for k <= {k} only"]
    return ReportEnvelope("weights", config.echo(), {"weight": W.spec, "check": check, "result": res}, warnings)


# ------------------------------------------------------------------ presets


def _preset_indices(cfg: dict, parity: str) -> list[int]:
    if "p_range" in cfg:
        lo, hi = cfg["p_range"]
        return [2 * p + 1 for p in range(lo, hi + 1)]
    lo, hi = cfg[f"{parity}_range"]
    return parity_indices(parity, range(lo, hi + 1))


def reproduce(name: str, overrides: Optional[dict] = None) -> ReportEnvelope:
    """Full pipeline for one preset: criteria per parity, laws, tables, oracle checks."""
    try:
        cfg = preset(name, overrides)
        P = make_potential(cfg["potential"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    warnings: list[str] = []
    criteria, agreement, laws, tables = [], {}, [], {}
    triples_by_parity = {}

    for parity in cfg["parities"]:
        ns = _preset_indices(cfg, parity)
        verdicts = {}
        wanted = cfg["criteria"]
        triples = series_triples(P, ns) if {"crit2", "crit3"} & set(wanted) else None
        triples_by_parity[parity] = triples
        reports = []
        if "crit1" in wanted:
            reports.append(criterion1(P, parity, ns, cap=cfg.get("cap", 50.0)))
        if "crit2" in wanted:
            reports.append(criterion2(triples, betas_at(P, triples), parity=parity, cap=cfg.get("cap", 50.0)))
        if "crit3" in wanted:
            try:
                mus = dirichlet_mu(P, ns, cfg["dirichlet_N"])
                with_mu = {n: triples[n].with_dirichlet(mus[n]) for n in ns}
                triples_by_parity[parity] = with_mu
                reports.append(
                    criterion3(with_mu, parity=parity, cap=cfg.get("cap", 50.0), min_gap_rel=cfg.get("gap_resolution", 0.0))
                )
            except DirichletUndefined as exc:
                warnings.append(f"dirichlet_unavailable: crit3 skipped for {parity} n ({exc})")
            except EmptyIndexSet as exc:
                warnings.append(f"crit_skipped: {exc}")
        if "makin" in wanted:
            reports.append(makin_check(P, parity, ns, cfg["makin_window"]))
        for rep in reports:
            criteria.append(rep)
            verdicts[rep.criterion] = rep.verdict
            for flag in rep.guard_flags:
                code = flag.split(":", 1)[0]
                warnings.append(f"{code}: {rep.criterion} {parity}: {flag}")
        if reports:
            warnings.append(_range_warning(f"{parity}-parity", ns))
        agree = len(set(verdicts.values())) == 1 and "inconclusive" not in verdicts.values()
        agreement[parity] = {"verdicts": verdicts, "agree": agree, "expected": cfg["expected"].get(parity)}
        if verdicts and not agree:
            warnings.append(f"criteria_disagree: {parity} n: {verdicts}")

        for law in cfg["laws"].get(parity, []):
            laws.append(_law(law, P, ns, cfg, triples_by_parity.get(parity), warnings))
    for law in cfg["laws"].get("all", []):
        laws.append(_law(law, P, cfg["law_n"], cfg, None, warnings))

    cross = []
    if "cross_validate_n" in cfg:
        lo, hi = cfg["cross_validate_n"]
        for n in range(lo, hi + 1):
            try:
                cv = cross_validate(P, n, cfg["oracle_N"], cfg["cross_tol"], oracle_tol=cfg.get("oracle_tol"))
            except OracleError as exc:
                warnings.append(f"oracle_unstable: {exc}")
                continue
            cross.append({"n": n, "max_abs_discrepancy": cv.max_abs_discrepancy, "pass": cv.passed})
            if not cv.passed:
                warnings.append(f"cross_validation_failed: n={n} discrepancy {cv.max_abs_discrepancy:.3g}")

    _preset_tables(name, cfg, P, criteria, triples_by_parity, tables)
    rows = [
        {
            "criterion": r.criterion,
            "parity": r.parity,
            "n_min": min(r.n_values),
            "n_max": max(r.n_values),
            "verdict": r.verdict,
            "sup_t": r.sup_estimate,
            "trend": r.trend_fit.model if r.trend_fit else "",
        }
        for r in criteria
    ]
    payload = {
        "preset": name,
        "defaults_version": DEFAULTS_VERSION,
        "settings": cfg,
        "criteria": criteria,
        "agreement": agreement,
        "laws": laws,
        "cross_validation": cross,
        "tables": tables,
        "rows": rows,
    }
    config = {"command": "reproduce", "preset": name, "overrides": overrides or {}}
    return ReportEnvelope("reproduce", config, payload, warnings)


def _law(law, P, ns, cfg, triples, warnings):
    tab = asymptotic_check(
        law,
        P,
        ns,
        triples=triples,
        dirichlet_N=cfg["dirichlet_N"],
        guard_eps=cfg["guard_eps"],
        plateau_tol=cfg["plateau_tol"],
    )
    for flag in tab.guard_flags:
        warnings.append(f"guard_refused: {flag}")
    return tab


def _preset_tables(name, cfg, P, criteria, triples_by_parity, tables):
    if name == "example1":
        odd = next(r for r in criteria if r.criterion == "crit1" and r.parity == "odd")
        tables["t_over_log_n"] = [{"n": n, "value": t / math.log(n)} for n, t in zip(odd.n_values, odd.t_values)]
    if name == "example2":
        even = next(r for r in criteria if r.criterion == "crit1" and r.parity == "even")
        start = cfg["sqrt_table_from"]
        tables["t_over_sqrt_n"] = [
            {"n": n, "value": t / math.sqrt(n)} for n, t in zip(even.n_values, even.t_values) if n >= start
        ]
    if name in ("ex1", "ex2"):
        W = make_weight(cfg["omega"])
        triples = triples_by_parity["odd"]
        betas = betas_at(P, triples)
        rows = []
        for n in sorted(betas):
            p = (n - 1) // 2
            scale = p * W(4 * p)
            be = betas[n]
            rows.append(
                {
                    "p": p,
                    "n": n,
                    "norm_minus": abs(be.beta_minus) * scale,
                    "norm_plus": abs(be.beta_plus) * scale,
                    "ratio_minus_plus": abs(be.beta_minus / be.beta_plus),
                }
            )
        vals = [r[k] for r in rows for k in ("norm_minus", "norm_plus")]
        tables["normalized_beta"] = rows
        tables["normalized_spread"] = max(vals) / min(vals)
        fit = trend_fit([r["n"] for r in rows], [r["ratio_minus_plus"] for r in rows])
        tables["ratio_trend"] = fit
    if name == "sawtooth":
        rows = []
        for n in cfg["law_n"]:
            tr = solve_basic(P, n)
            rows.append({"n": n, "gap_times_n": abs(tr.gamma) * n})
        tables["gap_times_n"] = rows
