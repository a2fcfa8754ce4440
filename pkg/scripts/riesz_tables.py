"""Plot-ready CSV tables of the basis ratio t against n for every criterion.

One file per potential and parity, columns n plus one t column per criterion.
"""
import argparse
import csv
from pathlib import Path

from hillspec.diagnostics import (
    DiagnosticError,
    betas_at,
    criterion1,
    criterion2,
    criterion3,
    dirichlet_mu,
    makin_check,
    parity_indices,
    series_triples,
)
from hillspec.matrix_spectra import DirichletUndefined
from hillspec.potentials import make_potential

CASES = [
    ("example1", "even", (10, 60)),
    ("example1", "odd", (11, 61)),
    ("example2", "even", (10, 60)),
    ("example2", "odd", (11, 61)),
    ("ex1", "odd", (7, 31)),
    ("ex2", "odd", (7, 31)),
]


def tables(spec: str, parity: str, lo: int, hi: int) -> dict[str, dict[int, float]]:
    P = make_potential(spec)
    ns = parity_indices(parity, range(lo, hi + 1))
    triples = series_triples(P, ns)
    cols = {
        "crit1": criterion1(P, parity, ns),
        "crit2": criterion2(triples, betas_at(P, triples), parity=parity),
        "makin": makin_check(P, parity, ns, 3.0),
    }
    try:
        mus = dirichlet_mu(P, ns)
        cols["crit3"] = criterion3({n: t.with_dirichlet(mus[n]) for n, t in triples.items()}, parity=parity)
    except (DirichletUndefined, DiagnosticError):
        pass
    return {k: dict(zip(r.n_values, r.t_values)) for k, r in cols.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/tables")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    for spec, parity, (lo, hi) in CASES:
        cols = tables(spec, parity, lo, hi)
        names = sorted(cols)
        ns = sorted(set().union(*(c.keys() for c in cols.values())))
        path = out / f"{spec}_{parity}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n"] + [f"t_{c}" for c in names])
            for n in ns:
                w.writerow([n] + [repr(cols[c][n]) if n in cols[c] else "" for c in names])
        print(path)


if __name__ == "__main__":
    main()
