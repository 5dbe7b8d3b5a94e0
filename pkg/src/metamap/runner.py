"""Scenario execution: sweeps, report files and plots.

Artifacts per run (all under the scenario's output directory):

* ``sweep.csv`` / ``sweep.json``  - one row per eps (JSON carries diagnostics)
* ``density_<eps>.csv``           - x, phi, mixture, psi per cell
* ``saltus_<eps>.csv``            - jump location, size, depth
* ``hypotheses.txt``              - hypothesis report
* ``densities.svg``, ``l1_vs_eps.svg``, ``rho_vs_eps.svg``
* ``markov.csv``                  - for markov scenarios

Exit status: 0 clean, 2 when at least one sweep row failed, 1 on fatal errors
(raised to the caller).
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bv_analysis import (jump_decay_profile, postcritical_hierarchy,
                          saltus_decompose)
from .map_model import validate_hypotheses
from .metastability import (EpsArtifacts, SweepRow, markov_stationary,
                            prepare_sweep, run_sweep_row)
from .scenarios import Scenario
from .svgplot import write_line_plot
from .transfer_operator import lasota_yorke_constants, UnsupportedRegimeError

SWEEP_COLUMNS = SweepRow.FIELDS


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_cell(getattr(row, c)) for c in SWEEP_COLUMNS) + "\n")


def write_density_csv(path, art: EpsArtifacts, mixture) -> None:
    n = art.phi.n
    xs = (np.arange(n) + 0.5) / n
    psi = art.psi.values if art.psi is not None else None
    with open(path, "w", newline="") as fh:
        fh.write("x,phi,mixture,psi\n")
        for i in range(n):
            psi_cell = repr(float(psi[i])) if psi is not None else ""
            fh.write(f"{float(xs[i])!r},{float(art.phi.values[i])!r},"
                     f"{float(mixture.values[i])!r},{psi_cell}\n")


def run_scenario(scn: Scenario, jobs: int = 1, log=print) -> int:
    os.makedirs(scn.out_dir, exist_ok=True)
    if scn.kind == "markov":
        return _run_markov(scn, log)
    return _run_family(scn, jobs, log)


def _run_markov(scn: Scenario, log) -> int:
    path = os.path.join(scn.out_dir, "markov.csv")
    with open(path, "w", newline="") as fh:
        fh.write("eps_lr,eps_rl,alpha,rho\n")
        for eps_lr, eps_rl in scn.markov_pairs:
            alpha, rho = markov_stationary(eps_lr, eps_rl)
            fh.write(f"{eps_lr!r},{eps_rl!r},{alpha!r},{rho!r}\n")
            log(f"markov eps_lr={eps_lr} eps_rl={eps_rl} -> alpha={alpha} rho={rho}")
    log(f"wrote {path}")
    return 0


def _run_family(scn: Scenario, jobs: int, log) -> int:
    fam = scn.family
    for w in scn.warnings:
        log(f"warning: {w}")

    report = validate_hypotheses(fam, depth=scn.hypothesis_depth)
    hyp_path = os.path.join(scn.out_dir, "hypotheses.txt")
    with open(hyp_path, "w") as fh:
        fh.write(f"scenario: {scn.name}\n")
        fh.write(f"min_expansion: {report.min_expansion!r}\n")
        fh.write(f"distortion: {report.distortion!r}\n")
        fh.write(f"I2 (depth {report.checked_depth}): {report.passes_I2}\n")
        fh.write(f"I3: {report.passes_I3}\n")
        fh.write(f"I4a: {report.passes_I4a}\n")
        fh.write(f"P2: {report.passes_P2}\n")
        for d in report.diagnostics:
            fh.write(f"  {d}\n")
    log(f"hypotheses: I2={report.passes_I2} I4a={report.passes_I4a} "
        f"P2={report.passes_P2} (details in {hyp_path})")

    ctx = prepare_sweep(fam, scn.eps_list, scn.grid_n,
                        with_second=scn.run_second_eigenpair,
                        with_escape=scn.run_escape_rates)
    log(f"alpha_pred = {ctx.alpha_pred!r} on n = {scn.grid_n}")

    eps_list = list(scn.eps_list)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda e: run_sweep_row(ctx, e), eps_list))
    else:
        results = [run_sweep_row(ctx, e) for e in eps_list]
    rows = [r for r, _ in results]

    saltus_rows = {}
    if scn.run_saltus:
        try:
            ly0 = lasota_yorke_constants(fam.base)
        except UnsupportedRegimeError as exc:
            log(f"saltus analysis skipped: {exc}")
            ly0 = None
        if ly0 is not None:
            for row, art in results:
                if art is None:
                    continue
                ly = lasota_yorke_constants(art.map_eps, base=fam.base)
                hier = postcritical_hierarchy(art.map_eps, 6)
                dec = saltus_decompose(art.phi, hier, lip_bound=ly.C_LY)
                dec.write_csv(os.path.join(scn.out_dir, f"saltus_{art.eps:g}.csv"))
                saltus_rows[art.eps] = {
                    "jumps": len(dec.jumps),
                    "unmatched": len(dec.unmatched()),
                    "lipschitz_estimate": dec.lipschitz_estimate,
                    "decay": [dataclasses.asdict(r) for r in
                              jump_decay_profile(dec, hier, ly, 4)],
                }

    for row, art in results:
        if art is not None:
            write_density_csv(os.path.join(scn.out_dir, f"density_{art.eps:g}.csv"),
                              art, ctx.mixture)

    write_sweep_csv(os.path.join(scn.out_dir, "sweep.csv"), rows)
    _write_sweep_json(scn, ctx.alpha_pred, rows, report, saltus_rows)
    _write_plots(scn, ctx, rows, results, log)

    failed = [r for r in rows if r.error]
    for r in rows:
        status = f"FAILED: {r.error}" if r.error else "ok"
        log(f"eps={r.eps:g}: {status}")
    log(f"artifacts in {scn.out_dir}")
    return 2 if failed else 0


def _write_sweep_json(scn, alpha_pred, rows, report, saltus_rows) -> None:
    payload = {
        "scenario": scn.name,
        "grid_n": scn.grid_n,
        "alpha_pred": alpha_pred,
        "grid_warnings": list(scn.warnings),
        "hypotheses": {
            "min_expansion": report.min_expansion,
            "distortion": report.distortion,
            "I2": report.passes_I2,
            "checked_depth": report.checked_depth,
            "I3": report.passes_I3,
            "I4a": report.passes_I4a,
            "P2": report.passes_P2,
            "diagnostics": report.diagnostics,
        },
        "rows": [dataclasses.asdict(r) for r in rows],
        "saltus": {repr(eps): data for eps, data in sorted(saltus_rows.items())},
    }
    with open(os.path.join(scn.out_dir, "sweep.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_plots(scn, ctx, rows, results, log) -> None:
    arts = [art for _, art in results if art is not None]
    if arts:
        art = arts[-1]
        n = art.phi.n
        xs = (np.arange(n) + 0.5) / n
        series = [(xs, art.phi.values, f"phi eps={art.eps:g}"),
                  (xs, ctx.mixture.values, "predicted mixture")]
        if art.psi is not None:
            series.append((xs, art.psi.values, "psi"))
        write_line_plot(os.path.join(scn.out_dir, "densities.svg"), series,
                        title=f"{scn.name}: invariant density vs mixture",
                        xlabel="x", ylabel="density")

    ok = [r for r in rows if r.error is None and r.l1_phi_vs_mixture is not None]
    if ok:
        eps = [r.eps for r in ok]
        series = [(eps, [r.l1_phi_vs_mixture for r in ok], "|phi - mixture|_L1")]
        if any(r.l1_psi_vs_half_diff is not None for r in ok):
            pts = [(r.eps, r.l1_psi_vs_half_diff) for r in ok
                   if r.l1_psi_vs_half_diff is not None]
            series.append(([p[0] for p in pts], [p[1] for p in pts],
                           "|psi - half-diff|_L1"))
        write_line_plot(os.path.join(scn.out_dir, "l1_vs_eps.svg"), series,
                        title=f"{scn.name}: L1 distances vs eps",
                        xlabel="eps", ylabel="L1 distance", logx=True, logy=True)
    ok_rho = [r for r in rows if r.error is None and r.rho is not None]
    if ok_rho:
        write_line_plot(os.path.join(scn.out_dir, "rho_vs_eps.svg"),
                        [([r.eps for r in ok_rho], [r.rho for r in ok_rho],
                          "second eigenvalue")],
                        title=f"{scn.name}: second eigenvalue vs eps",
                        xlabel="eps", ylabel="rho")
