"""Declarative scenario files and built-in scenarios.

A scenario bundles a perturbation family with the sweep parameters (eps list,
grid size, toggles, output directory).  Files are JSON; geometry fields are
exact rationals written as strings ("1/6", "0.25") or numbers, converted to
floats on load.  Builtins are referenced as "builtin:family_a",
"builtin:family_b" or "builtin:markov2".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .families import (BUILTIN_NAMES, DEFAULT_EPS_LIST, DEFAULT_GRID_N,
                       get_family)
from .map_model import Branch, MapModelError, PerturbationFamily, PiecewiseMap


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate; carries per-field messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("scenario invalid:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class Scenario:
    name: str
    kind: str                                   # "family" or "markov"
    family: Optional[PerturbationFamily] = None
    markov_pairs: tuple[tuple[float, float], ...] = ()
    eps_list: tuple[float, ...] = DEFAULT_EPS_LIST
    grid_n: int = DEFAULT_GRID_N
    hypothesis_depth: int = 8
    run_second_eigenpair: bool = True
    run_escape_rates: bool = True
    run_saltus: bool = True
    out_dir: str = "out"
    warnings: list[str] = field(default_factory=list)


def _rational(value, path, errors) -> float:
    if isinstance(value, bool):
        errors.append(f"{path}: expected a number or rational string")
        return math.nan
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError):
            errors.append(f"{path}: cannot parse rational {value!r}")
            return math.nan
    errors.append(f"{path}: expected a number or rational string, got {type(value).__name__}")
    return math.nan


def normalize_eps(eps_list) -> list[float]:
    """Deduplicate and sort descending: sweeps run from coarse to fine."""
    return sorted({float(e) for e in eps_list}, reverse=True)


def critical_denominator_lcm(map_: PiecewiseMap, limit: int = 10 ** 6) -> int:
    """lcm of the denominators of the critical points (rational grid alignment)."""
    lcm = 1
    for c in map_.critical_set:
        den = Fraction(c).limit_denominator(limit).denominator
        lcm = lcm * den // math.gcd(lcm, den)
    return lcm


def suggested_grid_n(family: PerturbationFamily, eps_list) -> int:
    """Grid rule: at least 12/min(eps), rounded up to a multiple of the
    critical-point denominator lcm (keeps Ulam entries exact for affine maps
    and gives the narrow hole a few cells)."""
    lcm = critical_denominator_lcm(family.base)
    n0 = max(int(math.ceil(12.0 / min(eps_list))), 2 * len(family.base.branches), lcm)
    return ((n0 + lcm - 1) // lcm) * lcm


def check_grid(scn: Scenario) -> None:
    """Record (not raise) grid-rule findings on the scenario."""
    if scn.kind != "family":
        return
    lcm = critical_denominator_lcm(scn.family.base)
    if scn.grid_n % lcm != 0:
        scn.warnings.append(
            f"grid n={scn.grid_n} is not a multiple of the critical denominator "
            f"lcm {lcm}; Ulam entries will not align with the branch endpoints")
    if scn.eps_list:
        need = 12.0 / min(scn.eps_list)
        if scn.grid_n < need:
            scn.warnings.append(
                f"grid n={scn.grid_n} is below 12/min(eps) = {need:.0f}; the "
                "narrowest hole spans fewer than ~4 cells")


def _parse_branches(raw, errors) -> tuple[list[Branch], list[float], list[float]]:
    branches, slope_eps, intercept_eps = [], [], []
    if not isinstance(raw, list) or not raw:
        errors.append("branches: expected a non-empty list")
        return branches, slope_eps, intercept_eps
    for i, item in enumerate(raw):
        path = f"branches[{i}]"
        if not isinstance(item, dict):
            errors.append(f"{path}: expected an object")
            continue
        dom = item.get("domain")
        if not (isinstance(dom, list) and len(dom) == 2):
            errors.append(f"{path}.domain: expected [lo, hi]")
            continue
        lo = _rational(dom[0], f"{path}.domain[0]", errors)
        hi = _rational(dom[1], f"{path}.domain[1]", errors)
        if "slope" not in item or "intercept" not in item:
            errors.append(f"{path}: affine branches need slope and intercept")
            continue
        slope = _rational(item["slope"], f"{path}.slope", errors)
        intercept = _rational(item["intercept"], f"{path}.intercept", errors)
        if any(math.isnan(x) for x in (lo, hi, slope, intercept)):
            continue
        try:
            branches.append(Branch.affine(lo, hi, slope, intercept))
        except MapModelError as exc:
            errors.append(f"{path}: {exc}")
            continue
        slope_eps.append(_rational(item.get("slope_eps", 0), f"{path}.slope_eps", errors))
        intercept_eps.append(_rational(item.get("intercept_eps", 0),
                                       f"{path}.intercept_eps", errors))
    return branches, slope_eps, intercept_eps


def _parse_holes(raw, errors):
    coeffs = []
    if raw is None:
        return ()
    if not isinstance(raw, list):
        errors.append("holes: expected a list")
        return ()
    for i, item in enumerate(raw):
        path = f"holes[{i}]"
        if not isinstance(item, dict):
            errors.append(f"{path}: expected an object")
            continue
        h = _rational(item.get("location"), f"{path}.location", errors)
        a = _rational(item.get("a", 0), f"{path}.a", errors)
        b = _rational(item.get("b", 0), f"{path}.b", errors)
        if not any(math.isnan(x) for x in (h, a, b)):
            coeffs.append((h, a, b))
    return tuple(coeffs)


def _scenario_from_dict(data: dict, source: str) -> Scenario:
    errors: list[str] = []
    name = data.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: required non-empty string")
        name = source
    branches, slope_eps, intercept_eps = _parse_branches(data.get("branches"), errors)
    b = _rational(data.get("boundary"), "boundary", errors)
    family = None
    if branches and not math.isnan(b):
        try:
            base = PiecewiseMap(branches)
            family = PerturbationFamily(
                base=base,
                slope_eps=tuple(slope_eps),
                intercept_eps=tuple(intercept_eps),
                boundary_b=b,
                hole_coefficients=_parse_holes(data.get("holes"), errors),
                lebesgue_halves=bool(data.get("lebesgue_halves", False)),
            )
        except MapModelError as exc:
            errors.append(f"branches: {exc}")

    eps_list = data.get("eps_list", list(DEFAULT_EPS_LIST))
    if not (isinstance(eps_list, list) and all(isinstance(e, (int, float)) for e in eps_list)):
        errors.append("eps_list: expected a list of numbers")
        eps_list = list(DEFAULT_EPS_LIST)
    elif any(e <= 0 for e in eps_list):
        errors.append("eps_list: values must be positive")
    else:
        eps_list = normalize_eps(eps_list)
    run_cfg = data.get("run", {})
    if not isinstance(run_cfg, dict):
        errors.append("run: expected an object of toggles")
        run_cfg = {}

    if errors or family is None:
        if family is None and not errors:
            errors.append("branches/boundary: a family scenario needs both")
        raise ScenarioError(errors)
    grid_n = data.get("grid_n")
    if grid_n is None:
        grid_n = suggested_grid_n(family, eps_list)
    elif not isinstance(grid_n, int) or grid_n < 2:
        raise ScenarioError(["grid_n: expected an integer >= 2"])
    scn = Scenario(name=name, kind="family", family=family,
                   eps_list=tuple(float(e) for e in eps_list),
                   grid_n=grid_n,
                   hypothesis_depth=int(data.get("hypothesis_depth", 8)),
                   run_second_eigenpair=bool(run_cfg.get("second_eigenpair", True)),
                   run_escape_rates=bool(run_cfg.get("escape_rates", True)),
                   run_saltus=bool(run_cfg.get("saltus", True)),
                   out_dir=str(data.get("out_dir", "out")))
    check_grid(scn)
    return scn


def _builtin_scenario(name: str) -> Scenario:
    if name == "markov2":
        return Scenario(name="markov2", kind="markov",
                        markov_pairs=((0.01, 0.03),), out_dir="out")
    if name in ("family_a", "family_b"):
        fam = get_family(name)
        scn = Scenario(name=name, kind="family", family=fam,
                       eps_list=DEFAULT_EPS_LIST, grid_n=DEFAULT_GRID_N,
                       out_dir="out")
        check_grid(scn)
        return scn
    raise ScenarioError([f"scenario: unknown builtin {name!r}; known: {BUILTIN_NAMES}"])


def load_scenario(source: str) -> Scenario:
    """Load a scenario from 'builtin:<name>' or a JSON file path."""
    if source.startswith("builtin:"):
        return _builtin_scenario(source.split(":", 1)[1])
    try:
        with open(source) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError([f"file: {source} not found"])
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"file: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    if not isinstance(data, dict):
        raise ScenarioError(["file: top level must be an object"])
    return _scenario_from_dict(data, source)
