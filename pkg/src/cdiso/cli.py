"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 bad input, 3 degenerate model.
The worker thread count comes from the CDISO_THREADS environment variable.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__
from .density1d import check_cd_density, density_from_doc, tabulated_density
from .errors import CdisoError, DegenerateModelError, InvalidParametersError, ValidationFailedError
from .kernels import CurvatureParams
from .localization import (aggregate_perimeter_bound, build_suspension_fixture,
                           read_disintegration, validate_disintegration, write_disintegration)
from .model import SearchOptions, cap_radius, model_cheeger_search, model_profile_table
from .profile import ProfileTable, cheeger_search, density_profile_many
from .sets1d import (IntervalUnion, measure, minkowski_content, perimeter,
                     relaxation_perimeter_oracle)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3

# defaults for keys that may also come from --config
DEFAULTS: dict[str, Any] = {
    "K": None, "N": None, "D": None, "v_grid": "0:1:11", "format": "csv", "out": None,
    "n_phi": 33, "n_a": 33, "xtol": 1e-6, "n_starts": 3, "density": None,
    "grid_n": 100, "tol": None, "set": None, "n": None, "m": None,
    "fixture": None, "v": None, "only": None, "n_needles": 8,
}


def parse_real(text) -> float:
    """Locale-independent real with the literals 'pi', '-pi' and 'inf'."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    if s in ("pi", "+pi"):
        return math.pi
    if s == "-pi":
        return -math.pi
    if s in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(s)
    except ValueError:
        raise InvalidParametersError(f"not a real number: {text!r}") from None


def parse_v_grid(text) -> list[float]:
    """'a:b:n' (n evenly spaced points, n >= 2) or a comma-separated list."""
    if isinstance(text, (list, tuple)):
        vs = [parse_real(x) for x in text]
    elif ":" in str(text):
        parts = str(text).split(":")
        if len(parts) != 3:
            raise InvalidParametersError(f"v-grid must be a:b:n, got {text!r}")
        a, b = parse_real(parts[0]), parse_real(parts[1])
        try:
            n = int(parts[2])
        except ValueError:
            raise InvalidParametersError(f"bad point count in {text!r}") from None
        if n < 2:
            raise InvalidParametersError("v-grid needs at least 2 points")
        vs = [float(x) for x in np.linspace(a, b, n)]
    else:
        vs = [parse_real(x) for x in str(text).split(",") if x.strip()]
    if not vs or any(not 0 <= v <= 1 for v in vs):
        raise InvalidParametersError("v-grid values must lie in [0, 1]")
    return vs


def _params(cfg: dict) -> CurvatureParams:
    if cfg["K"] is None or cfg["N"] is None:
        raise InvalidParametersError("--K and --N are required")
    D = None if cfg["D"] is None else parse_real(cfg["D"])
    return CurvatureParams(parse_real(cfg["K"]), parse_real(cfg["N"]), D)


def _options(cfg: dict) -> SearchOptions:
    opts = SearchOptions(n_phi=int(cfg["n_phi"]), n_a=int(cfg["n_a"]), xtol=float(cfg["xtol"]),
                         n_starts=int(cfg["n_starts"]))
    if opts.n_phi < 2 or opts.n_a < 2 or opts.xtol <= 0 or opts.n_starts < 1:
        raise InvalidParametersError("grids need >= 2 points and tolerances must be > 0")
    return opts


def load_density(path: str):
    """A density document (JSON) or a two-column 't,h' CSV table (header row optional)."""
    if path.endswith(".csv"):
        try:
            with open(path, encoding="utf-8") as fh:
                lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
            if lines and not lines[0].split(",")[0].strip().lstrip("+-").replace(".", "", 1)[:1].isdigit():
                lines = lines[1:]
            rows = np.loadtxt(lines, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise InvalidParametersError(f"{path}: {exc}") from None
        if rows.shape[1] != 2:
            raise InvalidParametersError(f"{path}: expected two columns t,h")
        return tabulated_density(rows[:, 0], rows[:, 1], label=path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidParametersError(f"{path}: not a JSON document ({exc})") from None
    return density_from_doc(doc)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_doc(doc: dict, cfg: dict, command: str) -> None:
    meta = {"artifact_version": __version__, "command": command, "config": _config_view(cfg)}
    _emit(json.dumps(_jsonable({"meta": meta, **doc}), indent=1, sort_keys=True) + "\n",
          cfg.get("out"))


def _config_view(cfg: dict) -> dict:
    # the output path does not affect results, so identical runs stay byte-identical
    return {k: v for k, v in sorted(cfg.items())
            if k not in ("func", "config", "out") and v is not None}


# --- commands -----------------------------------------------------------------------

def cmd_profile(cfg: dict) -> int:
    vs = parse_v_grid(cfg["v_grid"])
    if cfg["density"]:
        mu = load_density(cfg["density"])
        table = ProfileTable(density_profile_many(mu, vs),
                             {"density": mu.label, "artifact_version": __version__,
                              "quantity": "density_profile"})
    else:
        table = model_profile_table(_params(cfg), vs, _options(cfg))
    table.meta["config"] = _config_view(cfg)
    if cfg["format"] == "csv":
        _emit(table.to_csv(), cfg["out"])
    else:
        _emit(json.dumps(_jsonable(table.to_doc()), indent=1, sort_keys=True) + "\n", cfg["out"])
    return EXIT_OK


def cmd_cheeger(cfg: dict) -> int:
    if cfg["density"]:
        res = cheeger_search(load_density(cfg["density"]))
        doc = {"cheeger": res.value, "v_star": res.v, "minimizer": res.point.as_dict()}
    else:
        res = model_cheeger_search(_params(cfg), _options(cfg))
        doc = {"cheeger": res.value, "v_star": res.v_star, "H_star": res.H_star,
               "a_star": res.a_star, "phi_star": res.phi_star}
    _emit_doc(doc, cfg, "cheeger")
    return EXIT_OK


def cmd_check_density(cfg: dict) -> int:
    if not cfg["density"]:
        raise InvalidParametersError("--density is required")
    mu = load_density(cfg["density"])
    tol = 1e-8 if cfg["tol"] is None else float(cfg["tol"])
    if tol <= 0 or int(cfg["grid_n"]) < 2:
        raise InvalidParametersError("tol must be > 0 and grid-n >= 2")
    rep = check_cd_density(mu, _params(cfg), grid_n=int(cfg["grid_n"]), tol=tol)
    _emit_doc({"report": rep.as_dict()}, cfg, "check-density")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_perimeter(cfg: dict) -> int:
    if not cfg["density"] or cfg["set"] is None:
        raise InvalidParametersError("--density and --set are required")
    mu = load_density(cfg["density"])
    E = IntervalUnion.parse(cfg["set"])
    n = 100 if cfg["n"] is None else int(cfg["n"])
    doc = {"set": [list(p) for p in E], "measure": measure(mu, E),
           "perimeter": perimeter(mu, E), "minkowski_content": minkowski_content(mu, E)}
    if n >= 1:
        m = None if cfg["m"] is None else int(cfg["m"])
        doc["relaxation_oracle"] = relaxation_perimeter_oracle(mu, E, n, m)
        doc["oracle_n"] = n
        doc["oracle_m"] = n * n if m is None else m
    _emit_doc(doc, cfg, "perimeter")
    return EXIT_OK


def cmd_needle_verify(cfg: dict) -> int:
    if not cfg["fixture"]:
        raise InvalidParametersError("--fixture is required")
    v = None if cfg["v"] is None else parse_real(cfg["v"])
    d, spec = read_disintegration(cfg["fixture"], v)
    params = _params(cfg)
    tol = 1e-3 if cfg["tol"] is None else float(cfg["tol"])
    rep = validate_disintegration(d, params, spec)
    doc: dict = {"label": d.label, "v": spec.v, "validation": rep.as_dict()}
    if not rep.passed:
        _emit_doc(doc, cfg, "needle-verify")
        return EXIT_FAIL
    agg = aggregate_perimeter_bound(d, params, spec, tol=tol, opts=_options(cfg))
    doc["aggregate"] = agg.as_dict()
    _emit_doc(doc, cfg, "needle-verify")
    return EXIT_OK if agg.passed else EXIT_FAIL


def cmd_needle_fixture(cfg: dict) -> int:
    if cfg["N"] is None or cfg["v"] is None or not cfg["out"]:
        raise InvalidParametersError("--N, --v and --out are required")
    N, v = parse_real(cfg["N"]), parse_real(cfg["v"])
    E = IntervalUnion() if v <= 0 else IntervalUnion(((0.0, math.pi if v >= 1 else cap_radius(N, v)),))
    d, spec = build_suspension_fixture(N, int(cfg["n_needles"]), E)
    write_disintegration(cfg["out"], d, spec, CurvatureParams(N - 1, N, math.pi))
    return EXIT_OK


def cmd_acceptance(cfg: dict) -> int:
    from .acceptance import run_all

    only = None
    if cfg["only"]:
        only = {int(x) for x in str(cfg["only"]).split(",") if x.strip()}
    results = run_all(only, echo=lambda line: print(line, flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAIL if failed else EXIT_OK


# --- parser ---------------------------------------------------------------------------

def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", help="curvature lower bound")
    p.add_argument("--N", help="dimension upper bound (>= 1)")
    p.add_argument("--D", help="diameter bound: number, 'pi' or 'inf' "
                               "(default: Bonnet-Myers for K > 0, else inf)")


def _add_search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-phi", dest="n_phi", type=int, help="phi grid size (default 33)")
    p.add_argument("--n-a", dest="n_a", type=int, help="a grid size (default 33)")
    p.add_argument("--xtol", type=float, help="refinement tolerance in (phi, a) (default 1e-6)")
    p.add_argument("--n-starts", dest="n_starts", type=int,
                   help="refinement starts from the best grid points (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdiso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file of option defaults")
        p.add_argument("--out", help="output file (default stdout)")
        return p

    p = add("profile", cmd_profile, "model profile I_{K,N,D} (or a density's profile) on a v-grid")
    _add_params(p)
    _add_search(p)
    p.add_argument("--v-grid", dest="v_grid", help="a:b:n or comma list (default 0:1:11)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--density", help="profile this density file instead of the model")

    p = add("cheeger", cmd_cheeger, "model Cheeger constant (or a density's)")
    _add_params(p)
    _add_search(p)
    p.add_argument("--density")

    p = add("check-density", cmd_check_density, "verify the CD(K,N) inequality of a density")
    _add_params(p)
    p.add_argument("--density")
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--tol", type=float)

    p = add("perimeter", cmd_perimeter, "perimeter, Minkowski content and relaxation oracle")
    p.add_argument("--density")
    p.add_argument("--set", help="interval union 'a,b;c,d'")
    p.add_argument("--n", type=int, help="oracle stage: first n intervals, ramps 1/m (default 100)")
    p.add_argument("--m", type=int, help="ramp count (default n^2)")

    p = add("needle-verify", cmd_needle_verify, "validate a disintegration and aggregate")
    _add_params(p)
    _add_search(p)
    p.add_argument("--fixture")
    p.add_argument("--v", help="mass of E (default: from the file)")
    p.add_argument("--tol", type=float)

    p = add("needle-fixture", cmd_needle_fixture, "write a spherical-suspension cap fixture")
    p.add_argument("--N")
    p.add_argument("--v")
    p.add_argument("--n-needles", dest="n_needles", type=int)

    p = add("acceptance", cmd_acceptance, "run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def resolve_config(ns: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags."""
    known = set(vars(ns))
    cfg = {k: v for k, v in DEFAULTS.items() if k in known}
    if getattr(ns, "config", None):
        with open(ns.config, encoding="utf-8") as fh:
            try:
                extra = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidParametersError(f"{ns.config}: not a JSON document ({exc})") from None
        if not isinstance(extra, dict):
            raise InvalidParametersError("config must be a JSON object")
        for k, v in extra.items():
            k = k.replace("-", "_")
            if k not in known:
                raise InvalidParametersError(f"unknown config key {k!r} for this command")
            cfg[k] = v
    for k, v in vars(ns).items():
        if v is not None:
            cfg[k] = v
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        return ns.func(cfg)
    except DegenerateModelError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValidationFailedError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CdisoError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
