"""``spdc`` command line.

Exit codes: 0 success, 1 validation failure (bad config, failed acceptance
criterion or a result with failed cells), 2 usage error.  The worker count
comes from ``SPDC_WORKERS`` (default: all cores).
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import json
import logging
import math
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import Context, result_dict
from .acceptance import run as run_acceptance
from .fitting import ring_ridge, two_cone_fit
from .io import (ConfigError, RunConfig, config_dict, load_config, parse_config, serialize,
                 write_grid, write_heatmap, write_matrix)
from .oam import amplitude_matrix, marginals, parity_window, standard_geometry
from .optics import DomainError, derived_indices
from .quad import default_workers
from .spectra import (GridSpec, NoRealCone, as_analytic, as_numeric, cas_analytic, cas_numeric,
                      cone_geometry, find_max)

log = logging.getLogger("besselspdc")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def reference_config_text() -> str:
    return resources.files("besselspdc").joinpath("data/bbo_reference.cfg").read_text(encoding="utf-8")


def _jsonable(x):
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: _jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)
                if f.repr}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    return x


def _write_summary(out: Path, command: str, cfg: RunConfig, results: dict, ok: bool = True):
    rec = {"command": command, "version": __version__, "ok": ok,
           "config": config_dict(cfg), "config_text": serialize(cfg),
           "workers": default_workers(), "results": _jsonable(results)}
    (out / "summary.json").write_text(json.dumps(rec, indent=2, ensure_ascii=False) + "\n",
                                      encoding="utf-8")
    (out / "config.cfg").write_text(serialize(cfg), encoding="utf-8")


def _progress(label):
    last = [0.0]

    def report(done, total):
        now = time.monotonic()
        if done == total or now - last[0] > 5:
            last[0] = now
            log.info("%s: %d/%d cells", label, done, total)
    return report


def _emit_grid(out: Path, name: str, grid, scale: str):
    write_grid(grid, out / f"{name}.kgrid")
    write_heatmap(grid, out / f"{name}.pgm", scale)


def _grid_scalars(grid) -> dict:
    pk = find_max(grid)
    res = {"peak": {"kx": pk.kx, "ky": pk.ky, "value": pk.value}}
    rd = ring_ridge(grid, (0.0, 0.0), (0.3, min(0.65, max(grid.kx_range[1], grid.ky_range[1]))))
    if np.isfinite(rd.radius).any():
        res["ridge_radius"] = rd.mean_radius()
        res["ridge_fwhm_median"] = float(np.nanmedian(rd.fwhm))
    return res


# --------------------------------------------------------------- commands

def cmd_indices(cfg: RunConfig, out: Path, args) -> tuple[dict, bool]:
    ind = derived_indices(cfg.crystal, cfg.pump.wavelength)
    res = {"indices": {"n_o_signal": ind.n_o_signal, "n_o_pump": ind.n_o_pump,
                       "n_e_pump": ind.n_e_pump, "n_eff": ind.n_eff, "beta": ind.beta,
                       "eta": ind.eta, "k0": ind.k0, "walkoff": ind.walkoff,
                       "k_signal": ind.k_signal, "axis": ind.axis}}
    try:
        res["cone_geometry"] = cone_geometry(cfg.crystal, cfg.pump)
    except DomainError as exc:
        res["cone_geometry"] = None
        res["no_real_cone"] = str(exc)
    print(json.dumps(_jsonable(res), indent=2, ensure_ascii=False))
    return res, True


def _method_flags(args):
    if args.both:
        return True, True
    if args.analytic:
        return False, True
    return True, False


def _as_maps(cfg, args, want_num, want_ana):
    maps = {}
    if want_num:
        maps["as_numeric"] = as_numeric(cfg.grid, cfg.crystal, cfg.pump, cfg.quad, cfg.phasematch,
                                        progress=_progress("AS"))
    if want_ana:
        a = as_analytic(cfg.grid, cfg.crystal, cfg.pump, cfg.analytic.analytic_points,
                        cfg.phasematch.gamma, cfg.quad.rel_tol, cfg.analytic.radial_prefactor)
        maps["as_analytic"] = a
    return maps


def cmd_as(cfg: RunConfig, out: Path, args) -> tuple[dict, bool]:
    want_num, want_ana = _method_flags(args)
    res, ok = {}, True
    for name, g in _as_maps(cfg, args, want_num, want_ana).items():
        if isinstance(g, NoRealCone):
            res[name] = {"no_real_cone": g.reason, "r_as_squared": g.r_as_squared}
            continue
        _emit_grid(out, name, g, args.scale)
        entry = _grid_scalars(g)
        conv = g.diagnostics.get("converged")
        entry["unconverged_cells"] = int(np.count_nonzero(~conv)) if conv is not None else 0
        failed = g.diagnostics.get("failed", {})
        entry["failed_cells"] = len(failed)
        ok &= not failed
        if cfg.pump.cone_radius >= 0.08:
            try:
                tc = two_cone_fit(g)
                entry["two_cones"] = {"outer": tc.outer_circle, "inner": tc.inner_circle,
                                      "touch_point": tc.touch_point}
            except ValueError as exc:
                entry["two_cones"] = {"error": str(exc)}
        res[name] = entry
    try:
        res["cone_geometry"] = cone_geometry(cfg.crystal, cfg.pump)
    except DomainError:
        res["cone_geometry"] = None
    return res, ok


def cmd_cas(cfg: RunConfig, out: Path, args) -> tuple[dict, bool]:
    res = {}
    if args.auto_idler or cfg.cas.idler_kx is None:
        if not args.auto_idler:
            raise ConfigError("no idler vector: set cas.idler_kx/cas.idler_ky or pass --auto-idler")
        want_num, want_ana = _method_flags(args)
        src = "as_analytic" if (want_ana and not want_num) else "as_numeric"
        g = _as_maps(cfg, args, src == "as_numeric", src == "as_analytic")[src]
        if isinstance(g, NoRealCone):
            raise DomainError(g.reason)
        _emit_grid(out, src, g, args.scale)
        pk = find_max(g)
        ki = np.array([pk.kx, pk.ky])
        res["idler_source"] = src
    else:
        ki = np.array([cfg.cas.idler_kx, cfg.cas.idler_ky])
        res["idler_source"] = "config"
    res["idler"] = ki
    grid = cfg.grid
    if args.zoom:
        h = args.zoom
        grid = GridSpec(grid.nx, grid.ny, (-ki[0] - h, -ki[0] + h), (-ki[1] - h, -ki[1] + h))
    res["grid"] = {"kx_range": grid.kx_range, "ky_range": grid.ky_range}
    want_num, want_ana = _method_flags(args)
    if want_num:
        g = cas_numeric(grid, ki, cfg.crystal, cfg.pump, cfg.phasematch)
        _emit_grid(out, "cas_numeric", g, args.scale)
        rd = ring_ridge(g, (-ki[0], -ki[1]), (0.0, 0.95 * min(np.ptp(grid.kx_range), np.ptp(grid.ky_range)) / 2))
        cx, cy, rr = rd.circle()
        res["cas_numeric"] = {"peak": find_max(g), "ring_center": (cx, cy), "ring_radius": rr,
                              "ring_fwhm_median": float(np.nanmedian(rd.fwhm))}
    if want_ana:
        g, rec = cas_analytic(grid, ki, cfg.crystal, cfg.pump, cfg.phasematch.gamma, cfg.cas.form)
        _emit_grid(out, "cas_analytic", g, args.scale)
        res["cas_analytic"] = {"closed_form": rec, "r_k": rec.r_k, "log_peak": g.diagnostics["log_peak"],
                               "form": cfg.cas.form}
    return res, True


def cmd_oam(cfg: RunConfig, out: Path, args) -> tuple[dict, bool]:
    o = cfg.oam
    geom = standard_geometry(cfg.crystal, cfg.pump, o.signal_cone_radius, o.idler_cone_radius,
                             o.mode_width, o.orientation)
    m = amplitude_matrix(cfg.pump, geom, (o.ell_signal_min, o.ell_signal_max),
                         (o.ell_idler_min, o.ell_idler_max), cfg.crystal, cfg.quad, cfg.phasematch,
                         route=o.route, branches=o.branches)
    write_matrix(m, out / "oam_matrix.koam")
    write_heatmap(m.modulus[::-1], out / "oam_modulus.pgm", args.scale)
    ms, mi = marginals(m)
    with open(out / "marginals.csv", "w", encoding="utf-8") as fh:
        fh.write("ell,signal,idler\n")
        ells = sorted(set(m.ell_s.tolist()) | set(m.ell_i.tolist()))
        for ell in ells:
            s = repr(float(ms[ell - m.ell_s[0]])) if m.ell_s[0] <= ell <= m.ell_s[-1] else ""
            i = repr(float(mi[ell - m.ell_i[0]])) if m.ell_i[0] <= ell <= m.ell_i[-1] else ""
            fh.write(f"{ell},{s},{i}\n")
    res = {"geometry": geom, "argmax": m.argmax(), "max_modulus": float(m.modulus.max()),
           "converged": m.diagnostics["converged"], "azimuthal_points": m.diagnostics["azimuthal_points"],
           "route": m.diagnostics["route"], "branches": m.diagnostics["branches"],
           "parity_window": {"signal": parity_window(ms), "idler": parity_window(mi)}}
    return res, True


COMMANDS = {"indices": cmd_indices, "as": cmd_as, "cas": cmd_cas, "oam": cmd_oam}


def cmd_sweep(cfg: RunConfig, out: Path, args) -> tuple[dict, bool]:
    if not cfg.sweep:
        raise ConfigError("sweep needs at least one 'sweep.<key> = v1, v2, ...' line")
    inner = COMMANDS[args.command]
    keys = [k for k, _ in cfg.sweep]
    points = []
    ok = True
    for n, combo in enumerate(itertools.product(*(v for _, v in cfg.sweep))):
        sub = dataclasses.replace(cfg, sweep=())
        for k, v in zip(keys, combo):
            sub = sub.replace(k, v)
        d = out / f"point_{n:03d}"
        d.mkdir(parents=True, exist_ok=True)
        log.info("sweep point %d: %s", n, dict(zip(keys, combo)))
        res, good = inner(sub, d, args)
        _write_summary(d, args.command, sub, res, good)
        points.append({"dir": d.name, "values": dict(zip(keys, combo)), "ok": good, "results": res})
        ok &= good
    return {"command": args.command, "points": points}, ok


def cmd_validate(cfg: RunConfig, out: Path, args) -> tuple[dict, bool]:
    ctx = Context(crystal=cfg.crystal)
    nums = [int(c) for c in args.criteria.split(",")] if args.criteria else None
    results = run_acceptance(nums, ctx)
    return {"criteria": [result_dict(r) for r in results]}, all(r.passed for r in results)


ALL = dict(COMMANDS, sweep=cmd_sweep, validate=cmd_validate)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spdc", description="Conical-pump SPDC spectra and OAM amplitudes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, methods=True):
        sp.add_argument("--config", help="config file (default: shipped BBO reference)")
        sp.add_argument("--out", default="spdc_out", help="output directory")
        sp.add_argument("--scale", choices=("linear", "log"), default="linear", help="heatmap scale")
        sp.add_argument("-v", "--verbose", action="store_true")
        if methods:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--numeric", action="store_true", help="full quadrature (default)")
            g.add_argument("--analytic", action="store_true", help="closed forms")
            g.add_argument("--both", action="store_true")

    common(sub.add_parser("indices", help="indices, walk-off and cone geometry"), methods=False)
    common(sub.add_parser("as", help="angular spectrum maps"))
    c = sub.add_parser("cas", help="conditional angular spectrum")
    common(c)
    c.add_argument("--auto-idler", action="store_true", help="use the AS maximum as idler")
    c.add_argument("--zoom", type=float, default=None, metavar="HALF_WIDTH",
                   help="centre the grid on -k_idler with this half width (µm⁻¹)")
    common(sub.add_parser("oam", help="OAM amplitude matrix and marginals"), methods=False)
    s = sub.add_parser("sweep", help="run a command over the sweep.* values")
    common(s)
    s.add_argument("--command", choices=sorted(COMMANDS), default="as")
    s.add_argument("--auto-idler", action="store_true")
    s.add_argument("--zoom", type=float, default=None)
    v = sub.add_parser("validate", help="run the acceptance criteria")
    common(v, methods=False)
    v.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,8")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    for flag in ("auto_idler", "zoom", "numeric", "analytic", "both", "command"):
        if not hasattr(args, flag):
            setattr(args, flag, None)
    try:
        cfg = load_config(args.config) if args.config else parse_config(reference_config_text())
    except FileNotFoundError as exc:
        print(f"spdc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"spdc: config error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.zoom is not None and not args.zoom > 0:
        print("spdc: --zoom must be positive", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res, ok = ALL[args.subcommand](cfg, out, args)
    except (ConfigError, DomainError, ValueError) as exc:
        print(f"spdc {args.subcommand}: {exc}", file=sys.stderr)
        _write_summary(out, args.subcommand, cfg, {"error": str(exc)}, False)
        return EXIT_FAIL
    _write_summary(out, args.subcommand, cfg, res, ok)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
