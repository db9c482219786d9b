"""Run configuration, binary result files and graymap previews.

Config text is line oriented::

    # comment
    crystal.length = 1 mm
    pump.cone_radius = 0.05 µm⁻¹
    crystal.axis_polar = 29.3 deg

Dimensional quantities must carry a unit.  Every key name is unique across
sections, which lets ``sweep.<key> = v1, v2, ... [unit]`` name its target
without a second dotted level.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .optics import CrystalConfig, PumpBeam
from .phasematch import PhaseMatchSpec
from .quad import QuadratureSpec
from .spectra import GridSpec, SpectrumGrid


class ConfigError(ValueError):
    """Malformed or invalid configuration text; ``line`` is 1-based or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FormatError(ValueError):
    """A grid or matrix file does not follow its declared layout."""

    def __init__(self, message: str, expected: int | None = None, found: int | None = None):
        self.expected = expected
        self.found = found
        super().__init__(message)


# ---------------------------------------------------------------- units

_UNITS = {
    "length": {"nm": 1e-3, "µm": 1.0, "um": 1.0, "mm": 1e3},
    "wavelength": {"nm": 1.0, "µm": 1e3, "um": 1e3, "mm": 1e6},  # stored in nm
    "wavenumber": {"µm⁻¹": 1.0, "um^-1": 1.0, "µm^-1": 1.0, "1/um": 1.0, "1/µm": 1.0,
                   "mm⁻¹": 1e-3, "mm^-1": 1e-3, "1/mm": 1e-3},
    "angle": {"rad": 1.0, "deg": math.pi / 180},
    "coefficient": {"pm/V": 1.0},
}
_CANONICAL = {"length": "µm", "wavelength": "nm", "wavenumber": "µm⁻¹", "angle": "rad",
              "coefficient": "pm/V"}


@dataclass(frozen=True)
class CasSettings:
    idler_kx: float | None = None  # µm⁻¹; None means pick the AS maximum
    idler_ky: float | None = None
    form: str = "spot"


@dataclass(frozen=True)
class OamSettings:
    signal_cone_radius: float = 1e-4
    idler_cone_radius: float = 0.01
    mode_width: float = 0.0005
    orientation: str = "vertical"
    ell_signal_min: int = -15
    ell_signal_max: int = 15
    ell_idler_min: int = -15
    ell_idler_max: int = 15
    route: str = "mode"
    branches: str = "both"


@dataclass(frozen=True)
class AnalyticSettings:
    analytic_points: int = 256
    radial_prefactor: bool = True


@dataclass(frozen=True)
class RunConfig:
    crystal: CrystalConfig = CrystalConfig()
    pump: PumpBeam = PumpBeam()
    grid: GridSpec = GridSpec()
    quad: QuadratureSpec = QuadratureSpec()
    phasematch: PhaseMatchSpec = PhaseMatchSpec()
    cas: CasSettings = CasSettings()
    oam: OamSettings = OamSettings()
    analytic: AnalyticSettings = AnalyticSettings()
    sweep: tuple = ()  # ((key, (values...)), ...)

    def replace(self, key: str, value) -> "RunConfig":
        """Copy with one leaf key (by its unique name) set to an internal-unit value."""
        section, fld = _KEY_INDEX[key]
        sub = _get_section(self, section)
        try:
            new = _set_leaf(sub, fld, value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{section}.{key}: {exc}") from None
        return dataclasses.replace(self, **{section: new})


# (section, key) -> (kind, field name or special)
_SCHEMA = {
    ("crystal", "sellmeier_ordinary"): ("floats", None),
    ("crystal", "sellmeier_extraordinary"): ("floats", None),
    ("crystal", "axis_polar"): ("angle", None),
    ("crystal", "axis_azimuth"): ("angle", None),
    ("crystal", "length"): ("length", None),
    ("crystal", "d22"): ("coefficient", None),
    ("pump", "wavelength"): ("wavelength", None),
    ("pump", "cone_radius"): ("wavenumber", None),
    ("pump", "width"): ("wavenumber", None),
    ("pump", "oam"): ("int", None),
    ("pump", "amplitude"): ("float", None),
    ("grid", "nx"): ("int", None),
    ("grid", "ny"): ("int", None),
    ("grid", "kx_min"): ("wavenumber", ("kx_range", 0)),
    ("grid", "kx_max"): ("wavenumber", ("kx_range", 1)),
    ("grid", "ky_min"): ("wavenumber", ("ky_range", 0)),
    ("grid", "ky_max"): ("wavenumber", ("ky_range", 1)),
    ("quad", "radial_points"): ("int", None),
    ("quad", "azimuthal_points"): ("int", None),
    ("quad", "rel_tol"): ("float", None),
    ("quad", "max_doublings"): ("int", None),
    ("quad", "abs_tol"): ("float", None),
    ("phasematch", "envelope"): ("word", None),
    ("phasematch", "gamma"): ("float", None),
    ("cas", "idler_kx"): ("wavenumber", None),
    ("cas", "idler_ky"): ("wavenumber", None),
    ("cas", "form"): ("word", None),
    ("oam", "signal_cone_radius"): ("wavenumber", None),
    ("oam", "idler_cone_radius"): ("wavenumber", None),
    ("oam", "mode_width"): ("wavenumber", None),
    ("oam", "orientation"): ("word", None),
    ("oam", "ell_signal_min"): ("int", None),
    ("oam", "ell_signal_max"): ("int", None),
    ("oam", "ell_idler_min"): ("int", None),
    ("oam", "ell_idler_max"): ("int", None),
    ("oam", "route"): ("word", None),
    ("oam", "branches"): ("word", None),
    ("analytic", "analytic_points"): ("int", None),
    ("analytic", "radial_prefactor"): ("bool", None),
}
#: Keys every config must set; everything else has a default.
REQUIRED = (("crystal", "axis_polar"), ("crystal", "length"), ("pump", "wavelength"),
            ("pump", "cone_radius"), ("pump", "width"))

_KEY_INDEX = {}
for (_sec, _key), (_kind, _target) in _SCHEMA.items():
    assert _key not in _KEY_INDEX, _key
    _KEY_INDEX[_key] = (_sec, _key)


def _get_section(cfg, name):
    return getattr(cfg, name)


def _set_leaves(sub, kv: dict):
    """Replace several leaves of one section at once (validation sees the final state)."""
    section = _section_of(sub)
    changes: dict = {}
    for key, value in kv.items():
        target = _SCHEMA[(section, key)][1]
        if target is None:
            changes[key] = value
        else:
            name, idx = target
            rng = list(changes.get(name, getattr(sub, name)))
            rng[idx] = value
            changes[name] = tuple(rng)
    return dataclasses.replace(sub, **changes)


def _set_leaf(sub, key, value):
    return _set_leaves(sub, {key: value})


def _section_of(sub):
    return {CrystalConfig: "crystal", PumpBeam: "pump", GridSpec: "grid",
            QuadratureSpec: "quad", PhaseMatchSpec: "phasematch", CasSettings: "cas",
            OamSettings: "oam", AnalyticSettings: "analytic"}[type(sub)]


def _leaf(sub, key):
    target = _SCHEMA[(_section_of(sub), key)][1]
    if target is None:
        return getattr(sub, key)
    name, idx = target
    return getattr(sub, name)[idx]


# --------------------------------------------------------------- parsing

def _number(tok, line):
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"not a number: {tok!r}", line) from None


def _convert(kind, raw, line, key):
    """Turn the value text into internal units; returns a scalar or a tuple."""
    raw = raw.strip()
    if kind == "word":
        if not raw or " " in raw:
            raise ConfigError(f"{key}: expected a single word, got {raw!r}", line)
        return raw
    if kind == "bool":
        low = raw.lower()
        if low not in ("true", "false"):
            raise ConfigError(f"{key}: expected true or false, got {raw!r}", line)
        return low == "true"
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}", line) from None
    if kind == "float":
        return _number(raw, line)
    if kind == "floats":
        parts = [p for p in raw.replace(",", " ").split()]
        if not parts:
            raise ConfigError(f"{key}: empty list", line)
        return tuple(_number(p, line) for p in parts)
    # dimensional
    parts = raw.rsplit(None, 1)
    if len(parts) != 2 or (parts[1] not in _UNITS[kind]
                           and (parts[1][0].isdigit() or parts[1][0] in "+-.")):
        if kind == "coefficient" and len(parts) == 1:
            return _number(raw, line)
        raise ConfigError(f"{key}: missing unit (expected one of "
                          f"{', '.join(_UNITS[kind])})", line)
    num, unit = parts
    if unit not in _UNITS[kind]:
        raise ConfigError(f"{key}: unit {unit!r} does not fit a {kind} "
                          f"(expected one of {', '.join(_UNITS[kind])})", line)
    return _number(num, line) * _UNITS[kind][unit]


def _convert_list(kind, raw, line, key):
    """Comma-separated values sharing one trailing unit (for sweeps)."""
    items = [s.strip() for s in raw.split(",")]
    if any(not s for s in items):
        raise ConfigError(f"sweep.{key}: empty list entry", line)
    unit = ""
    if kind in _UNITS:
        last = items[-1].rsplit(None, 1)
        if len(last) == 2:
            items[-1], unit = last
    out = []
    for s in items:
        text = f"{s} {unit}".strip() if kind in _UNITS else s
        out.append(_convert(kind, text, line, f"sweep.{key}"))
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a validated :class:`RunConfig`.

    Raises
    ------
    ConfigError
        On syntax errors, unknown keys, unit problems or values the
        domain types reject.  The message names the offending line.
    """
    values: dict = {}
    sweep: dict = {}
    lines: dict = {}
    for no, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'section.key = value', got {body!r}", no)
        lhs, rhs = (s.strip() for s in body.split("=", 1))
        if lhs.count(".") != 1:
            raise ConfigError(f"key must be 'section.key', got {lhs!r}", no)
        section, key = lhs.split(".")
        if not rhs:
            raise ConfigError(f"{lhs}: missing value", no)
        if section == "sweep":
            if key not in _KEY_INDEX:
                raise ConfigError(f"sweep over unknown key {key!r}", no)
            kind = _SCHEMA[_KEY_INDEX[key]][0]
            if kind == "floats":
                raise ConfigError(f"sweep over list-valued key {key!r} is not supported", no)
            if key in sweep:
                raise ConfigError(f"duplicate sweep key {key!r}", no)
            sweep[key] = _convert_list(kind, rhs, no, key)
            lines[("sweep", key)] = no
            continue
        if (section, key) not in _SCHEMA:
            raise ConfigError(f"unknown key {lhs!r}", no)
        if (section, key) in values:
            raise ConfigError(f"duplicate key {lhs!r}", no)
        values[(section, key)] = _convert(_SCHEMA[(section, key)][0], rhs, no, lhs)
        lines[(section, key)] = no

    missing = [f"{a}.{b}" for a, b in REQUIRED if (a, b) not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    cfg = RunConfig()
    by_section: dict = {}
    for (section, key), v in values.items():
        by_section.setdefault(section, {})[key] = v
    for section, kv in by_section.items():
        try:
            new = _set_leaves(_get_section(cfg, section), kv)
        except (TypeError, ValueError) as exc:
            first = min(lines[(section, k)] for k in kv)
            raise ConfigError(f"{section}: {exc}", first) from None
        cfg = dataclasses.replace(cfg, **{section: new})
    cfg = dataclasses.replace(cfg, sweep=tuple(sweep.items()))
    _validate(cfg)
    for key, vals in cfg.sweep:  # every sweep point must build
        for v in vals:
            try:
                cfg.replace(key, v)
            except ConfigError as exc:
                raise ConfigError(str(exc), lines[("sweep", key)]) from None
    return cfg


def _validate(cfg: RunConfig):
    if cfg.phasematch.envelope not in ("sinc", "gaussian"):
        raise ConfigError(f"phasematch.envelope must be sinc or gaussian, got {cfg.phasematch.envelope!r}")
    if cfg.cas.form not in ("spot", "annulus"):
        raise ConfigError(f"cas.form must be spot or annulus, got {cfg.cas.form!r}")
    if (cfg.cas.idler_kx is None) != (cfg.cas.idler_ky is None):
        raise ConfigError("cas.idler_kx and cas.idler_ky must be given together")
    o = cfg.oam
    if o.orientation not in ("vertical", "horizontal", "vertical-flipped"):
        raise ConfigError(f"unknown oam.orientation {o.orientation!r}")
    if o.route not in ("mode", "lab"):
        raise ConfigError(f"oam.route must be mode or lab, got {o.route!r}")
    if o.branches not in ("both", "+", "-"):
        raise ConfigError(f"oam.branches must be both, + or -, got {o.branches!r}")
    if o.ell_signal_max < o.ell_signal_min or o.ell_idler_max < o.ell_idler_min:
        raise ConfigError("empty ℓ range in the oam section")
    if cfg.analytic.analytic_points < 8:
        raise ConfigError("analytic.analytic_points must be at least 8")


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _fmt(kind, v):
    if v is None:
        return None
    if kind == "floats":
        return ", ".join(repr(float(c)) for c in v)
    if kind == "bool":
        return "true" if v else "false"
    if kind in ("int", "word"):
        return str(v)
    if kind == "float":
        return repr(float(v))
    return f"{float(v)!r} {_CANONICAL[kind]}"


def serialize(cfg: RunConfig) -> str:
    """Config text in canonical units; floats are written with ``repr`` so
    parsing the output gives back an equal :class:`RunConfig`."""
    out = []
    current = None
    for (section, key), (kind, _) in _SCHEMA.items():
        v = _fmt(kind, _leaf(_get_section(cfg, section), key))
        if v is None:
            continue
        if section != current:
            if current is not None:
                out.append("")
            current = section
        out.append(f"{section}.{key} = {v}")
    if cfg.sweep:
        out.append("")
        for key, vals in cfg.sweep:
            kind = _SCHEMA[_KEY_INDEX[key]][0]
            txt = ", ".join(_fmt(kind, v).split()[0] if kind in _UNITS else _fmt(kind, v) for v in vals)
            unit = f" {_CANONICAL[kind]}" if kind in _UNITS else ""
            out.append(f"sweep.{key} = {txt}{unit}")
    return "\n".join(out) + "\n"


def config_dict(cfg: RunConfig) -> dict:
    """Plain nested dict of the resolved config (internal units) for summaries."""
    d = {}
    for (section, key), (kind, _) in _SCHEMA.items():
        v = _leaf(_get_section(cfg, section), key)
        if isinstance(v, tuple):
            v = list(v)
        d.setdefault(section, {})[key] = v
    d["sweep"] = {k: list(v) for k, v in cfg.sweep}
    d["units"] = dict(_CANONICAL)
    return d


# ----------------------------------------------------------- grid files

GRID_MAGIC = "KGRID1"
MATRIX_MAGIC = "KOAM1"
_LAYOUT = "binary64-le row-major"
_CLAYOUT = "complex128-le row-major interleaved"


def write_grid(grid: SpectrumGrid, path) -> None:
    """Write a map in KGRID1 layout; rows run from the largest ky down."""
    (x0, x1), (y0, y1) = grid.kx_range, grid.ky_range
    head = (f"{GRID_MAGIC}\n{grid.nx} {grid.ny}\n"
            f"{float(x0)!r} {float(x1)!r} {float(y0)!r} {float(y1)!r}\n{_LAYOUT}\n")
    payload = np.ascontiguousarray(grid.values[::-1], dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(head.encode("ascii"))
        fh.write(payload)


def _read_header(data: bytes, magic: str, layout: str, n_lines: int = 4):
    lines = []
    pos = 0
    for _ in range(n_lines):
        end = data.find(b"\n", pos)
        if end < 0:
            raise FormatError(f"truncated header: expected {n_lines} lines")
        try:
            lines.append(data[pos:end].decode("ascii"))
        except UnicodeDecodeError:
            raise FormatError(f"header line {len(lines) + 1} is not ASCII") from None
        pos = end + 1
    if lines[0] != magic:
        raise FormatError(f"bad magic {lines[0]!r}, expected {magic!r}")
    if lines[3] != layout:
        raise FormatError(f"unsupported payload layout {lines[3]!r}")
    return lines, data[pos:]


def _ints(text, n, what):
    parts = text.split()
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise FormatError(f"malformed {what} line {text!r}") from None
    if len(vals) != n:
        raise FormatError(f"malformed {what} line {text!r}")
    return vals


def read_grid(path) -> SpectrumGrid:
    """Read a KGRID1 file written by :func:`write_grid`.

    Raises
    ------
    FormatError
        Bad magic or header, or a payload whose size disagrees with the
        header (both byte counts are reported).
    """
    data = Path(path).read_bytes()
    lines, payload = _read_header(data, GRID_MAGIC, _LAYOUT)
    nx, ny = _ints(lines[1], 2, "size")
    if nx < 2 or ny < 2:
        raise FormatError(f"grid must be at least 2×2, header says {nx}×{ny}")
    try:
        x0, x1, y0, y1 = (float(t) for t in lines[2].split())
    except ValueError:
        raise FormatError(f"malformed bounds line {lines[2]!r}") from None
    expected = 8 * nx * ny
    if len(payload) != expected:
        raise FormatError(f"payload has {len(payload)} bytes but header {nx}×{ny} needs {expected}",
                          expected, len(payload))
    values = np.frombuffer(payload, dtype="<f8").reshape(ny, nx)[::-1].astype(float)
    return SpectrumGrid((x0, x1), (y0, y1), values)


@dataclass(frozen=True)
class MatrixFile:
    ell_s: np.ndarray
    ell_i: np.ndarray
    amplitudes: np.ndarray = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, MatrixFile):
            return NotImplemented
        return (np.array_equal(self.ell_s, other.ell_s) and np.array_equal(self.ell_i, other.ell_i)
                and self.amplitudes.tobytes() == other.amplitudes.tobytes())


def write_matrix(matrix, path) -> None:
    """Write an OAM amplitude matrix (rows ℓs ascending, columns ℓi ascending)."""
    ls, li = np.asarray(matrix.ell_s), np.asarray(matrix.ell_i)
    head = (f"{MATRIX_MAGIC}\n{ls.size} {li.size}\n"
            f"{ls[0]} {ls[-1]} {li[0]} {li[-1]}\n{_CLAYOUT}\n")
    payload = np.ascontiguousarray(matrix.amplitudes, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(head.encode("ascii"))
        fh.write(payload)


def read_matrix(path) -> MatrixFile:
    data = Path(path).read_bytes()
    lines, payload = _read_header(data, MATRIX_MAGIC, _CLAYOUT)
    ns, ni = _ints(lines[1], 2, "size")
    s0, s1, i0, i1 = _ints(lines[2], 4, "ℓ range")
    if s1 - s0 + 1 != ns or i1 - i0 + 1 != ni:
        raise FormatError(f"ℓ ranges {s0}..{s1}, {i0}..{i1} disagree with size {ns}×{ni}")
    expected = 16 * ns * ni
    if len(payload) != expected:
        raise FormatError(f"payload has {len(payload)} bytes but header {ns}×{ni} needs {expected}",
                          expected, len(payload))
    amps = np.frombuffer(payload, dtype="<c16").reshape(ns, ni).astype(complex)
    return MatrixFile(np.arange(s0, s1 + 1), np.arange(i0, i1 + 1), amps)


# ------------------------------------------------------------- graymaps

def heatmap_bytes(values, scale: str = "linear", decades: float = 6.0) -> np.ndarray:
    """8-bit image rows for a non-negative map with ``values[iy, ix]``, ky ascending.

    The maximum maps to 255 and row 0 of the result is the largest ky.  On
    the log scale ``decades`` orders of magnitude below the maximum map to 0.
    """
    v = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0):
        raise ValueError("heatmap values must be finite and non-negative")
    if scale not in ("linear", "log"):
        raise ValueError(f"scale must be linear or log, got {scale!r}")
    top = v.max() if v.size else 0.0
    if not top > 0:
        warnings.warn("all-zero grid; writing a black image", stacklevel=2)
        return np.zeros(v.shape, dtype=np.uint8)
    rel = v / top
    if scale == "linear":
        level = rel
    else:
        with np.errstate(divide="ignore"):
            lg = np.log10(rel)
        level = np.clip(1.0 + lg / decades, 0.0, 1.0)
    return np.rint(level * 255).astype(np.uint8)[::-1]


def write_heatmap(grid, path, scale: str = "linear", decades: float = 6.0) -> None:
    """Binary P5 portable graymap of a map; image-up is +ky."""
    values = grid.values if isinstance(grid, SpectrumGrid) else np.asarray(grid)
    img = heatmap_bytes(values, scale, decades)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def read_pgm(path) -> np.ndarray:
    """Minimal P5 reader (for checking images written here)."""
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end].decode("ascii"))
        pos = end
    pos += 1
    if fields[0] != "P5" or fields[3] != "255":
        raise FormatError("not an 8-bit binary graymap")
    w, h = int(fields[1]), int(fields[2])
    body = data[pos:]
    if len(body) != w * h:
        raise FormatError(f"graymap payload has {len(body)} bytes, needs {w * h}", w * h, len(body))
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w)

