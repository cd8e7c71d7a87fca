"""Named presets, config files and parameter sweeps.

Config files are flat ``key = value`` text with ``#`` comments. Each key
carries its unit as a suffix; see ``CONFIG_KEYS`` and the README for the
schema. Sweeps produce a ``SweepTable`` that serialises to CSV with units in
the header and a trailing ``status`` column.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import dispersion
from .errors import ConfigParseError, SpdcError, ValidationError
from .phasematch import Config
from .quadratic_state import evaluate

OUTPUTS = ("purity_spatial_pair", "purity_signal", "schmidt_K", "i_concurrence")


@dataclass(frozen=True)
class Preset:
    name: str
    config: Config
    note: str


def _deg(x):
    return math.radians(x)


def _build_presets():
    liio3 = dict(crystal=dispersion.LIIO3, length_um=1000.0, lambda_p_um=0.405, lambda_s_um=0.81, lambda_i_um=0.81)
    # pump spectrum not given for the figure scenarios: flat envelope (T0 = 0)
    fig = dict(liio3, w_p_um=400.0, phi_s=_deg(10), phi_i=_deg(10), rho0=0.0, pump_duration_fs=0.0)
    valencia = dict(liio3, phi_s=_deg(17), phi_i=_deg(17), dl_s_nm=0.2, dl_i_nm=0.2, pump_bandwidth_nm=0.4, rho0=0.0)
    teich = dict(
        crystal=dispersion.BBO, length_um=1500.0, lambda_p_um=0.405, lambda_s_um=0.81, lambda_i_um=0.81,
        w_p_um=5000.0, phi_s=0.0, phi_i=0.0, dl_s_nm=10.0, dl_i_nm=10.0, w_s_um=100.0, w_i_um=100.0, rho0=0.0,
    )
    altman = dict(
        crystal=dispersion.BBO, length_um=2000.0, lambda_p_um=0.3511, lambda_s_um=0.7022, lambda_i_um=0.7022,
        w_p_um=20.0, phi_s=_deg(4), phi_i=_deg(4), dl_s_nm=10.0, dl_i_nm=10.0, w_s_um=100.0, w_i_um=100.0, rho0=0.0,
    )
    presets = [
        Preset("fig2", Config(**fig, dl_s_nm=1.0, dl_i_nm=1.0, w_s_um=100.0, w_i_um=100.0),
               "Spatial pair purity vs collection width: LiIO3 type I, L = 1 mm, 405 -> 810 + 810 nm, "
               "w_p = 400 um, phi = 10 deg, no walk-off. Defaults dl = 1 nm, w = 100 um."),
        Preset("fig4", Config(**fig, dl_s_nm=1.0, dl_i_nm=1.0, w_s_um=100.0, w_i_um=100.0),
               "Signal purity vs collection width; same setup as fig2."),
        Preset("fig5a", Config(**fig, dl_s_nm=10.0, dl_i_nm=10.0, w_s_um=math.inf, w_i_um=math.inf),
               "Signal purity vs pump waist: dl = 10 nm, single transverse mode (w -> inf). Crystal as fig2."),
        Preset("fig5b", Config(**fig, dl_s_nm=0.0, dl_i_nm=0.0, w_s_um=400.0, w_i_um=400.0),
               "Signal purity vs pump waist: dl -> 0, w = 400 um. Crystal as fig2."),
        Preset("fig5c", Config(**fig, dl_s_nm=10.0, dl_i_nm=10.0, w_s_um=400.0, w_i_um=400.0),
               "Signal purity vs pump waist: dl = 10 nm, w = 400 um. Crystal as fig2."),
    ]
    for wp in (30.0, 462.0):
        for ws in (133.0, 48.0):
            suffix = "" if ws == 133.0 else "_ws48"
            presets.append(
                Preset(f"valencia_w{wp:.0f}{suffix}", Config(**valencia, w_p_um=wp, w_s_um=ws, w_i_um=ws),
                       f"Valencia et al.: LiIO3 1 mm, 405 nm diode pump with 0.4 nm bandwidth, phi = 17 deg, "
                       f"0.2 nm monochromators, w_p = {wp:g} um, collection width {ws:g} um "
                       f"(printed as '133,48 um'; both readings offered).")
            )
    presets.append(Preset("teich", Config(**teich),
                          "Collinear BBO 1.5 mm, CW 405 nm pump, 10 nm filters; w_p >> L realised as w_p = 5 mm."))
    presets.append(Preset("altman", Config(**altman),
                          "BBO 2 mm, CW 351.1 nm pump focused to w_p = 20 um, 702.2 nm pairs at 4 deg, 10 nm filters."))
    return {p.name: p for p in presets}


PRESETS = _build_presets()


def preset(name) -> Config:
    """Config of the named preset."""
    try:
        return PRESETS[name].config
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


# key -> (Config field, converter to internal units)
_UNIT = {
    "um": lambda v: v,
    "mm": lambda v: v * 1e3,
    "nm": lambda v: v * 1e-3,
    "deg": math.radians,
    "rad": lambda v: v,
}

CONFIG_KEYS = {
    "length_um": ("length_um", "um"), "length_mm": ("length_um", "mm"),
    "lambda_p_nm": ("lambda_p_um", "nm"), "lambda_p_um": ("lambda_p_um", "um"),
    "lambda_s_nm": ("lambda_s_um", "nm"), "lambda_s_um": ("lambda_s_um", "um"),
    "lambda_i_nm": ("lambda_i_um", "nm"), "lambda_i_um": ("lambda_i_um", "um"),
    "w_p_um": ("w_p_um", "um"), "w_p_mm": ("w_p_um", "mm"),
    "w_s_um": ("w_s_um", "um"), "w_i_um": ("w_i_um", "um"), "w_um": (("w_s_um", "w_i_um"), "um"),
    "dl_s_nm": ("dl_s_nm", None), "dl_i_nm": ("dl_i_nm", None), "dl_nm": (("dl_s_nm", "dl_i_nm"), None),
    "phi_s_deg": ("phi_s", "deg"), "phi_s_rad": ("phi_s", "rad"),
    "phi_i_deg": ("phi_i", "deg"), "phi_i_rad": ("phi_i", "rad"),
    "phi_deg": (("phi_s", "phi_i"), "deg"), "phi_rad": (("phi_s", "phi_i"), "rad"),
    "pump_duration_fs": ("pump_duration_fs", None), "pump_bandwidth_nm": ("pump_bandwidth_nm", None),
    "alpha_deg": ("alpha", "deg"), "alpha_rad": ("alpha", "rad"),
    "rho0_deg": ("rho0", "deg"), "rho0_rad": ("rho0", "rad"),
    "theta_deg": ("theta", "deg"), "theta_rad": ("theta", "rad"),
    "beta": ("beta", None),
}
_WORD_KEYS = {"crystal", "preset", "pump", "rho0", "theta"}
_WAVELENGTHS = ("lambda_p_um", "lambda_s_um", "lambda_i_um")


def _number(text, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigParseError(f"not a number: {text!r}", line) from None


def parse_config(text, source="<string>") -> Config:
    """Parse config-file text into a validated ``Config``."""
    seen = {}
    fields = {}
    base = None
    cw = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigParseError(f"empty key or value in {line!r}", lineno)
        if key in seen:
            raise ConfigParseError(f"duplicate key {key!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        if key == "crystal":
            fields["crystal"] = dispersion.crystal_by_name(value)
        elif key == "preset":
            base = preset(value)
        elif key == "pump":
            if value.lower() != "cw":
                raise ConfigParseError(f"pump must be 'cw', got {value!r}", lineno)
            cw = True
        elif key == "rho0" or key == "theta":
            word = {"rho0": "computed", "theta": "auto"}[key]
            if value.lower() != word:
                raise ConfigParseError(f"{key} must be '{word}' or given with a unit suffix", lineno)
            fields[key] = None
        elif key in CONFIG_KEYS:
            target, unit = CONFIG_KEYS[key]
            number = _number(value, lineno)
            if unit is not None:
                number = _UNIT[unit](number)
            for name in target if isinstance(target, tuple) else (target,):
                if name in fields:
                    raise ConfigParseError(f"{key!r} sets {name} a second time", lineno)
                fields[name] = number
        else:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
    if cw:
        if "pump_duration_fs" in fields or "pump_bandwidth_nm" in fields:
            raise ValidationError("pump = cw conflicts with an explicit pump duration or bandwidth")
        fields["pump_duration_fs"] = fields["pump_bandwidth_nm"] = None
    return _assemble(fields, base, source)


def _assemble(fields, base, source):
    if base is not None:
        merged = {f: getattr(base, f) for f in base.__dataclass_fields__}
        # a file that restates some wavelengths keeps them consistent
        if any(w in fields for w in _WAVELENGTHS):
            for w in _WAVELENGTHS:
                merged.pop(w)
        merged.update(fields)
        fields = merged
    missing = [w for w in _WAVELENGTHS if w not in fields]
    if len(missing) == 1:
        inv = {"lambda_p_um": -1.0, "lambda_s_um": 1.0, "lambda_i_um": 1.0}
        (name,) = missing
        total = sum(inv[w] / fields[w] for w in _WAVELENGTHS if w != name)
        fields[name] = 1.0 / (-inv[name] * total)
        if not fields[name] > 0:
            raise ValidationError(f"{source}: energy conservation gives a non-positive {name}")
    elif missing:
        raise ValidationError(
            f"{source}: energy-conservation closure needs at least two of lambda_p, lambda_s, lambda_i "
            f"(missing {', '.join(missing)})"
        )
    for required in ("crystal", "length_um", "w_p_um"):
        if required not in fields:
            raise ValidationError(f"{source}: missing required key for {required}")
    return Config(**fields)


def load_config(path) -> Config:
    """Read and validate a config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    return parse_config(text, source=str(path))


def dump_config(config: Config) -> str:
    """Serialise ``config`` in the file format; ``parse_config`` inverts it."""
    lines = [
        f"crystal = {config.crystal.name}",
        f"length_um = {config.length_um!r}",
        f"lambda_p_um = {config.lambda_p_um!r}",
        f"lambda_s_um = {config.lambda_s_um!r}",
        f"lambda_i_um = {config.lambda_i_um!r}",
        f"w_p_um = {config.w_p_um!r}",
        f"w_s_um = {config.w_s_um!r}",
        f"w_i_um = {config.w_i_um!r}",
        f"dl_s_nm = {config.dl_s_nm!r}",
        f"dl_i_nm = {config.dl_i_nm!r}",
        f"phi_s_deg = {math.degrees(config.phi_s)!r}",
        f"phi_i_deg = {math.degrees(config.phi_i)!r}",
    ]
    if config.pump_duration_fs is not None:
        lines.append(f"pump_duration_fs = {config.pump_duration_fs!r}")
    elif config.pump_bandwidth_nm is not None:
        lines.append(f"pump_bandwidth_nm = {config.pump_bandwidth_nm!r}")
    else:
        lines.append("pump = cw")
    lines.append(f"alpha_deg = {math.degrees(config.alpha)!r}")
    lines.append("rho0 = computed" if config.rho0 is None else f"rho0_deg = {math.degrees(config.rho0)!r}")
    lines.append("theta = auto" if config.theta is None else f"theta_deg = {math.degrees(config.theta)!r}")
    lines.append(f"beta = {config.beta!r}")
    return "\n".join(lines) + "\n"


# sweepable parameter -> (Config fields, unit label, converter from the user's unit)
SWEEP_PARAMETERS = {
    "w_um": (("w_s_um", "w_i_um"), "um", lambda v: v),
    "dl_nm": (("dl_s_nm", "dl_i_nm"), "nm", lambda v: v),
    "w_p_um": (("w_p_um",), "um", lambda v: v),
    "phi_deg": (("phi_s", "phi_i"), "deg", math.radians),
}
SWEEP_ALIASES = {"ws": "w_um", "dl": "dl_nm", "wp": "w_p_um", "phi": "phi_deg"}


def sweep_parameter(name):
    key = SWEEP_ALIASES.get(name, name)
    if key not in SWEEP_PARAMETERS:
        valid = ", ".join(list(SWEEP_PARAMETERS) + list(SWEEP_ALIASES))
        raise ValidationError(f"parameter {name!r} is not sweepable; choose one of {valid}")
    return key


def with_parameter(config: Config, parameter, value) -> Config:
    """Copy of ``config`` with a sweepable parameter set to ``value`` (user units)."""
    key = sweep_parameter(parameter)
    names, _, conv = SWEEP_PARAMETERS[key]
    return config.replace(**{n: conv(value) for n in names})


@dataclass
class SweepTable:
    parameter: str
    unit: str
    values: list[float]
    columns: dict[str, list[float | None]] = field(default_factory=dict)
    status: list[str] = field(default_factory=list)

    def header(self):
        return [f"{self.parameter} ({self.unit})"] + [f"{c} (1)" for c in self.columns] + ["status"]

    def rows(self):
        for i, v in enumerate(self.values):
            yield [v] + [self.columns[c][i] for c in self.columns] + [self.status[i]]

    def to_csv(self, fh=None):
        """Write CSV to ``fh`` (path or file object); returns the text when ``fh`` is None."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for row in self.rows():
            writer.writerow(["" if x is None else (repr(x) if isinstance(x, float) else x) for x in row])
        text = buf.getvalue()
        if fh is None:
            return text
        if hasattr(fh, "write"):
            fh.write(text)
        else:
            with open(fh, "w", encoding="utf-8", newline="") as out:
                out.write(text)
        return text


def read_sweep_csv(source) -> SweepTable:
    """Parse CSV written by ``SweepTable.to_csv`` (text or path)."""
    if "\n" not in str(source):
        with open(source, encoding="utf-8", newline="") as fh:
            source = fh.read()
    rows = list(csv.reader(io.StringIO(source)))
    header, body = rows[0], rows[1:]
    if header[-1] != "status" or len(header) < 3:
        raise ValidationError("CSV header must end with a status column")
    param, unit = header[0].rsplit(" (", 1)
    names = [h.rsplit(" (", 1)[0] for h in header[1:-1]]
    table = SweepTable(param, unit.rstrip(")"), [], {n: [] for n in names}, [])
    for row in body:
        if len(row) != len(header):
            raise ValidationError("ragged CSV row")
        table.values.append(float(row[0]))
        for n, cell in zip(names, row[1:-1]):
            table.columns[n].append(float(cell) if cell else None)
        table.status.append(row[-1])
    return table


def sweep(config: Config, parameter, values, outputs=OUTPUTS) -> SweepTable:
    """Evaluate ``config`` at each value of ``parameter``.

    Rows whose evaluation raises a package error are kept with empty outputs
    and the error in their ``status``; anything else propagates.
    """
    key = sweep_parameter(parameter)
    values = [float(v) for v in values]
    if not values:
        raise ValidationError("sweep needs at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("sweep values must be strictly increasing")
    unknown = [o for o in outputs if o not in OUTPUTS]
    if unknown:
        raise ValidationError(f"unknown outputs {unknown}; choose from {OUTPUTS}")
    outputs = [o for o in OUTPUTS if o in outputs]
    table = SweepTable(key, SWEEP_PARAMETERS[key][1], values, {o: [] for o in outputs}, [])
    for v in values:
        try:
            report = evaluate(with_parameter(config, key, v)).as_dict()
            status = "ok"
        except SpdcError as exc:
            report = {}
            status = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        for o in outputs:
            table.columns[o].append(report.get(o))
        table.status.append(status)
    return table
