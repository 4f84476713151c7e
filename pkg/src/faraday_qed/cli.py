"""Command-line front end.

    faraday-qed run CONFIG [--model PATH] [--method M] [--output PATH] [--points N]
    faraday-qed validate CONFIG
    faraday-qed oracle-report CONFIG [--output PATH]

Exit codes: 0 ok, 2 config error, 3 model error, 4 numerical failure. Errors are
reported on stderr as a single JSON record.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .amplitude import (amplitude_second_order_closed, angle_from_amplitude, check_resonance,
                        faraday_b_term_angle)
from .errors import (ConfigError, DegenerateSpectrum, FaradayError, ModelError, NearResonance,
                     NumericalError)
from .fock_oracle import (FockBasis, amplitude_resolvable, build_total_hamiltonian, oracle_report,
                          oracle_rotation_angle)
from .model import (CONST, EV, ExperimentConfig, FieldConfig, MolecularModel, Tolerances,
                    default_tolerances, detect_degeneracy, load_model, sample_model_path)
from .perturbation import first_order_corrections

METHODS = ("b_term", "via_amplitude", "oracle")
CSV_COLUMNS = ["scan_index", "scan_value", "theta_b_term_rad", "theta_via_amplitude_rad",
               "theta_oracle_rad", "amplitude_abs_J", "oracle_leakage", "warnings"]

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass(frozen=True)
class ScanSpec:
    variable: str = "omega"   # omega | B_magnitude
    start: float = 0.0
    stop: float = 0.0
    points: int = 1
    spacing: str = "linear"   # linear | log

    def __post_init__(self):
        if self.variable not in ("omega", "B_magnitude"):
            raise ConfigError(f"scan variable must be 'omega' or 'B_magnitude', got {self.variable!r}")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"scan spacing must be 'linear' or 'log', got {self.spacing!r}")
        if int(self.points) != self.points or self.points < 1:
            raise ConfigError("scan points must be a positive integer")
        if self.points > 1 and not self.start < self.stop:
            raise ConfigError("scan start must be below stop")
        if self.spacing == "log" and not self.start > 0:
            raise ConfigError("log spacing needs start > 0")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start], dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    model_path: Path
    field: FieldConfig
    experiment: ExperimentConfig
    scan: ScanSpec
    method: str = "b_term"
    output_path: Path | None = None
    output_format: str = "csv"
    tolerances: Tolerances = field(default_factory=Tolerances)
    model_units: str = "file"
    oracle_time: float | None = None
    oracle_n1_max: int | None = None
    oracle_n2_max: int = 2

    def methods(self) -> tuple[str, ...]:
        return METHODS if self.method == "all" else (self.method,)


def _get(d, key, kind, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing required config key {key!r}")
        return default
    v = d[key]
    try:
        if kind is float:
            if isinstance(v, bool):
                raise TypeError
            return float(v)
        if kind is int:
            if isinstance(v, bool) or int(v) != v:
                raise TypeError
            return int(v)
        if kind == "vec3":
            a = [float(c) for c in v]
            if len(a) != 3:
                raise TypeError
            return a
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r} has an invalid value {v!r}") from None


def resolve_model_path(spec: str, base_dir: Path) -> Path:
    """``sample:NAME`` names a shipped model; other paths are relative to the config."""
    if spec.startswith("sample:"):
        return sample_model_path(spec.split(":", 1)[1])
    p = Path(spec)
    return p if p.is_absolute() else base_dir / p


def parse_run_config(doc: dict, base_dir: Path | str = ".") -> RunConfig:
    """Build a RunConfig from a parsed config document; paths resolve against ``base_dir``."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    base_dir = Path(base_dir)
    model_path = resolve_model_path(_get(doc, "model", str, required=True), base_dir)

    fd = doc.get("field", {})
    if not isinstance(fd, dict):
        raise ConfigError("'field' must be an object")
    omega = _get(fd, "omega", float)
    if omega is None:
        e_ev = _get(fd, "photon_energy_eV", float)
        if e_ev is None:
            raise ConfigError("field needs 'omega' (rad/s) or 'photon_energy_eV'")
        omega = e_ev * EV / CONST.hbar
    try:
        field_cfg = FieldConfig.from_frequency(
            omega,
            n_photons=_get(fd, "n_photons", int, 1),
            volume=_get(fd, "volume", float, required=True),
            direction=_get(fd, "k_direction", "vec3", [0.0, 0.0, 1.0]),
            e1=_get(fd, "e1", "vec3"),
            e2=_get(fd, "e2", "vec3"),
        )
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"invalid field: {exc}") from None

    xd = doc.get("experiment", {})
    if not isinstance(xd, dict):
        raise ConfigError("'experiment' must be an object")
    try:
        exp = ExperimentConfig(
            B=_get(xd, "B", "vec3", [0.0, 0.0, 0.0]),
            length_L=_get(xd, "length", float, required=True),
            density_eta=_get(xd, "density", float, 0.0),
            n_molecules_N=_get(xd, "n_molecules", int, 1),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid experiment: {exc}") from None

    sd = doc.get("scan")
    if sd is None:
        scan = ScanSpec("omega", field_cfg.omega, field_cfg.omega, 1)
    else:
        if not isinstance(sd, dict):
            raise ConfigError("'scan' must be an object")
        scan = ScanSpec(
            variable=_get(sd, "variable", str, "omega"),
            start=_get(sd, "start", float, required=True),
            stop=_get(sd, "stop", float, required=True),
            points=_get(sd, "points", int, 1),
            spacing=_get(sd, "spacing", str, "linear"),
        )

    method = _get(doc, "method", str, "b_term")
    if method not in METHODS + ("all",):
        raise ConfigError(f"method must be one of {METHODS + ('all',)}, got {method!r}")

    od = doc.get("output", {})
    out_path = _get(od, "path", str)
    out_fmt = _get(od, "format", str, "csv")
    if out_fmt not in ("csv", "json"):
        raise ConfigError("output format must be 'csv' or 'json'")

    tol = default_tolerances()
    td = doc.get("tolerances", {})
    if td:
        try:
            tol = replace(tol, **{k: float(v) for k, v in td.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid tolerances: {exc}") from None

    orc = doc.get("oracle", {})
    return RunConfig(
        model_path=model_path,
        field=field_cfg,
        experiment=exp,
        scan=scan,
        method=method,
        output_path=(base_dir / out_path) if out_path and not Path(out_path).is_absolute()
        else (Path(out_path) if out_path else None),
        output_format=out_fmt,
        tolerances=tol,
        model_units=_get(doc, "model_units", str, "file"),
        oracle_time=_get(orc, "time", float),
        oracle_n1_max=_get(orc, "n1_max", int),
        oracle_n2_max=_get(orc, "n2_max", int, 2),
    )


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_run_config(doc, path.parent)


# ------------------------------------------------------------------ compute

def point_inputs(cfg: RunConfig, value: float) -> tuple[FieldConfig, ExperimentConfig]:
    """Field and experiment for one scan point."""
    f, x = cfg.field, cfg.experiment
    if cfg.scan.variable == "omega":
        return f.with_frequency(value), x
    direction = x.B / np.linalg.norm(x.B) if np.any(x.B) else f.k_hat
    return f, x.with_B(value * direction)


def compute_point(model: MolecularModel, cfg: RunConfig, f: FieldConfig, x: ExperimentConfig) -> dict:
    """Every requested rotation angle at one parameter point.

    NearResonance is recorded as null values plus a warning; other errors propagate.
    """
    row = {"theta_b_term_rad": None, "theta_via_amplitude_rad": None, "theta_oracle_rad": None,
           "amplitude_abs_J": None, "oracle_leakage": None, "warnings": []}
    tol = cfg.tolerances
    methods = cfg.methods()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            b_term = faraday_b_term_angle(model, f, x, tol).theta
            if "b_term" in methods:
                row["theta_b_term_rad"] = b_term
            if "via_amplitude" in methods or "oracle" in methods:
                pm = first_order_corrections(model, x.B, tol)
                M = amplitude_second_order_closed(pm, f, tol)
                row["amplitude_abs_J"] = abs(M.value)
                if "via_amplitude" in methods:
                    sign = -1.0 if b_term < 0 else 1.0
                    row["theta_via_amplitude_rad"] = angle_from_amplitude(M, f, x, sign=sign).theta
            if "oracle" in methods:
                t = cfg.oracle_time if cfg.oracle_time is not None else x.length_L / CONST.c
                basis = FockBasis(model.n_levels,
                                  cfg.oracle_n1_max if cfg.oracle_n1_max is not None else f.n_photons,
                                  cfg.oracle_n2_max)
                H = build_total_hamiltonian(model, f, basis, x.B)
                if amplitude_resolvable(row["amplitude_abs_J"], H):
                    res = oracle_rotation_angle(model, f, x, basis, t)
                    row["theta_oracle_rad"] = res.theta
                    row["oracle_leakage"] = res.diagnostics["leakage"]
                else:
                    row["warnings"].append(
                        "oracle skipped: |M| is below double-precision resolution of the Fock Hamiltonian "
                        "(use a smaller quantization volume)")
        row["warnings"].extend(str(w.message) for w in caught)
    except NearResonance as exc:
        for k in ("theta_b_term_rad", "theta_via_amplitude_rad", "theta_oracle_rad",
                  "amplitude_abs_J", "oracle_leakage"):
            row[k] = None
        row["warnings"].append(f"near resonance: {exc}")
    return row


class PointError(FaradayError):
    def __init__(self, index, value, cause):
        self.index, self.value, self.cause = index, value, cause
        super().__init__(f"scan point {index} ({value!r}): {cause}")


def run(cfg: RunConfig) -> list[dict]:
    """Compute all scan rows in scan order."""
    model = load_model(cfg.model_path, units=cfg.model_units, tol=cfg.tolerances)
    pairs = detect_degeneracy(model, cfg.tolerances)
    if pairs:
        raise DegenerateSpectrum([(model.labels[i], model.labels[j]) for i, j in pairs])
    rows = []
    for i, value in enumerate(cfg.scan.values()):
        try:
            f, x = point_inputs(cfg, float(value))
            row = compute_point(model, cfg, f, x)
        except (NumericalError, ValueError) as exc:
            raise PointError(i, float(value), exc) from exc
        rows.append({"scan_index": i, "scan_value": float(value), **row})
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, list):
        return "; ".join(v)
    return str(v)


def rows_to_csv(rows: list[dict], scan_variable: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(CSV_COLUMNS)
    header[1] = f"scan_value_{'omega_rad_s' if scan_variable == 'omega' else 'B_T'}"
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: list[dict], cfg: RunConfig) -> str:
    return json.dumps({"scan_variable": cfg.scan.variable, "method": cfg.method, "rows": rows},
                      indent=1, allow_nan=True) + "\n"


# ----------------------------------------------------------------- validate

def validate(cfg_path) -> tuple[bool, list[str], int]:
    """Check config, model invariants, degeneracy and resonance proximity without computing."""
    lines, ok, code = [], True, EXIT_OK
    try:
        cfg = load_run_config(cfg_path)
        lines.append("config: ok")
    except ConfigError as exc:
        return False, [f"config: FAIL ({exc})"], EXIT_CONFIG
    try:
        model = load_model(cfg.model_path, units=cfg.model_units, tol=cfg.tolerances)
        lines.append(f"model: ok ({model.n_levels} levels)")
    except ModelError as exc:
        return False, lines + [f"model: FAIL ({type(exc).__name__}: {exc})"], EXIT_MODEL
    pairs = detect_degeneracy(model, cfg.tolerances)
    if pairs:
        ok, code = False, EXIT_MODEL
        names = ", ".join(f"({model.labels[i]}, {model.labels[j]})" for i, j in pairs)
        lines.append(f"degeneracy: FAIL degenerate pairs {names}; Faraday A and C terms are unsupported")
    else:
        lines.append("degeneracy: ok")
    resonant = []
    Erg = model.transition_energies()
    for i, value in enumerate(cfg.scan.values()):
        f, _ = point_inputs(cfg, float(value))
        try:
            check_resonance(Erg, f.photon_energy, cfg.tolerances, model.labels)
        except NearResonance:
            resonant.append(i)
    if resonant:
        ok = False
        code = code or EXIT_NUMERICAL
        lines.append(f"resonance: FAIL scan indices {resonant} are within the resonance guard")
    else:
        lines.append("resonance: ok")
    x, f = cfg.experiment, cfg.field
    if x.density_eta and not math.isclose(x.density_eta, x.n_molecules_N / f.volume, rel_tol=1e-9):
        lines.append("warning: density != n_molecules / volume; b_term and via_amplitude will differ")
    lines.insert(0, "pass" if ok else "fail")
    return ok, lines, code


# ------------------------------------------------------------------ driver

def _error_record(exc, code):
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, PointError):
        rec.update(error=type(exc.cause).__name__, scan_index=exc.index, scan_value=exc.value)
    return rec


def _exit_code(exc) -> int:
    cause = exc.cause if isinstance(exc, PointError) else exc
    if isinstance(cause, ConfigError):
        return EXIT_CONFIG
    if isinstance(cause, ModelError):
        return EXIT_MODEL
    return EXIT_NUMERICAL


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "model", None):
        cfg = replace(cfg, model_path=resolve_model_path(args.model, Path.cwd()))
    if getattr(args, "method", None):
        cfg = replace(cfg, method=args.method)
    if getattr(args, "output", None):
        out = Path(args.output)
        fmt = "json" if out.suffix == ".json" else "csv"
        cfg = replace(cfg, output_path=out, output_format=fmt)
    if getattr(args, "points", None):
        s = cfg.scan
        cfg = replace(cfg, scan=ScanSpec(s.variable, s.start, s.stop, args.points, s.spacing))
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="faraday-qed",
                                description="Faraday B-term rotation from a two-state quantized-field model")
    sub = p.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="compute rotation angles over a scan")
    r.add_argument("config")
    r.add_argument("--model")
    r.add_argument("--method", choices=METHODS + ("all",))
    r.add_argument("--output", help="output file (.csv or .json); stdout if omitted")
    r.add_argument("--points", type=int)
    v = sub.add_parser("validate", help="check config and model without computing")
    v.add_argument("config")
    o = sub.add_parser("oracle-report", help="exact Fock-space oracle vs two-state prediction")
    o.add_argument("config")
    o.add_argument("--model")
    o.add_argument("--output")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "validate":
            ok, lines, code = validate(args.config)
            print("\n".join(lines))
            return code
        cfg = _apply_overrides(load_run_config(args.config), args)
        if args.verb == "run":
            rows = run(cfg)
            text = rows_to_json(rows, cfg) if cfg.output_format == "json" else rows_to_csv(rows, cfg.scan.variable)
            _write(text, cfg.output_path)
            return EXIT_OK
        # oracle-report at the first scan point
        model = load_model(cfg.model_path, units=cfg.model_units, tol=cfg.tolerances)
        f, x = point_inputs(cfg, float(cfg.scan.values()[0]))
        t = cfg.oracle_time if cfg.oracle_time is not None else x.length_L / CONST.c
        basis = FockBasis(model.n_levels,
                          cfg.oracle_n1_max if cfg.oracle_n1_max is not None else f.n_photons,
                          cfg.oracle_n2_max)
        report = oracle_report(model, f, x, t, basis, cfg.tolerances)
        _write(json.dumps(report, indent=1) + "\n", getattr(args, "output", None))
        return EXIT_OK
    except (FaradayError, ValueError) as exc:
        code = _exit_code(exc)
        sys.stderr.write(json.dumps(_error_record(exc, code)) + "\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
