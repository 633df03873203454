"""Batch runner: one named scenario per invocation, CSV/JSON reports and a constants manifest.

Exit codes: 0 all checks pass, 1 an inequality is violated, 2 usage or config
error, 3 numerical guard tripped.
"""
import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

from .errors import ClassSError, DomainError, NumericalGuard
from .scenarios import COLUMNS, SCENARIOS, params_from_dict, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    scenario: str
    seed: int = 0
    replications: int = None
    fmt: str = "csv"
    out: str = "results"
    threads: int = 1
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario '{self.scenario}' "
                              f"(registered: {', '.join(SCENARIOS)})")
        if self.replications is not None and self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        try:
            params_from_dict(SCENARIOS[self.scenario][1], self.params)
        except (DomainError, TypeError) as exc:
            raise ConfigError(str(exc)) from None


def read_config(path):
    """Sectioned key=value file: [run] holds run settings, [params] scenario parameters."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    extra = set(cp.sections()) - {"run", "params"}
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")
    run = dict(cp["run"]) if cp.has_section("run") else {}
    params = dict(cp["params"]) if cp.has_section("params") else {}
    allowed = {"scenario", "seed", "replications", "format", "out", "threads"}
    bad = set(run) - allowed
    if bad:
        raise ConfigError(f"unknown run keys: {sorted(bad)}")
    return run, params


def _int(text, name):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got '{text}'") from None


def build_config(args):
    run, params = ({}, {})
    if args.config:
        run, params = read_config(args.config)
    scenario = args.scenario or run.get("scenario")
    if not scenario:
        raise ConfigError("no scenario given")
    seed = args.seed if args.seed is not None else _int(run.get("seed", "0"), "seed")
    reps = args.replications
    if reps is None and "replications" in run:
        reps = _int(run["replications"], "replications")
    threads = args.threads if args.threads is not None else _int(run.get("threads", "1"),
                                                                 "threads")
    cfg = ExperimentConfig(scenario, seed, reps, args.format or run.get("format", "csv"),
                           args.out or run.get("out", "results"), threads, params)
    cfg.validate()
    return cfg


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else repr(v))
    return str(v)


def render_rows(rows, fmt):
    if fmt == "json":
        return json.dumps([dict(zip(COLUMNS, [_jsonable(v) for v in r.values()]))
                           for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def render_manifest(manifest, fmt):
    if fmt == "json":
        return json.dumps([{"name": n, "value": _jsonable(v), "provenance": t}
                           for n, v, t in manifest], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "value", "provenance"])
    for n, v, t in manifest:
        w.writerow([n, _fmt(float(v)), t])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(res, cfg):
    """Render everything first, then write each file by temp-then-rename."""
    ext = cfg.fmt
    files = {f"{res.scenario}_{rep}.{ext}": render_rows(rows, cfg.fmt)
             for rep, rows in res.reports.items()}
    files[f"{res.scenario}_manifest.{ext}"] = render_manifest(res.manifest, cfg.fmt)
    os.makedirs(cfg.out, exist_ok=True)
    paths = []
    for name, text in files.items():
        p = os.path.join(cfg.out, name)
        atomic_write(p, text)
        paths.append(p)
    return paths


def make_parser():
    ap = argparse.ArgumentParser(prog="upperfn", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="sectioned key=value config file")
    ap.add_argument("--scenario", help="scenario name, or 'list'")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--replications", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--format", choices=["csv", "json"])
    ap.add_argument("--threads", type=int, help="worker threads, 0 = auto")
    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.scenario == "list":
        for name in SCENARIOS:
            print(name)
        return EXIT_OK
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    threads = cfg.threads or (os.cpu_count() or 1)
    try:
        res = run_scenario(cfg.scenario, cfg.params, cfg.seed, cfg.replications, threads)
    except NumericalGuard as exc:
        print(f"numerical guard: {exc.quantity}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ClassSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    paths = write_outputs(res, cfg)
    for rows in res.reports.values():
        for r in rows:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.report} {r.parameter}")
    print(f"wrote {len(paths)} files to {cfg.out}")
    return EXIT_OK if res.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
