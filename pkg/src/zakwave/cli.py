"""Command line entry point: ``zakwave {ambiguity,isac,rach,verify}``.

Configuration comes from an optional INI file and from flags. The INI file
holds flat ``key = value`` pairs; section names only group keys and are
otherwise ignored. Lists are comma separated. Every key can also be given as
a flag of the same name (``--rho_d_db 20``), and flags win over the file.
Lists starting with a minus sign need the ``=`` form: ``--snr_db=-10,-5,0``.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures during a run.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import sys
import typing

import numpy as np

from .errors import SingularChannel, ZakwaveError
from .experiments import EXPERIMENTS, ExperimentConfig, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig) if f.name != "experiment"}
_TYPES = typing.get_type_hints(ExperimentConfig)


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _convert(key: str, text: str):
    """Parse ``text`` into the type of config field ``key``."""
    hint = _TYPES[key]
    default = _FIELDS[key].default
    text = text.strip()
    try:
        if hint is tuple or typing.get_origin(hint) is tuple:
            items = [t.strip() for t in text.split(",") if t.strip()]
            proto = default[0] if default else ""
            return tuple(type(proto)(t) if not isinstance(proto, str) else t for t in items)
        if text.lower() in ("none", "") and type(None) in typing.get_args(hint):
            return None
        base = [t for t in typing.get_args(hint) if t is not type(None)] or [hint]
        base = base[0]
        if base is bool:
            return _parse_bool(text)
        if base is int:
            return int(text)
        if base is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from exc


def read_config_file(path) -> dict:
    """Flat ``{key: raw string}`` view of an INI file."""
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys such as M and N are case sensitive
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            if key not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            out[key] = value
    return out


def build_config(experiment: str, args: argparse.Namespace) -> ExperimentConfig:
    raw = read_config_file(args.config) if args.config else {}
    for key in _FIELDS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    values = {k: _convert(k, v) for k, v in raw.items()}
    return ExperimentConfig(experiment=experiment, **values)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zakwave", description="Zak-domain CAZAC waveform experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", metavar="PATH", help="INI file with key = value pairs")
        for key, f in _FIELDS.items():
            default = f.default
            shown = ",".join(map(str, default)) if isinstance(default, tuple) else default
            sp.add_argument(f"--{key}", metavar="VALUE", default=None, help=f"(default: {shown})")
    return ap


def _summary(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "config"}


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        cfg = build_config(args.command, args)
        cfg.resolved().grid()
    except (ZakwaveError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            report = run(cfg)
    except (SingularChannel, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ZakwaveError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(_summary(report), indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
