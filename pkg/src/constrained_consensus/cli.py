"""Command-line driver.

Four commands:

* ``validate`` - run the randomized invariant suites, print PASS/FAIL per
  check, exit nonzero on any failure.
* ``run``      - Monte-Carlo validation study (both algorithms + baseline),
  CSV out.
* ``sweep``    - convergence-rate sweep across network densities, CSV out.
* ``pocs``     - baseline-only cyclic-projection runs, CSV out.

Parameters come from flags or from a flat ``key = value`` config file
(``--config``); flags override file values.  Exit codes: 0 success,
1 invariant failure, 2 usage/config error, 3 instance-generation failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import statistics
import sys

from .experiments import (
    GenerationError,
    median_split,
    rate_sweep,
    sweep_csv_text,
    validation_csv_text,
    validation_study,
    write_text,
)
from .selfcheck import SUITES, run_checks

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_GENERATION = 3
EXIT_IO = 4


class ConfigError(ValueError):
    """Bad configuration value or unknown key."""


# schema: per command, key -> (type, default).  None defaults are filled in
# at run time (e.g. max_iters -> 100*n) or stay optional.
SCHEMAS: dict[str, dict[str, tuple[type, object]]] = {
    "validate": {
        "seed": (int, 0),
        "suite": (str, None),
        "debug_step_scale": (float, 1.0),
    },
    "run": {
        "n": (int, 100),
        "q": (int, 2),
        "rho": (float, 0.3),
        "epsilon": (float, 0.01),
        "trials": (int, 50),
        "threshold": (float, 1e-5),
        "max_iters": (int, None),
        "step_size": (float, None),
        "pocs_cycles": (int, 40),
        "max_attempts": (int, 100),
        "seed": (int, 0),
        "out": (str, "validation.csv"),
    },
    "sweep": {
        "n": (int, 100),
        "q": (int, 2),
        "rho_min": (float, 0.1),
        "rho_max": (float, 0.4),
        "epsilon": (float, 0.01),
        "realizations": (int, 200),
        "threshold": (float, 1e-5),
        "max_iters": (int, None),
        "fiedler_cut": (float, None),
        "seed": (int, 0),
        "out": (str, "sweep.csv"),
    },
    "pocs": {
        "n": (int, 100),
        "q": (int, 2),
        "rho": (float, 0.3),
        "epsilon": (float, 0.01),
        "trials": (int, 1),
        "cycles": (int, 40),
        "max_attempts": (int, 100),
        "seed": (int, 0),
        "out": (str, "pocs.csv"),
    },
}

_POSITIVE = {"n", "q", "trials", "realizations", "cycles", "pocs_cycles",
             "max_iters", "max_attempts", "rho", "epsilon", "step_size",
             "fiedler_cut", "debug_step_scale"}


def parse_config_text(text: str) -> dict[str, str]:
    """Flat 'key = value' lines; '#' starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        raw[key] = value
    return raw


def coerce_config(command: str, raw: dict[str, str]) -> dict:
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key(s) for '{command}': {', '.join(unknown)}")
    cfg = {}
    for key, value in raw.items():
        typ = schema[key][0]
        try:
            cfg[key] = typ(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return cfg


def format_config(cfg: dict) -> str:
    """Serialize a config back to the flat file format (stable ordering)."""
    lines = []
    for key in sorted(cfg):
        value = cfg[key]
        if value is None:
            continue
        text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults <- config file <- flags, then range-check."""
    schema = SCHEMAS[command]
    cfg = {key: default for key, (_, default) in schema.items()}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg.update(coerce_config(command, parse_config_text(text)))
    for key in schema:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    _validate_ranges(command, cfg)
    return cfg


def _validate_ranges(command: str, cfg: dict) -> None:
    for key, value in cfg.items():
        if value is None:
            continue
        if key in _POSITIVE and value <= 0:
            raise ConfigError(f"{key} must be positive, got {value}")
    if cfg.get("n") is not None and cfg["n"] < 2:
        raise ConfigError(f"n must be at least 2, got {cfg['n']}")
    if cfg.get("threshold") is not None and cfg["threshold"] < 0:
        raise ConfigError(f"threshold must be nonnegative, got {cfg['threshold']}")
    if command == "sweep" and not cfg["rho_min"] < cfg["rho_max"]:
        raise ConfigError(f"need rho_min < rho_max, got [{cfg['rho_min']}, {cfg['rho_max']}]")
    suite = cfg.get("suite")
    if suite is not None and suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; available: {', '.join(sorted(SUITES))}")


def cmd_validate(cfg: dict) -> int:
    suites = [cfg["suite"]] if cfg["suite"] else None
    results = run_checks(suites=suites, seed=cfg["seed"], step_scale=cfg["debug_step_scale"])
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = f" - {r.detail}" if r.detail else ""
        print(f"{status} {r.suite}.{r.name}{detail}")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed (seed {cfg['seed']})")
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


def cmd_run(cfg: dict) -> int:
    result = validation_study(
        n=cfg["n"], q=cfg["q"], rho=cfg["rho"], epsilon=cfg["epsilon"],
        trials=cfg["trials"], max_iters=cfg["max_iters"], threshold=cfg["threshold"],
        base_seed=cfg["seed"], step_size=cfg["step_size"],
        pocs_cycles=cfg["pocs_cycles"], max_attempts=cfg["max_attempts"])
    write_text(validation_csv_text(result), cfg["out"])
    med = result.median_iterations()
    print(f"trials: {cfg['trials']}")
    print(f"median iterations: best-response {med['dgtc']}, gradient-projection {med['dgpc']}")
    final_disp = statistics.median(p.displacements[-1] for p in result.pocs)
    print(f"baseline median final cycle displacement: {final_disp:.3e}")
    print(f"wrote {cfg['out']}")
    return EXIT_OK


def cmd_sweep(cfg: dict) -> int:
    records = rate_sweep(
        n=cfg["n"], q=cfg["q"], rho_min=cfg["rho_min"], rho_max=cfg["rho_max"],
        realizations=cfg["realizations"], threshold=cfg["threshold"],
        base_seed=cfg["seed"], epsilon=cfg["epsilon"], max_iters=cfg["max_iters"])
    write_text(sweep_csv_text(records), cfg["out"])
    cut = cfg["fiedler_cut"] if cfg["fiedler_cut"] is not None else _default_cut(cfg["q"])
    split = median_split(records, cut)
    print(f"realizations: {len(records)} (fiedler < {cut:g}: {split['num_sparse']})")
    if "sparse_median_dgtc" in split:
        print(f"sparse median iterations: best-response {split['sparse_median_dgtc']}, "
              f"gradient-projection {split['sparse_median_dgpc']}")
    print(f"full-range median iterations: best-response {split['full_median_dgtc']}, "
          f"gradient-projection {split['full_median_dgpc']}")
    print(f"wrote {cfg['out']}")
    return EXIT_OK


def _default_cut(q: int) -> float:
    # the sparse/dense crossover sits near 3 in 2-d and near 7 in 4-d
    return {2: 3.0, 4: 7.0}.get(q, 3.0 + 2.0 * max(0, q - 2))


def cmd_pocs(cfg: dict) -> int:
    import numpy as np

    from .engine import pocs_run
    from .experiments import make_localization_instance

    lines = ["trial,seed,cycle,displacement,max_set_distance"]
    finals = []
    for trial in range(cfg["trials"]):
        seed = cfg["seed"] + trial
        loc = make_localization_instance(cfg["n"], cfg["q"], cfg["rho"], cfg["epsilon"],
                                         seed, cfg["max_attempts"])
        inst = loc.game_instance
        x = np.zeros(cfg["q"])
        for cycle in range(1, cfg["cycles"] + 1):
            x, disp = pocs_run(inst, x, 1)
            dmax = float(max(s.distance_to(x) for s in inst.sets))
            lines.append(f"{trial},{seed},{cycle},{repr(disp[0])},{repr(dmax)}")
        finals.append(dmax)
    write_text("\n".join(lines) + "\n", cfg["out"])
    print(f"trials: {cfg['trials']}, cycles: {cfg['cycles']}")
    print(f"max final distance to any set: {max(finals):.3e}")
    print(f"wrote {cfg['out']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="constrained-consensus",
        description="Distributed constrained-consensus simulations and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(command: str, helptext: str) -> argparse.ArgumentParser:
        p = sub.add_parser(command, help=helptext)
        p.add_argument("--config", help="flat key = value config file (flags override)")
        for key, (typ, default) in SCHEMAS[command].items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, type=typ, default=None,
                           help=f"default: {default}" if default is not None else None)
        return p

    add("validate", "run the randomized invariant suites")
    add("run", "Monte-Carlo validation study (writes CSV)")
    add("sweep", "convergence-rate sweep over network density (writes CSV)")
    add("pocs", "baseline-only cyclic projection runs (writes CSV)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"validate": cmd_validate, "run": cmd_run, "sweep": cmd_sweep, "pocs": cmd_pocs}
    try:
        cfg = resolve_config(args.command, args)
        return handlers[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"generation error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
