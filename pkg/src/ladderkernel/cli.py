"""Command-line entry point: ``ladderkernel <verb> --config cfg.json --out DIR``.

Verbs: simulate, kernel, fit, analyze, emit, run (full pipeline plus
emit), default-config.  Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import default_config, load_config
from .errors import ConfigError, LadderError
from .pipeline import ALL_STEPS, RunManifest, emit_plotdata, run_experiment

log = logging.getLogger("ladderkernel")

THREADS_ENV = "LADDERKERNEL_THREADS"

VERB_STEPS = {
    "simulate": {"series", "profile"},
    "kernel": {"series", "kernel"},
    "fit": {"series", "kernel", "fits"},
    "analyze": {"dos", "ldos", "vmatrix"},
    "run": set(ALL_STEPS),
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _parser():
    p = argparse.ArgumentParser(prog="ladderkernel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in ("simulate", "kernel", "fit", "analyze", "emit", "run"):
        s = sub.add_parser(verb)
        s.add_argument("--config", type=Path, help="experiment config (JSON); shipped default if omitted")
        s.add_argument("--out", type=Path, help="output directory (overrides config output_dir)")
        s.add_argument("--threads", type=int, default=None, help=f"worker threads over lambda (env {THREADS_ENV})")
        s.add_argument("--normalize", action="store_true", help="divide emitted curves by -epsilon/2 (rho1) or by the reference p(0) (rho2)")
        s.add_argument("--offsets", action="store_true", help="shift fig6-like curves vertically per lambda")
        s.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("default-config", help="print the shipped default config")
    return p


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(THREADS_ENV, f"not an integer: {env!r}") from None
    return 1


def _summary_lines(manifest):
    for key, row in manifest.summary.items():
        parts = [f"lambda={key}"]
        for name in ("gamma", "kernel_l2", "Gamma", "constant_l2", "verdict", "ldos_window_weight"):
            if name in row:
                v = row[name]
                parts.append(f"{name}={v:.6g}" if isinstance(v, float) else f"{name}={v}")
        yield "  ".join(parts)
    for name, v in manifest.diagnostics.items():
        if isinstance(v, float):
            yield f"{name}={v:.6g}"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "default-config":
        print(default_config().to_json())
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else default_config()
        out = args.out if args.out is not None else Path(cfg.output_dir)
        normalize = args.normalize or cfg.normalize
        if args.verb == "emit":
            manifest = RunManifest.load(out / "manifest.json")
            paths = emit_plotdata(manifest, out, offsets=args.offsets, normalize=normalize, epsilon=cfg.state.epsilon)
        else:
            manifest = run_experiment(cfg, out, threads=_threads(args.threads), steps=VERB_STEPS[args.verb])
            paths = []
            if args.verb == "run":
                paths = emit_plotdata(manifest, out, offsets=args.offsets, normalize=normalize, epsilon=cfg.state.epsilon)
                manifest.files += [Path(p).relative_to(out).as_posix() for p in paths]
                io.write_json(out / "manifest.json", manifest.to_dict())
            for line in _summary_lines(manifest):
                print(line)
        for p in paths:
            log.info("wrote %s", p)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LadderError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
