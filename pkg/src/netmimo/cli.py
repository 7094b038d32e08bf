"""Command-line entry point: ``netmimo --experiment NAME [options]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .config import SystemConfig, load_config
from .errors import ParameterError


def _float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netmimo", description="Clustered network MIMO rate experiments.")
    p.add_argument("--experiment", choices=experiments.EXPERIMENTS)
    p.add_argument("--config", type=Path, help="flat 'key = value' file; missing keys take defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=experiments.METHOD_CHOICES,
                   help="defaults to the experiment's natural method")
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--topologies", type=int, default=200)
    p.add_argument("--fading", type=int, default=20, help="fading slots per topology")
    p.add_argument("--quad-tol", type=float, default=1e-4, help="relative tolerance of the rate integral")
    p.add_argument("--workers", type=int, default=1, help="processes for Monte Carlo topologies")
    p.add_argument("--etas", type=_float_list, help="override the loading-factor axis")
    p.add_argument("--cluster-sizes", type=_float_list, help="override the average cluster size axis")
    p.add_argument("--from-manifest", type=Path, help="rerun exactly the inputs recorded in a manifest")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.from_manifest:
            spec, config, settings = experiments.load_manifest(args.from_manifest)
            settings.workers = args.workers
        else:
            if not args.experiment:
                print("error: --experiment or --from-manifest is required", file=sys.stderr)
                return 2
            config = load_config(args.config) if args.config else SystemConfig()
            spec = experiments.ExperimentSpec.default(
                args.experiment, args.method, eta=args.etas, avg_cluster_size=args.cluster_sizes)
            settings = experiments.RunSettings(seed=args.seed, topologies=args.topologies, fading=args.fading,
                                               quad_tol=args.quad_tol, workers=args.workers)
        manifest = experiments.run_experiment(spec, config, settings, args.out_dir)
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{spec.name}: wrote {len(manifest['files'])} file(s) to {args.out_dir}")
    if manifest["failures"]:
        print(f"{manifest['failures']} point(s) failed; see the status column", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
