#!/usr/bin/env python3
"""Run the emitter-identification few-shot grid and print the report.

For each requested pipeline, generates (or reuses) the simulated dataset,
sweeps the label-budget proportions, and writes `report.csv` under a
per-pipeline working directory.  The three pipelines:

    raw_nn          conv classifier trained from scratch on raw I/Q
    icvmd_features  nearest-centroid on decomposition geometry + cumulants
    icvmd_sat       conv classifier on decomposition inputs with a
                    pretrained, frozen attention branch

Quick smoke run (about a minute):

    python3 scripts/run_fewshot_experiment.py --outdir out/smoke \
        --signals-per-emitter 12 --n-samples 512 --proportions 1.0 0.5

Full run at two SNR points (slow):

    python3 scripts/run_fewshot_experiment.py --outdir out/full \
        --snr-db 18 --snr-db -4 --signals-per-emitter 36 --n-samples 2100
"""
import argparse
import time
from pathlib import Path

from icvmd.dataset import DatasetSpec
from icvmd.fewshot import FewshotConfig, Pipeline, run_fewshot
from icvmd.nn.train import TrainConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", type=Path, required=True)
    ap.add_argument("--pipelines", nargs="+", default=[p.value for p in Pipeline],
                    choices=[p.value for p in Pipeline])
    ap.add_argument("--snr-db", type=float, action="append", default=None,
                    help="repeatable; defaults to a single 18 dB point")
    ap.add_argument("--signals-per-emitter", type=int, default=36)
    ap.add_argument("--n-samples", type=int, default=2100)
    ap.add_argument("--dataset-seed", type=int, default=5)
    ap.add_argument("--proportions", nargs="+", type=float, default=[0.30, 0.10, 0.03])
    ap.add_argument("--epochs", type=int, default=30, help="training epochs for the nn pipelines")
    args = ap.parse_args()

    spec = DatasetSpec(
        snr_grid_db=tuple(args.snr_db) if args.snr_db else (18.0,),
        signals_per_emitter=args.signals_per_emitter,
        n_samples=args.n_samples,
        seed=args.dataset_seed,
    )

    header = f"{'pipeline':>16} {'prop':>6} {'snr_db':>7} {'accuracy':>9} {'n_test':>7} {'status':>12}"
    for name in args.pipelines:
        pipeline = Pipeline(name)
        cfg = FewshotConfig(
            pipeline=pipeline,
            proportions=tuple(args.proportions),
            train=TrainConfig(epochs=args.epochs, batch_size=32, learning_rate=2e-3),
        )
        t0 = time.perf_counter()
        result = run_fewshot(spec, cfg, args.outdir / name)
        dt = time.perf_counter() - t0
        print(f"\n== {name} ({dt:.1f}s) -> {result.csv_path}")
        print(header)
        for row in result.rows:
            acc = row["accuracy"] if row["accuracy"] != "" else "-"
            print(f"{row['pipeline']:>16} {row['proportion']:>6} {row['snr_db']:>7} "
                  f"{acc:>9} {row['n_test']:>7} {row['status']:>12}")


if __name__ == "__main__":
    main()
