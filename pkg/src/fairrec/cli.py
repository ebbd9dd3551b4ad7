"""Command-line driver: single runs, k/alpha sweeps, audits, synthetic data.

Examples::

    fairrec gen-synthetic --m 500 --n 300 --seed 0 --out inst.csv
    fairrec run --instance inst.csv --strategy fairrec --k 20 --out results --audit
    fairrec sweep --instance synthetic:m=500,n=300,seed=0 --strategy fairrec,top_k \\
        --k 1-20 --alpha 1 --out sweep --series

Log level comes from ``FAIRREC_LOG_LEVEL`` (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fairrec import data_io
from fairrec.allocator import fairrec
from fairrec.audit import audit_run
from fairrec.baselines import STRATEGIES, mixed_k, poorest_k, random_k, top_k
from fairrec.metrics import evaluate, lorenz_series, utility_cdf_series
from fairrec.model import FairRecError, Instance, RunConfig, TieBreak, exposure_of, validate_instance

log = logging.getLogger("fairrec")


@dataclass
class ExperimentPlan:
    instance: str
    strategies: list[str]
    ks: list[int]
    alphas: list[float] = field(default_factory=lambda: [1.0])
    seeds: list[int] = field(default_factory=lambda: [0])
    out: Path = Path("results")
    audit: bool = False
    series: bool = False
    format: str = "csv"
    order: str = "identity"
    tie_break: str = TieBreak.LOWEST_INDEX.value
    geo: tuple[str, str] | None = None

    def entries(self) -> list[tuple[str, int, float, int]]:
        return sorted(
            (s, k, a, seed) for s in self.strategies for k in self.ks for a in self.alphas for seed in self.seeds
        )


def load_instance(source: str, geo: tuple[str, str] | None = None) -> tuple[Instance, data_io.DatasetManifest]:
    if geo is not None:
        return data_io.load_geo_csv(*geo)
    if source.startswith("synthetic:"):
        spec = data_io.parse_synthetic(source)
        inst = data_io.generate_synthetic(spec)
        manifest = data_io.DatasetManifest(
            "synthetic",
            source,
            [str(u) for u in range(inst.m)],
            [str(p) for p in range(inst.n)],
            asdict(spec),
        )
        return inst, manifest
    return data_io.load_relevance_csv(source)


def _allocate(inst: Instance, strategy: str, cfg: RunConfig, seed: int):
    if strategy == "fairrec":
        alloc, _ = fairrec(inst, cfg)
        return alloc
    if strategy == "top_k":
        return top_k(inst, cfg.k, cfg.tie_break, seed)
    if strategy == "random_k":
        return random_k(inst, cfg.k, seed)
    if strategy == "mixed_k":
        return mixed_k(inst, cfg.k, seed)
    if strategy == "poorest_k":
        return poorest_k(inst, cfg.k)
    raise FairRecError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")


def _series_stem(strategy: str, k: int, alpha: float, seed: int) -> str:
    return f"{strategy}_k{k}_a{alpha:g}_s{seed}"


def run_single(inst: Instance, plan: ExperimentPlan, entry: tuple[str, int, float, int]) -> dict:
    """Run one (strategy, k, alpha, seed) entry; returns a status record.

    Series are returned in the record rather than written, so nothing hits
    disk for entries that fail.
    """
    strategy, k, alpha, seed = entry
    record: dict = {"strategy": strategy, "k": k, "alpha": alpha, "seed": seed}
    cfg = RunConfig(
        k=k,
        alpha=alpha,
        ordering_seed=seed if plan.order == "seeded" else None,
        tie_break=TieBreak(plan.tie_break),
    )
    try:
        validate_instance(inst, cfg)
    except FairRecError as exc:
        log.warning("skipping %s k=%s alpha=%s: %s: %s", strategy, k, alpha, type(exc).__name__, exc)
        record.update(status="skipped", reason=type(exc).__name__, message=str(exc))
        return record
    try:
        alloc = _allocate(inst, strategy, cfg, seed)
        reference = top_k(inst, k)
        report = evaluate(inst, alloc, k, strategy=strategy, alpha=alpha, seed=seed, reference=reference)
        record["report"] = report
        record["status"] = "ok"
        if plan.audit:
            res = audit_run(inst, cfg, alloc, strategy)
            record["audit"] = {
                "ef1_holds": res.ef1_holds,
                "ef1_witness": list(res.ef1_witness) if res.ef1_witness else None,
                "exactly_k": res.exactly_k,
                "mms_satisfied_count": res.mms_satisfied_count,
                "nonzero_exposure": res.nonzero_exposure,
                "guarantees_expected": res.guarantees_expected,
                "exposure_threshold": res.exposure_threshold,
                "violations": list(res.violations),
            }
            if not res.passed:
                record["status"] = "audit-failed"
                for v in res.violations:
                    log.error("%s k=%s alpha=%s seed=%s: %s", strategy, k, alpha, seed, v)
        if plan.series:
            record["lorenz"] = lorenz_series(exposure_of(alloc, inst.n))
            record["cdf"] = utility_cdf_series(inst, alloc, k)
    except FairRecError as exc:
        log.error("%s k=%s alpha=%s seed=%s failed: %s", strategy, k, alpha, seed, exc)
        record = {"strategy": strategy, "k": k, "alpha": alpha, "seed": seed}
        record.update(status="failed", reason=type(exc).__name__, message=str(exc))
    return record


_WORKER_STATE: dict = {}


def _init_worker(inst: Instance, plan: ExperimentPlan) -> None:
    _WORKER_STATE["inst"] = inst
    _WORKER_STATE["plan"] = plan


def _run_in_worker(entry):
    return run_single(_WORKER_STATE["inst"], _WORKER_STATE["plan"], entry)


def run_sweep(plan: ExperimentPlan, workers: int = 1) -> tuple[list[dict], int]:
    """Run every plan entry, write the report table, series and summary.

    Returns the per-entry records and the exit status: 1 if an audited
    FairRec run broke its guarantees, else 0.
    """
    entries = plan.entries()
    out = Path(plan.out)
    if not entries:
        print("nothing to run: the plan has no (strategy, k, alpha, seed) entries", file=sys.stderr)
        return [], 0
    inst, manifest = load_instance(plan.instance, plan.geo)
    log.info("instance %s: m=%d n=%d", manifest.source, inst.m, inst.n)

    if workers > 1 and len(entries) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(inst, plan)) as pool:
            records = list(pool.map(_run_in_worker, entries))
    else:
        records = [run_single(inst, plan, e) for e in entries]

    out.mkdir(parents=True, exist_ok=True)
    reports = [r["report"] for r in records if "report" in r]
    data_io.write_report(reports, out / f"report.{plan.format}", plan.format)
    if plan.series:
        sdir = out / "series"
        sdir.mkdir(exist_ok=True)
        for r in records:
            if "lorenz" not in r:
                continue
            stem = _series_stem(r["strategy"], r["k"], r["alpha"], r["seed"])
            data_io.write_series(r["lorenz"], sdir / f"{stem}_lorenz.{plan.format}", "lorenz", plan.format)
            data_io.write_series(r["cdf"], sdir / f"{stem}_cdf.{plan.format}", "cdf", plan.format)

    summary = {
        "instance": {"source": manifest.source, "kind": manifest.kind, "m": inst.m, "n": inst.n},
        "runs": [
            {k: v for k, v in r.items() if k not in ("report", "lorenz", "cdf")}
            | ({"metrics": r["report"].row()} if "report" in r else {})
            for r in records
        ],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=str) + "\n", encoding="utf-8")

    failed = any(r["status"] == "audit-failed" and r["strategy"] == "fairrec" for r in records)
    return records, 1 if failed else 0


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in filter(None, text.split(",")):
        if "-" in part.strip("-"):
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    """``0.5``, ``0,0.5,1`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(t) for t in text.split(",") if t]


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser, multi: bool) -> None:
    p.add_argument("--instance", help="relevance CSV or synthetic:m=..,n=..[,s=..,noise=..,seed=..]")
    p.add_argument("--geo", nargs=2, metavar=("PRODUCERS", "CUSTOMERS"), help="geo CSVs for rating/distance relevance")
    p.add_argument("--strategy", default="fairrec", type=_str_list if multi else str)
    p.add_argument("--k", required=True, type=_int_list if multi else int)
    p.add_argument("--alpha", default=[1.0] if multi else 1.0, type=_float_list if multi else float)
    p.add_argument("--seed", default=[0] if multi else 0, type=_int_list if multi else int)
    p.add_argument("--out", default="results", type=Path)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--series", action="store_true", help="also write Lorenz and utility-CDF series")
    p.add_argument("--order", default="identity", choices=["identity", "seeded"], help="customer ordering for fairrec")
    p.add_argument("--tie-break", default=TieBreak.LOWEST_INDEX.value, choices=[t.value for t in TieBreak])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairrec", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one strategy at one k / alpha / seed")
    _add_common(p_run, multi=False)
    p_run.add_argument("--audit", action="store_true")

    p_audit = sub.add_parser("audit", help="like run, with the guarantee audit always on")
    _add_common(p_audit, multi=False)

    p_sweep = sub.add_parser("sweep", help="cross product of strategies, k, alpha and seeds")
    _add_common(p_sweep, multi=True)
    p_sweep.add_argument("--audit", action="store_true")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_gen = sub.add_parser("gen-synthetic", help="write a synthetic relevance CSV")
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--model", default="zipf", choices=["zipf", "uniform"])
    p_gen.add_argument("--s", type=float, default=1.1, help="zipf exponent")
    p_gen.add_argument("--noise", type=float, default=0.5)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", type=Path, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("FAIRREC_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)

    if args.command == "gen-synthetic":
        spec = data_io.SyntheticSpec(args.m, args.n, args.model, args.s, args.noise, args.seed)
        data_io.write_relevance_csv(data_io.generate_synthetic(spec), args.out)
        return 0

    if args.instance is None and args.geo is None:
        print("error: give --instance or --geo", file=sys.stderr)
        return 2

    multi = args.command == "sweep"
    plan = ExperimentPlan(
        instance=args.instance or "",
        strategies=args.strategy if multi else [args.strategy],
        ks=args.k if multi else [args.k],
        alphas=args.alpha if multi else [args.alpha],
        seeds=args.seed if multi else [args.seed],
        out=args.out,
        audit=args.command == "audit" or args.audit,
        series=args.series,
        format=args.format,
        order=args.order,
        tie_break=args.tie_break,
        geo=tuple(args.geo) if args.geo else None,
    )
    try:
        records, status = run_sweep(plan, workers=getattr(args, "workers", 1))
    except FairRecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for r in records:
        line = f"{r['strategy']:>10} k={r['k']:<3} alpha={r['alpha']:<5g} seed={r['seed']:<4} {r['status']}"
        if "report" in r:
            rep = r["report"]
            line += f"  H={rep.H:.3f} Z={rep.Z:.3f} L={rep.L:.3f} Y={rep.Y:.4f} mu={rep.mu_phi:.3f} std={rep.std_phi:.3f}"
        elif "message" in r:
            line += f"  ({r['reason']}: {r['message']})"
        print(line)
    return status


if __name__ == "__main__":
    sys.exit(main())
