"""Command-line surface: detect, analyze, cohorts, correlate, audit, synth,
evaluate.

Configuration is a flat key=value text file; command-line flags override
file values. Exit codes are a stable contract: 0 success, 2 configuration
or input error, 3 incomplete detections, 4 audit infeasible.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import corpus as corpusmod
from . import metrics, records, stats
from .records import OAStatus, load_detections, load_records
from .robot.crawl import Clock, CrawlConfig, DetectionError, detect_oa
from .robot.extract import ExternalConverter

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCOMPLETE = 3
EXIT_AUDIT = 4

CONVERTER_ENV = "OAFINDER_CONVERTER"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def read_config(path) -> dict[str, str]:
    """Flat key=value file; blank lines and #-comments ignored."""
    cfg: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


def _merged_config(args) -> dict[str, str]:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for key in ("records", "detections", "out", "mock_web", "ground_truth"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = str(value)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = str(args.seed)
    if getattr(args, "allow_unknown", False):
        cfg["allow_unknown"] = "true"
    return cfg


def _require(cfg: dict, key: str) -> str:
    if key not in cfg or not cfg[key]:
        raise CliError(f"missing required config key {key!r}")
    return cfg[key]


def _crawl_config(cfg: dict) -> CrawlConfig:
    kwargs = {}
    for key, cast in (("max_depth", int), ("per_host_rate", float),
                      ("max_in_flight", int), ("fetch_timeout", float),
                      ("max_links_followed_per_page", int),
                      ("title_similarity_threshold", float),
                      ("head_fraction", float), ("tail_fraction", float)):
        if key in cfg:
            try:
                kwargs[key] = cast(cfg[key])
            except ValueError as exc:
                raise CliError(f"bad value for {key}: {exc}")
    config = CrawlConfig(**kwargs)
    try:
        config.validate()
    except ValueError as exc:
        raise CliError(str(exc))
    return config


def _load_records(cfg: dict) -> list:
    path = _require(cfg, "records")
    if not Path(path).exists():
        raise CliError(f"records file not found: {path}")
    try:
        return load_records(path)
    except ValueError as exc:
        raise CliError(f"bad records file: {exc}")


def _resolved_records(cfg: dict):
    recs = _load_records(cfg)
    det_path = _require(cfg, "detections")
    if not Path(det_path).exists():
        raise CliError(f"detections file not found: {det_path}")
    merged = records.apply_detections(recs, load_detections(det_path))
    unknown = [r for r in merged if r.oa_status is OAStatus.UNKNOWN]
    if unknown:
        if cfg.get("allow_unknown", "").lower() in ("true", "1", "yes"):
            print(f"warning: dropping {len(unknown)} UNKNOWN records",
                  file=sys.stderr)
            merged = [r for r in merged if r.oa_status is not OAStatus.UNKNOWN]
        else:
            raise CliError(
                f"{len(unknown)} records have UNKNOWN status "
                f"(run detect, or pass --allow-unknown)", EXIT_INCOMPLETE)
    return merged


def _out_dir(cfg: dict) -> Path:
    out = Path(_require(cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


class _FixedClock(Clock):
    """Deterministic clock for offline runs, so reruns are byte-identical."""

    def __init__(self):
        self._t = 0.0

    def now(self) -> float:
        self._t += 1.0
        return self._t

    def sleep(self, seconds: float) -> None:
        self._t += seconds


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_detect(args) -> int:
    cfg = _merged_config(args)
    recs = _load_records(cfg)
    det_path = Path(_require(cfg, "detections"))
    mock_dir = _require(cfg, "mock_web")
    if not Path(mock_dir).exists():
        raise CliError(f"mock web directory not found: {mock_dir}")
    web = corpusmod.load_mock_web(mock_dir)
    provider = corpusmod.MockSearchProvider(web)
    fetcher = corpusmod.MockFetcher(web)
    config = _crawl_config(cfg)
    converter_cmd = cfg.get("converter") or os.environ.get(CONVERTER_ENV)
    converter = ExternalConverter(converter_cmd) if converter_cmd else None

    # Resumable append-only journal: replay keeps the last entry per id.
    done: dict[str, records.DetectionEvidence] = {}
    if det_path.exists():
        for ev in load_detections(det_path):
            done[ev.article_id] = ev

    n_unknown = 0
    with open(det_path, "a", encoding="utf-8") as journal:
        for rec in recs:
            if rec.id in done:
                continue
            try:
                # Fresh clock per article: resumed runs then produce the
                # same timestamps as uninterrupted ones.
                ev = detect_oa(rec, [provider], fetcher, config,
                               converter=converter, clock=_FixedClock())
            except DetectionError as exc:
                print(f"warning: {exc}", file=sys.stderr)
                n_unknown += 1
                continue
            done[rec.id] = ev
            journal.write(records.detection_to_json(ev) + "\n")
            journal.flush()

    # Compact the journal into records order for stable final output.
    final = [done[r.id] for r in recs if r.id in done]
    records.save_detections(final, det_path)
    n_oa = sum(1 for ev in final if ev.verdict is records.Verdict.OA)
    n_noa = len(final) - n_oa
    print(f"detect: {len(recs)} records, OA={n_oa} NOA={n_noa} "
          f"UNKNOWN={n_unknown}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _merged_config(args)
    merged = _resolved_records(cfg)
    out = _out_dir(cfg)
    kept, log = metrics.apply_exclusions(merged)
    metrics.write_exclusions_csv(log, out / "exclusions.csv")
    weighting = cfg.get("weighting", "unweighted")
    for dim in ("discipline", "country", "year"):
        metrics.write_oa_share_csv(
            metrics.percent_oa(kept, dim), out / f"oa_share_by_{dim}.csv")
        metrics.write_advantage_csv(
            metrics.aggregate_advantage(kept, dim, weighting),
            out / f"advantage_by_{dim}.csv")
    shares = [rep.percent_oa for rep in metrics.percent_oa(kept, "discipline")]
    if len(shares) > 1:
        summary = metrics.summary_stats(shares)
        print(f"analyze: kept {len(kept)}/{len(merged)} records; "
              f"%OA by discipline mean {100 * summary['mean']:.1f} "
              f"median {100 * summary['median']:.1f} "
              f"sd {100 * summary['sd']:.2f}")
    else:
        print(f"analyze: kept {len(kept)}/{len(merged)} records")
    return EXIT_OK


def cmd_cohorts(args) -> int:
    cfg = _merged_config(args)
    merged = _resolved_records(cfg)
    out = _out_dir(cfg)
    metrics.write_cohort_csv(metrics.cohort_table(merged, per_year=True),
                             out / "cohorts_yearly.csv")
    metrics.write_cohort_csv(metrics.cohort_table(merged, per_year=False),
                             out / "cohorts_pooled.csv")
    print(f"cohorts: {len(merged)} records")
    return EXIT_OK


def _correlation_rows(merged, weighting="unweighted"):
    from .records import ALL_RANGES

    years = sorted({r.year for r in merged})
    shares = {rep.group: rep for rep in metrics.percent_oa(merged, "year")}
    kept, _ = metrics.apply_exclusions(merged)
    adv = {rep.group: rep.advantage
           for rep in metrics.aggregate_advantage(kept, "year", weighting)}
    table = metrics.cohort_table(merged, per_year=True)

    def series(pairs):
        xs = [x for x, y in pairs if x is not None and y is not None]
        ys = [y for x, y in pairs if x is not None and y is not None]
        try:
            return stats.correlate(xs, ys)
        except stats.StatsError:
            return None

    total = {y: shares[y].n_oa + shares[y].n_noa for y in years if y in shares}
    pct = {y: shares[y].percent_oa for y in years if y in shares}
    rows = [
        ("advantage_x_year",
         series([(adv.get(y), y) for y in years])),
        ("advantage_x_total_articles",
         series([(adv.get(y), total.get(y)) for y in years])),
        ("advantage_x_pct_oa",
         series([(adv.get(y), pct.get(y)) for y in years])),
        ("total_articles_x_year",
         series([(total.get(y), y) for y in years])),
        ("total_articles_x_pct_oa",
         series([(total.get(y), pct.get(y)) for y in years])),
        ("pct_oa_x_year",
         series([(pct.get(y), y) for y in years])),
    ]
    for rng in ALL_RANGES:
        pairs = [(table[y][rng].ratio if y in table else None, y)
                 for y in years]
        rows.append((f"ratio_{rng.value}_x_year", series(pairs)))
    return rows


def cmd_correlate(args) -> int:
    cfg = _merged_config(args)
    merged = _resolved_records(cfg)
    out = _out_dir(cfg)
    rows = _correlation_rows(merged, cfg.get("weighting", "unweighted"))
    metrics.write_correlations_csv(rows, out / "correlations.csv")
    print(f"correlate: {sum(1 for _, r in rows if r is not None)} pairs")
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = _merged_config(args)
    det_path = _require(cfg, "detections")
    gt_path = _require(cfg, "ground_truth")
    for p in (det_path, gt_path):
        if not Path(p).exists():
            raise CliError(f"file not found: {p}")
    detections = load_detections(det_path)
    truth = corpusmod.load_ground_truth(gt_path)
    sample_size = int(cfg.get("sample_size", "100"))
    seed = int(cfg.get("seed", "0"))
    try:
        matrix = corpusmod.run_audit(detections, truth, sample_size, seed)
    except corpusmod.CorpusError as exc:
        raise CliError(str(exc), EXIT_AUDIT)
    result = stats.sdt_analysis(matrix)
    out = _out_dir(cfg)
    metrics.write_sdt_csv(matrix, result, out / "sdt.csv")
    print(f"audit: hits={matrix.hits} misses={matrix.misses} "
          f"fa={matrix.false_alarms} cr={matrix.correct_rejections} "
          f"d'={result.d_prime:.3f} beta={result.beta:.3f}")
    return EXIT_OK


def _corpus_spec_from_config(cfg: dict, seed_override=None) -> corpusmod.CorpusSpec:
    def parse_dist(text):
        pairs = []
        for part in text.split(","):
            k, _, v = part.partition(":")
            pairs.append((int(k), float(v)))
        return tuple(pairs)

    def parse_prob(text):
        if ":" in text:
            out = {}
            for part in text.split(","):
                k, _, v = part.partition(":")
                out[k.strip()] = float(v)
            return out
        return float(text)

    kwargs = {}
    casts = {
        "n_articles": int,
        "disciplines": lambda s: tuple(x.strip() for x in s.split(",")),
        "years": lambda s: tuple(int(x) for x in s.split("-")),
        "oa_probability": parse_prob,
        "uncited_mass": float,
        "mean_cited": float,
        "oa_citation_multiplier": float,
        "abstract_page_prob": float,
        "dead_link_prob": float,
        "chain_depth_distribution": parse_dist,
        "journals_per_discipline": int,
        "issues_per_year": int,
        "seed": int,
    }
    for key, cast in casts.items():
        if key in cfg:
            try:
                kwargs[key] = cast(cfg[key])
            except ValueError as exc:
                raise CliError(f"bad corpus spec value for {key}: {exc}")
    if seed_override is not None:
        kwargs["seed"] = seed_override
    spec = corpusmod.CorpusSpec(**kwargs)
    try:
        spec.validate()
    except corpusmod.CorpusError as exc:
        raise CliError(str(exc))
    return spec


def cmd_synth(args) -> int:
    cfg = read_config(args.spec) if args.spec else {}
    spec = _corpus_spec_from_config(cfg, args.seed)
    corp = corpusmod.generate_corpus(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpusmod.export_corpus(corp, out)
    n_oa = sum(1 for gt in corp.ground_truth.values() if gt.oa)
    print(f"synth: {len(corp.records)} records, {n_oa} reachable full texts, "
          f"{len(corp.web.pages)} pages -> {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ns = argparse.Namespace(spec=args.spec, out=out / "corpus", seed=args.seed)
    cmd_synth(ns)

    base = {
        "records": str(out / "corpus" / "records.jsonl"),
        "detections": str(out / "detections.jsonl"),
        "mock_web": str(out / "corpus" / "mockweb"),
        "ground_truth": str(out / "corpus" / "ground_truth.jsonl"),
        "out": str(out / "reports"),
        "sample_size": str(args.sample_size),
        "seed": str(args.seed if args.seed is not None else 0),
    }
    run_cfg = out / "run.cfg"
    run_cfg.write_text(
        "".join(f"{k} = {v}\n" for k, v in base.items()), encoding="utf-8")
    run_args = argparse.Namespace(
        config=str(run_cfg), records=None, detections=None, out=None,
        mock_web=None, ground_truth=None, seed=None, allow_unknown=False)

    for step in (cmd_detect, cmd_analyze, cmd_cohorts, cmd_correlate,
                 cmd_audit):
        code = step(run_args)
        if code != EXIT_OK:
            return code

    merged = _resolved_records(base)
    kept, _ = metrics.apply_exclusions(merged)
    n_oa = sum(1 for r in merged if r.oa_status is OAStatus.OA)
    overall = metrics.aggregate_advantage(kept, "discipline")
    advs = [rep.advantage for rep in overall if rep.advantage is not None]
    matrix = corpusmod.run_audit(
        load_detections(base["detections"]),
        corpusmod.load_ground_truth(base["ground_truth"]),
        int(base["sample_size"]), int(base["seed"]))
    sdt = stats.sdt_analysis(matrix)
    print("evaluate summary")
    print(f"  articles: {len(merged)}  percent OA: "
          f"{100.0 * n_oa / len(merged):.1f}%")
    if advs:
        print(f"  mean citation advantage across disciplines: "
              f"{100.0 * sum(advs) / len(advs):.1f}%")
    print(f"  audit d'={sdt.d_prime:.3f} beta={sdt.beta:.3f} "
          f"(hits={matrix.hits} misses={matrix.misses} "
          f"fa={matrix.false_alarms} cr={matrix.correct_rejections})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oafinder",
        description="Open-access detection robot and citation-impact reports")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, needs_out=True):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--records")
        p.add_argument("--detections")
        p.add_argument("--seed", type=int)
        if needs_out:
            p.add_argument("--out")

    p = sub.add_parser("detect", help="classify each record OA/NOA")
    common(p, needs_out=False)
    p.add_argument("--mock-web", dest="mock_web")

    for name, fn in (("analyze", cmd_analyze), ("cohorts", cmd_cohorts),
                     ("correlate", cmd_correlate)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--allow-unknown", action="store_true")
        p.set_defaults(func=fn)

    p = sub.add_parser("audit", help="signal-detection audit vs ground truth")
    common(p)
    p.add_argument("--ground-truth", dest="ground_truth")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("synth", help="generate a synthetic corpus + mock web")
    p.add_argument("--spec", help="corpus spec file (key=value)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("evaluate", help="synth + detect + analyze + audit")
    p.add_argument("--spec")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--sample-size", dest="sample_size", type=int, default=50)
    p.set_defaults(func=cmd_evaluate)

    sub.choices["detect"].set_defaults(func=cmd_detect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except metrics.UnresolvedStatusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    sys.exit(main())
