"""Batch command-line front end.

Subcommands mirror the pipeline: transform -> inject -> verify -> evaluate,
plus `run` for the whole thing. Configuration comes from an optional TOML
file; flags override file values. All dataset artifacts are deterministic
for a fixed seed; wall-clock timestamps and environment details are
quarantined in run.log.

Exit codes: 0 ok, 1 usage, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .corpus import (
    CorpusError,
    Snippet,
    SnippetKind,
    VulnType,
    bundled_hosts_dir,
    bundled_snippets_dir,
    load_corpus,
    parse_snippet_source,
)
from .evaluate import (
    MetricsReport,
    ReportError,
    ToolProfile,
    compare,
    compute_ratio,
    default_profile,
    load_findings,
    render_comparison_table,
    render_metrics_table,
    unmapped_check_ids,
    unmatched_findings,
)
from .inject import InjectError, build_variants, generate_dataset, load_manifest
from .oracle.sweep import KERNEL
from .parser import ParseError
from .printer import member_block
from .transform import (
    ForFillStyle,
    GROUP_TOKENS,
    InvalidChain,
    NotApplicable,
    TransformError,
    Variant,
    applicable_groups,
    apply_chain,
    chain_label,
    enumerate_valid_chains,
    parse_chain_label,
)
from .validate import CompilerConfig, compiler_from_env, default_compiler
from .verify import verify_all

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

_WRAPPER = "__Snippet__"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    corpus_dir: Path = field(default_factory=bundled_snippets_dir)
    hosts_dir: Path = field(default_factory=bundled_hosts_dir)
    out_dir: Path = Path("solmorph-out")
    operators: tuple[str, ...] = ("all",)
    chains: str = "singletons"  # singletons | all_valid
    mode: str = "all_locations"  # all_locations | single_location
    include_default: bool = True
    for_style: str = "temp_var"
    seed: int = 0
    jobs: int = 1
    kind: str = "function_level"
    compiler: CompilerConfig | None = None
    tool_profiles: dict = field(default_factory=dict)


def load_config(path: Path | None) -> RunConfig:
    config = RunConfig()
    env_compiler = compiler_from_env()
    if env_compiler is not None:
        config.compiler = env_compiler
    if path is None:
        return config
    data = tomllib.loads(Path(path).read_text())
    paths = data.get("paths", {})
    if "corpus" in paths:
        config.corpus_dir = Path(paths["corpus"])
    if "hosts" in paths:
        config.hosts_dir = Path(paths["hosts"])
    if "out" in paths:
        config.out_dir = Path(paths["out"])
    config.seed = int(data.get("seed", config.seed))
    config.jobs = int(data.get("jobs", config.jobs))
    tr = data.get("transform", {})
    ops = tr.get("operators", list(config.operators))
    config.operators = tuple(ops) if isinstance(ops, list) else (str(ops),)
    config.chains = tr.get("chains", config.chains)
    config.for_style = tr.get("for_style", config.for_style)
    inj = data.get("inject", {})
    config.mode = inj.get("mode", config.mode)
    config.include_default = bool(inj.get("include_default", config.include_default))
    config.kind = inj.get("kind", config.kind)
    comp = data.get("compiler", {})
    if "command" in comp and env_compiler is None:
        config.compiler = CompilerConfig(
            comp["command"],
            float(comp.get("timeout_secs", 30.0)),
            int(comp.get("parallelism", 1)),
        )
    for tool, spec in data.get("tool", {}).items():
        config.tool_profiles[tool] = ToolProfile(
            tool, spec.get("format", "normalized"), spec.get("mapping", {}))
    return config


def _resolve_operators(tokens: tuple[str, ...]) -> tuple[str, ...]:
    out: list[str] = []
    for token in tokens:
        if token == "all":
            out.extend(GROUP_TOKENS)
        elif token == "rename":  # shorthand for both naming-level groups
            out.extend(("rename_var", "rename_func"))
        elif token in GROUP_TOKENS:
            out.append(token)
        else:
            raise UsageError(f"unknown operator token {token!r}")
    seen = []
    for t in GROUP_TOKENS:
        if t in out and t not in seen:
            seen.append(t)
    return tuple(seen)


def _chain_set(config: RunConfig) -> list[tuple[str, ...]]:
    groups = _resolve_operators(config.operators)
    if config.chains == "singletons":
        return [(g,) for g in groups]
    if config.chains == "all_valid":
        return enumerate_valid_chains(groups)
    raise UsageError(f"unknown chain mode {config.chains!r}")


def _variant_source(variant: Variant) -> str:
    body = "\n".join(member_block(m) for m in variant.members)
    return f"contract {_WRAPPER} {{\n{body}\n}}\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_transform(config: RunConfig, out_dir: Path | None = None) -> int:
    corpus = load_corpus(config.corpus_dir)
    chains = _chain_set(config)
    out = Path(out_dir) if out_dir else config.out_dir / "variants"
    out.mkdir(parents=True, exist_ok=True)
    style = ForFillStyle(config.for_style)

    index: dict = {"variants": 0, "per_operator": {}, "per_vuln_type": {},
                   "per_snippet": {}}
    failures = 0
    for snippet in corpus:
        groups = applicable_groups(snippet.members)
        for chain in chains:
            if not all(t in groups for t in chain):
                continue
            try:
                variant = apply_chain(snippet, chain, config.seed, style)
            except NotApplicable as exc:
                print(f"solmorph: transform skipped {snippet.id} "
                      f"{chain_label(chain)}: {exc}", file=sys.stderr)
                failures += 1
                continue
            label = chain_label(chain)
            stem = f"{snippet.id}__{label}"
            (out / f"{stem}.sol").write_text(_variant_source(variant))
            sidecar = {
                "snippet_id": snippet.id,
                "vuln_type": snippet.vuln_type.value,
                "kind": snippet.kind.value,
                "chain": list(chain),
                "soundness_flags": sorted(variant.soundness_flags),
                "seed": config.seed,
            }
            (out / f"{stem}.json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")
            index["variants"] += 1
            for token in chain:
                index["per_operator"][token] = index["per_operator"].get(token, 0) + 1
            vt = snippet.vuln_type.value
            index["per_vuln_type"][vt] = index["per_vuln_type"].get(vt, 0) + 1
            index["per_snippet"][snippet.id] = index["per_snippet"].get(snippet.id, 0) + 1
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    print(f"wrote {index['variants']} variants to {out}")
    if index["variants"] == 0:
        print("solmorph: error: no variants produced", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _corpus_variant_pairs(config: RunConfig) -> list[tuple[Snippet, Variant]]:
    corpus = load_corpus(config.corpus_dir)
    chains = _chain_set(config)
    style = ForFillStyle(config.for_style)
    pairs = []
    for snippet in corpus:
        groups = applicable_groups(snippet.members)
        for chain in chains:
            if not all(t in groups for t in chain):
                continue
            try:
                pairs.append((snippet, apply_chain(snippet, chain, config.seed, style)))
            except NotApplicable:
                continue
    return pairs


def cmd_inject(config: RunConfig, variants_dir: Path | None = None) -> int:
    hosts = sorted(Path(config.hosts_dir).glob("*.sol"))
    if not hosts:
        raise InjectError(f"no host contracts under {config.hosts_dir}")
    out = config.out_dir / "dataset"
    kind = SnippetKind(config.kind)
    if variants_dir is not None:
        variants = _load_variants_dir(Path(variants_dir))
        result = generate_dataset(
            hosts, mode=config.mode, seed=config.seed, out_dir=out,
            compiler=config.compiler, kind=kind, variants=variants)
    else:
        corpus = load_corpus(config.corpus_dir)
        result = generate_dataset(
            hosts, corpus, _chain_set(config), mode=config.mode,
            seed=config.seed, out_dir=out, compiler=config.compiler,
            include_default=config.include_default, kind=kind)
    valid = sum(1 for r in result.records if r.valid)
    print(f"wrote {len(result.records)} records ({valid} valid) to {result.manifest_path}")
    if not result.records:
        print("solmorph: error: empty dataset", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _load_variants_dir(variants_dir: Path) -> list[tuple[SnippetKind, Variant]]:
    out = []
    for sidecar in sorted(variants_dir.glob("*.json")):
        if sidecar.name == "index.json":
            continue
        meta = json.loads(sidecar.read_text())
        sol = sidecar.with_suffix(".sol")
        snippet = parse_snippet_source(
            sol.read_text(), meta["snippet_id"], VulnType(meta["vuln_type"]),
            SnippetKind(meta["kind"]))
        out.append((snippet.kind, Variant(
            snippet_id=meta["snippet_id"],
            chain=tuple(meta["chain"]),
            members=snippet.members,
            soundness_flags=frozenset(meta.get("soundness_flags", ())),
            seed=meta.get("seed", 0),
            vuln_type=meta["vuln_type"],
        )))
    if not out:
        raise InjectError(f"no variants under {variants_dir}")
    return out


def cmd_verify(config: RunConfig, report_path: Path | None = None) -> int:
    pairs = _corpus_variant_pairs(config)
    if not pairs:
        print("solmorph: error: nothing to verify", file=sys.stderr)
        return EXIT_DATA
    reports, all_passed = verify_all(pairs)
    payload = {
        "kernel": KERNEL,
        "checked": len(reports),
        "passed": sum(1 for r in reports if r.passed),
        "divergent_flagged": sum(1 for r in reports if r.passed and r.has_divergence),
        "variants": [r.to_json() for r in reports],
    }
    target = report_path or (config.out_dir / "verify_report.json")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"verified {payload['checked']} variants: {payload['passed']} passed, "
          f"{payload['divergent_flagged']} with flagged divergence")
    if not all_passed:
        print("solmorph: error: verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_evaluate(config: RunConfig, manifests: list[Path],
                 report_specs: list[str], compare_axis: str | None,
                 out_dir: Path | None = None) -> int:
    datasets = {}
    for path in manifests:
        header, records = load_manifest(path)
        dataset_id = header.get("dataset_id") or Path(path).parent.name
        datasets[dataset_id] = records
    if not datasets:
        raise ReportError("no manifests given")

    reports: list[MetricsReport] = []
    appendix: dict = {"unmatched_findings": [], "unmapped_check_ids": {}}
    for spec in report_specs:
        dataset_id, tool, path = _parse_report_spec(spec, datasets)
        profile = config.tool_profiles.get(tool, default_profile(tool))
        findings = load_findings(path, profile)
        records = datasets[dataset_id]
        vuln_types = sorted({r.vuln_type for r in records if r.valid})
        for vt in vuln_types:
            reports.append(compute_ratio(records, findings, dataset_id, tool, vt))
        appendix["unmatched_findings"].extend(
            {"tool": f.tool, "check_id": f.check_id, "file": f.file,
             "line_start": f.line_start, "line_end": f.line_end}
            for f in unmatched_findings(records, findings))
        for check, n in unmapped_check_ids(findings).items():
            appendix["unmapped_check_ids"][check] = (
                appendix["unmapped_check_ids"].get(check, 0) + n)

    out = Path(out_dir) if out_dir else config.out_dir / "metrics"
    out.mkdir(parents=True, exist_ok=True)
    payload = {"reports": [r.to_json() for r in reports], "appendix": appendix}
    text = render_metrics_table(reports)
    if compare_axis:
        rows_by_key: dict = {}
        for key in {(r.tool, r.vuln_type) for r in reports}:
            group = [r for r in reports if (r.tool, r.vuln_type) == key]
            rows = compare(group, compare_axis)
            rows_by_key[f"{key[0]}/{key[1]}"] = [r.to_json() for r in rows]
            text += "\n" + render_comparison_table(rows, f"{compare_axis} {key}")
        payload["comparisons"] = rows_by_key
    (out / "metrics.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    (out / "metrics.txt").write_text(text + "\n")
    print(text)
    return EXIT_OK


def _parse_report_spec(spec: str, datasets: dict) -> tuple[str, str, Path]:
    if "=" not in spec:
        raise UsageError(f"report spec must be [dataset:]tool=path, got {spec!r}")
    left, path = spec.split("=", 1)
    if ":" in left:
        dataset_id, tool = left.split(":", 1)
    else:
        if len(datasets) != 1:
            raise UsageError(
                f"report spec {spec!r} needs a dataset prefix when several "
                "manifests are loaded")
        dataset_id, tool = next(iter(datasets)), left
    if dataset_id not in datasets:
        raise ReportError(f"report names unknown dataset {dataset_id!r}")
    return dataset_id, tool, Path(path)


def cmd_run(config: RunConfig) -> int:
    started = time.time()
    config.out_dir.mkdir(parents=True, exist_ok=True)
    status = cmd_transform(config)
    if status == EXIT_OK:
        status = cmd_inject(config)
    if status == EXIT_OK:
        status = cmd_verify(config)
    log = config.out_dir / "run.log"
    log.write_text(
        f"started_unix={started:.3f}\nfinished_unix={time.time():.3f}\n"
        f"python={platform.python_version()}\nplatform={platform.platform()}\n"
        f"solmorph={__version__}\nkernel={KERNEL}\nstatus={status}\n")
    return status


# --------------------------------------------------------------------------
# argument parsing


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        print(f"solmorph: usage error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(parser):
    parser.add_argument("--config", type=Path, help="TOML config file")
    parser.add_argument("--seed", type=int, help="deterministic seed (default 0)")
    parser.add_argument("--jobs", type=int, help="parallelism knob")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--corpus", type=Path, help="snippet corpus directory")
    parser.add_argument("--hosts", type=Path, help="host contracts directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="solmorph")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="apply operator chains to the corpus")
    _add_common(p)
    p.add_argument("--operators", help="comma list of operator tokens, or 'all'")
    p.add_argument("--chains", choices=["singletons", "all_valid"])
    p.add_argument("--for-style", choices=["temp_var", "empty_empty"])

    p = sub.add_parser("inject", help="inject variants into host contracts")
    _add_common(p)
    p.add_argument("--operators")
    p.add_argument("--chains", choices=["singletons", "all_valid"])
    p.add_argument("--mode", choices=["all_locations", "single_location"])
    p.add_argument("--variants", type=Path, help="pre-built variants directory")
    p.add_argument("--no-default", action="store_true",
                   help="skip untransformed (chain=default) injections")

    p = sub.add_parser("verify", help="run the equivalence oracle over variants")
    _add_common(p)
    p.add_argument("--operators")
    p.add_argument("--chains", choices=["singletons", "all_valid"])
    p.add_argument("--report", type=Path, help="where to write the oracle report")

    p = sub.add_parser("evaluate", help="score detector reports against manifests")
    _add_common(p)
    p.add_argument("--manifest", type=Path, action="append", default=[],
                   required=True, help="ground-truth manifest (repeatable)")
    p.add_argument("--report", action="append", default=[], required=True,
                   metavar="[DATASET:]TOOL=PATH", help="detector report (repeatable)")
    p.add_argument("--compare", choices=["operator_vs_default",
                                         "all_vs_single_location"])

    p = sub.add_parser("run", help="full pipeline: transform, inject, verify")
    _add_common(p)
    p.add_argument("--operators")
    p.add_argument("--chains", choices=["singletons", "all_valid"])
    p.add_argument("--mode", choices=["all_locations", "single_location"])
    return parser


def _apply_flags(config: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        config.seed = args.seed
    if args.jobs is not None:
        config.jobs = args.jobs
    if args.out is not None:
        config.out_dir = args.out
    if args.corpus is not None:
        config.corpus_dir = args.corpus
    if args.hosts is not None:
        config.hosts_dir = args.hosts
    if getattr(args, "operators", None):
        config.operators = tuple(t.strip() for t in args.operators.split(",") if t.strip())
    if getattr(args, "chains", None):
        config.chains = args.chains
    if getattr(args, "for_style", None):
        config.for_style = args.for_style
    if getattr(args, "mode", None):
        config.mode = args.mode
    if getattr(args, "no_default", False):
        config.include_default = False
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _apply_flags(load_config(args.config), args)
        if args.command == "transform":
            return cmd_transform(config)
        if args.command == "inject":
            return cmd_inject(config, args.variants)
        if args.command == "verify":
            return cmd_verify(config, args.report)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.manifest, args.report, args.compare)
        if args.command == "run":
            return cmd_run(config)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"solmorph: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, InjectError, TransformError, ReportError, ParseError,
            InvalidChain, OSError) as exc:
        print(f"solmorph: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
