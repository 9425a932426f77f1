"""Command-line entry point wiring the pipeline:
ingest -> filter -> generate -> score -> evaluate -> validate -> serve.

All subcommands compose via files only. Runs are reproducible: identical
inputs and seed give byte-identical outputs; timestamps live in a
metadata sidecar, never in the artifact itself.
"""

from __future__ import annotations

import functools
import json
import os
import sys
import time
from pathlib import Path

import click

from . import __version__
from .corpus import Origin, filter_pairs, read_corpus, read_parallel, write_corpus
from .errors import ConfigError, MinpairError
from .external import HttpBackend, SubprocessBackend
from .ngram import NgramBackend
from .perturb import ERROR_TYPES, build_testset, read_testset, write_testset
from .report import (
    EvalReport,
    evaluate_testset,
    render_report,
    read_report_records,
    reports_from_records,
    write_report_records,
)
from .resources import RuleResources
from .scoring import TableBackend, conditional_score, make_request_id
from .validation import (
    RecordStore,
    build_machine_testset,
    classify_references,
    read_machine_references,
)


def _fail(error: MinpairError) -> "NoReturn":  # noqa: F821
    click.echo(f"ERROR {error.code}: {error}", err=True)
    sys.exit(1)


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except MinpairError as e:
            _fail(e)
    return wrapper


def load_config(path: str | None, allowed: set[str]) -> dict[str, str]:
    """Flat key=value config; unknown keys are a hard error."""
    if path is None:
        return {}
    config: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if key not in allowed:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        config[key] = value
    return config


def merge(cli_value, config: dict, key: str, default=None, cast=str):
    """CLI flags win over config values, which win over defaults."""
    if cli_value not in (None, (), ""):
        return cli_value
    if key in config:
        raw = config[key]
        if cast is tuple:
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        return cast(raw)
    return default


def write_sidecar(artifact: Path, seed: int | None, inputs: list[str],
                  extra: dict | None = None) -> None:
    meta = {
        "tool": f"minpair {__version__}",
        "seed": seed,
        "inputs": inputs,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        meta.update(extra)
    Path(str(artifact) + ".meta.json").write_text(
        json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def parse_backend_spec(spec: str, seed_corpus_cache: dict) -> tuple[str, str, object]:
    """Parse NAME=KIND:PATH (optionally GROUP/NAME=KIND:PATH).

    KIND is one of table, ngram, subprocess, http. For ngram, PATH is a
    corpus JSONL whose target sides train an order-2 add-1 model.
    """
    try:
        name, rest = spec.split("=", 1)
        kind, path = rest.split(":", 1)
    except ValueError:
        raise ConfigError(f"bad backend spec {spec!r}, expected NAME=KIND:PATH")
    group, _, short = name.rpartition("/")
    group = group or name
    backend: object
    if kind == "table":
        backend = TableBackend(path, name=name)
    elif kind == "ngram":
        if path not in seed_corpus_cache:
            targets = [p.target for p in read_corpus(path)]
            seed_corpus_cache[path] = targets
        backend = NgramBackend(name=name).fit(seed_corpus_cache[path])
    elif kind == "subprocess":
        backend = SubprocessBackend(path.split(), name=name)
    elif kind == "http":
        backend = HttpBackend(path, name=name)
    else:
        raise ConfigError(f"unknown backend kind {kind!r}")
    return group, name, backend


@click.group()
@click.version_option(__version__)
def main():
    """Contrastive minimal-pair toolkit for English-German MT."""


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--source", "source_path", type=click.Path(exists=True), default=None)
@click.option("--target", "target_path", type=click.Path(exists=True), default=None)
@click.option("--tsv", "tsv_path", type=click.Path(exists=True), default=None)
@click.option("--dataset-tag", default=None)
@click.option("--origin", default=None, help='"human" or "machine:<engine>"')
@click.option("--out", type=click.Path(), default=None)
@handle_errors
def ingest(config, source_path, target_path, tsv_path, dataset_tag, origin, out):
    """Read parallel text into the canonical corpus format."""
    cfg = load_config(config, {"source", "target", "tsv", "dataset_tag", "origin", "out"})
    source_path = merge(source_path, cfg, "source")
    target_path = merge(target_path, cfg, "target")
    tsv_path = merge(tsv_path, cfg, "tsv")
    dataset_tag = merge(dataset_tag, cfg, "dataset_tag", default="corpus")
    origin = Origin.parse(merge(origin, cfg, "origin", default="human"))
    out = merge(out, cfg, "out")
    if out is None:
        raise ConfigError("ingest requires --out")
    pairs = read_parallel(source_path, target_path, tsv_path,
                          dataset_tag=dataset_tag, origin=origin)
    write_corpus(pairs, out)
    write_sidecar(Path(out), None, [p for p in (source_path, target_path, tsv_path) if p])
    click.echo(f"wrote {len(pairs)} pairs to {out}")


@main.command("filter")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--in", "in_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--max-tokens", type=int, default=None)
@click.option("--max-ratio", type=float, default=None)
@handle_errors
def filter_cmd(config, in_path, out, max_tokens, max_ratio):
    """Drop over-long pairs and pairs with an extreme length ratio."""
    cfg = load_config(config, {"in", "out", "max_tokens", "max_ratio"})
    in_path = merge(in_path, cfg, "in")
    out = merge(out, cfg, "out")
    max_tokens = merge(max_tokens, cfg, "max_tokens", default=250, cast=int)
    max_ratio = merge(max_ratio, cfg, "max_ratio", default=1.5, cast=float)
    if in_path is None or out is None:
        raise ConfigError("filter requires --in and --out")
    pairs = read_corpus(in_path)
    kept, removed = filter_pairs(pairs, max_tokens=max_tokens, max_ratio=max_ratio)
    write_corpus(kept, out)
    write_sidecar(Path(out), None, [in_path],
                  {"removed": removed, "max_tokens": max_tokens, "max_ratio": max_ratio})
    click.echo(f"kept {len(kept)}, removed {removed}")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--in", "in_path", type=click.Path(exists=True), default=None)
@click.option("--error-type", "error_types", multiple=True,
              type=click.Choice(ERROR_TYPES))
@click.option("--seed", type=int, default=None)
@click.option("--resources", "resources_dir", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@handle_errors
def generate(config, in_path, error_types, seed, resources_dir, out_dir):
    """Build one contrastive test set per error type."""
    cfg = load_config(config, {"in", "error_type", "seed", "resources", "out"})
    in_path = merge(in_path, cfg, "in")
    error_types = merge(error_types, cfg, "error_type", default=ERROR_TYPES, cast=tuple)
    seed = merge(seed, cfg, "seed", default=0, cast=int)
    resources_dir = merge(resources_dir, cfg, "resources")
    out_dir = merge(out_dir, cfg, "out")
    if in_path is None or out_dir is None:
        raise ConfigError("generate requires --in and --out")
    resources = RuleResources.load(resources_dir)
    pairs = read_corpus(in_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for error_type in error_types:
        result = build_testset(pairs, error_type, seed=seed, resources=resources)
        out_file = out_dir / f"{error_type}.testset.jsonl"
        write_testset(result.pairs, out_file)
        write_sidecar(out_file, seed, [str(in_path)], {
            "error_type": error_type,
            "produced": len(result.pairs),
            "skipped": len(result.skipped),
            "skip_reasons": sorted(set(reason for _, reason in result.skipped)),
        })
        click.echo(f"{error_type}: {len(result.pairs)} pairs, {len(result.skipped)} skipped")


def _load_onebest(path: str | None) -> dict[str, str] | None:
    if path is None:
        return None
    onebest = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            onebest[obj["id"]] = obj["translation"]
    return onebest


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--testset", "testset_path", type=click.Path(exists=True), default=None)
@click.option("--backend", "backend_specs", multiple=True)
@click.option("--onebest", "onebest_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
@handle_errors
def score(config, testset_path, backend_specs, onebest_path, out):
    """Write per-variant length-normalized scores for a test set."""
    cfg = load_config(config, {"testset", "backend", "onebest", "out"})
    testset_path = merge(testset_path, cfg, "testset")
    backend_specs = merge(backend_specs, cfg, "backend", default=(), cast=tuple)
    onebest_path = merge(onebest_path, cfg, "onebest")
    out = merge(out, cfg, "out")
    if testset_path is None or not backend_specs or out is None:
        raise ConfigError("score requires --testset, --backend and --out")
    pairs = read_testset(testset_path)
    onebest = _load_onebest(onebest_path) or {}
    cache: dict = {}
    with open(out, "w", encoding="utf-8") as f:
        for spec in backend_specs:
            _, name, backend = parse_backend_spec(spec, cache)
            for pair in pairs:
                variants = {"correct": pair.correct, "contrastive": pair.contrastive}
                if pair.id in onebest:
                    variants["onebest"] = onebest[pair.id]
                for variant, text in variants.items():
                    value = conditional_score(backend, pair.source, text,
                                              make_request_id(pair.id, variant))
                    f.write(json.dumps({
                        "id": pair.id, "variant": variant,
                        "backend": name, "score": value,
                    }, ensure_ascii=False) + "\n")
    write_sidecar(Path(out), None, [testset_path])
    click.echo(f"wrote scores to {out}")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--testset", "testset_paths", multiple=True, type=click.Path(exists=True))
@click.option("--backend", "backend_specs", multiple=True,
              help="NAME=KIND:PATH or GROUP/NAME=KIND:PATH (repeatable)")
@click.option("--onebest", "onebest_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["tsv", "markdown"]), default=None)
@handle_errors
def evaluate(config, testset_paths, backend_specs, onebest_path, out, fmt):
    """Compute accuracy and discrepancy per backend and render a report."""
    cfg = load_config(config, {"testset", "backend", "onebest", "out", "format"})
    testset_paths = merge(testset_paths, cfg, "testset", default=(), cast=tuple)
    backend_specs = merge(backend_specs, cfg, "backend", default=(), cast=tuple)
    onebest_path = merge(onebest_path, cfg, "onebest")
    out = merge(out, cfg, "out")
    fmt = merge(fmt, cfg, "format", default="tsv")
    if not testset_paths or not backend_specs:
        raise ConfigError("evaluate requires --testset and --backend")
    onebest = _load_onebest(onebest_path)
    cache: dict = {}
    backends = [parse_backend_spec(spec, cache) for spec in backend_specs]
    reports = []
    for path in testset_paths:
        pairs = read_testset(path)
        if not pairs:
            continue
        testset_type = ("human references" if pairs[0].ref_origin.kind == "human"
                        else "machine references")
        report = EvalReport(error_type=pairs[0].error_type, testset_type=testset_type)
        for group, name, backend in backends:
            result = evaluate_testset(pairs, backend, onebest=onebest)
            report.accuracy_by_backend.setdefault(group, {})[name] = result.accuracy
            if result.discrepancy is not None:
                report.discrepancy_by_backend.setdefault(group, {})[name] = result.discrepancy
        reports.append(report)
    if out:
        write_report_records(reports, out)
        write_sidecar(Path(out), None, list(testset_paths))
    click.echo(render_report(reports, format=fmt), nl=False)


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--in", "in_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["tsv", "markdown"]), default=None)
@click.option("--out", type=click.Path(), default=None)
@handle_errors
def report(config, in_path, fmt, out):
    """Render a stored machine-readable report as a table."""
    cfg = load_config(config, {"in", "format", "out"})
    in_path = merge(in_path, cfg, "in")
    fmt = merge(fmt, cfg, "format", default="tsv")
    out = merge(out, cfg, "out")
    if in_path is None:
        raise ConfigError("report requires --in")
    reports = reports_from_records(read_report_records(in_path))
    text = render_report(reports, format=fmt)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--human-testset", type=click.Path(exists=True), default=None)
@click.option("--machine-refs", type=click.Path(exists=True), default=None)
@click.option("--resources", "resources_dir", type=click.Path(exists=True), default=None)
@click.option("--store", "store_dir", type=click.Path(), default=None)
@handle_errors
def validate(config, human_testset, machine_refs, resources_dir, store_dir):
    """Classify machine references against the human test set."""
    cfg = load_config(config, {"human_testset", "machine_refs", "resources", "store"})
    human_testset = merge(human_testset, cfg, "human_testset")
    machine_refs = merge(machine_refs, cfg, "machine_refs")
    resources_dir = merge(resources_dir, cfg, "resources")
    store_dir = merge(store_dir, cfg, "store")
    if not (human_testset and machine_refs and store_dir):
        raise ConfigError("validate requires --human-testset, --machine-refs and --store")
    resources = RuleResources.load(resources_dir)
    human_pairs = read_testset(human_testset)
    refs = read_machine_references(machine_refs)
    records = classify_references(human_pairs, refs, resources)
    store = RecordStore.create(store_dir, records)
    click.echo(json.dumps(store.status_counts(), sort_keys=True))


@main.command("build-machine-set")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--store", "store_dir", type=click.Path(exists=True), default=None)
@click.option("--human-testset", type=click.Path(exists=True), default=None)
@click.option("--resources", "resources_dir", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--allow-unresolved", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None)
@handle_errors
def build_machine_set(config, store_dir, human_testset, resources_dir, seed,
                      allow_unresolved, out):
    """Assemble the machine-reference test set from resolved records."""
    cfg = load_config(config, {"store", "human_testset", "resources", "seed",
                               "allow_unresolved", "out"})
    store_dir = merge(store_dir, cfg, "store")
    human_testset = merge(human_testset, cfg, "human_testset")
    resources_dir = merge(resources_dir, cfg, "resources")
    seed = merge(seed, cfg, "seed", default=0, cast=int)
    out = merge(out, cfg, "out")
    if not (store_dir and human_testset and out):
        raise ConfigError("build-machine-set requires --store, --human-testset and --out")
    resources = RuleResources.load(resources_dir)
    store = RecordStore.open(store_dir)
    human_pairs = read_testset(human_testset)
    pairs, skipped = build_machine_testset(
        human_pairs, store.records(), resources=resources, seed=seed,
        allow_unresolved=allow_unresolved)
    write_testset(pairs, out)
    write_sidecar(Path(out), seed, [str(store_dir), human_testset],
                  {"produced": len(pairs), "skipped": len(skipped)})
    click.echo(f"wrote {len(pairs)} machine-reference pairs ({len(skipped)} skipped)")


@main.command("serve-review")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--store", "store_dir", type=click.Path(exists=True), default=None)
@click.option("--static", "static_dir", type=click.Path(), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@handle_errors
def serve_review(config, store_dir, static_dir, host, port):
    """Serve the review queue over HTTP (secret from MINPAIR_REVIEW_SECRET)."""
    cfg = load_config(config, {"store", "static", "host", "port"})
    store_dir = merge(store_dir, cfg, "store")
    static_dir = merge(static_dir, cfg, "static")
    host = merge(host, cfg, "host", default="127.0.0.1")
    port = merge(port, cfg, "port", default=8000, cast=int)
    if store_dir is None:
        raise ConfigError("serve-review requires --store")
    secret = os.environ.get("MINPAIR_REVIEW_SECRET")
    if not secret:
        raise ConfigError("set MINPAIR_REVIEW_SECRET to serve the review queue")
    import uvicorn

    from .service import create_app
    store = RecordStore.open(store_dir)
    app = create_app(store, secret, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
