"""Command-line orchestration of the full protocol:
ingest -> split -> render -> predict -> score -> report.
"""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click
import yaml

from . import backend as backend_mod
from . import corpus as corpus_mod
from . import metrics as metrics_mod
from . import parsing as parsing_mod
from .errors import PromptkitError
from .parsing import Task
from .prompting import (
    PromptRendering,
    Regime,
    TemplateConfig,
    Verbalizer,
    render_for_regime,
    render_mlm_prompt,
)
from .types import AspectCategory, Polarity, SplitSpec

CONFIG_ENV_VAR = "ABSA_PROMPTKIT_CONFIG"


def _fail(message: str) -> None:
    raise click.ClickException(message)


def load_tables(path: str | None) -> dict:
    """Verbalizer / category-translation tables (YAML or JSON)."""
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return yaml.safe_load(fh) or {}


def build_verbalizer(tables: dict, language: str) -> Verbalizer:
    table = tables.get("verbalizer", {}).get(language)
    if table:
        return Verbalizer({Polarity(k): v for k, v in table.items()})
    return Verbalizer.czech() if language == "cs" else Verbalizer.english()


def build_template_config(tables: dict, regime: Regime, language: str) -> TemplateConfig:
    display = {}
    for canonical, names in tables.get("categories", {}).items():
        if isinstance(names, dict) and language in names:
            display[AspectCategory.parse(canonical)] = names[language]
    cfg = TemplateConfig(regime=regime, language=language, category_display=display)
    if "max_input_units" in tables:
        cfg.max_input_units = int(tables["max_input_units"])
    return cfg


def make_backend(spec: str, store: backend_mod.GoldStore, seed: int = 0) -> backend_mod.Backend:
    if spec == "gold":
        return backend_mod.GoldOracleBackend(store)
    if spec.startswith("corrupt:"):
        return backend_mod.CorruptionOracleBackend(store, rate=float(spec.split(":", 1)[1]), seed=seed)
    if spec.startswith("http:"):
        return backend_mod.HttpBackend(spec.split(":", 1)[1])
    _fail(f"unknown backend spec: {spec!r} (expected gold | corrupt:<d> | http:<url>)")


def read_renderings(path: str | Path) -> list[PromptRendering]:
    with open(path, encoding="utf-8") as fh:
        return [PromptRendering.from_json(line) for line in fh if line.strip()]


@click.group()
def main():
    """Prompt-based ABSA / sentiment-classification toolkit."""


@main.command()
@click.option("--format", "fmt", type=click.Choice(["absa", "polarity"]), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def ingest(fmt, in_path, out_path):
    """Read a raw corpus file and write normalized JSONL."""
    try:
        if fmt == "absa":
            sentences = corpus_mod.load_absa_corpus(in_path)
            with open(out_path, "w", encoding="utf-8") as fh:
                corpus_mod.sentences_to_jsonl(sentences, fh)
            click.echo(f"wrote {len(sentences)} sentences to {out_path}")
        else:
            docs = corpus_mod.load_polarity_corpus(in_path)
            with open(out_path, "w", encoding="utf-8") as fh:
                for d in docs:
                    fh.write(json.dumps(
                        {"doc_id": d.doc_id, "text": d.text, "label": d.label.value, "stars": d.stars},
                        ensure_ascii=False) + "\n")
            click.echo(f"wrote {len(docs)} documents to {out_path}")
    except PromptkitError as exc:
        _fail(str(exc))


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--few-shot", "few_shot", type=int, default=None)
@click.option("--zero-shot", "zero_shot", is_flag=True, default=False)
@click.option("--val-frac", type=float, default=None, help="also write <out>.val.jsonl with the trailing fraction")
def split(in_path, out_path, few_shot, zero_shot, val_frac):
    """Produce a deterministic training split (first-n rule, never shuffled)."""
    if few_shot is not None and zero_shot:
        _fail("--few-shot and --zero-shot are mutually exclusive")
    spec = (SplitSpec.few_shot(few_shot) if few_shot is not None
            else SplitSpec.zero_shot() if zero_shot else SplitSpec.full())
    with open(in_path, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    try:
        selected = corpus_mod.make_split(lines, spec)
    except PromptkitError as exc:
        _fail(str(exc))
    if val_frac:
        cut = len(selected) - int(len(selected) * val_frac)
        selected, val = selected[:cut], selected[cut:]
        Path(str(out_path) + ".val.jsonl").write_text("".join(val), encoding="utf-8")
    Path(out_path).write_text("".join(selected), encoding="utf-8")
    click.echo(f"wrote {len(selected)} records to {out_path}")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--regime", type=click.Choice([r.value for r in Regime]), required=True)
@click.option("--language", default="en")
@click.option("--tables", "tables_path", type=click.Path(exists=True), default=None,
              envvar=CONFIG_ENV_VAR)
def render(in_path, out_path, regime, language, tables_path):
    """Render model inputs and expected targets for one regime."""
    tables = load_tables(tables_path)
    regime = Regime(regime)
    v = build_verbalizer(tables, "cs" if regime is Regime.MLM else language)
    cfg = build_template_config(tables, regime, "cs" if regime is Regime.MLM else language)
    try:
        with open(in_path, encoding="utf-8") as fh:
            sentences = corpus_mod.sentences_from_jsonl(fh)
        renderings = []
        if regime is Regime.MLM:
            for s in sentences:
                for k, t in enumerate(s.triplets):
                    renderings.append(render_mlm_prompt(
                        s.text, "absa_apd", (t.category, t.term), cfg, v,
                        polarity=t.polarity, example_id=f"{s.sentence_id}#{k}"))
        else:
            renderings = [render_for_regime(s, cfg, v) for s in sentences]
        with open(out_path, "w", encoding="utf-8") as fh:
            for r in renderings:
                fh.write(r.to_json() + "\n")
    except PromptkitError as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(renderings)} renderings to {out_path}")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--backend", "backend_spec", default="gold")
@click.option("--seed", type=int, default=0)
@click.option("--language", default="cs")
@click.option("--concurrency", type=int, default=8)
def predict(in_path, out_path, backend_spec, seed, language, concurrency):
    """Send rendered inputs through a backend, write raw outputs."""
    renderings = read_renderings(in_path)
    store = backend_mod.GoldStore.from_renderings(renderings)
    bk = make_backend(backend_spec, store, seed)
    v = Verbalizer.czech() if language == "cs" else Verbalizer.english()
    reqs = []
    for r in renderings:
        if r.regime is Regime.MLM:
            reqs.append(backend_mod.BackendRequest(
                kind=backend_mod.FILL_MASK, example_id=r.example_id,
                input=r.model_input, candidate_words=v.candidates))
        else:
            reqs.append(backend_mod.BackendRequest(
                kind=backend_mod.GENERATE, example_id=r.example_id, input=r.model_input))
    try:
        responses = backend_mod.run_backend(bk, reqs, concurrency)
    except PromptkitError as exc:
        _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        for r in renderings:
            resp = responses[r.example_id]
            out = resp.chosen_word if r.regime is Regime.MLM else resp.output
            fh.write(json.dumps({"id": r.example_id, "output": out}, ensure_ascii=False) + "\n")
    click.echo(f"wrote {len(renderings)} predictions to {out_path}")


def _parse_for_regime(raw: str, regime: Regime, cfg: TemplateConfig, v: Verbalizer, categories):
    if regime is Regime.TRADITIONAL:
        return parsing_mod.parse_traditional_output(raw, cfg, v, categories)
    if regime is Regime.SENTINEL:
        return parsing_mod.parse_sentinel_output(raw, v, cfg, categories)
    if regime is Regime.MASK:
        return parsing_mod.parse_mask_output(raw, v, cfg, categories)
    raise PromptkitError(f"no seq2seq parser for regime {regime.value}")


def score_predictions(gold_path, pred_path, regime: Regime, tasks, cfg, v) -> dict:
    """Score one prediction file; returns {task: {...}} summary."""
    with open(pred_path, encoding="utf-8") as fh:
        preds = {d["id"]: d["output"] for d in map(json.loads, filter(str.strip, fh))}
    results = {}
    if regime is Regime.MLM:
        with open(gold_path, encoding="utf-8") as fh:
            sentences = corpus_mod.sentences_from_jsonl(fh)
        gold_labels, pred_labels = [], []
        for s in sentences:
            for k, t in enumerate(s.triplets):
                ex_id = f"{s.sentence_id}#{k}"
                if ex_id not in preds:
                    raise PromptkitError(f"missing prediction for {ex_id}")
                gold_labels.append(t.polarity)
                pred_labels.append(parsing_mod.parse_mlm_output(preds[ex_id], v))
        acc = metrics_mod.accuracy(gold_labels, pred_labels)
        results["apd"] = {"accuracy": acc, "n": len(gold_labels)}
        return results

    with open(gold_path, encoding="utf-8") as fh:
        sentences = corpus_mod.sentences_from_jsonl(fh)
    categories = corpus_mod.collect_categories(sentences)
    for task_name in tasks:
        task = Task(task_name)
        gold_preds, sys_preds = [], []
        dropped = 0
        for s in sentences:
            gold_parsed = parsing_mod.ParsedOutput(triplets=list(s.triplets))
            gold_preds.append(parsing_mod.project_task(gold_parsed, task, s.sentence_id))
            raw = preds.get(s.sentence_id)
            if raw is None:
                raise PromptkitError(f"missing prediction for {s.sentence_id}")
            parsed = _parse_for_regime(raw, regime, cfg, v, categories)
            dropped += parsed.dropped_clauses
            sys_preds.append(parsing_mod.project_task(parsed, task, s.sentence_id))
        p, r, f1, counts = metrics_mod.micro_f1(gold_preds, sys_preds)
        results[task.value] = {
            "precision": p, "recall": r, "f1": f1,
            "tp": counts.tp, "fp": counts.fp, "fn": counts.fn,
            "dropped_clauses": dropped,
        }
    return results


@main.command()
@click.option("--gold", "gold_path", type=click.Path(exists=True), required=True)
@click.option("--pred", "pred_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--regime", type=click.Choice([r.value for r in Regime]), required=True)
@click.option("--task", "tasks", multiple=True,
              type=click.Choice(["acd", "ate", "acte", "tasd", "apd"]),
              default=("acd", "ate", "acte", "tasd"))
@click.option("--language", default="en")
@click.option("--tables", "tables_path", type=click.Path(exists=True), default=None,
              envvar=CONFIG_ENV_VAR)
def score(gold_path, pred_path, out_path, regime, tasks, language, tables_path):
    """Parse predictions, project per task and compute scores."""
    regime = Regime(regime)
    tables = load_tables(tables_path)
    lang = "cs" if regime is Regime.MLM else language
    v = build_verbalizer(tables, lang)
    cfg = build_template_config(tables, regime, lang)
    try:
        results = score_predictions(gold_path, pred_path, regime, tasks, cfg, v)
    except PromptkitError as exc:
        _fail(str(exc))
    Path(out_path).write_text(json.dumps(results, indent=2), encoding="utf-8")
    click.echo(json.dumps(results, indent=2))


@main.command()
@click.option("--scores", "score_paths", type=click.Path(exists=True), multiple=True, required=True,
              help="per-seed score JSON files")
@click.option("--out", "out_path", type=click.Path(), required=True)
def report(score_paths, out_path):
    """Aggregate per-seed score files into a mean±CI table (TSV)."""
    per_task: dict[str, list[float]] = {}
    for path in score_paths:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for task_name, entry in data.items():
            value = entry.get("f1", entry.get("accuracy"))
            per_task.setdefault(task_name, []).append(value)
    lines = ["task\tn_seeds\tscore"]
    for task_name, values in sorted(per_task.items()):
        rep = metrics_mod.aggregate_seeds(values, Task(task_name))
        lines.append(f"{task_name}\t{len(values)}\t{rep.cell()}")
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo("\n".join(lines))


@main.command()
@click.option("--in", "raw_path", type=click.Path(exists=True), required=True,
              help="pre-training corpus, one review per line")
@click.option("--annotated", "annotated_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def dedup(raw_path, annotated_path, out_path):
    """Remove raw reviews that also appear in the annotated corpus."""
    with open(annotated_path, encoding="utf-8") as fh:
        annotated = [line.rstrip("\n") for line in fh]
    dd = corpus_mod.Deduplicator(annotated)
    kept = 0
    with open(raw_path, encoding="utf-8") as src, open(out_path, "w", encoding="utf-8") as dst:
        for line in dd.filter(line.rstrip("\n") for line in src):
            dst.write(line + "\n")
            kept += 1
    click.echo(f"kept {kept}, removed {dd.removed}")


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@main.command("run-all")
@click.option("--absa-xml", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--regime", type=click.Choice([r.value for r in Regime]), default="traditional")
@click.option("--backend", "backend_spec", default="gold")
@click.option("--seeds", default="1,2,3,4,5")
@click.option("--few-shot", "few_shot", type=int, default=None)
@click.option("--zero-shot", "zero_shot", is_flag=True, default=False)
@click.option("--language", default="en")
@click.option("--tables", "tables_path", type=click.Path(exists=True), default=None,
              envvar=CONFIG_ENV_VAR)
@click.pass_context
def run_all(ctx, absa_xml, out_dir, regime, backend_spec, seeds, few_shot, zero_shot,
            language, tables_path):
    """Chain ingest -> split -> render -> predict -> score -> report and record a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed_list = [int(s) for s in seeds.split(",") if s.strip()]

    sentences_path = out / "sentences.jsonl"
    ctx.invoke(ingest, fmt="absa", in_path=absa_xml, out_path=str(sentences_path))

    # training-file generation for an external trainer; zero-shot writes nothing
    if few_shot is not None:
        ctx.invoke(split, in_path=str(sentences_path), out_path=str(out / "train.jsonl"),
                   few_shot=few_shot, zero_shot=False, val_frac=None)

    renderings_path = out / "renderings.jsonl"
    ctx.invoke(render, in_path=str(sentences_path), out_path=str(renderings_path),
               regime=regime, language=language, tables_path=tables_path)

    tasks = ("apd",) if Regime(regime) is Regime.MLM else ("acd", "ate", "acte", "tasd")
    score_files = []
    for seed in seed_list:
        pred_path = out / f"predictions.seed{seed}.jsonl"
        ctx.invoke(predict, in_path=str(renderings_path), out_path=str(pred_path),
                   backend_spec=backend_spec, seed=seed, concurrency=8,
                   language="cs" if Regime(regime) is Regime.MLM else language)
        score_path = out / f"scores.seed{seed}.json"
        ctx.invoke(score, gold_path=str(sentences_path), pred_path=str(pred_path),
                   out_path=str(score_path), regime=regime, tasks=tasks,
                   language=language, tables_path=tables_path)
        score_files.append(str(score_path))

    ctx.invoke(report, score_paths=tuple(score_files), out_path=str(out / "report.tsv"))

    manifest = {
        "absa_xml": {"path": str(absa_xml), "sha256": _sha256(absa_xml)},
        "regime": regime,
        "backend": backend_spec,
        "seeds": seed_list,
        "few_shot": few_shot,
        "zero_shot": zero_shot,
        "language": language,
        "config_hash": hashlib.sha256(json.dumps(
            [regime, backend_spec, seed_list, few_shot, zero_shot, language],
            sort_keys=True).encode()).hexdigest(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    click.echo(f"manifest written to {out / 'manifest.json'}")


if __name__ == "__main__":
    sys.exit(main())
