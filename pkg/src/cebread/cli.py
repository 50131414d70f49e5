"""Command-line front end.

Configuration precedence is flags > config file > defaults. The config
file is flat ``key = value`` lines (quotes optional, # comments); keys are
the long flag names. All randomness flows from --seed: folds, forests, and
permutations each derive their own stream from it, so identical
invocations produce byte-identical machine-readable outputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, Document, load_corpus, stratified_folds
from .errors import CebreadError, ConfigError
from .eval import (
    ABLATION_SETS,
    GridSpec,
    ablation_to_dict,
    default_grids,
    format_ablation_table,
    format_importance_table,
    format_spearman_table,
    permutation_importance,
    run_ablations,
    spearman_ranking,
)
from .features import (
    SYLL_FEATURES,
    TRAD_FEATURES,
    assemble,
    load_embeddings,
    matrix_to_csv,
)
from .models import MODEL_KINDS, load_model, mdi_importance, predict, save_model, train
from .textproc import syllabify, tokenize

_CONFIG_KEYS = {
    "corpus",
    "format",
    "embeddings",
    "features",
    "models",
    "grid",
    "k",
    "seed",
    "jobs",
    "out",
    "repeats",
}

_GROUP_NAMES = {"trad": "TRAD", "syll": "SYLL", "neural": "NEURAL"}

# Canonical ablation row for each combination of feature groups.
_ROW_BY_GROUPS = {
    frozenset({"TRAD"}): "TRAD",
    frozenset({"SYLL"}): "SYLL",
    frozenset({"TRAD", "SYLL"}): "TRAD+SYLL",
    frozenset({"NEURAL"}): "NEURAL",
    frozenset({"TRAD", "SYLL", "NEURAL"}): "Combination",
}


def parse_feature_groups(spec: str) -> tuple[str, ...]:
    """Turn "trad,syll" (or "trad+syll", "combination") into group names."""
    tokens = [t.strip().lower() for part in spec.split(",") for t in part.split("+")]
    tokens = [t for t in tokens if t]
    if not tokens:
        raise ConfigError("empty --features value")
    groups: list[str] = []
    for token in tokens:
        if token == "combination":
            wanted = ["TRAD", "SYLL", "NEURAL"]
        elif token in _GROUP_NAMES:
            wanted = [_GROUP_NAMES[token]]
        else:
            raise ConfigError(
                f"unknown feature group {token!r}; choose from trad, syll, neural, combination"
            )
        for g in wanted:
            if g not in groups:
                groups.append(g)
    return tuple(groups)


def ablation_row_name(groups: tuple[str, ...]) -> str:
    key = frozenset(groups)
    if key not in _ROW_BY_GROUPS:
        raise ConfigError(
            f"feature combination {'+'.join(sorted(groups))} is not a reported row; "
            f"choose one of {list(ABLATION_SETS)}"
        )
    return _ROW_BY_GROUPS[key]


def parse_models(spec: str) -> tuple[str, ...]:
    tokens = [t.strip().lower() for t in spec.split(",") if t.strip()]
    if tokens == ["all"] or not tokens:
        return MODEL_KINDS
    unknown = [t for t in tokens if t not in MODEL_KINDS]
    if unknown:
        raise ConfigError(f"unknown models {unknown}; choose from {list(MODEL_KINDS)} or all")
    return tuple(tokens)


def _parse_scalar(raw: str):
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config_file(path: str | Path) -> dict:
    """Flat key = value file; keys are the long flag names."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    data: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r}; known keys: {sorted(_CONFIG_KEYS)}"
            )
        data[key] = _parse_scalar(value.strip())
    return data


@dataclass(frozen=True)
class RunConfig:
    corpus: str | None = None
    format: str = "jsonl"
    embeddings: str | None = None
    features: str | None = None
    models: str = "all"
    grid: str | None = None
    k: int = 5
    seed: int = 0
    jobs: int = 1
    out: str = "out"
    repeats: int = 10

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.format not in ("jsonl", "csv", "dir"):
            raise ConfigError(f"format must be jsonl, csv, or dir, got {self.format!r}")

    def out_dir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


def build_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    values: dict = {}
    for field in dataclasses.fields(RunConfig):
        flag = getattr(args, field.name, None)
        if flag is not None:
            values[field.name] = flag
        elif field.name in file_values:
            values[field.name] = file_values[field.name]
    for key in ("k", "seed", "jobs", "repeats"):
        if key in values:
            try:
                values[key] = int(values[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be an integer, got {values[key]!r}")
    return RunConfig(**values)


def load_grid_overrides(path: str | Path) -> dict[str, GridSpec]:
    """JSON file {model kind: {hyperparameter: [candidate values]}}."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read grid file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"grid file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"grid file {path} must hold an object keyed by model kind")
    grids: dict[str, GridSpec] = {}
    for kind, candidates in raw.items():
        if kind not in MODEL_KINDS:
            raise ConfigError(f"grid file {path}: unknown model kind {kind!r}")
        if not isinstance(candidates, dict) or not all(
            isinstance(v, list) for v in candidates.values()
        ):
            raise ConfigError(
                f"grid file {path}: {kind} must map hyperparameter names to value lists"
            )
        grids[kind] = GridSpec(kind=kind, candidates=candidates)
    return grids


def _require_corpus(config: RunConfig) -> Corpus:
    if not config.corpus:
        raise ConfigError("no corpus given: pass --corpus or set corpus in the config file")
    return load_corpus(config.corpus, config.format)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(c) if isinstance(c, float) else c for c in row])


def groups_from_schema(schema: tuple[str, ...]) -> tuple[str, ...]:
    """Recover which feature groups a trained model was built from."""
    groups: list[str] = []
    rest = list(schema)
    if tuple(rest[: len(TRAD_FEATURES)]) == TRAD_FEATURES:
        groups.append("TRAD")
        rest = rest[len(TRAD_FEATURES) :]
    if tuple(rest[: len(SYLL_FEATURES)]) == SYLL_FEATURES:
        groups.append("SYLL")
        rest = rest[len(SYLL_FEATURES) :]
    if rest:
        if all(name.startswith("neural_") for name in rest):
            groups.append("NEURAL")
        else:
            raise ConfigError(
                "model schema does not decompose into known feature groups; "
                f"unmatched columns start at {rest[0]!r}"
            )
    return tuple(groups)


def cmd_extract(args) -> int:
    config = build_config(args)
    corpus = _require_corpus(config)
    out = config.out_dir()
    written = []
    for name, groups in (("trad", ("TRAD",)), ("syll", ("SYLL",))):
        path = out / f"{name}.csv"
        matrix_to_csv(assemble(corpus, groups), path)
        written.append(path)
    if config.embeddings:
        store = load_embeddings(config.embeddings)
        path = out / "combined.csv"
        matrix_to_csv(assemble(corpus, ("TRAD", "SYLL", "NEURAL"), store), path)
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_evaluate(args) -> int:
    config = build_config(args)
    corpus = _require_corpus(config)
    store = load_embeddings(config.embeddings) if config.embeddings else None
    feature_sets = None
    if config.features is not None:
        feature_sets = [ablation_row_name(parse_feature_groups(config.features))]
    models = parse_models(config.models)
    grids = default_grids()
    if config.grid:
        grids.update(load_grid_overrides(config.grid))
    folds = stratified_folds(corpus, config.k, seed=config.seed)
    rows = run_ablations(
        corpus,
        folds,
        embeddings=store,
        grids=grids,
        seed=config.seed,
        jobs=config.jobs,
        models=models,
        feature_sets=feature_sets,
    )
    out = config.out_dir()

    # Refit each winning configuration on the whole corpus so the
    # importance and predict commands have a model file to work from.
    saved: dict[str, str] = {}
    refit = {}
    matrices = {}
    for row in rows:
        if row.skipped:
            continue
        sets = ABLATION_SETS[row.feature_set]
        if row.feature_set not in matrices:
            matrices[row.feature_set] = assemble(corpus, sets, store)
        model = train(row.kind, matrices[row.feature_set], row.search.best_params)
        name = f"model_{row.feature_set.lower()}_{row.kind}.json"
        save_model(model, out / name)
        key = f"{row.feature_set}/{row.kind}"
        saved[key] = name
        refit[key] = model

    row_dicts = []
    for row in rows:
        d = ablation_to_dict(row)
        model = refit.get(f"{row.feature_set}/{row.kind}")
        if model is not None and model.kind == "rforest":
            fv = mdi_importance(model)
            d["mdi"] = {name: float(v) for name, v in zip(fv.names, fv.values)}
        row_dicts.append(d)
    spearman = {
        feature_set: [[e.feature, e.rho, e.degenerate] for e in spearman_ranking(matrix)]
        for feature_set, matrix in matrices.items()
    }

    payload = {
        "seed": config.seed,
        "k": config.k,
        "models": list(models),
        "feature_sets": [r.feature_set for r in rows],
        "fold_assignments": dict(folds.assignments),
        "saved_models": saved,
        "spearman": spearman,
        "rows": row_dicts,
    }
    results_path = out / "results.json"
    results_path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    table = format_ablation_table(rows)
    (out / "report.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    print(f"\nresults written to {results_path}")
    return 0


def cmd_importance(args) -> int:
    config = build_config(args)
    model = load_model(args.model)
    corpus = _require_corpus(config)
    groups = groups_from_schema(model.schema)
    store = None
    if "NEURAL" in groups:
        if not config.embeddings:
            raise ConfigError("model was trained with neural features; pass --embeddings")
        store = load_embeddings(config.embeddings)
    matrix = assemble(corpus, groups, store)
    if matrix.schema != model.schema:
        raise ConfigError(
            "extracted features do not match the model schema; was the model "
            "trained with different embeddings?"
        )
    out = config.out_dir()

    perm = permutation_importance(model, matrix, repeats=config.repeats, seed=config.seed)
    ranked_perm = sorted(perm, key=lambda e: -e.mean_drop)
    _write_csv(
        out / "permutation.csv",
        ["feature", "mean_drop", "std_drop"],
        [[e.feature, e.mean_drop, e.std_drop] for e in ranked_perm],
    )

    if model.kind == "rforest":
        mdi = mdi_importance(model)
        order = sorted(range(len(mdi.names)), key=lambda i: -mdi.values[i])
        _write_csv(
            out / "mdi.csv",
            ["feature", "importance"],
            [[mdi.names[i], float(mdi.values[i])] for i in order],
        )
        print(format_importance_table(mdi, perm))
        print("\ntop 5 by mdi:")
        for i in order[:5]:
            print(f"  {mdi.names[i]}  {mdi.values[i]:.4f}")
    else:
        print(f"mdi skipped: model kind {model.kind} has no impurity importances")
    print("\ntop 5 by permutation drop:")
    for entry in ranked_perm[:5]:
        print(f"  {entry.feature}  {entry.mean_drop:.4f}")
    return 0


def cmd_correlate(args) -> int:
    config = build_config(args)
    corpus = _require_corpus(config)
    groups = parse_feature_groups(config.features) if config.features else ("TRAD", "SYLL")
    store = None
    if "NEURAL" in groups:
        if not config.embeddings:
            raise ConfigError("neural features requested; pass --embeddings")
        store = load_embeddings(config.embeddings)
    matrix = assemble(corpus, groups, store)
    entries = spearman_ranking(matrix)
    out = config.out_dir()
    _write_csv(
        out / "spearman.csv",
        ["feature", "rho", "degenerate"],
        [[e.feature, e.rho, str(e.degenerate).lower()] for e in entries],
    )
    print(format_spearman_table(entries[:10]))
    return 0


def _read_prediction_inputs(args) -> list[tuple[str, str]]:
    if args.text is not None and args.input is not None:
        raise ConfigError("pass either --text or --input, not both")
    if args.text is not None:
        return [("text1", args.text)]
    if args.input is None:
        raise ConfigError("nothing to predict: pass --text or --input")
    try:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read input file {args.input}: {exc}") from exc
    docs: list[tuple[str, str]] = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        doc_id, text = f"line{i}", line
        if line.lstrip().startswith("{"):
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.input}:{i}: invalid JSON: {exc}") from exc
            if "text" not in record:
                raise ConfigError(f"{args.input}:{i}: JSON record has no 'text' field")
            text = record["text"]
            doc_id = str(record.get("id", doc_id))
        docs.append((doc_id, text))
    if not docs:
        raise ConfigError(f"input file {args.input} contains no texts")
    return docs


def cmd_predict(args) -> int:
    model = load_model(args.model)
    groups = groups_from_schema(model.schema)
    store = None
    if "NEURAL" in groups:
        if not args.embeddings:
            raise ConfigError("model was trained with neural features; pass --embeddings")
        store = load_embeddings(args.embeddings)
    inputs = _read_prediction_inputs(args)
    # label is a placeholder: prediction inputs are unlabeled, but the
    # document type insists on a valid grade.
    docs = [Document(id=doc_id, text=text, label=1) for doc_id, text in inputs]
    matrix = assemble(Corpus(documents=tuple(docs)), groups, store)
    if matrix.schema != model.schema:
        raise ConfigError("extracted features do not match the model schema")
    for i, (doc_id, _) in enumerate(inputs):
        vector = matrix.row(i)
        label = predict(model, vector)
        echo = {
            name: float(value)
            for name, value in zip(vector.names, vector.values)
            if not name.startswith("neural_")
        }
        record = {"id": doc_id, "label": int(label), "features": echo}
        if "NEURAL" in groups:
            record["neural_dim"] = sum(1 for n in vector.names if n.startswith("neural_"))
        print(json.dumps(record, sort_keys=True))
    return 0


def cmd_syllabify(args) -> int:
    tokens = tokenize(args.text)
    for token in tokens:
        parts = syllabify(token.skeleton)
        print(f"{token.surface}\t{token.skeleton}\t{'-'.join(parts)}\t{len(parts)}")
    return 0


def _add_common(parser: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "corpus": dict(help="corpus path (file or directory)"),
        "format": dict(choices=["jsonl", "csv", "dir"], help="corpus format (default jsonl)"),
        "embeddings": dict(help="JSONL file of per-document embedding vectors"),
        "features": dict(help="feature groups, e.g. trad,syll or combination"),
        "models": dict(help="comma list of logreg,svm,rforest, or all"),
        "grid": dict(help="JSON file of hyperparameter grids overriding the defaults"),
        "k": dict(type=int, help="number of CV folds (default 5)"),
        "seed": dict(type=int, help="run seed; every random stream derives from it"),
        "jobs": dict(type=int, help="parallel workers for grid search (default 1)"),
        "out": dict(help="output directory (default ./out)"),
        "repeats": dict(type=int, help="permutation repeats (default 10)"),
        "config": dict(help="key = value config file; flags override it"),
    }
    for name in names:
        parser.add_argument(f"--{name}", default=None, **flags[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cebread",
        description="Readability grading for early-grade Cebuano texts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="write feature CSVs for a corpus")
    _add_common(p, "corpus", "format", "embeddings", "out", "config")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="cross-validated ablation study")
    _add_common(
        p, "corpus", "format", "embeddings", "features", "models", "grid",
        "k", "seed", "jobs", "out", "config",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", help="MDI and permutation importances for a saved model")
    p.add_argument("--model", required=True, help="path to a serialized model")
    _add_common(p, "corpus", "format", "embeddings", "repeats", "seed", "out", "config")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("correlate", help="Spearman feature-label correlations")
    _add_common(p, "corpus", "format", "embeddings", "features", "out", "config")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("predict", help="grade new texts with a saved model")
    p.add_argument("--model", required=True, help="path to a serialized model")
    p.add_argument("--text", help="a single text to grade")
    p.add_argument("--input", help="file of texts: one per line, or JSONL with id/text")
    _add_common(p, "embeddings")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("syllabify", help="show skeletons and syllable splits (debug)")
    p.add_argument("text", help="text to tokenize and syllabify")
    p.set_defaults(func=cmd_syllabify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CebreadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
