"""Cross-validation, grid search, ablations, and feature diagnostics.

Everything here is deterministic given the fold assignment and the run
seed: grid points evaluate independently (optionally in parallel) and are
aggregated by grid order, so --jobs never changes any number in a report.
"""

from __future__ import annotations

import dataclasses
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import GRADE_LEVELS, Corpus, FoldAssignment
from .errors import EvalError
from .features import EmbeddingStore, FeatureMatrix, assemble
from .models import MODEL_KINDS, TrainedModel, make_params, predict_many, train
from .seeding import rng_for

SUMMARY_METRICS = ("accuracy", "macro_precision", "macro_recall", "macro_f1")

# Ablation rows in report order, mapped to the feature groups they combine.
ABLATION_SETS: dict[str, tuple[str, ...]] = {
    "TRAD": ("TRAD",),
    "SYLL": ("SYLL",),
    "TRAD+SYLL": ("TRAD", "SYLL"),
    "NEURAL": ("NEURAL",),
    "Combination": ("TRAD", "SYLL", "NEURAL"),
}


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: dict[int, dict[str, float]]
    confusion: tuple[tuple[int, ...], ...]


def compute_metrics(y_true, y_pred) -> Metrics:
    """Accuracy, per-class precision/recall/f1, and macro averages.

    The class set is fixed to the three grade levels: a class absent from
    both vectors still contributes zeros to the macro averages, and any
    zero-denominator score is reported as 0.
    """
    y_true = np.asarray(list(y_true), dtype=int)
    y_pred = np.asarray(list(y_pred), dtype=int)
    if y_true.shape != y_pred.shape:
        raise EvalError(
            f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted"
        )
    if y_true.size == 0:
        raise EvalError("cannot compute metrics on empty label vectors")
    stray = set(np.unique(np.concatenate([y_true, y_pred])).tolist()) - set(GRADE_LEVELS)
    if stray:
        raise EvalError(f"labels outside grade levels {GRADE_LEVELS}: {sorted(stray)}")

    index = {label: i for i, label in enumerate(GRADE_LEVELS)}
    confusion = np.zeros((len(GRADE_LEVELS), len(GRADE_LEVELS)), dtype=int)
    for t, p in zip(y_true, y_pred):
        confusion[index[t], index[p]] += 1

    per_class: dict[int, dict[str, float]] = {}
    for label, i in index.items():
        tp = confusion[i, i]
        fp = confusion[:, i].sum() - tp
        fn = confusion[i, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[label] = {
            "precision": float(precision),
            "recall": float(recall),
            "f1": float(f1),
        }

    return Metrics(
        accuracy=float(confusion.trace() / confusion.sum()),
        macro_precision=float(np.mean([per_class[c]["precision"] for c in GRADE_LEVELS])),
        macro_recall=float(np.mean([per_class[c]["recall"] for c in GRADE_LEVELS])),
        macro_f1=float(np.mean([per_class[c]["f1"] for c in GRADE_LEVELS])),
        per_class=per_class,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
    )


@dataclass(frozen=True)
class CvResult:
    kind: str
    params: object
    feature_set: str
    fold_metrics: tuple[Metrics, ...]
    mean: dict[str, float]
    std: dict[str, float]


def _summarize(fold_metrics) -> tuple[dict[str, float], dict[str, float]]:
    mean, std = {}, {}
    for name in SUMMARY_METRICS:
        values = np.array([getattr(m, name) for m in fold_metrics])
        mean[name] = float(values.mean())
        std[name] = float(values.std())
    return mean, std


def cross_validate(
    matrix: FeatureMatrix,
    folds: FoldAssignment,
    kind: str,
    params=None,
    feature_set: str = "",
) -> CvResult:
    """k-fold evaluation; each fold's model sees only its train rows.

    Standardization for the linear models happens inside train(), so the
    stats are refit per fold from train rows alone.
    """
    if set(matrix.doc_ids) != set(folds.assignments):
        raise EvalError("fold assignment does not cover exactly the matrix documents")
    row_of = {doc_id: i for i, doc_id in enumerate(matrix.doc_ids)}
    fold_metrics = []
    for fold in range(folds.k):
        test_rows = sorted(row_of[d] for d in folds.test_ids(fold))
        train_rows = sorted(row_of[d] for d in folds.train_ids(fold))
        if not test_rows:
            raise EvalError(f"fold {fold} has no test documents")
        if not train_rows:
            raise EvalError(f"fold {fold} has no train documents")
        model = train(kind, matrix.subset(train_rows), params)
        test = matrix.subset(test_rows)
        fold_metrics.append(compute_metrics(test.labels, predict_many(model, test)))
    mean, std = _summarize(fold_metrics)
    return CvResult(
        kind=kind,
        params=params if params is not None else make_params(kind),
        feature_set=feature_set,
        fold_metrics=tuple(fold_metrics),
        mean=mean,
        std=std,
    )


@dataclass(frozen=True)
class GridSpec:
    """Model kind plus candidate values per hyperparameter name."""

    kind: str
    candidates: dict[str, tuple]

    def points(self, seed: int = 0) -> list:
        names = list(self.candidates)
        combos = list(itertools.product(*(self.candidates[n] for n in names)))
        points = []
        for combo in combos:
            mapping = dict(zip(names, combo))
            if self.kind == "rforest":
                mapping.setdefault("seed", seed)
            points.append(make_params(self.kind, mapping))
        return points


def default_grids() -> dict[str, GridSpec]:
    """The searched hyperparameter ranges for each model family."""
    return {
        "logreg": GridSpec(
            kind="logreg",
            candidates={"penalty": ("l1", "l2"), "C": (0.01, 0.1, 1.0, 10.0)},
        ),
        "svm": GridSpec(
            kind="svm",
            candidates={
                "kernel": ("linear", "rbf"),
                "C": (0.1, 1.0, 10.0),
                "max_iter": (1000, 5000),
            },
        ),
        "rforest": GridSpec(
            kind="rforest",
            candidates={
                "n_estimators": (50, 100, 200),
                "max_features": ("sqrt", "log2", "all"),
                "max_depth": (5, 10, 20, None),
            },
        ),
    }


@dataclass(frozen=True)
class GridSearchResult:
    best_params: object
    best: CvResult
    results: tuple[CvResult, ...]


def _cv_point(args) -> CvResult:
    matrix, folds, kind, params, feature_set = args
    return cross_validate(matrix, folds, kind, params, feature_set=feature_set)


def grid_search(
    matrix: FeatureMatrix,
    folds: FoldAssignment,
    grid: GridSpec,
    seed: int = 0,
    jobs: int = 1,
    feature_set: str = "",
) -> GridSearchResult:
    """Evaluate the full Cartesian product; pick the best point.

    Best = highest mean macro-F1, ties broken by higher mean accuracy,
    then by position in grid order. With jobs > 1 the points run in
    worker processes; results are collected back in grid order, so the
    selection is identical either way.
    """
    points = grid.points(seed)
    if not points:
        raise EvalError("hyperparameter grid is empty")
    tasks = [(matrix, folds, grid.kind, p, feature_set) for p in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cv_point, tasks))
    else:
        results = [_cv_point(t) for t in tasks]
    best_i = 0
    for i, result in enumerate(results[1:], start=1):
        best = results[best_i]
        key = (result.mean["macro_f1"], result.mean["accuracy"])
        best_key = (best.mean["macro_f1"], best.mean["accuracy"])
        if key > best_key:
            best_i = i
    return GridSearchResult(
        best_params=points[best_i], best=results[best_i], results=tuple(results)
    )


@dataclass(frozen=True)
class AblationRow:
    feature_set: str
    kind: str
    skipped: bool = False
    reason: str = ""
    search: GridSearchResult | None = None


def run_ablations(
    corpus: Corpus,
    folds: FoldAssignment,
    embeddings: EmbeddingStore | None = None,
    grids: dict[str, GridSpec] | None = None,
    seed: int = 0,
    jobs: int = 1,
    models=MODEL_KINDS,
    feature_sets=None,
) -> list[AblationRow]:
    """Grid-searched CV for every (feature set, model) cell.

    With feature_sets=None all five rows run and the neural ones degrade
    to skipped rows when no embeddings are given. Naming a neural row
    explicitly without embeddings is an error instead.
    """
    explicit = feature_sets is not None
    if feature_sets is None:
        feature_sets = list(ABLATION_SETS)
    unknown = [f for f in feature_sets if f not in ABLATION_SETS]
    if unknown:
        raise EvalError(
            f"unknown feature sets {unknown}; choose from {list(ABLATION_SETS)}"
        )
    unknown_models = [m for m in models if m not in MODEL_KINDS]
    if unknown_models:
        raise EvalError(f"unknown models {unknown_models}; choose from {list(MODEL_KINDS)}")
    if grids is None:
        grids = default_grids()
    if explicit and embeddings is None:
        # Fail before any training starts, not after the linguistic rows ran.
        needy = [f for f in feature_sets if "NEURAL" in ABLATION_SETS[f]]
        if needy:
            raise EvalError(f"feature sets {needy} require embeddings")

    rows: list[AblationRow] = []
    for feature_set in feature_sets:
        groups = ABLATION_SETS[feature_set]
        if "NEURAL" in groups and embeddings is None:
            rows.extend(
                AblationRow(feature_set, kind, skipped=True, reason="no embeddings provided")
                for kind in models
            )
            continue
        matrix = assemble(corpus, groups, embeddings)
        for kind in models:
            search = grid_search(
                matrix, folds, grids[kind], seed=seed, jobs=jobs, feature_set=feature_set
            )
            rows.append(AblationRow(feature_set, kind, search=search))
    return rows


@dataclass(frozen=True)
class PermutationEntry:
    feature: str
    mean_drop: float
    std_drop: float


def permutation_importance(
    model: TrainedModel, matrix: FeatureMatrix, repeats: int, seed: int = 0
) -> list[PermutationEntry]:
    """Accuracy drop when one column is shuffled, averaged over repeats.

    Each (feature, repeat) pair draws a fresh permutation from its own
    seeded generator, so results are reproducible and independent of
    evaluation order. The identity permutation is allowed.
    """
    if repeats < 1:
        raise EvalError(f"repeats must be >= 1, got {repeats}")
    baseline = float((predict_many(model, matrix) == matrix.labels).mean())
    n = matrix.n_rows
    entries = []
    for j, name in enumerate(matrix.schema):
        drops = np.empty(repeats)
        for r in range(repeats):
            perm = rng_for(seed, "permutation", name, r).permutation(n)
            shuffled = matrix.X.copy()
            shuffled[:, j] = matrix.X[perm, j]
            permuted = FeatureMatrix(
                doc_ids=matrix.doc_ids, schema=matrix.schema, X=shuffled, labels=matrix.labels
            )
            accuracy = float((predict_many(model, permuted) == matrix.labels).mean())
            drops[r] = baseline - accuracy
        entries.append(PermutationEntry(name, float(drops.mean()), float(drops.std())))
    return entries


@dataclass(frozen=True)
class SpearmanEntry:
    feature: str
    rho: float
    degenerate: bool = False  # constant feature: correlation undefined, reported as 0


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_ranking(matrix: FeatureMatrix) -> list[SpearmanEntry]:
    """Spearman rho of each feature against the labels, sorted by |rho|.

    Computed as the Pearson correlation of tie-averaged ranks. Constant
    features get rho = 0 with the degenerate flag set; equal |rho| keeps
    schema order.
    """
    if matrix.n_rows < 2:
        raise EvalError("spearman ranking needs at least two rows")
    labels = matrix.labels.astype(float)
    if np.all(labels == labels[0]):
        raise EvalError("labels are constant; correlation is undefined")
    rank_y = _average_ranks(labels)
    cy = rank_y - rank_y.mean()
    ssy = float(cy @ cy)
    entries = []
    for j, name in enumerate(matrix.schema):
        col = matrix.X[:, j]
        if np.all(col == col[0]):
            entries.append(SpearmanEntry(name, 0.0, degenerate=True))
            continue
        rank_x = _average_ranks(col)
        cx = rank_x - rank_x.mean()
        rho = float((cx @ cy) / np.sqrt((cx @ cx) * ssy))
        entries.append(SpearmanEntry(name, rho))
    return sorted(entries, key=lambda e: -abs(e.rho))


# --- report rendering -------------------------------------------------------


def metrics_to_dict(m: Metrics) -> dict:
    return {
        "accuracy": m.accuracy,
        "macro_precision": m.macro_precision,
        "macro_recall": m.macro_recall,
        "macro_f1": m.macro_f1,
        "per_class": {str(label): dict(scores) for label, scores in m.per_class.items()},
        "confusion": [list(row) for row in m.confusion],
    }


def cvresult_to_dict(cv: CvResult) -> dict:
    return {
        "kind": cv.kind,
        "feature_set": cv.feature_set,
        "hyperparameters": dataclasses.asdict(cv.params),
        "folds": [metrics_to_dict(m) for m in cv.fold_metrics],
        "mean": dict(cv.mean),
        "std": dict(cv.std),
    }


def ablation_to_dict(row: AblationRow) -> dict:
    out = {"feature_set": row.feature_set, "model": row.kind, "skipped": row.skipped}
    if row.skipped:
        out["reason"] = row.reason
        return out
    out["best"] = cvresult_to_dict(row.search.best)
    out["grid"] = [cvresult_to_dict(r) for r in row.search.results]
    return out


def _render_table(header: list[str], body: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def format_ablation_table(rows: list[AblationRow]) -> str:
    header = ["features", "model", "accuracy", "precision", "recall", "macro_f1"]
    body = []
    for row in rows:
        if row.skipped:
            body.append([row.feature_set, row.kind, f"skipped: {row.reason}", "", "", ""])
            continue
        mean = row.search.best.mean
        body.append(
            [
                row.feature_set,
                row.kind,
                f"{mean['accuracy']:.3f}",
                f"{mean['macro_precision']:.3f}",
                f"{mean['macro_recall']:.3f}",
                f"{mean['macro_f1']:.3f}",
            ]
        )
    return _render_table(header, body)


def format_importance_table(mdi, permutation) -> str:
    """MDI and permutation importances side by side, sorted by MDI."""
    perm_by_name = {e.feature: e for e in permutation}
    order = np.argsort(-np.asarray(mdi.values))
    header = ["feature", "mdi", "perm_mean_drop", "perm_std"]
    body = []
    for i in order:
        name = mdi.names[i]
        entry = perm_by_name[name]
        body.append(
            [name, f"{mdi.values[i]:.4f}", f"{entry.mean_drop:.4f}", f"{entry.std_drop:.4f}"]
        )
    return _render_table(header, body)


def format_spearman_table(entries: list[SpearmanEntry]) -> str:
    header = ["feature", "spearman_rho"]
    body = [
        [e.feature, f"{e.rho:.3f}" + (" (constant)" if e.degenerate else "")]
        for e in entries
    ]
    return _render_table(header, body)
