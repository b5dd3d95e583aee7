"""Metrics and the model-comparison harness.

Three per-edge scorers share one interface (higher score = more likely
positive): the sentiment passthrough p_e, the network-only solver with all
sentiment costs zeroed, and the combined solver. Harnesses sweep the evidence
ratio or the number of dropped text features over seeded train/test splits
and report AUC/ROC and the area under the negative-class precision-recall
curve with fold standard errors. A leave-one-out baseline predicts each sign
from triangle-type histograms with all other signs observed.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from . import sentiment as sent
from .graph import (
    EvidencePartition,
    SignedGraph,
    apply_evidence_mask,
    bfs_sample,
    derive_seed,
    edge_subgraph,
    random_edge_partition,
    remove_overlap,
)
from .inference import SolverParams, admm_solve, build_problem
from .learning import LearnConfig, learn_weights
from .potentials import CostWeights

__all__ = [
    "ScoredEdge",
    "SweepReport",
    "SweepConfig",
    "auc_roc",
    "auc_neg_pr",
    "roc_curve_points",
    "neg_pr_curve_points",
    "predict_sentiment_only",
    "predict_network_only",
    "predict_combined",
    "scored_cell",
    "loo_features",
    "loo_train_eval",
    "run_evidence_sweep",
    "run_feature_drop_sweep",
    "drop_sentiment_probabilities",
    "with_edge_probabilities",
    "write_report_csv",
    "write_report_json",
    "write_curve_csv",
]


@dataclass(frozen=True)
class ScoredEdge:
    edge: int
    score: float
    truth: int

    def __post_init__(self):
        if not (np.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.truth not in (0, 1):
            raise ValueError("truth must be binary")


def _split(scored: Iterable[ScoredEdge]) -> tuple[np.ndarray, np.ndarray]:
    items = list(scored)
    return (
        np.array([s.score for s in items], dtype=float),
        np.array([s.truth for s in items], dtype=int),
    )


def auc_roc(scored: Iterable[ScoredEdge]) -> float:
    """Mann-Whitney statistic: P(random positive scores above random negative),
    ties counted half."""
    scores, truth = _split(scored)
    n_pos = int(truth.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC/ROC needs both classes")
    ranks = rankdata(scores)
    u = float(ranks[truth == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def neg_pr_curve_points(scored: Iterable[ScoredEdge]) -> np.ndarray:
    """Achieved (recall, precision) steps for the negative class, scored by
    1 - score, tied scores grouped; prepended with (0, first precision)."""
    scores, truth = _split(scored)
    if int((truth == 0).sum()) == 0:
        raise ValueError("negative-class PR needs at least one negative")
    neg_scores = 1.0 - scores
    neg_truth = (truth == 0).astype(int)
    order = np.argsort(-neg_scores, kind="stable")
    s_sorted = neg_scores[order]
    y_sorted = neg_truth[order]
    tp = np.cumsum(y_sorted)
    k = np.arange(1, len(y_sorted) + 1)
    # Thresholds sit after the last element of each tied-score group.
    boundary = np.append(s_sorted[1:] != s_sorted[:-1], True)
    total_neg = int(neg_truth.sum())
    recall = tp[boundary] / total_neg
    precision = tp[boundary] / k[boundary]
    points = np.column_stack([recall, precision])
    return np.vstack([[0.0, points[0, 1]], points])


def auc_neg_pr(scored: Iterable[ScoredEdge]) -> float:
    """Trapezoidal area under the negative-class precision-recall steps."""
    pts = neg_pr_curve_points(scored)
    return float(np.trapezoid(pts[:, 1], pts[:, 0]))


def roc_curve_points(scored: Iterable[ScoredEdge]) -> np.ndarray:
    """Achieved (fpr, tpr) steps, tied scores grouped, anchored at (0,0)."""
    scores, truth = _split(scored)
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    y_sorted = truth[order]
    tp = np.cumsum(y_sorted)
    fp = np.cumsum(1 - y_sorted)
    boundary = np.append(s_sorted[1:] != s_sorted[:-1], True)
    n_pos = max(int(truth.sum()), 1)
    n_neg = max(int((1 - truth).sum()), 1)
    pts = np.column_stack([fp[boundary] / n_neg, tp[boundary] / n_pos])
    return np.vstack([[0.0, 0.0], pts])


def predict_sentiment_only(
    graph: SignedGraph, partition: EvidencePartition, p=None
) -> list[ScoredEdge]:
    """Score each target edge by its sentiment probability alone."""
    p_vec = graph.p_vector() if p is None else np.asarray(p, dtype=float)
    truth = graph.truth_vector()
    out = []
    for e in sorted(partition.targets):
        if np.isnan(p_vec[e]):
            raise ValueError(f"target edge {e} has no sentiment probability")
        out.append(ScoredEdge(e, float(p_vec[e]), int(truth[e])))
    return out


def _solver_scores(
    graph: SignedGraph,
    partition: EvidencePartition,
    p,
    weights: CostWeights,
    squared: bool,
    solver: SolverParams,
) -> list[ScoredEdge]:
    problem = build_problem(graph, partition, p, weights, squared)
    result = admm_solve(problem, solver)
    truth = graph.truth_vector()
    value_of = dict(zip(problem.variable_edges, result.x))
    return [
        ScoredEdge(e, float(np.clip(value_of[e], 0.0, 1.0)), int(truth[e]))
        for e in sorted(partition.targets)
    ]


def predict_network_only(
    graph: SignedGraph,
    partition: EvidencePartition,
    weights: CostWeights,
    squared: bool = True,
    solver: SolverParams = SolverParams(),
) -> list[ScoredEdge]:
    """Solver scores with every binned sentiment cost forced to zero, leaving
    triangle and prior terms only. The sentiment column is blanked entirely,
    so neither the objective nor the warm start sees p."""
    blank = np.full(len(graph.edges), np.nan)
    return _solver_scores(
        graph, partition, blank, weights.with_lambdas_zeroed(), squared, solver
    )


def predict_combined(
    graph: SignedGraph,
    partition: EvidencePartition,
    p,
    weights: CostWeights,
    squared: bool = True,
    solver: SolverParams = SolverParams(),
) -> list[ScoredEdge]:
    """Solver scores under the full objective."""
    return _solver_scores(graph, partition, p, weights, squared, solver)


def loo_features(graph: SignedGraph, edge_index: int) -> np.ndarray:
    """Leave-one-out feature vector for one edge, all other signs observed.

    Directed graphs: 16 triangle-type counts (2 directions x 2 signs for each
    wedge edge) plus the source's positive/negative out-degrees and the
    target's positive/negative in-degrees (20 total). Undirected graphs
    collapse direction: 4 triangle types plus 4 signed degrees (8 total).
    """
    target = graph.edges[edge_index]
    u, v = target.src, target.dst
    rep: dict[tuple[int, int], int] = {}
    for idx, e in enumerate(graph.edges):
        rep.setdefault(e.pair, idx)
    adj: dict[int, set[int]] = {}
    for a, b in rep:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    def wedge_type(a: int, w: int) -> int | None:
        """Type of the known edge between a and w: sign (and direction)."""
        idx = rep.get((min(a, w), max(a, w)))
        if idx is None or idx == edge_index:
            return None
        e = graph.edges[idx]
        if e.sign.x is None:
            return None
        s = int(e.sign.x)
        if not graph.directed:
            return s
        outgoing = 1 if e.src == a else 0
        return 2 * outgoing + s

    n_types = 4 if graph.directed else 2
    hist = np.zeros(n_types * n_types)
    for w in sorted(adj.get(u, set()) & adj.get(v, set())):
        if w in (u, v):
            continue
        t_u = wedge_type(u, w)
        t_v = wedge_type(v, w)
        if t_u is None or t_v is None:
            continue
        hist[n_types * t_u + t_v] += 1

    deg = np.zeros(4)
    for idx, e in enumerate(graph.edges):
        if idx == edge_index or e.sign.x is None:
            continue
        s = int(e.sign.x)
        if graph.directed:
            if e.src == u:
                deg[0 + s] += 1
            if e.dst == v:
                deg[2 + s] += 1
        else:
            if u in (e.src, e.dst):
                deg[0 + s] += 1
            if v in (e.src, e.dst):
                deg[2 + s] += 1
    return np.concatenate([hist, deg])


@dataclass(frozen=True)
class SweepReport:
    """Aggregated metrics for one (model, sweep point) cell."""

    model: str
    sweep_param: float
    auc_roc: float
    auc_neg_pr: float
    auc_roc_se: float
    auc_neg_pr_se: float
    fold_auc_roc: tuple[float, ...]
    fold_auc_neg_pr: tuple[float, ...]


def _aggregate(
    model: str, param: float, rocs: Sequence[float], neg_prs: Sequence[float]
) -> SweepReport:
    rocs = tuple(float(v) for v in rocs)
    neg_prs = tuple(float(v) for v in neg_prs)

    def se(vals):
        if len(vals) < 2:
            return 0.0
        return float(np.std(vals, ddof=1) / np.sqrt(len(vals)))

    return SweepReport(
        model,
        float(param),
        float(np.mean(rocs)),
        float(np.mean(neg_prs)),
        se(rocs),
        se(neg_prs),
        rocs,
        neg_prs,
    )


def loo_train_eval(
    graph: SignedGraph,
    folds: int = 5,
    include_sentiment: bool = False,
    l2_grid: Sequence[float] = (0.001, 0.01, 0.1, 1.0),
    cv_folds: int = 5,
    rng_seed: int = 0,
) -> SweepReport:
    """Leave-one-out baseline: per-edge triangle-type histograms (plus p_e if
    requested) fed to cross-validated logistic regression, evaluated across
    random edge folds. Single-class folds are skipped with a warning."""
    truth = graph.truth_vector()
    if np.isnan(truth).any():
        raise ValueError("LOO needs ground truth on every edge")
    X = np.array([loo_features(graph, i) for i in range(len(graph.edges))])
    if include_sentiment:
        p_vec = graph.p_vector()
        if np.isnan(p_vec).any():
            raise ValueError("include_sentiment requires p on every edge")
        X = np.column_stack([X, p_vec])
    fold_sets = random_edge_partition(graph, folds, rng_seed)
    rocs: list[float] = []
    neg_prs: list[float] = []
    for k, fold in enumerate(fold_sets):
        test_idx = sorted(fold)
        train_idx = [i for i in range(len(graph.edges)) if i not in fold]
        y_train = truth[train_idx]
        y_test = truth[test_idx]
        if len(np.unique(y_train)) < 2 or len(np.unique(y_test)) < 2:
            warnings.warn(f"fold {k} skipped: single-class data")
            continue
        model = sent.train_logreg(
            X[train_idx], y_train, l2_grid, cv_folds, derive_seed(rng_seed, "loo", k)
        )
        probs = model.proba(X[test_idx])
        scored = [
            ScoredEdge(e, float(np.clip(s, 0.0, 1.0)), int(t))
            for e, s, t in zip(test_idx, probs, y_test)
        ]
        rocs.append(auc_roc(scored))
        neg_prs.append(auc_neg_pr(scored))
    if not rocs:
        raise ValueError("every fold was degenerate")
    name = "loo+sent" if include_sentiment else "loo"
    return _aggregate(name, float("nan"), rocs, neg_prs)


@dataclass(frozen=True)
class SweepConfig:
    """Shared harness knobs for the evidence and feature-drop sweeps."""

    sampling: str = "random"  # "random" edge folds or "bfs" subgraph pairs
    folds: int = 2
    node_budget: int = 150
    learn: LearnConfig = field(default_factory=LearnConfig)
    solver: SolverParams = field(default_factory=SolverParams)
    squared: bool = True
    # Sentiment-model settings used by the feature-drop sweep.
    sentiment_sample_size: int = 500
    max_features: int = 10000
    banned_prefixes: tuple[str, ...] = ()
    l2_grid: tuple[float, ...] = (0.001, 0.01, 0.1, 1.0)
    cv_folds: int = 5

    def __post_init__(self):
        if self.sampling not in ("random", "bfs"):
            raise ValueError("sampling must be 'random' or 'bfs'")


def _train_test_graphs(
    graph: SignedGraph, config: SweepConfig, seed: int
) -> tuple[SignedGraph, SignedGraph]:
    if config.sampling == "random":
        folds = random_edge_partition(graph, max(config.folds, 2), derive_seed(seed, "folds"))
        return edge_subgraph(graph, folds[0]), edge_subgraph(graph, folds[1])
    rng = np.random.default_rng(derive_seed(seed, "bfs-seeds"))
    u, v = (int(i) for i in rng.choice(graph.node_count, size=2, replace=False))
    train = bfs_sample(graph, u, config.node_budget, derive_seed(seed, "bfs", 0))
    test = bfs_sample(graph, v, config.node_budget, derive_seed(seed, "bfs", 1))
    return train, remove_overlap(test, train)


def scored_cell(
    graph: SignedGraph,
    ratio: float,
    models: Sequence[str],
    seed: int,
    config: SweepConfig,
    p_full: np.ndarray | None = None,
) -> dict[str, list[ScoredEdge]]:
    """One (ratio, seed) experiment: sample, learn, score each model."""
    work = graph if p_full is None else with_edge_probabilities(graph, p_full)
    train_g, test_g = _train_test_graphs(work, config, seed)
    train_part = apply_evidence_mask(
        train_g, range(len(train_g.edges)), ratio, derive_seed(seed, "mask", 0), "train"
    )
    test_part = apply_evidence_mask(
        test_g, range(len(test_g.edges)), ratio, derive_seed(seed, "mask", 1), "test"
    )
    weights = None
    if "combined" in models:
        weights = learn_weights(train_g, train_part, None, config.learn)
    network_weights = None
    if "network" in models:
        # The network-only model never sees the text: train it with the
        # sentiment column blanked so its weights (and therefore its rows in
        # a feature-drop sweep) are independent of p.
        blank = np.full(len(train_g.edges), np.nan)
        network_weights = learn_weights(train_g, train_part, blank, config.learn)
    out: dict[str, list[ScoredEdge]] = {}
    for model in models:
        if model == "sentiment":
            # The sentiment model ignores evidence, so it is scored on the
            # whole test pool; its rows are exactly ratio-independent.
            all_targets = EvidencePartition(
                frozenset(), frozenset(range(len(test_g.edges))), frozenset()
            )
            out[model] = predict_sentiment_only(test_g, all_targets)
        elif model == "network":
            out[model] = predict_network_only(
                test_g, test_part, network_weights, config.squared, config.solver
            )
        elif model == "combined":
            out[model] = predict_combined(
                test_g, test_part, None, weights, config.squared, config.solver
            )
        else:
            raise ValueError(f"unknown model {model!r}")
    return out


def _run_cell(
    graph: SignedGraph,
    ratio: float,
    models: Sequence[str],
    seed: int,
    config: SweepConfig,
    p_full: np.ndarray | None = None,
) -> dict[str, tuple[float, float]] | None:
    """AUCs for one cell, or None when a sampled pool is single-class."""
    cells = scored_cell(graph, ratio, models, seed, config, p_full)
    out: dict[str, tuple[float, float]] = {}
    for model, edges in cells.items():
        truths = {s.truth for s in edges}
        if truths != {0, 1}:
            warnings.warn(f"seed {seed}: single-class sample, cell skipped")
            return None
        out[model] = (auc_roc(edges), auc_neg_pr(edges))
    return out


def run_evidence_sweep(
    graph: SignedGraph,
    ratios: Sequence[float],
    models: Sequence[str],
    seeds: Sequence[int],
    config: SweepConfig = SweepConfig(),
) -> list[SweepReport]:
    """AUCs as a function of the evidence ratio, aggregated over seeds.

    For each (ratio, seed): split into train/test per the sampling mode, mask
    signs at the ratio on both sides, learn weights on the training side, and
    score the test targets under each requested model.
    """
    for r in ratios:
        if not 0.0 < r < 1.0:
            raise ValueError("ratios must lie strictly inside (0, 1)")
    reports = []
    for ratio in ratios:
        per_model: dict[str, tuple[list[float], list[float]]] = {
            m: ([], []) for m in models
        }
        for seed in seeds:
            cell = _run_cell(graph, ratio, models, seed, config)
            if cell is None:
                continue
            for m, (roc, neg_pr) in cell.items():
                per_model[m][0].append(roc)
                per_model[m][1].append(neg_pr)
        for m in models:
            if not per_model[m][0]:
                raise ValueError(f"every seed degenerate at ratio {ratio}")
            reports.append(_aggregate(m, ratio, per_model[m][0], per_model[m][1]))
    return reports


def with_edge_probabilities(graph: SignedGraph, p: Sequence[float]) -> SignedGraph:
    """Copy of the graph with the p field replaced (NaN clears it)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (len(graph.edges),):
        raise ValueError("p must have one entry per edge")
    edges = tuple(
        replace(e, p=None if np.isnan(p[i]) else float(p[i]))
        for i, e in enumerate(graph.edges)
    )
    return SignedGraph(graph.node_count, edges, graph.directed)


def drop_sentiment_probabilities(
    graph: SignedGraph,
    m_values: Sequence[int],
    config: SweepConfig = SweepConfig(),
    sample_seed: int = 0,
) -> list[tuple[int, np.ndarray]]:
    """Per-edge sentiment probabilities after dropping the top-m features.

    The model trains on a seeded sample of the graph's commented edges;
    features are ranked by mutual information with the sign on that same
    sample. Requested m values are clamped to the available feature count, so
    an oversized m means "drop everything" (the model then predicts the class
    prior). Returns one (requested_m, p_vector) pair per entry of m_values.
    """
    texts = [e.text for e in graph.edges]
    if any(t is None for t in texts):
        raise ValueError("feature dropping requires text on every edge")
    truth = graph.truth_vector()
    if np.isnan(truth).any():
        raise ValueError("feature dropping requires ground truth on every edge")
    rng = np.random.default_rng(derive_seed(sample_seed, "sent-sample"))
    sample_size = min(config.sentiment_sample_size, len(graph.edges))
    sample = sorted(
        int(i) for i in rng.choice(len(graph.edges), size=sample_size, replace=False)
    )
    sample_texts = [texts[i] for i in sample]
    sample_labels = truth[sample]
    vocab = sent.build_vocabulary(
        sample_texts, config.max_features, config.banned_prefixes
    )
    X_sample = sent.featurize_corpus(sample_texts, vocab)
    ranking = sent.rank_features_mi(X_sample, sample_labels)

    out: list[tuple[int, np.ndarray]] = []
    for m_req in m_values:
        m = min(int(m_req), X_sample.shape[1])
        X_m, kept = sent.drop_top_features(X_sample, ranking, m)
        vocab_m = sent.reduce_vocabulary(vocab, kept)
        if X_m.shape[1] == 0 or len(np.unique(sample_labels)) < 2:
            p_full = np.full(len(graph.edges), float(np.mean(sample_labels)))
        else:
            model = sent.train_logreg(
                X_m,
                sample_labels,
                config.l2_grid,
                config.cv_folds,
                derive_seed(0, "drop-train", int(m)),
            )
            X_all = sent.featurize_corpus(texts, vocab_m)
            p_full = np.clip(model.proba(X_all), 1e-9, 1.0 - 1e-9)
        out.append((int(m_req), p_full))
    return out


def run_feature_drop_sweep(
    graph: SignedGraph,
    m_values: Sequence[int],
    fixed_ratio: float,
    seeds: Sequence[int],
    config: SweepConfig = SweepConfig(),
) -> list[SweepReport]:
    """AUCs as a function of the number of dropped text features at one
    evidence ratio.

    For each m, the top-m features are removed, the sentiment model retrained
    (see :func:`drop_sentiment_probabilities`), every edge re-scored, and the
    three models evaluated exactly as in the evidence sweep. The network
    model never sees the text, so its rows are constant in m.
    """
    probabilities = drop_sentiment_probabilities(
        graph, m_values, config, seeds[0] if len(seeds) else 0
    )
    reports = []
    for m_req, p_full in probabilities:
        per_model: dict[str, tuple[list[float], list[float]]] = {
            name: ([], []) for name in ("sentiment", "network", "combined")
        }
        for seed in seeds:
            cell = _run_cell(
                graph,
                fixed_ratio,
                ("sentiment", "network", "combined"),
                seed,
                config,
                p_full=p_full,
            )
            if cell is None:
                continue
            for name, (roc, neg_pr) in cell.items():
                per_model[name][0].append(roc)
                per_model[name][1].append(neg_pr)
        for name in ("sentiment", "network", "combined"):
            if not per_model[name][0]:
                raise ValueError(f"every seed degenerate at m={m_req}")
            reports.append(
                _aggregate(name, float(m_req), per_model[name][0], per_model[name][1])
            )
    return reports


def write_report_csv(reports: Sequence[SweepReport], stream: IO[str]) -> None:
    stream.write("model,sweep_param,fold,auc_roc,auc_neg_pr\n")
    for rep in reports:
        for k, (roc, neg_pr) in enumerate(zip(rep.fold_auc_roc, rep.fold_auc_neg_pr)):
            stream.write(f"{rep.model},{rep.sweep_param!r},{k},{roc!r},{neg_pr!r}\n")


def write_report_json(reports: Sequence[SweepReport], stream: IO[str]) -> None:
    payload = [
        {
            "model": rep.model,
            "sweep_param": rep.sweep_param,
            "auc_roc": rep.auc_roc,
            "auc_neg_pr": rep.auc_neg_pr,
            "auc_roc_se": rep.auc_roc_se,
            "auc_neg_pr_se": rep.auc_neg_pr_se,
            "folds": len(rep.fold_auc_roc),
        }
        for rep in reports
    ]
    json.dump(payload, stream, indent=2, sort_keys=True)
    stream.write("\n")


def write_curve_csv(points: np.ndarray, header: str, stream: IO[str]) -> None:
    stream.write(header + "\n")
    for xv, yv in points:
        stream.write(f"{float(xv)!r},{float(yv)!r}\n")
