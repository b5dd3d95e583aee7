"""Command-line entry point.

One binary, eight subcommands: synth, train-sentiment, predict-sentiment,
learn, infer, sweep, loo, reduce-verify. Every command is a pure function of
its input files, flags, and --seed; all randomness flows from --seed through
named sub-streams, so re-running reproduces artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import evaluation, reduction, sentiment
from .graph import (
    apply_evidence_mask,
    derive_seed,
    generate_synthetic,
    parse_edge_list,
    partition_from_signs,
    write_edge_list,
)
from .inference import SolverParams, admm_solve, build_problem, write_trace_csv
from .learning import LearnConfig, learn_weights, write_training_log
from .potentials import CostWeights

__all__ = ["main"]


def _solver_params(args) -> SolverParams:
    return SolverParams(
        rho=args.rho,
        eps_abs=args.eps_abs,
        eps_rel=args.eps_rel,
        max_iter=args.max_iter,
    )


def _add_solver_flags(parser) -> None:
    parser.add_argument("--rho", type=float, default=1.0)
    parser.add_argument("--eps-abs", type=float, default=1e-5)
    parser.add_argument("--eps-rel", type=float, default=1e-4)
    parser.add_argument("--max-iter", type=int, default=20000)
    parser.add_argument(
        "--linear-hinge",
        action="store_true",
        help="use linear instead of squared hinges for triangle terms",
    )


def _read_graph(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def cmd_synth(args) -> int:
    graph = generate_synthetic(
        args.nodes,
        args.edge_prob,
        args.camp_flip_noise,
        args.sentiment_noise,
        derive_seed(args.seed, "synth"),
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        write_edge_list(graph, fh)
    print(f"wrote {len(graph.edges)} edges over {graph.node_count} nodes to {args.out}")
    return 0


def cmd_train_sentiment(args) -> int:
    with open(args.corpus, "r", encoding="utf-8") as fh:
        labels, texts = sentiment.parse_comment_corpus(fh)
    rng = np.random.default_rng(derive_seed(args.seed, "sentiment-sample"))
    size = min(args.sample_size, len(texts))
    sample = sorted(int(i) for i in rng.choice(len(texts), size=size, replace=False))
    model = sentiment.train_sentiment(
        [texts[i] for i in sample],
        [labels[i] for i in sample],
        max_features=args.max_features,
        banned_prefixes=tuple(args.banned_prefixes.split(",")) if args.banned_prefixes else (),
        l2_grid=tuple(float(v) for v in args.l2_grid.split(",")),
        cv_folds=args.cv_folds,
        rng_seed=derive_seed(args.seed, "sentiment-train"),
        metadata={"sample_size": size, "seed": args.seed},
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        model.save(fh)
    print(f"trained on {size} comments, vocabulary {len(model.vocab)}, l2 {model.l2_strength}")
    return 0


def cmd_predict_sentiment(args) -> int:
    with open(args.model, "r", encoding="utf-8") as fh:
        model = sentiment.SentimentModel.load(fh)
    graph = _read_graph(args.edges)
    p = np.array(
        [
            np.nan if e.text is None else sentiment.predict_proba(model, e.text)
            for e in graph.edges
        ]
    )
    annotated = evaluation.with_edge_probabilities(graph, p)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_edge_list(annotated, fh)
    filled = int(np.sum(~np.isnan(p)))
    print(f"filled p on {filled} of {len(graph.edges)} edges")
    return 0


def cmd_learn(args) -> int:
    graph = _read_graph(args.edges)
    partition = apply_evidence_mask(
        graph,
        range(len(graph.edges)),
        args.evidence_ratio,
        derive_seed(args.seed, "mask"),
        role="train",
    )
    config = LearnConfig(
        epochs=args.epochs,
        step_size=args.step_size,
        step_scale=args.step_scale,
        squared=not args.linear_hinge,
        solver=_solver_params(args),
    )
    history: list = []
    weights = learn_weights(graph, partition, None, config, history)
    with open(args.out, "w", encoding="utf-8") as fh:
        weights.save(fh)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            write_training_log(history, fh)
    print(f"learned weights over {len(partition.targets)} target edges -> {args.out}")
    return 0


def cmd_infer(args) -> int:
    graph = _read_graph(args.edges)
    with open(args.weights, "r", encoding="utf-8") as fh:
        weights = CostWeights.load(fh)
    partition = partition_from_signs(graph)
    problem = build_problem(graph, partition, None, weights, not args.linear_hinge)
    result = admm_solve(problem, _solver_params(args), trace=bool(args.trace))
    if not result.converged:
        print(
            f"warning: solver stopped at {result.iterations} iterations "
            f"(residuals {result.primal_residual:.2e}/{result.dual_residual:.2e})",
            file=sys.stderr,
        )
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            write_trace_csv(result, fh)
    value_of = dict(zip(problem.variable_edges, result.x))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# converged={'true' if result.converged else 'false'}\n")
        fh.write("edge,src,dst,score\n")
        for e in sorted(value_of):
            edge = graph.edges[e]
            fh.write(f"{e},{edge.src},{edge.dst},{float(value_of[e])!r}\n")
    print(f"scored {len(value_of)} unknown edges -> {args.out}")
    return 0


def _sweep_config(args) -> evaluation.SweepConfig:
    return evaluation.SweepConfig(
        sampling=args.sampling,
        folds=args.folds,
        node_budget=args.node_budget,
        learn=LearnConfig(
            epochs=args.epochs,
            step_size=args.step_size,
            step_scale=args.step_scale,
            squared=not args.linear_hinge,
            solver=_solver_params(args),
        ),
        solver=_solver_params(args),
        squared=not args.linear_hinge,
    )


def cmd_sweep(args) -> int:
    graph = _read_graph(args.edges)
    ratios = [float(v) for v in args.ratios.split(",")]
    models = args.models.split(",")
    seeds = [derive_seed(args.seed, "sweep", k) for k in range(args.runs)]
    config = _sweep_config(args)
    reports = evaluation.run_evidence_sweep(graph, ratios, models, seeds, config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.csv", "w", encoding="utf-8") as fh:
        evaluation.write_report_csv(reports, fh)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        evaluation.write_report_json(reports, fh)
    if args.curves:
        # Curve points for plotting, from the first (ratio, seed) cell.
        scored = evaluation.scored_cell(graph, ratios[0], models, seeds[0], config)
        for model, edges in scored.items():
            pts = evaluation.roc_curve_points(edges)
            with open(out_dir / f"roc_{model}.csv", "w", encoding="utf-8") as fh:
                evaluation.write_curve_csv(pts, "fpr,tpr", fh)
            pts = evaluation.neg_pr_curve_points(edges)
            with open(out_dir / f"neg_pr_{model}.csv", "w", encoding="utf-8") as fh:
                evaluation.write_curve_csv(pts, "recall,precision", fh)
    print(f"wrote {len(reports)} aggregated rows to {out_dir}")
    return 0


def cmd_loo(args) -> int:
    graph = _read_graph(args.edges)
    report = evaluation.loo_train_eval(
        graph,
        folds=args.folds,
        include_sentiment=args.include_sentiment,
        rng_seed=derive_seed(args.seed, "loo"),
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        evaluation.write_report_json([report], fh)
    print(
        f"{report.model}: AUC/ROC {report.auc_roc:.4f} "
        f"AUC/negPR {report.auc_neg_pr:.4f} over {len(report.fold_auc_roc)} folds"
    )
    return 0


def cmd_reduce_verify(args) -> int:
    if args.instance:
        with open(args.instance, "r", encoding="utf-8") as fh:
            instance = reduction.parse_tlsg(fh)
    else:
        instance = reduction.random_instance(
            args.width, args.height, derive_seed(args.seed, "tlsg")
        )
    certificate = reduction.verify_correspondence(instance)
    with open(args.out, "w", encoding="utf-8") as fh:
        certificate.save(fh)
    status = "PASS" if certificate.passed else "FAIL"
    print(
        f"{status}: min energy {certificate.min_energy}, "
        f"min balance cost {certificate.min_balance_cost} "
        f"(offset {certificate.offset})"
    )
    return 0 if certificate.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgesign",
        description="Joint edge-sign prediction from sentiment and triangle structure",
    )
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker-thread cap; the bundled solver is single-threaded, so "
        "values above 1 currently change nothing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a planted synthetic graph")
    p.add_argument("--nodes", type=int, default=300)
    p.add_argument("--edge-prob", type=float, default=0.05)
    p.add_argument("--camp-flip-noise", type=float, default=0.05)
    p.add_argument("--sentiment-noise", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-sentiment", help="fit the bag-of-words model")
    p.add_argument("--corpus", required=True, help="TSV label<TAB>text")
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--max-features", type=int, default=10000)
    p.add_argument("--banned-prefixes", default="support,oppos")
    p.add_argument("--l2-grid", default="0.001,0.01,0.1,1.0")
    p.add_argument("--cv-folds", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_sentiment)

    p = sub.add_parser("predict-sentiment", help="fill the p column from text")
    p.add_argument("--model", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict_sentiment)

    p = sub.add_parser("learn", help="estimate cost weights on a training graph")
    p.add_argument("--edges", required=True)
    p.add_argument("--evidence-ratio", type=float, default=0.75)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--step-scale", type=float, default=0.1)
    p.add_argument("--log", default=None, help="optional training-log CSV")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("infer", help="score the ?-signed edges of a graph")
    p.add_argument("--edges", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--trace", default=None, help="optional solver-trace CSV")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("sweep", help="evidence-ratio sweep over seeded splits")
    p.add_argument("--edges", required=True)
    p.add_argument("--ratios", default="0.125,0.25,0.5,0.75")
    p.add_argument("--models", default="sentiment,network,combined")
    p.add_argument("--sampling", choices=("random", "bfs"), default="random")
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--node-budget", type=int, default=150)
    p.add_argument("--runs", type=int, default=5, help="seeded repetitions per ratio")
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--step-scale", type=float, default=0.1)
    p.add_argument(
        "--curves",
        action="store_true",
        help="also write ROC / negative-PR curve points for the first cell",
    )
    p.add_argument("--out-dir", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("loo", help="leave-one-out baseline")
    p.add_argument("--edges", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--include-sentiment", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_loo)

    p = sub.add_parser("reduce-verify", help="certify the spin-glass reduction")
    p.add_argument("--instance", default=None, help="TLSG instance file")
    p.add_argument("--width", type=int, default=2)
    p.add_argument("--height", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
