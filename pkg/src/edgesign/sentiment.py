"""Per-edge sentiment probability estimation.

Two paths feed the edge probabilities p_e:

* bag-of-words L2 logistic regression over term frequencies, with prefix
  filtering and cross-validated regularization (comment-style corpora);
* calibration of precomputed per-speech scores (Platt scaling) combined into
  per-edge agreement probabilities q_u*q_v + (1-q_u)*(1-q_v) averaged over
  co-voted bills (roll-call-style corpora).

Mutual-information ranking and top-m feature dropping support controlled
degradation of the text signal.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .graph import Sign, SignedEdge, SignedGraph

__all__ = [
    "Vocabulary",
    "LogisticModel",
    "SentimentModel",
    "CalibrationMap",
    "SpeechScore",
    "tokenize",
    "build_vocabulary",
    "featurize",
    "featurize_corpus",
    "train_logreg",
    "train_sentiment",
    "predict_proba",
    "logreg_loss_grad",
    "platt_scale",
    "agreement_probability",
    "edge_agreement",
    "mutual_information_bits",
    "rank_features_mi",
    "drop_top_features",
    "reduce_vocabulary",
    "parse_comment_corpus",
    "parse_speech_scores",
    "derive_agreement_graph",
    "synthetic_comments",
]

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("vocabulary contains duplicate terms")

    @property
    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)


def build_vocabulary(
    corpus: Iterable[str],
    max_features: int,
    banned_prefixes: Sequence[str] = (),
) -> Vocabulary:
    """Top ``max_features`` corpus tokens by frequency (ties lexicographic),
    excluding any token that starts with a banned prefix."""
    if max_features < 1:
        raise ValueError("max_features must be >= 1")
    counts: dict[str, int] = {}
    for doc in corpus:
        for tok in tokenize(doc):
            counts[tok] = counts.get(tok, 0) + 1
    kept = [
        tok
        for tok in counts
        if not any(tok.startswith(pre) for pre in banned_prefixes)
    ]
    kept.sort(key=lambda tok: (-counts[tok], tok))
    return Vocabulary(tuple(kept[:max_features]))


def featurize(text: str, vocab: Vocabulary) -> np.ndarray:
    """Raw term counts over the vocabulary; out-of-vocabulary tokens ignored."""
    vec = np.zeros(len(vocab), dtype=float)
    index = vocab.index
    for tok in tokenize(text):
        i = index.get(tok)
        if i is not None:
            vec[i] += 1.0
    return vec


def featurize_corpus(texts: Sequence[str], vocab: Vocabulary) -> np.ndarray:
    index = vocab.index
    X = np.zeros((len(texts), len(vocab)))
    for r, text in enumerate(texts):
        for tok in tokenize(text):
            i = index.get(tok)
            if i is not None:
                X[r, i] += 1.0
    return X


@dataclass(frozen=True)
class LogisticModel:
    """Binary logistic regression: P(y=1|x) = sigmoid(bias + weights . x)."""

    weights: tuple[float, ...]
    bias: float
    l2_strength: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        return self.bias + np.asarray(X, dtype=float) @ np.asarray(self.weights)

    def proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision(X))


@dataclass(frozen=True)
class SentimentModel:
    """Vocabulary plus logistic weights; maps raw text to P(positive)."""

    vocab: Vocabulary
    weights: tuple[float, ...]
    bias: float
    l2_strength: float
    metadata: tuple[tuple[str, object], ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "vocab": list(self.vocab.terms),
            "weights": list(self.weights),
            "bias": self.bias,
            "l2_strength": self.l2_strength,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SentimentModel":
        return cls(
            Vocabulary(tuple(data["vocab"])),
            tuple(data["weights"]),
            float(data["bias"]),
            float(data["l2_strength"]),
            tuple(sorted(data.get("metadata", {}).items())),
        )

    def save(self, stream: IO[str]) -> None:
        json.dump(self.to_json_dict(), stream, indent=2, sort_keys=True)
        stream.write("\n")

    @classmethod
    def load(cls, stream: IO[str]) -> "SentimentModel":
        return cls.from_json_dict(json.load(stream))


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_loss_grad(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float
) -> tuple[float, np.ndarray, float]:
    """Mean log-loss plus (l2/2)*||w||^2 (bias unpenalized) and its gradient."""
    z = b + X @ w
    # log(1 + exp(-m)) with m = z for y=1 and -z for y=0, stably.
    margins = np.where(y == 1, z, -z)
    loss = float(np.mean(np.logaddexp(0.0, -margins))) + 0.5 * l2 * float(w @ w)
    resid = _sigmoid(z) - y
    grad_w = X.T @ resid / len(y) + l2 * w
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def _fit_logreg(X: np.ndarray, y: np.ndarray, l2: float) -> tuple[np.ndarray, float]:
    """Minimize to gradient 2-norm <= 1e-6 (strongly convex for l2 > 0)."""
    d = X.shape[1]

    def fun(theta):
        loss, gw, gb = logreg_loss_grad(X, y, theta[:d], theta[d], l2)
        return loss, np.concatenate([gw, [gb]])

    theta = np.zeros(d + 1)
    for _ in range(6):
        res = minimize(
            fun,
            theta,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12},
        )
        theta = res.x
        _, gw, gb = logreg_loss_grad(X, y, theta[:d], theta[d], l2)
        if np.sqrt(gw @ gw + gb * gb) <= 1e-6:
            break
    return theta[:d], float(theta[d])


def train_logreg(
    features: np.ndarray,
    labels: np.ndarray,
    l2_grid: Sequence[float] = (0.001, 0.01, 0.1, 1.0),
    cv_folds: int = 5,
    rng_seed: int = 0,
) -> LogisticModel:
    """Fit with the l2 value maximizing mean cross-validated log-likelihood,
    then retrain on all data. Requires both classes present."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if set(np.unique(y)) - {0.0, 1.0}:
        raise ValueError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise ValueError("training data contains a single class")
    if any(l2 <= 0 for l2 in l2_grid):
        raise ValueError("l2 values must be positive")
    n = len(y)
    folds = min(cv_folds, n)
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(n)
    chunks = np.array_split(perm, folds)
    best_l2 = None
    best_ll = -np.inf
    for l2 in l2_grid:
        ll_sum = 0.0
        ll_count = 0
        for k in range(folds):
            test_idx = chunks[k]
            train_idx = np.concatenate([chunks[j] for j in range(folds) if j != k])
            if len(np.unique(y[train_idx])) < 2:
                continue
            w, b = _fit_logreg(X[train_idx], y[train_idx], l2)
            z = b + X[test_idx] @ w
            margins = np.where(y[test_idx] == 1, z, -z)
            ll_sum += float(-np.logaddexp(0.0, -margins).sum())
            ll_count += len(test_idx)
        mean_ll = ll_sum / ll_count if ll_count else -np.inf
        if mean_ll > best_ll:
            best_ll = mean_ll
            best_l2 = l2
    if best_l2 is None:
        raise ValueError("cross-validation produced no usable folds")
    w, b = _fit_logreg(X, y, best_l2)
    return LogisticModel(tuple(w), b, best_l2)


def train_sentiment(
    texts: Sequence[str],
    labels: Sequence[int],
    max_features: int = 10000,
    banned_prefixes: Sequence[str] = ("support", "oppos"),
    l2_grid: Sequence[float] = (0.001, 0.01, 0.1, 1.0),
    cv_folds: int = 5,
    rng_seed: int = 0,
    metadata: dict | None = None,
) -> SentimentModel:
    """End-to-end text model: vocabulary, count features, cross-validated fit."""
    vocab = build_vocabulary(texts, max_features, banned_prefixes)
    X = featurize_corpus(texts, vocab)
    model = train_logreg(X, np.asarray(labels, dtype=float), l2_grid, cv_folds, rng_seed)
    return SentimentModel(
        vocab,
        model.weights,
        model.bias,
        model.l2_strength,
        tuple(sorted((metadata or {}).items())),
    )


def predict_proba(model: SentimentModel, text: str) -> float:
    """P(positive) for one document; always strictly inside (0, 1).

    Clamped away from the endpoints where float64 sigmoid saturates.
    """
    z = model.bias + float(featurize(text, model.vocab) @ np.asarray(model.weights))
    return float(np.clip(_sigmoid(z), 1e-12, 1.0 - 1e-12))


@dataclass(frozen=True)
class CalibrationMap:
    """Monotone logistic map from a raw score to a probability."""

    slope: float
    intercept: float

    def apply(self, scores) -> np.ndarray:
        return _sigmoid(self.slope * np.asarray(scores, dtype=float) + self.intercept)


def platt_scale(raw_scores: Sequence[float], labels: Sequence[int]) -> CalibrationMap:
    """1-D logistic regression from score to label.

    A tiny ridge on the slope keeps separable inputs finite; for constant
    scores it drives the slope to zero so the map returns the class prior.
    """
    s = np.asarray(raw_scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(np.unique(y)) < 2:
        raise ValueError("calibration requires both classes")
    ridge = 1e-6

    def fun(theta):
        a, b = theta
        z = a * s + b
        margins = np.where(y == 1, z, -z)
        loss = float(np.mean(np.logaddexp(0.0, -margins))) + 0.5 * ridge * a * a
        resid = _sigmoid(z) - y
        return loss, np.array([float(resid @ s) / len(y) + ridge * a, float(np.mean(resid))])

    res = minimize(fun, np.zeros(2), jac=True, method="L-BFGS-B",
                   options={"maxiter": 5000, "ftol": 1e-16, "gtol": 1e-14})
    a, b = res.x
    if abs(a) < 1e-12:
        a = 0.0
    return CalibrationMap(float(a), float(b))


def agreement_probability(q_u: float, q_v: float) -> float:
    """Probability that two voters agree: q_u*q_v + (1-q_u)*(1-q_v)."""
    if not (0.0 <= q_u <= 1.0 and 0.0 <= q_v <= 1.0):
        raise ValueError("agreement inputs must be probabilities")
    return q_u * q_v + (1.0 - q_u) * (1.0 - q_v)


def edge_agreement(
    per_bill_probs_u: Sequence[float], per_bill_probs_v: Sequence[float]
) -> float:
    """Mean agreement probability over the bills both endpoints voted on."""
    if len(per_bill_probs_u) != len(per_bill_probs_v):
        raise ValueError("per-bill probability lists must align")
    if not per_bill_probs_u:
        raise ValueError("no co-voted bills; the edge should not exist")
    return float(
        np.mean(
            [agreement_probability(a, b) for a, b in zip(per_bill_probs_u, per_bill_probs_v)]
        )
    )


def mutual_information_bits(features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Empirical MI (bits) between each feature's presence (count > 0) and the
    label."""
    X = np.asarray(features)
    y = np.asarray(labels).astype(bool)
    n = len(y)
    if n == 0:
        return np.zeros(X.shape[1] if X.ndim == 2 else 0)
    pres = X > 0
    n_y1 = int(y.sum())
    n11 = pres[y].sum(axis=0).astype(float)
    n10 = pres[~y].sum(axis=0).astype(float)
    n01 = n_y1 - n11
    n00 = (n - n_y1) - n10
    mi = np.zeros(X.shape[1])
    for n_ab, n_a, n_b in (
        (n11, n11 + n10, n_y1),
        (n10, n11 + n10, n - n_y1),
        (n01, n01 + n00, n_y1),
        (n00, n01 + n00, n - n_y1),
    ):
        with np.errstate(divide="ignore", invalid="ignore"):
            term = (n_ab / n) * np.log2(n * n_ab / (n_a * float(n_b)))
        mi += np.where(n_ab > 0, term, 0.0)
    return np.maximum(mi, 0.0)


def rank_features_mi(features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Feature indices sorted by decreasing mutual information; ties keep
    index order."""
    return np.argsort(-mutual_information_bits(features, labels), kind="stable")


def drop_top_features(
    features: np.ndarray, ranking: np.ndarray, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Remove the m most informative feature columns; returns the reduced
    matrix and the kept column indices (original order)."""
    X = np.asarray(features)
    if not 0 <= m <= X.shape[1]:
        raise ValueError("m outside [0, feature count]")
    dropped = set(int(i) for i in np.asarray(ranking)[:m])
    kept = np.array([i for i in range(X.shape[1]) if i not in dropped], dtype=int)
    return X[:, kept], kept


def reduce_vocabulary(vocab: Vocabulary, kept_indices: Sequence[int]) -> Vocabulary:
    return Vocabulary(tuple(vocab.terms[int(i)] for i in kept_indices))


def parse_comment_corpus(stream: IO[str]) -> tuple[list[int], list[str]]:
    """TSV rows ``label<TAB>text`` with label in {+1, -1} -> (labels01, texts)."""
    labels: list[int] = []
    texts: list[str] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        cols = line.split("\t", 1)
        if len(cols) != 2:
            from .graph import ParseError

            raise ParseError("expected 'label<TAB>text'", line=lineno)
        if cols[0] not in ("+1", "-1"):
            from .graph import ParseError

            raise ParseError(f"label {cols[0]!r} not one of +1, -1", line=lineno)
        labels.append(1 if cols[0] == "+1" else 0)
        texts.append(cols[1])
    return labels, texts


@dataclass(frozen=True)
class SpeechScore:
    speaker: str
    bill: str
    raw_score: float
    vote: int  # 1 yes / 0 no


def parse_speech_scores(stream: IO[str]) -> list[SpeechScore]:
    """TSV rows ``speaker<TAB>bill<TAB>raw_score<TAB>vote`` (vote in {+1,-1})."""
    from .graph import ParseError

    out: list[SpeechScore] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise ParseError("expected 4 tab-separated columns", line=lineno)
        if cols[3] not in ("+1", "-1"):
            raise ParseError(f"vote {cols[3]!r} not one of +1, -1", line=lineno)
        try:
            score = float(cols[2])
        except ValueError:
            raise ParseError(f"score {cols[2]!r} is not a number", line=lineno)
        out.append(SpeechScore(cols[0], cols[1], score, 1 if cols[3] == "+1" else 0))
    return out


def derive_agreement_graph(scores: Sequence[SpeechScore]) -> SignedGraph:
    """Person-person agreement graph from per-speech scores.

    Raw scores are Platt-scaled against the recorded votes; two speakers are
    linked if they voted on a common bill, the edge sign is positive iff they
    cast the same vote on at least half of those bills, and p_e is the mean
    agreement probability over them. With several speeches by one speaker on
    one bill, the last one wins.
    """
    calib = platt_scale([s.raw_score for s in scores], [s.vote for s in scores])
    per_speaker: dict[str, dict[str, tuple[float, int]]] = {}
    for s in scores:
        q = float(calib.apply([s.raw_score])[0])
        per_speaker.setdefault(s.speaker, {})[s.bill] = (q, s.vote)
    speakers = sorted(per_speaker)
    node_of = {name: i for i, name in enumerate(speakers)}
    edges: list[SignedEdge] = []
    for i, u in enumerate(speakers):
        for v in speakers[i + 1:]:
            common = sorted(per_speaker[u].keys() & per_speaker[v].keys())
            if not common:
                continue
            qs_u = [per_speaker[u][b][0] for b in common]
            qs_v = [per_speaker[v][b][0] for b in common]
            p_e = edge_agreement(qs_u, qs_v)
            same = sum(
                per_speaker[u][b][1] == per_speaker[v][b][1] for b in common
            )
            sign = Sign.POSITIVE if same * 2 >= len(common) else Sign.NEGATIVE
            edges.append(SignedEdge(node_of[u], node_of[v], sign, p_e))
    return SignedGraph(len(speakers), tuple(edges), directed=False)


def synthetic_comments(
    signs: Sequence[int],
    rng_seed: int,
    informative_pairs: int = 60,
    filler_terms: int = 80,
    words_per_comment: int = 12,
    informative_rate: float = 0.35,
) -> list[str]:
    """Planted comments whose word choice leaks the edge sign.

    Each comment mixes sign-specific words (``goodNN``/``badNN``) with shared
    filler; dropping the informative words by MI rank degrades the text signal
    toward chance. Word frequencies fall with the word id so MI ranks are
    non-trivial.
    """
    rng = np.random.default_rng(rng_seed)
    pos_words = [f"good{i}" for i in range(informative_pairs)]
    neg_words = [f"bad{i}" for i in range(informative_pairs)]
    fillers = [f"filler{i}" for i in range(filler_terms)]
    # Geometric-ish frequency profile over word ids.
    inf_weights = 1.0 / (1.0 + np.arange(informative_pairs))
    inf_weights /= inf_weights.sum()
    fill_weights = 1.0 / (1.0 + np.arange(filler_terms))
    fill_weights /= fill_weights.sum()
    comments = []
    for sign in signs:
        words = []
        informative = rng.random(words_per_comment) < informative_rate
        inf_ids = rng.choice(informative_pairs, size=words_per_comment, p=inf_weights)
        fill_ids = rng.choice(filler_terms, size=words_per_comment, p=fill_weights)
        for k in range(words_per_comment):
            if informative[k]:
                words.append(pos_words[inf_ids[k]] if sign else neg_words[inf_ids[k]])
            else:
                words.append(fillers[fill_ids[k]])
        comments.append(" ".join(words))
    return comments
