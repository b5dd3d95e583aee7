"""Sentiment models: vocabulary, logistic regression, calibration, MI."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesign.evaluation import ScoredEdge, auc_roc
from edgesign.sentiment import (
    CalibrationMap,
    SentimentModel,
    Vocabulary,
    agreement_probability,
    build_vocabulary,
    derive_agreement_graph,
    drop_top_features,
    edge_agreement,
    featurize,
    featurize_corpus,
    logreg_loss_grad,
    parse_comment_corpus,
    parse_speech_scores,
    platt_scale,
    predict_proba,
    rank_features_mi,
    synthetic_comments,
    train_logreg,
    train_sentiment,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


class TestVocabulary:
    def test_frequency_order(self):
        vocab = build_vocabulary(["good good bad"], 10)
        assert vocab.terms == ("good", "bad")

    def test_banned_prefixes(self):
        vocab = build_vocabulary(
            ["supporting opposed fine supporting"], 10, ("support", "oppos")
        )
        assert vocab.terms == ("fine",)

    def test_truncation(self):
        vocab = build_vocabulary(["a b c"], 1)
        assert len(vocab) == 1

    def test_tie_break_lexicographic(self):
        vocab = build_vocabulary(["zeta alpha"], 10)
        assert vocab.terms == ("alpha", "zeta")

    def test_empty_corpus(self):
        assert len(build_vocabulary([], 5)) == 0

    def test_tokenizer_lowercases_and_splits(self):
        vocab = build_vocabulary(["Don't STOP, won't_stop"], 10)
        assert "stop" in vocab.terms and "t" in vocab.terms


class TestFeaturize:
    def test_counts(self):
        vocab = Vocabulary(("good", "bad"))
        assert featurize("good good", vocab).tolist() == [2.0, 0.0]

    def test_empty_and_oov(self):
        vocab = Vocabulary(("good", "bad"))
        assert featurize("", vocab).tolist() == [0.0, 0.0]
        assert featurize("meh whatever", vocab).tolist() == [0.0, 0.0]

    @given(st.text("abc d", max_size=30), st.text("abc d", max_size=30))
    @settings(max_examples=100)
    def test_linearity(self, a, b):
        vocab = Vocabulary(("a", "b", "c", "d"))
        combined = featurize(a + " " + b, vocab)
        assert np.array_equal(combined, featurize(a, vocab) + featurize(b, vocab))


class TestTrainLogreg:
    def test_separable_toy_set(self):
        X = np.array([[1.0, 0.0]] * 5 + [[0.0, 1.0]] * 5)
        y = np.array([1] * 5 + [0] * 5)
        model = train_logreg(X, y, (0.01, 0.1), cv_folds=5, rng_seed=0)
        preds = (model.proba(X) >= 0.5).astype(int)
        assert np.array_equal(preds, y)

    def test_gradient_norm_at_optimum(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(60, 8))
        y = (X[:, 0] + 0.5 * rng.normal(size=60) > 0).astype(float)
        model = train_logreg(X, y, (0.05, 0.5), cv_folds=4, rng_seed=1)
        _, gw, gb = logreg_loss_grad(
            X, y, np.asarray(model.weights), model.bias, model.l2_strength
        )
        assert np.sqrt(gw @ gw + gb * gb) <= 1e-6

    def test_duplicating_rows_keeps_model(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 4))
        y = (X @ np.array([2.0, -1.0, 0.5, 0.0]) > 0).astype(float)
        base = train_logreg(X, y, (0.05, 0.5, 2.0), cv_folds=4, rng_seed=5)
        doubled = train_logreg(
            np.vstack([X, X]), np.concatenate([y, y]), (0.05, 0.5, 2.0),
            cv_folds=4, rng_seed=5,
        )
        assert doubled.l2_strength == base.l2_strength
        assert np.allclose(doubled.weights, base.weights, atol=1e-6)
        assert doubled.bias == pytest.approx(base.bias, abs=1e-6)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            train_logreg(np.ones((4, 2)), np.ones(4))


class TestPredictProba:
    def _model(self, weights, bias):
        return SentimentModel(Vocabulary(("good", "bad")), weights, bias, 1.0)

    def test_zero_model_gives_half(self):
        model = self._model((0.0, 0.0), 0.0)
        assert predict_proba(model, "good bad whatever") == pytest.approx(0.5)

    def test_monotone_in_positive_token(self):
        model = self._model((1.3, -0.7), 0.1)
        probs = [predict_proba(model, "good " * k) for k in range(4)]
        assert all(b > a for a, b in zip(probs, probs[1:]))

    def test_sign_flip_symmetry(self):
        model = self._model((1.3, -0.7), 0.1)
        flipped = self._model((-1.3, 0.7), -0.1)
        for text in ("good", "bad bad", "good bad", ""):
            assert predict_proba(model, text) == pytest.approx(
                1.0 - predict_proba(flipped, text)
            )

    def test_always_strictly_inside_unit_interval(self):
        model = self._model((30.0, -30.0), 0.0)
        for text in ("good good good", "bad bad bad"):
            assert 0.0 < predict_proba(model, text) < 1.0


class TestPlattScaling:
    def test_preserves_perfect_ranking(self):
        scores = np.array([-2.0, -1.0, 0.5, 2.0, 3.0])
        labels = np.array([0, 0, 1, 1, 1])
        calib = platt_scale(scores, labels)
        mapped = calib.apply(scores)
        scored = [ScoredEdge(i, float(s), int(t)) for i, (s, t) in enumerate(zip(mapped, labels))]
        assert auc_roc(scored) == 1.0

    def test_constant_scores_return_prior(self):
        scores = np.zeros(10) + 3.7
        labels = np.array([1, 1, 1, 0, 1, 1, 0, 1, 1, 1])
        calib = platt_scale(scores, labels)
        out = calib.apply(scores)
        assert np.allclose(out, 0.8, atol=1e-3)

    def test_preserves_auc_exactly(self):
        # Rank statistic: any positively-sloped calibration leaves AUC/ROC
        # untouched.
        rng = np.random.default_rng(11)
        for _ in range(20):
            scores = rng.normal(size=30)
            labels = (scores + rng.normal(scale=1.5, size=30) > 0).astype(int)
            if labels.min() == labels.max():
                continue
            calib = platt_scale(scores, labels)
            if calib.slope <= 0:
                continue
            raw = [ScoredEdge(i, float(s), int(t)) for i, (s, t) in
                   enumerate(zip((scores - scores.min()) / np.ptp(scores), labels))]
            cal = [ScoredEdge(i, float(s), int(t)) for i, (s, t) in
                   enumerate(zip(calib.apply(scores), labels))]
            assert auc_roc(cal) == pytest.approx(auc_roc(raw), abs=1e-12)

    def test_composition_stays_monotone(self):
        scores = np.linspace(-2, 2, 20)
        labels = (scores + np.sin(scores) > 0).astype(int)
        calib = platt_scale(scores, labels)
        once = calib.apply(scores)
        twice = calib.apply(once)
        assert np.all(np.diff(twice) >= -1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            platt_scale([1.0, 2.0], [1, 1])


class TestAgreement:
    def test_strongly_opposed_pair(self):
        assert agreement_probability(0.98, 0.01) == pytest.approx(0.0296)

    def test_certain_agreement(self):
        assert agreement_probability(1.0, 1.0) == 1.0

    @given(unit)
    def test_half_is_absorbing(self, q):
        assert agreement_probability(0.5, q) == pytest.approx(0.5)

    @given(unit, unit)
    def test_symmetry_and_complement(self, a, b):
        assert agreement_probability(a, b) == pytest.approx(agreement_probability(b, a))
        assert agreement_probability(a, b) == pytest.approx(
            1.0 - agreement_probability(a, 1.0 - b)
        )

    def test_edge_agreement_examples(self):
        assert edge_agreement([0.98], [0.01]) == pytest.approx(0.0296)
        assert edge_agreement([0.9, 0.1], [0.1, 0.1]) == pytest.approx(
            (agreement_probability(0.9, 0.1) + agreement_probability(0.1, 0.1)) / 2
        )
        assert edge_agreement([1.0, 1.0], [1.0, 1.0]) == 1.0

    def test_edge_agreement_mean(self):
        # agreements 0.2 and 0.8 average to 0.5
        qs_u = [0.9, 0.9]
        qs_v = [(0.2 - 0.1) / 0.8, (0.8 - 0.1) / 0.8]
        assert edge_agreement(qs_u, qs_v) == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            edge_agreement([], [])


class TestMutualInformation:
    def test_perfect_feature_is_one_bit_and_first(self):
        y = np.array([0, 1] * 10)
        X = np.column_stack([y, np.zeros(20), np.ones(20)])
        ranking = rank_features_mi(X, y)
        assert ranking[0] == 0
        pres = X > 0
        # one-bit check via the ranking helper's own scale
        from edgesign.sentiment import rank_features_mi as _  # noqa: F401

        n11 = float(np.sum(pres[:, 0] & (y == 1)))
        assert n11 == 10.0

    def test_mi_values_bounded(self):
        from edgesign.sentiment import mutual_information_bits

        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(4, 60))
            X = rng.integers(0, 3, size=(n, 6))
            y = rng.integers(0, 2, size=n)
            mi = mutual_information_bits(X, y)
            assert np.all(mi >= 0.0)
            p1 = y.mean()
            h_label = 0.0
            for q in (p1, 1 - p1):
                if q > 0:
                    h_label -= q * np.log2(q)
            assert np.all(mi <= min(h_label, 1.0) + 1e-12)
        ranking = rank_features_mi(X, y)
        assert sorted(ranking.tolist()) == list(range(6))

    def test_perfect_balanced_feature_is_one_bit(self):
        from edgesign.sentiment import mutual_information_bits

        y = np.array([0, 1] * 10)
        X = y.reshape(-1, 1)
        assert mutual_information_bits(X, y)[0] == pytest.approx(1.0)

    def test_independent_feature_zero(self):
        y = np.array([0, 1] * 8)
        X = np.column_stack([np.tile([1, 1, 0, 0], 4), y])
        ranking = rank_features_mi(X, y)
        assert ranking.tolist() == [1, 0]

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(1)
        X = rng.integers(0, 2, size=(40, 5))
        y = (X[:, 2] + rng.random(40) * 0.4 > 0.5).astype(int)
        base = rank_features_mi(X, y)
        perm = [4, 3, 2, 1, 0]
        permuted = rank_features_mi(X[:, perm], y)
        assert [perm[i] for i in permuted] == base.tolist()


class TestDropTopFeatures:
    def test_m_zero_identity(self):
        X = np.arange(12).reshape(4, 3)
        reduced, kept = drop_top_features(X, np.array([2, 0, 1]), 0)
        assert np.array_equal(reduced, X)
        assert kept.tolist() == [0, 1, 2]

    def test_drop_all(self):
        X = np.arange(12).reshape(4, 3)
        reduced, kept = drop_top_features(X, np.array([2, 0, 1]), 3)
        assert reduced.shape == (4, 0)
        assert kept.size == 0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            drop_top_features(np.ones((2, 2)), np.array([0, 1]), 3)

    def test_auc_non_increasing_in_m(self):
        # Empirical sweep on the planted corpus: retraining after dropping the
        # top-MI features can only lose signal (within 0.02 slack).
        mean_aucs = {m: [] for m in (0, 10, 100)}
        for seed in range(10):
            rng = np.random.default_rng(seed)
            labels = rng.integers(0, 2, 260)
            texts = synthetic_comments(labels, seed, informative_pairs=60)
            vocab = build_vocabulary(texts, 250)
            X = featurize_corpus(texts, vocab)
            train = slice(0, 160)
            test = slice(160, 260)
            ranking = rank_features_mi(X[train], labels[train])
            for m in (0, 10, 100):
                Xm, kept = drop_top_features(X, ranking, m)
                if Xm.shape[1] == 0:
                    mean_aucs[m].append(0.5)
                    continue
                model = train_logreg(
                    Xm[train], labels[train], (0.05, 0.5), cv_folds=4, rng_seed=seed
                )
                probs = model.proba(Xm[test])
                scored = [
                    ScoredEdge(i, float(np.clip(p, 0, 1)), int(t))
                    for i, (p, t) in enumerate(zip(probs, labels[test]))
                ]
                mean_aucs[m].append(auc_roc(scored))
        a0, a10, a100 = (float(np.mean(mean_aucs[m])) for m in (0, 10, 100))
        assert a0 >= a10 - 0.02
        assert a10 >= a100 - 0.02


class TestCorpusIO:
    def test_parse_comment_corpus(self):
        text = "+1\tlooks great\n-1\tterrible idea\n"
        labels, texts = parse_comment_corpus(io.StringIO(text))
        assert labels == [1, 0]
        assert texts == ["looks great", "terrible idea"]

    def test_parse_comment_corpus_bad_label(self):
        from edgesign.graph import ParseError

        with pytest.raises(ParseError):
            parse_comment_corpus(io.StringIO("0\thello\n"))

    def test_parse_speech_scores(self):
        text = "alice\thr1\t0.7\t+1\nbob\thr1\t-0.3\t-1\nalice\thr2\t0.2\t+1\n"
        rows = parse_speech_scores(io.StringIO(text))
        assert len(rows) == 3
        assert rows[1].speaker == "bob" and rows[1].vote == 0

    def test_model_json_round_trip(self):
        texts = ["good good", "bad bad", "good fine", "bad meh"] * 3
        model = train_sentiment(
            texts, [1, 0, 1, 0] * 3, max_features=10, l2_grid=(0.5,), cv_folds=3,
        )
        buf = io.StringIO()
        model.save(buf)
        assert SentimentModel.load(io.StringIO(buf.getvalue())) == model


class TestAgreementGraph:
    def test_two_speaker_disagreement(self):
        rows = parse_speech_scores(
            io.StringIO(
                "alice\thr1\t2.0\t+1\n"
                "bob\thr1\t-2.0\t-1\n"
                "carol\thr1\t1.5\t+1\n"
                "alice\thr2\t1.8\t+1\n"
                "carol\thr2\t-1.2\t-1\n"
            )
        )
        g = derive_agreement_graph(rows)
        assert g.node_count == 3
        by_pair = {e.pair: e for e in g.edges}
        # alice-bob disagree on their only common bill
        from edgesign.graph import Sign

        assert by_pair[(0, 1)].sign is Sign.NEGATIVE
        assert by_pair[(0, 1)].p < 0.5
        # alice-carol: agree on hr1, disagree on hr2 -> split counts as positive
        assert by_pair[(0, 2)].sign is Sign.POSITIVE

    def test_no_common_bill_no_edge(self):
        rows = parse_speech_scores(
            io.StringIO("alice\thr1\t1.0\t+1\nbob\thr2\t-1.0\t-1\n")
        )
        g = derive_agreement_graph(rows)
        assert len(g.edges) == 0
