import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gradcases
from gaeisumm import summarizer as sm
from gaeisumm.config import RunConfig
from gaeisumm.corpus import fallback_embed
from gaeisumm.numerics import DegenerateInputError, DimensionError, NumericError, ParamTensor, make_rng
from gaeisumm.synthetic import make_corpus


def zero_params(P=1, Q=1, alpha=0.6, beta=0.4):
    gru = {n: ParamTensor(np.zeros(P) if n.startswith("b") else np.zeros((P, P)), name=n)
           for n in sm.GRU_NAMES}
    return sm.SummarizerParams(gru, ParamTensor(np.zeros(Q)), ParamTensor(np.zeros((Q, P))),
                               ParamTensor(np.zeros((Q, P))), alpha, beta)


def scored(scores):
    return [sm.ScoredSentence(i, s, 0.5, s, 0) for i, s in enumerate(scores)]


def test_doc_embedding_examples():
    assert np.array_equal(sm.doc_embedding([[1.0, 2.0]]), [1.0, 2.0])
    assert np.allclose(sm.doc_embedding([[1, 0], [0, 1]]), [0.5, 0.5])
    with pytest.raises(DegenerateInputError):
        sm.doc_embedding(np.zeros((0, 3)))


@given(st.integers(0, 10_000))
def test_doc_embedding_permutation_invariant(seed):
    rng = make_rng(seed)
    X = rng.standard_normal((5, 3))
    assert np.allclose(sm.doc_embedding(X), sm.doc_embedding(X[rng.permutation(5)]))


def test_gru_zero_weights_halves_state():
    p = zero_params(3)
    h = np.array([0.2, -0.4, 0.8])
    assert np.allclose(sm.gru_step(h, np.ones(3), p), 0.5 * h)
    assert np.array_equal(sm.gru_step(np.zeros(3), np.ones(3), p), np.zeros(3))


def test_gru_shape_error():
    with pytest.raises(DimensionError):
        sm.gru_step(np.zeros(2), np.zeros(3), zero_params(3))


def test_cluster_embed_zero_weights():
    p = zero_params(2)
    assert np.array_equal(sm.cluster_embed([[1.0, 2.0]], p), [0, 0])
    assert np.array_equal(sm.cluster_embed([[1.0, 2.0], [3.0, -1.0]], p), [0, 0])


def test_cluster_embed_empty():
    with pytest.raises(DegenerateInputError):
        sm.cluster_embed(np.zeros((0, 2)), zero_params(2))


def test_cluster_embed_order_sensitive():
    p = gradcases.small_summarizer(np.random.default_rng(0), P=3)
    rows = np.array([[0.5, -0.2, 0.1], [-0.3, 0.9, 0.4]])
    assert not np.allclose(sm.cluster_embed(rows, p), sm.cluster_embed(rows[::-1], p))


def test_relevance_uniform_when_omega_zero():
    p = zero_params(2, 2)
    r = sm.relevance_scores(np.ones((4, 2)), np.zeros(2), p)
    assert np.allclose(r, 0.25)
    assert sm.relevance_scores([[0.3, 0.1]], np.zeros(2), p)[0] == 1.0


def test_relevance_one_dimensional_hand_value():
    p = zero_params()
    p.omega.value[...] = [2.0]
    p.W1.value[...] = [[1.0]]
    f, _ = sm.relevance_raw([[0.0], [1.0]], np.zeros(1), p)
    assert np.allclose(f, [0.0, 1.52319], atol=1e-5)
    # softmax(0, 2 tanh 1), evaluated independently with math.exp
    low = 1.0 / (1.0 + math.exp(2.0 * math.tanh(1.0)))
    assert low == pytest.approx(0.178993, abs=1e-6)
    assert np.allclose(sm.relevance_scores([[0.0], [1.0]], np.zeros(1), p),
                       [low, 1.0 - low], atol=1e-12)


def test_literal_normalization_floors_negatives():
    r = sm.normalize_relevance(np.array([-1.0, 1.0, 3.0]), "literal")
    assert r[0] == pytest.approx(1e-8 / (4 + 1e-8))
    assert r.sum() == pytest.approx(1.0)


@settings(max_examples=30)
@given(st.lists(st.floats(-20, 20), min_size=1, max_size=6), st.floats(-50, 50),
       st.sampled_from(["softmax", "literal"]))
def test_relevance_is_a_simplex_point(f, c, kind):
    r = sm.normalize_relevance(np.array(f), kind)
    assert np.all(r >= 0) and abs(r.sum() - 1) < 1e-12
    if kind == "softmax":
        assert np.allclose(r, sm.normalize_relevance(np.array(f) + c, kind), atol=1e-12)


def test_position_examples():
    assert sm.position_score(1, 8) == pytest.approx(0.60653, abs=1e-5)
    assert sm.position_score(8, 8) == 0.5
    with pytest.raises(ValueError):
        sm.position_score(10, 8)
    with pytest.raises(ValueError):
        sm.position_score(0, 8)


@given(st.integers(1, 200))
def test_position_monotone_and_bounded(N):
    s = [sm.position_score(P, N) for P in range(1, N + 1)]
    assert all(a >= b for a, b in zip(s, s[1:]))
    assert all(0.5 <= x < 1 for x in s)


def test_combine_examples():
    assert sm.combine(0.5, 0.5, 0.3, 0.7) == pytest.approx(0.5)
    assert sm.combine(1.0, 0.5, 0.6, 0.4) == pytest.approx(0.8)


def test_select_topk_examples():
    assert sm.select_topk(scored([0.9, 0.1, 0.5]), 2).selected == [0, 2]
    assert sm.select_topk(scored([0.9, 0.1, 0.5]), 5).selected == [0, 1, 2]
    tie = [0.1] * 10
    tie[3] = tie[7] = 0.9
    assert sm.select_topk(scored(tie), 1).selected == [3]
    with pytest.raises(ValueError):
        sm.select_topk(scored([1.0]), 0)


def test_select_topk_text():
    res = sm.select_topk(scored([0.2, 0.9, 0.8]), 2, ["a.", "b.", "c."])
    assert res.summary_text == "b. c." and res.K == 2


@given(st.lists(st.sampled_from([0.1, 0.5, 0.9]), min_size=1, max_size=12), st.integers(1, 12))
def test_select_topk_output_sorted_and_stable(scores, K):
    res = sm.select_topk(scored(scores), K)
    assert res.selected == sorted(res.selected)
    assert len(res.selected) == min(K, len(scores))
    # every unselected sentence scores no higher than the weakest pick,
    # and on a tie it sits later in the document
    worst = min(res.selected, key=lambda i: (scores[i], -i))
    for i in set(range(len(scores))) - set(res.selected):
        assert scores[i] < scores[worst] or (scores[i] == scores[worst] and i > worst)


def test_contrastive_examples():
    z = np.array([0.3, -0.2])
    assert sm.contrastive_loss(z, z) == 0.0
    assert sm.contrastive_loss([0.0, 0.0], [3.0, 4.0]) == pytest.approx(12.5)
    assert sm.contrastive_loss([2.0, 0.0], [0.0, 0.0]) == pytest.approx(2.0)
    # a negative at distance 0.5 with margin 1 adds 0.5 * 0.5**2
    assert sm.contrastive_loss(z, z, [z + [0.5, 0.0]]) == pytest.approx(0.125)
    # a negative beyond the margin contributes nothing
    assert sm.contrastive_loss(z, z, [z + [2.0, 0.0]]) == 0.0


def test_contrastive_dimension_error():
    with pytest.raises(DimensionError):
        sm.contrastive_loss(np.zeros(2), np.zeros(3))


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("case", [gradcases.case_gru, gradcases.case_relevance,
                                  gradcases.case_contrastive,
                                  lambda r: gradcases.case_relevance(r, "literal")])
def test_component_gradients(case, seed):
    assert max(case(np.random.default_rng(seed)).values()) < 1e-4


@pytest.mark.parametrize("normalization", ["softmax", "literal"])
@pytest.mark.parametrize("use_latent", [True, False])
def test_end_to_end_gradient(normalization, use_latent):
    errs = gradcases.case_end_to_end(np.random.default_rng(4), normalization, use_latent)
    assert max(errs.values()) < 1e-4


def test_scores_obey_record_invariants():
    rng = np.random.default_rng(1)
    p = gradcases.small_summarizer(rng, P=3)
    labels = (0, 1, 0, 2, 1, 0)
    dp = sm.score_document(rng.standard_normal((6, 3)), labels, p, 3)
    for s in dp.scored:
        assert s.score == pytest.approx(p.alpha * s.score_rel + p.beta * s.score_pos, abs=1e-12)
    for c in set(labels):
        assert sum(s.score_rel for s in dp.scored if s.cluster == c) == pytest.approx(1, abs=1e-12)


def test_position_only_picks_earliest_sentences():
    p = zero_params(2, 2, alpha=0.0, beta=1.0)
    dp = sm.score_document(np.ones((7, 2)), (0,) * 7, p, 3)
    assert dp.selected == [0, 1, 2]


def _tiny_corpus(n_docs=3, seed=0):
    recs = fallback_embed(make_corpus(n_docs=n_docs, n_sent=6, seed=seed), seed)
    return [r.embeddings for r in recs]


def test_single_document_training_improves_loss():
    from gaeisumm.gae import init_gae

    docs = _tiny_corpus(1)
    cfg = RunConfig(latent_dim=8, epochs_sent=40)
    z_doc = np.tanh(np.random.default_rng(0).standard_normal((1, 8)))
    res = sm.train(docs, z_doc, cfg, init_gae(docs[0].shape[1], 8, 0, stream=2))
    assert res.trace[res.best_epoch] < res.trace[0]
    assert len(res.trace) == 40


def test_training_is_deterministic():
    from gaeisumm.gae import init_gae

    docs = _tiny_corpus()
    cfg = RunConfig(latent_dim=8, epochs_sent=5)
    z_doc = np.tanh(np.random.default_rng(0).standard_normal((3, 8)))
    a = sm.train(docs, z_doc, cfg, init_gae(docs[0].shape[1], 8, 0))
    b = sm.train(docs, z_doc, cfg, init_gae(docs[0].shape[1], 8, 0))
    assert [s.selected for s in a.selections] == [s.selected for s in b.selections]
    assert a.trace == b.trace


def test_non_finite_loss_names_document():
    from gaeisumm.gae import init_gae

    docs = _tiny_corpus(2)
    z_doc = np.zeros((2, 8))
    z_doc[1, 0] = np.inf
    with pytest.raises(NumericError, match="'b'.*epoch 0"):
        sm.train(docs, z_doc, RunConfig(latent_dim=8, epochs_sent=2),
                 init_gae(docs[0].shape[1], 8, 0), ids=["a", "b"])


def test_negatives_exclude_own_document():
    table = np.arange(5, dtype=float)[:, None] * np.ones((5, 2))
    negs = sm.draw_negatives(table, 2, RunConfig(), epoch=0)
    assert len(negs) == 4 and all(n[0] != 2 for n in negs)
    assert sm.draw_negatives(table[:1], 0, RunConfig(), 0) == []


def test_clusters_capped_by_document_length():
    Z = np.random.default_rng(0).standard_normal((2, 3))
    labels = sm.assign_clusters(Z, RunConfig(n_clusters=5), 0)
    assert len(set(labels)) == 2
    assert sm.assign_clusters(Z, RunConfig(no_clustering=True), 0) == (0, 0)


def test_params_shape_validation():
    p = zero_params(2, 2)
    with pytest.raises(DimensionError):
        sm.SummarizerParams(p.gru, p.omega, ParamTensor(np.zeros((3, 2))), p.W2)
    with pytest.raises(ValueError):
        sm.SummarizerParams(p.gru, p.omega, p.W1, p.W2, alpha=0.7, beta=0.7)
