"""Pool construction, sampling, stats, and snapshot tests."""

from __future__ import annotations

import numpy as np
import pytest

from phonemdd import (
    PhonemeVocabulary,
    PoolingStrategy,
    UtteranceRecord,
    ValidationError,
    build_pool,
    load_pool,
    pool_stats,
    save_pool,
)

from synthdata import make_corpus


def record_with_labels(labels, utt_id="u0", d=3, seed=0):
    rng = np.random.default_rng(seed)
    n = len(labels)
    return UtteranceRecord(
        utterance_id=utt_id,
        frame_hop=0.02,
        embeddings=rng.normal(size=(n, d)).astype(np.float32),
        frame_labels=np.asarray(labels, dtype=np.uint16),
        canonical=tuple(sorted({l for l in labels if l})),
    )


# labels [a, a, b, blank, b] -> runs a:0-1, b:2-2, b:4-4
RUN_LABELS = [1, 1, 2, 0, 2]


class TestStrategies:
    def test_middle_frame_picks_run_midpoints(self):
        record = record_with_labels(RUN_LABELS)
        pool = build_pool([record], PoolingStrategy.MIDDLE_FRAME)
        assert pool.size == 3
        assert pool.labels.tolist() == [1, 2, 2]
        np.testing.assert_array_equal(pool.entries[0], record.embeddings[0])  # floor((0+1)/2)
        np.testing.assert_array_equal(pool.entries[1], record.embeddings[2])
        np.testing.assert_array_equal(pool.entries[2], record.embeddings[4])

    def test_all_frame_keeps_every_nonblank_frame(self):
        record = record_with_labels(RUN_LABELS)
        pool = build_pool([record], PoolingStrategy.ALL_FRAME)
        assert pool.size == 4
        assert pool.labels.tolist() == [1, 1, 2, 2]
        np.testing.assert_array_equal(
            pool.entries, record.embeddings[[0, 1, 2, 4]]
        )

    def test_mean_frame_averages_runs(self):
        record = record_with_labels(RUN_LABELS)
        pool = build_pool([record], PoolingStrategy.MEAN_FRAME)
        assert pool.size == 3
        emb = record.embeddings
        np.testing.assert_allclose(pool.entries[0], (emb[0] + emb[1]) / 2, rtol=1e-6)
        np.testing.assert_array_equal(pool.entries[1], emb[2])
        np.testing.assert_array_equal(pool.entries[2], emb[4])

    def test_middle_equals_mean_size_and_counts_all_frames(self):
        corpus = make_corpus(seed=5, n_train=6, n_test=1)
        mid = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME)
        mean = build_pool(corpus.train, PoolingStrategy.MEAN_FRAME)
        allf = build_pool(corpus.train, PoolingStrategy.ALL_FRAME)
        n_runs = sum(
            1
            for r in corpus.train
            for label, _, _ in _runs(r.frame_labels)
            if label != 0
        )
        n_frames = sum(int((r.frame_labels != 0).sum()) for r in corpus.train)
        assert mid.size == mean.size == n_runs
        assert allf.size == n_frames

    def test_single_frame_runs_legal_everywhere(self):
        record = record_with_labels([1, 0, 2, 0, 3])
        for strategy in PoolingStrategy:
            pool = build_pool([record], strategy)
            assert pool.labels.tolist() == [1, 2, 3]


def _runs(labels):
    out = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            out.append((int(labels[start]), start, i - 1))
            start = i
    return out


class TestSampling:
    def test_deterministic_bit_identical(self):
        corpus = make_corpus(seed=7, n_train=10, n_test=1)
        a = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, 5, seed=11)
        b = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, 5, seed=11)
        assert a.entries.tobytes() == b.entries.tobytes()
        assert a.labels.tobytes() == b.labels.tobytes()
        assert a.source_utterances == b.source_utterances

    def test_different_seed_changes_selection(self):
        corpus = make_corpus(seed=7, n_train=10, n_test=1)
        a = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, 5, seed=1)
        b = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, 5, seed=2)
        assert a.source_utterances != b.source_utterances

    def test_prefix_nesting_across_sizes(self):
        corpus = make_corpus(seed=7, n_train=10, n_test=1)
        sizes = [2, 5, 8, 10]
        pools = [
            build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, m, seed=3) for m in sizes
        ]
        for small, large in zip(pools, pools[1:]):
            assert large.source_utterances[: len(small.source_utterances)] == small.source_utterances
        everything = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, None, seed=3)
        assert everything.source_utterances == pools[-1].source_utterances

    def test_oversized_sample_rejected_naming_both(self):
        corpus = make_corpus(seed=7, n_train=4, n_test=1)
        with pytest.raises(ValidationError, match="7.*4"):
            build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME, 7)

    def test_empty_records_rejected(self):
        with pytest.raises(ValidationError, match="zero records"):
            build_pool([], PoolingStrategy.MIDDLE_FRAME)

    def test_all_blank_pool_rejected(self):
        record = record_with_labels([0, 0, 0])
        with pytest.raises(ValidationError, match="empty pool"):
            build_pool([record], PoolingStrategy.MIDDLE_FRAME)


class TestPoolInvariants:
    def test_norms_match_rows(self):
        corpus = make_corpus(seed=9, n_train=5, n_test=1)
        pool = build_pool(corpus.train, PoolingStrategy.ALL_FRAME)
        expected = np.linalg.norm(pool.entries.astype(np.float64), axis=1)
        np.testing.assert_allclose(pool.norms, expected, rtol=1e-6)

    def test_no_blank_labels(self):
        corpus = make_corpus(seed=9, n_train=5, n_test=1)
        for strategy in PoolingStrategy:
            pool = build_pool(corpus.train, strategy)
            assert (pool.labels != 0).all()

    def test_arrays_frozen(self):
        pool = build_pool([record_with_labels(RUN_LABELS)], PoolingStrategy.MIDDLE_FRAME)
        with pytest.raises(ValueError):
            pool.entries[0, 0] = 0.0


class TestPoolStats:
    def test_counts_from_run_segmentation(self):
        vocab = PhonemeVocabulary.from_phonemes(["a", "b"])
        pool = build_pool([record_with_labels(RUN_LABELS)], PoolingStrategy.MIDDLE_FRAME)
        assert pool_stats(pool, vocab) == {"a": 1, "b": 2}

    def test_absent_phoneme_reports_zero(self):
        vocab = PhonemeVocabulary.from_phonemes(["a", "b", "c"])
        pool = build_pool([record_with_labels([1, 1, 1])], PoolingStrategy.MIDDLE_FRAME)
        assert pool_stats(pool, vocab) == {"a": 1, "b": 0, "c": 0}

    def test_counts_sum_to_pool_size(self):
        corpus = make_corpus(seed=2, n_train=6, n_test=1)
        pool = build_pool(corpus.train, PoolingStrategy.ALL_FRAME)
        assert sum(pool_stats(pool, corpus.vocabulary).values()) == pool.size


class TestSnapshot:
    def test_roundtrip_byte_identical(self, tmp_path):
        corpus = make_corpus(seed=4, n_train=6, n_test=1)
        vocab = corpus.vocabulary
        pool = build_pool(corpus.train, PoolingStrategy.MEAN_FRAME, 3, seed=5)
        path = tmp_path / "pool.ppol"
        save_pool(pool, vocab, path)
        loaded, loaded_vocab = load_pool(path)
        assert loaded_vocab == vocab
        assert loaded.entries.tobytes() == pool.entries.tobytes()
        assert loaded.labels.tobytes() == pool.labels.tobytes()
        assert loaded.norms.tobytes() == pool.norms.tobytes()
        assert loaded.strategy == pool.strategy
        assert loaded.source_utterances == pool.source_utterances

    def test_resave_is_bit_exact(self, tmp_path):
        corpus = make_corpus(seed=4, n_train=6, n_test=1)
        pool = build_pool(corpus.train, PoolingStrategy.MIDDLE_FRAME)
        p1, p2 = tmp_path / "a.ppol", tmp_path / "b.ppol"
        save_pool(pool, corpus.vocabulary, p1)
        loaded, vocab = load_pool(p1)
        save_pool(loaded, vocab, p2)
        assert p1.read_bytes() == p2.read_bytes()
