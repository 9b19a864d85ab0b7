"""Corpus loading, splitting, vocabulary, and integer encoding."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urdu_abssum.corpus import (
    EOS_ID,
    PAD_ID,
    RESERVED_TOKENS,
    SOS_ID,
    UNK_ID,
    RawDocument,
    Vocabulary,
    build_vocab,
    decode_ids,
    encode,
    encode_pair,
    load_corpus,
    split_corpus,
)
from urdu_abssum.errors import DuplicateId, IdOutOfRange, ParseError, TooFewDocuments
from urdu_abssum.preprocess import TokenizedPair


def _write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows),
                    encoding="utf-8")


class TestLoadCorpus:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("", encoding="utf-8")
        assert load_corpus(p) == []

    def test_three_documents_in_order(self, tmp_path):
        p = tmp_path / "c.jsonl"
        rows = [{"id": f"d{i}", "text": f"t{i}", "summary": f"s{i}"} for i in range(3)]
        _write_jsonl(p, rows)
        docs = load_corpus(p)
        assert [d.id for d in docs] == ["d0", "d1", "d2"]
        assert docs[1] == RawDocument(id="d1", text="t1", summary="s1")

    def test_missing_summary_names_line_two(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text(json.dumps({"id": "a", "text": "t", "summary": "s"}) + "\n"
                     + json.dumps({"id": "b", "text": "t"}) + "\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_corpus(p)
        assert err.value.line == 2

    def test_invalid_json_names_line(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"id": "a", "text": "t", "summary": "s"}\n{oops\n', encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_corpus(p)
        assert err.value.line == 2

    def test_extra_keys_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        _write_jsonl(p, [{"id": "a", "text": "t", "summary": "s", "extra": 1}])
        with pytest.raises(ParseError):
            load_corpus(p)

    def test_duplicate_id(self, tmp_path):
        p = tmp_path / "c.jsonl"
        _write_jsonl(p, [{"id": "a", "text": "t", "summary": "s"},
                         {"id": "a", "text": "u", "summary": "v"}])
        with pytest.raises(DuplicateId):
            load_corpus(p)


class TestSplitCorpus:
    def test_seventy_thirty(self):
        docs = list(range(10))
        train, test = split_corpus(docs, 0.7, seed=1)
        assert len(train) == 7 and len(test) == 3

    def test_same_seed_same_split(self):
        docs = list(range(17))
        assert split_corpus(docs, 0.7, seed=5) == split_corpus(docs, 0.7, seed=5)

    def test_floor_rounding(self):
        train, test = split_corpus([1, 2, 3], 0.7, seed=0)
        assert len(train) == 2 and len(test) == 1

    def test_tiny_fraction_keeps_one_train_doc(self):
        train, test = split_corpus([1, 2, 3], 0.01, seed=0)
        assert len(train) == 1 and len(test) == 2

    def test_too_few_documents(self):
        with pytest.raises(TooFewDocuments):
            split_corpus([1], 0.7, seed=0)

    @given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=5))
    def test_partition(self, n, seed):
        docs = list(range(n))
        train, test = split_corpus(docs, 0.7, seed=seed)
        assert sorted(train + test) == docs
        assert len(train) == max(1, int(0.7 * n))


def _pairs(*token_lists):
    return [TokenizedPair(id=str(i), source_tokens=tuple(tokens), summary_tokens=())
            for i, tokens in enumerate(token_lists)]


class TestBuildVocab:
    def test_min_freq_filters(self):
        vocab = build_vocab(_pairs(["x", "x", "y"], ["x"]), min_freq=2, max_size=100)
        assert vocab.size == 5
        assert vocab.id_to_token == RESERVED_TOKENS + ("x",)

    def test_min_freq_one_keeps_everything(self):
        vocab = build_vocab(_pairs(["a", "b"], ["c"]), min_freq=1, max_size=1000)
        assert set(vocab.id_to_token) == set(RESERVED_TOKENS) | {"a", "b", "c"}

    def test_tie_broken_by_first_occurrence(self):
        vocab = build_vocab(_pairs(["b", "a", "a", "b"]), min_freq=1, max_size=100)
        assert vocab.id_of("b") < vocab.id_of("a")

    def test_frequency_orders_ids(self):
        vocab = build_vocab(_pairs(["a", "b", "b"]), min_freq=1, max_size=100)
        assert vocab.id_of("b") == 4 and vocab.id_of("a") == 5

    def test_max_size_truncates(self):
        vocab = build_vocab(_pairs(["a", "b", "b", "c", "c", "c"]), min_freq=1, max_size=6)
        assert vocab.size == 6
        assert vocab.id_to_token == RESERVED_TOKENS + ("c", "b")

    def test_summary_tokens_counted(self):
        pairs = [TokenizedPair(id="0", source_tokens=("a",), summary_tokens=("q", "q"))]
        vocab = build_vocab(pairs, min_freq=2, max_size=100)
        assert vocab.id_of("q") == 4
        assert vocab.id_of("a") == UNK_ID


class TestEncodeDecode:
    @pytest.fixture
    def vocab(self):
        return Vocabulary(list(RESERVED_TOKENS) + ["a", "b", "c", "d"])

    def test_empty_with_markers(self, vocab):
        assert encode([], vocab, 4, add_markers=True) == [SOS_ID, EOS_ID, PAD_ID, PAD_ID]

    def test_oov_maps_to_unk(self, vocab):
        assert encode(["zzz"], vocab, 2, add_markers=False) == [UNK_ID, PAD_ID]

    def test_truncation_preserves_terminal_eos(self, vocab):
        ids = encode(["a", "b", "c", "d"], vocab, 4, add_markers=True)
        assert ids == [SOS_ID, vocab.id_of("a"), vocab.id_of("b"), EOS_ID]

    def test_truncation_without_markers(self, vocab):
        assert encode(["a", "b", "c"], vocab, 2, add_markers=False) == \
            [vocab.id_of("a"), vocab.id_of("b")]

    def test_markers_require_room(self, vocab):
        with pytest.raises(ValueError):
            encode(["a"], vocab, 2, add_markers=True)

    def test_decode_drops_reserved_and_stops_at_eos(self, vocab):
        a = vocab.id_of("a")
        assert decode_ids([SOS_ID, a, EOS_ID, PAD_ID], vocab) == ["a"]
        assert decode_ids([PAD_ID, PAD_ID], vocab) == []
        assert decode_ids([SOS_ID, a, EOS_ID, vocab.id_of("b")], vocab) == ["a"]

    def test_decode_rejects_out_of_range(self, vocab):
        with pytest.raises(IdOutOfRange):
            decode_ids([vocab.size], vocab)

    @given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=6))
    @settings(max_examples=200)
    def test_roundtrip(self, tokens):
        vocab = Vocabulary(list(RESERVED_TOKENS) + ["a", "b", "c", "d"])
        ids = encode(tokens, vocab, 8, add_markers=True)
        assert len(ids) == 8
        assert decode_ids(ids, vocab) == tokens

    @given(st.lists(st.sampled_from(["a", "b", "zz"]), max_size=20),
           st.integers(min_value=3, max_value=10))
    @settings(max_examples=200)
    def test_encode_length_is_exact(self, tokens, max_len):
        vocab = Vocabulary(list(RESERVED_TOKENS) + ["a", "b"])
        assert len(encode(tokens, vocab, max_len, add_markers=True)) == max_len
        assert len(encode(tokens, vocab, max_len, add_markers=False)) == max_len

    def test_encode_pair_target_structure(self, vocab):
        pair = TokenizedPair(id="d", source_tokens=("a", "b"), summary_tokens=("c",))
        enc = encode_pair(pair, vocab, 4, 4)
        assert enc.source_ids == (vocab.id_of("a"), vocab.id_of("b"), PAD_ID, PAD_ID)
        assert enc.target_ids == (SOS_ID, vocab.id_of("c"), EOS_ID, PAD_ID)
        assert enc.id == "d"


class TestVocabularyFile:
    def test_reserved_prefix_enforced(self):
        with pytest.raises(ValueError):
            Vocabulary(["<pad>", "<s>", "</s>", "x", "y"])

    def test_save_load_roundtrip(self, tmp_path):
        vocab = Vocabulary(list(RESERVED_TOKENS) + ["کتاب", "b"])
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[:4] == list(RESERVED_TOKENS)
        assert Vocabulary.load(path) == vocab
