import json

import pytest

from domainlens.corpus import (
    Corpus,
    CorpusError,
    ingest,
    load_corpus,
    save_corpus,
    split_sentences,
)

from conftest import synthetic_records, write_records


# -- split_sentences ---------------------------------------------------------

def test_split_three_sentences():
    assert split_sentences("We study X. We find Y. It works.") == [
        "We study X.", "We find Y.", "It works."]


def test_split_no_delimiter_returns_whole():
    assert split_sentences("Single sentence without period") == [
        "Single sentence without period"]


def test_split_abbreviation_not_a_boundary():
    assert split_sentences("Fig. 3 shows results. We conclude.") == [
        "Fig. 3 shows results.", "We conclude."]


def test_split_abbreviation_requires_word_boundary():
    # "piano." ends with the letters of "no." but is a real word.
    assert split_sentences("He played the piano. Then he left.") == [
        "He played the piano.", "Then he left."]


def test_split_requires_following_capital_or_digit():
    assert split_sentences("We used c. elegans here. It worked.") == [
        "We used c. elegans here.", "It worked."]


def test_short_leading_fragment_merges_forward():
    assert split_sentences("A. Then we proceed.") == ["A. Then we proceed."]


def test_numeric_fragment_merges_backward():
    assert split_sentences("We iterate. 42. Then we stop.") == [
        "We iterate. 42.", "Then we stop."]


def test_split_empty_raises():
    with pytest.raises(ValueError):
        split_sentences("   ")


def test_split_no_alpha_raises():
    with pytest.raises(ValueError):
        split_sentences("123. 456.")


def test_split_idempotent_on_own_outputs():
    abstracts = [r["abstract"] for r in synthetic_records(40, n_topics=4, seed=5)]
    abstracts.append("We iterate. 42. Then we stop. See Fig. 2 for details.")
    for abstract in abstracts:
        for sent in split_sentences(abstract):
            assert split_sentences(sent) == [sent]


def test_split_reconstructs_modulo_whitespace():
    abstracts = [r["abstract"] for r in synthetic_records(40, n_topics=4, seed=6)]
    for abstract in abstracts:
        joined = "".join("".join(s.split()) for s in split_sentences(abstract))
        assert joined == "".join(abstract.split())


# -- ingest ------------------------------------------------------------------

def _write_lines(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    return path


def test_ingest_all_valid(tmp_path):
    records = synthetic_records(3, n_topics=1, seed=1)
    corpus = ingest(_write_lines(tmp_path / "in.jsonl", records))
    assert corpus.stats.document_count == 3
    assert corpus.skipped == 0


def test_ingest_skips_empty_abstract(tmp_path):
    records = synthetic_records(2, n_topics=1, seed=2)
    records.append({"paper_id": "BAD", "title": "t", "abstract": "", "keywords": []})
    corpus = ingest(_write_lines(tmp_path / "in.jsonl", records))
    assert corpus.stats.document_count == 2
    assert corpus.skipped == 1


def test_ingest_duplicate_id_first_wins(tmp_path):
    records = synthetic_records(2, n_topics=1, seed=3)
    dup = dict(records[0])
    dup["title"] = "Another title entirely"
    records.append(dup)
    corpus = ingest(_write_lines(tmp_path / "in.jsonl", records))
    assert corpus.stats.document_count == 2
    assert corpus.skipped == 1
    assert corpus.documents[0].title == records[0]["title"]


def test_ingest_max_docs(tmp_path):
    records = synthetic_records(10, n_topics=2, seed=4)
    corpus = ingest(_write_lines(tmp_path / "in.jsonl", records), max_docs=4)
    assert corpus.stats.document_count == 4


def test_ingest_missing_file_fatal(tmp_path):
    with pytest.raises(CorpusError):
        ingest(tmp_path / "nope.jsonl")


def test_ingest_zero_valid_fatal(tmp_path):
    path = tmp_path / "in.jsonl"
    path.write_text('{"paper_id": "x", "title": "", "abstract": ""}\nnot json\n')
    with pytest.raises(CorpusError):
        ingest(path)


def test_sentence_count_invariant(small_corpus):
    total = sum(len(d.sentences) for d in small_corpus.documents)
    assert small_corpus.stats.sentence_count == total


def test_sentence_positions_and_doc_ids(small_corpus):
    for doc in small_corpus.documents:
        assert doc.sentences, doc.paper_id
        for i, sent in enumerate(doc.sentences):
            assert sent.position == i
            assert sent.doc_id == doc.paper_id


# -- persistence -------------------------------------------------------------

def test_roundtrip(tmp_path, small_corpus):
    out = tmp_path / "corpus.jsonl"
    save_corpus(small_corpus, out)
    again = load_corpus(out)
    assert [d.paper_id for d in again.documents] == \
        [d.paper_id for d in small_corpus.documents]
    for a, b in zip(again.documents, small_corpus.documents):
        assert a.title == b.title
        assert a.abstract == b.abstract
        assert a.keywords == b.keywords
        assert [s.text for s in a.sentences] == [s.text for s in b.sentences]


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "other.jsonl"
    path.write_text('{"format": "something-else"}\n')
    with pytest.raises(CorpusError):
        load_corpus(path)
