import logging
import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bitext_lens.align import NULL, TrainingConfig, TranslationTable, invert_table, source_priors, train
from bitext_lens.corpus import AlignedCorpus, CorpusError, build_corpus, load_corpus, profile
from bitext_lens.pos import (
    EmojiPosTable,
    corpus_pos_mass,
    induce_emoji_pos,
    load_pos_tags,
    majority_counts,
    pos_prefix,
    top_by_pos,
    write_emoji_pos_csv,
    write_pos_mass_csv,
)


def e2t(probs):
    return TranslationTable.from_dict(probs, "emoji_to_text")


def tags_file(tmp_path, *lines):
    p = tmp_path / "pos.tsv"
    p.write_text("".join(f"{tok}\t{tag}\n" for tok, tag in lines), encoding="utf-8")
    return p


# --- loading ----------------------------------------------------------------------


def test_prefix_rule():
    assert pos_prefix("NNS") == "NN"
    assert pos_prefix("NNP") == "NN"
    assert pos_prefix(".") == "."
    assert pos_prefix("PRP$") == "PR"


def test_load_truncates_plural_tags(tmp_path):
    table = load_pos_tags(tags_file(tmp_path, ("whales", "NNS"), ("whale", "NN")))
    assert table.entries == {"whales": {"NN": 1.0}, "whale": {"NN": 1.0}}


def test_load_counts_occurrences(tmp_path):
    table = load_pos_tags(tags_file(tmp_path, ("run", "VB"), ("run", "NN"), ("Run", "VBD")))
    assert table["run"] == pytest.approx({"VB": 2 / 3, "NN": 1 / 3}, abs=1e-15)


def test_load_short_tag(tmp_path):
    assert load_pos_tags(tags_file(tmp_path, ("!", ".")))["!"] == {".": 1.0}


def test_load_errors(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("whale\tNN\nno tab here\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="line 2"):
        load_pos_tags(p)
    p.write_text("", encoding="utf-8")
    with pytest.raises(CorpusError, match="empty"):
        load_pos_tags(p)
    with pytest.raises(CorpusError):
        load_pos_tags(tmp_path / "missing.tsv")


def test_fixture_loads(pos_fixture_path):
    table = load_pos_tags(pos_fixture_path)
    assert table["whale"] == {"NN": 1.0}
    assert table["is"] == {"VB": 1.0}
    assert table["manhattoes"] == {"NN": 1.0}
    assert "whale's" not in table  # the tagger splits the possessive
    for dist in table.entries.values():
        assert abs(math.fsum(dist.values()) - 1.0) <= 1e-9


# --- induction ---------------------------------------------------------------------


def test_single_support_chain():
    out = induce_emoji_pos(e2t({("🏃", "run"): 1.0}), {"run": {"VB": 1.0}})
    assert out.entries == {"🏃": {"VB": 1.0}}
    assert out.majority == {"🏃": "VB"}


def test_even_mixture():
    out = induce_emoji_pos(e2t({("e", "a"): 0.5, ("e", "b"): 0.5}), {"a": {"NN": 1.0}, "b": {"VB": 1.0}})
    assert out["e"] == pytest.approx({"NN": 0.5, "VB": 0.5}, abs=1e-15)
    assert out.majority["e"] == "NN"  # tie goes to the smaller prefix


def test_weighted_mixture():
    # .6 * (.5, .5) + .4 * (1, 0) = (.7, .3)
    pos = {"a": {"NN": 0.5, "VB": 0.5}, "b": {"NN": 1.0}}
    out = induce_emoji_pos(e2t({("e", "a"): 0.6, ("e", "b"): 0.4}), pos)
    assert out["e"] == pytest.approx({"NN": 0.7, "VB": 0.3}, abs=1e-9)


def test_untagged_mass_is_renormalized_away():
    table = e2t({("e", "a"): 0.5, ("e", "b"): 0.25, ("e", "zzz"): 0.25})
    out = induce_emoji_pos(table, {"a": {"NN": 1.0}, "b": {"VB": 1.0}})
    assert out["e"] == pytest.approx({"NN": 2 / 3, "VB": 1 / 3}, abs=1e-12)


def test_null_row_excluded():
    table = e2t({(NULL, "a"): 1.0, ("e", "a"): 1.0})
    assert set(induce_emoji_pos(table, {"a": {"NN": 1.0}}).entries) == {"e"}


def test_uncovered_emoji_reported(caplog):
    table = e2t({("e", "a"): 1.0, ("f", "zzz"): 1.0})
    with caplog.at_level(logging.WARNING):
        out = induce_emoji_pos(table, {"a": {"NN": 1.0}})
    assert out.omitted == ("f",)
    assert "f" not in out.entries
    assert "f" in caplog.text


def test_wrong_direction_rejected():
    table = TranslationTable.from_dict({("a", "e"): 1.0}, "text_to_emoji")
    with pytest.raises(ValueError, match="invert"):
        induce_emoji_pos(table, {"a": {"NN": 1.0}})


def test_fixture_pipeline_matches_hand_arithmetic(pos_fixture_path):
    pos = load_pos_tags(pos_fixture_path)
    table = e2t(
        {
            ("🐳", "whale"): 0.6, ("🐳", "see"): 0.3, ("🐳", "white"): 0.1,
            ("👀", "see"): 0.5, ("👀", "white"): 0.25, ("👀", "whale's"): 0.25,
            ("⚓", "wharves"): 0.5, ("⚓", "round"): 0.3, ("⚓", "belted"): 0.2,
        }
    )
    out = induce_emoji_pos(table, pos)
    assert out["🐳"] == pytest.approx({"NN": 0.6, "VB": 0.3, "JJ": 0.1}, abs=1e-9)
    # whale's is untagged: renormalise over .75
    assert out["👀"] == pytest.approx({"VB": 2 / 3, "JJ": 1 / 3}, abs=1e-9)
    assert out["⚓"] == pytest.approx({"NN": 0.5, "IN": 0.3, "VB": 0.2}, abs=1e-9)
    assert out.majority == {"🐳": "NN", "👀": "VB", "⚓": "NN"}
    assert top_by_pos(out, "VB", 2) == [("👀", pytest.approx(2 / 3)), ("🐳", pytest.approx(0.3))]


# --- queries and aggregation ---------------------------------------------------------------


def test_top_by_pos_examples():
    table = EmojiPosTable({"e": {"NN": 1.0}}, {"e": "NN"})
    assert top_by_pos(table, "NN", 5) == [("e", 1.0)]
    assert top_by_pos(table, "VB", 5) == []


def test_majority_counts():
    table = EmojiPosTable({}, {"a": "NN", "b": "NN", "c": "VB"})
    assert majority_counts(table) == {"NN": 2, "VB": 1}


def test_corpus_mass_examples():
    one = AlignedCorpus.from_token_pairs([(["run", "run"], ["x"])])
    assert corpus_pos_mass(one, "text", {"run": {"VB": 1.0}}).mass == {"VB": 1.0}
    two = AlignedCorpus.from_token_pairs([(["run", "whale"], ["x"])])
    mass = corpus_pos_mass(two, "text", {"run": {"VB": 1.0}, "whale": {"NN": 1.0}})
    assert mass.mass == {"NN": 0.5, "VB": 0.5}


def test_corpus_mass_without_coverage_is_error():
    one = AlignedCorpus.from_token_pairs([(["run"], ["x"])])
    with pytest.raises(ValueError, match="no text token"):
        corpus_pos_mass(one, "text", {"walk": {"VB": 1.0}})


def test_csv_exports(tmp_path):
    table = EmojiPosTable({"🐳": {"NN": 0.7, "VB": 0.3}}, {"🐳": "NN"})
    write_emoji_pos_csv(tmp_path / "e.csv", table)
    assert (tmp_path / "e.csv").read_text(encoding="utf-8").splitlines() == [
        "emoji,prefix,prob,majority_flag", "🐳,NN,0.7,1", "🐳,VB,0.3,0"
    ]


def test_mini_corpus_end_to_end(mini_corpus_path, pos_fixture_path, tmp_path):
    corpus = build_corpus(load_corpus(mini_corpus_path), profile("s3"))
    table, _ = train(corpus, TrainingConfig(iterations=20))
    pos = load_pos_tags(pos_fixture_path)
    emoji_pos = induce_emoji_pos(table, pos)
    assert set(emoji_pos.entries) == set(corpus.vocab_emoji)
    assert emoji_pos.majority["🐳"] == "NN"
    for side, dists in (("text", pos), ("emoji", emoji_pos)):
        mass = corpus_pos_mass(corpus, side, dists)
        assert abs(math.fsum(mass.mass.values()) - 1.0) <= 1e-9
        write_pos_mass_csv(tmp_path / f"{side}.csv", mass)

    # same mixture through a text-to-emoji model and Bayes inversion
    t2e, _ = train(corpus, TrainingConfig(iterations=20, direction="t2e"))
    inverted = invert_table(t2e, source_priors(corpus, t2e))
    via = induce_emoji_pos(inverted, pos)
    assert set(via.entries) == set(corpus.vocab_emoji)
    assert NULL not in via.entries


# --- properties ---------------------------------------------------------------------------------

PREFIXES = ["NN", "VB", "JJ", "RB", "IN", "."]
TOKENS = ["a", "b", "c", "d", "e", "f"]


def distribution(keys):
    return st.lists(st.floats(0.01, 1.0), min_size=len(keys), max_size=len(keys)).map(
        lambda w: {k: v / math.fsum(w) for k, v in zip(keys, w)}
    )


token_dists = st.dictionaries(
    st.sampled_from(TOKENS),
    st.lists(st.sampled_from(PREFIXES), min_size=1, max_size=4, unique=True).flatmap(distribution),
    min_size=1,
)
emoji_rows = st.dictionaries(
    st.sampled_from(["🐳", "👀", "⚓", "🌊"]),
    st.lists(st.sampled_from(TOKENS + ["zz"]), min_size=1, max_size=5, unique=True).flatmap(distribution),
    min_size=1,
)


def table_from_rows(rows, order=None):
    probs = {}
    for e in order or rows:
        for t, p in rows[e].items():
            probs[(e, t)] = p
    return e2t(probs)


@given(emoji_rows, token_dists)
def test_induced_distributions_are_normalized(rows, pos):
    out = induce_emoji_pos(table_from_rows(rows), pos)
    assert set(out.entries) | set(out.omitted) == set(rows)
    for e, dist in out.entries.items():
        assert abs(math.fsum(dist.values()) - 1.0) <= 1e-9
        best = max(dist.values())
        assert out.majority[e] == min(p for p, v in dist.items() if v == best)
        assert dist[out.majority[e]] == best


@given(emoji_rows, token_dists, st.randoms(use_true_random=False))
def test_induction_ignores_iteration_order(rows, pos, rnd):
    emojis = list(rows)
    rnd.shuffle(emojis)
    shuffled_rows = {}
    for e in emojis:
        items = list(rows[e].items())
        rnd.shuffle(items)
        shuffled_rows[e] = dict(items)
    pos_items = list(pos.items())
    rnd.shuffle(pos_items)
    a = induce_emoji_pos(table_from_rows(rows), pos)
    b = induce_emoji_pos(table_from_rows(shuffled_rows, emojis), dict(pos_items))
    assert a.entries == b.entries
    assert a.majority == b.majority
    assert a.omitted == b.omitted


sentences = st.lists(st.sampled_from(TOKENS), min_size=1, max_size=5)
emoji_sents = st.lists(st.sampled_from(["🐳", "👀", "⚓", "🌊"]), min_size=1, max_size=4)


@given(st.lists(st.tuples(sentences, emoji_sents), min_size=1, max_size=6))
def test_all_nouns_stay_nouns(pairs):
    corpus = AlignedCorpus.from_token_pairs(pairs)
    table, _ = train(corpus, TrainingConfig(iterations=3))
    pos = {t: {"NN": 1.0} for t in corpus.vocab_text}
    emoji_pos = induce_emoji_pos(table, pos)
    assert all(d == {"NN": 1.0} for d in emoji_pos.entries.values())
    assert corpus_pos_mass(corpus, "text", pos).mass == {"NN": 1.0}
    assert corpus_pos_mass(corpus, "emoji", emoji_pos).mass == {"NN": 1.0}


@given(st.lists(st.tuples(sentences, emoji_sents), min_size=1, max_size=6), token_dists)
def test_corpus_mass_is_normalized(pairs, pos):
    corpus = AlignedCorpus.from_token_pairs(pairs)
    assume(any(t in pos for t in corpus.vocab_text))
    mass = corpus_pos_mass(corpus, "text", pos)
    assert abs(math.fsum(mass.mass.values()) - 1.0) <= 1e-9
    assert all(v >= 0 for v in mass.mass.values())
