import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrmt.corpus import (DEFAULT_GROUPS, LANGUAGE_TAGS, CorpusError, EmptyLine,
                         EmptyMixture, EmptyText, EncodingError,
                         GroupMembershipViolation, LanguageGroup,
                         LineCountMismatch, ParallelCorpus, SentencePair,
                         build_mixture, detect_script, load_parallel_corpus,
                         parse_grouping_config, save_parallel_corpus)
from lrmt.toydata import toy_parallel_lines

from conftest import toy_corpus


def write(path, lines, newline=True):
    path.write_text("\n".join(lines) + ("\n" if newline else ""), encoding="utf-8")
    return path


class TestLoad:
    def test_minimal_pair(self, tmp_path):
        src = write(tmp_path / "a.en", ["hello"])
        tgt = write(tmp_path / "a.kha", ["hello"])
        corpus = load_parallel_corpus(src, tgt, "en", "kha")
        assert len(corpus) == 1
        assert corpus.pairs[0].src_text == "hello"

    def test_lines_pair_by_number(self, tmp_path):
        src = write(tmp_path / "a.en", ["one", "two", "three"])
        tgt = write(tmp_path / "a.kha", ["ka", "ar", "lai"])
        corpus = load_parallel_corpus(src, tgt, "en", "kha")
        assert [(p.src_text, p.tgt_text) for p in corpus.pairs] == [
            ("one", "ka"), ("two", "ar"), ("three", "lai")]

    def test_line_count_mismatch(self, tmp_path):
        src = write(tmp_path / "a.en", ["one", "two", "three"])
        tgt = write(tmp_path / "a.kha", ["ka", "ar"])
        with pytest.raises(LineCountMismatch):
            load_parallel_corpus(src, tgt, "en", "kha")

    def test_blank_line_reports_number(self, tmp_path):
        src = write(tmp_path / "a.en", ["one", "", "three"])
        tgt = write(tmp_path / "a.kha", ["ka", "ar", "lai"])
        with pytest.raises(EmptyLine, match="line 2"):
            load_parallel_corpus(src, tgt, "en", "kha")

    def test_bad_encoding(self, tmp_path):
        src = tmp_path / "a.en"
        src.write_bytes(b"caf\xe9\n")  # latin-1, not UTF-8
        tgt = write(tmp_path / "a.kha", ["ka"])
        with pytest.raises(EncodingError):
            load_parallel_corpus(src, tgt, "en", "kha")

    def test_unknown_language_rejected(self, tmp_path):
        src = write(tmp_path / "a.en", ["one"])
        with pytest.raises(CorpusError):
            load_parallel_corpus(src, src, "en", "fr")

    def test_roundtrip_bytes(self, tmp_path):
        src_lines, tgt_lines = toy_parallel_lines("en", "as", 40, seed=3)
        src = write(tmp_path / "b.en", src_lines)
        tgt = write(tmp_path / "b.as", tgt_lines)
        corpus = load_parallel_corpus(src, tgt, "en", "as")
        out_src, out_tgt = tmp_path / "c.en", tmp_path / "c.as"
        save_parallel_corpus(corpus, out_src, out_tgt)
        assert out_src.read_bytes() == src.read_bytes()
        assert out_tgt.read_bytes() == tgt.read_bytes()


class TestSentencePair:
    def test_same_language_rejected(self):
        with pytest.raises(CorpusError):
            SentencePair("en", "en", "a", "b")

    def test_empty_side_rejected(self):
        with pytest.raises(CorpusError):
            SentencePair("en", "kha", "  ", "b")

    def test_newline_rejected(self):
        with pytest.raises(CorpusError):
            SentencePair("en", "kha", "a\nb", "c")

    def test_swapped(self):
        pair = SentencePair("en", "kha", "hello", "khublei")
        back = pair.swapped()
        assert (back.src_lang, back.src_text) == ("kha", "khublei")


class TestDetectScript:
    def test_bengali(self):
        assert detect_script("অসম") == "Bengali"

    def test_latin(self):
        assert detect_script("Khasi ka jingïaroh") == "Latin"

    def test_mixed_majority(self):
        # 3 Bengali letters vs 5 Latin: strict majority is Latin
        assert detect_script("অসম abc de") == "Latin"

    def test_no_alphabetic(self):
        assert detect_script("123 !?") == "Other"

    def test_tie_is_other(self):
        assert detect_script("অস ab") == "Other"

    def test_empty_raises(self):
        with pytest.raises(EmptyText):
            detect_script("")

    @given(st.text(min_size=1, max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_total_on_nonempty(self, text):
        assert detect_script(text) in ("Bengali", "Latin", "Other")

    @pytest.mark.parametrize("lang,script", [
        ("as", "Bengali"), ("mni", "Bengali"), ("kha", "Latin"), ("lus", "Latin")])
    def test_toy_corpora_match_declared_script(self, lang, script):
        _, lines = toy_parallel_lines("en", lang, 200, seed=11)
        hits = sum(detect_script(line) == script for line in lines)
        assert hits / len(lines) >= 0.99


class TestMixture:
    def test_grouped_sizes_and_membership(self):
        # official training sizes for the Latin-script group
        kha = toy_corpus("en", "kha", 24000, seed=1)
        lus = toy_corpus("en", "lus", 50000, seed=2)
        group = DEFAULT_GROUPS[1]
        mixture = build_mixture([kha, lus], "grouped", seed=9, group=group)
        assert len(mixture) == 74000
        assert all(ex.pair.tgt_lang in group.members for ex in mixture)

    def test_bilingual_official_size(self):
        mni = toy_corpus("en", "mni", 21687, seed=3)
        mixture = build_mixture([mni], "bilingual", seed=0)
        assert len(mixture) == 21687

    def test_deterministic_shuffle(self):
        corpus = toy_corpus("en", "kha", 300, seed=5)
        a = build_mixture([corpus], "bilingual", seed=77)
        b = build_mixture([corpus], "bilingual", seed=77)
        assert a == b
        c = build_mixture([corpus], "bilingual", seed=78)
        assert a != c

    def test_shuffle_is_permutation(self):
        kha = toy_corpus("en", "kha", 200, seed=5)
        lus = toy_corpus("en", "lus", 300, seed=6)
        mixture = build_mixture([kha, lus], "multilingual", seed=1)
        assert len(mixture) == 500
        assert sorted(ex.pair.src_text for ex in mixture) == sorted(
            p.src_text for c in (kha, lus) for p in c.pairs)

    def test_tags_are_target_language(self):
        kha = toy_corpus("en", "kha", 10, seed=5)
        mixture = build_mixture([kha], "bilingual", seed=1)
        assert all(ex.source_tokens_prefix == (LANGUAGE_TAGS["kha"],)
                   for ex in mixture)

    def test_group_membership_violation(self):
        asm = toy_corpus("en", "as", 10, seed=5)
        with pytest.raises(GroupMembershipViolation):
            build_mixture([asm], "grouped", seed=1, group=DEFAULT_GROUPS[1])

    def test_bilingual_needs_one_corpus(self):
        kha = toy_corpus("en", "kha", 5, seed=5)
        lus = toy_corpus("en", "lus", 5, seed=6)
        with pytest.raises(CorpusError):
            build_mixture([kha, lus], "bilingual", seed=1)

    def test_empty_mixture(self):
        with pytest.raises(EmptyMixture):
            build_mixture([], "multilingual", seed=1)


class TestGroupingConfig:
    def test_parse(self, tmp_path):
        cfg = write(tmp_path / "g.txt",
                    ["# script groups", "group1: as,mni", "group2: kha,lus"])
        groups = parse_grouping_config(cfg)
        assert [g.members for g in groups] == [frozenset({"as", "mni"}),
                                               frozenset({"kha", "lus"})]

    def test_overlap_rejected(self, tmp_path):
        cfg = write(tmp_path / "g.txt", ["g1: as,mni", "g2: mni,kha"])
        with pytest.raises(CorpusError):
            parse_grouping_config(cfg)

    def test_english_rejected(self):
        with pytest.raises(CorpusError):
            LanguageGroup("bad", frozenset({"en", "kha"}))
