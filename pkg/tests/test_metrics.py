import random

import pytest

from lrmt.metrics import (METRIC_COLUMNS, ChrfConfig, EmptyCorpus, EvalPair,
                          bleu_corpus, chrf_corpus, render_report,
                          render_report_tsv, ribes_corpus, score_panel,
                          ter_corpus, ter_sentence_edits, tokenize_13a,
                          write_report_files)
from lrmt.metrics.chrf import CHRF2, CHRF_PP
from lrmt.metrics.ribes import ribes_sentence

from oracles import (oracle_bleu, oracle_chrf, oracle_ribes, oracle_ter,
                     oracle_ter_edits, oracle_tokenize_13a)

TOL = 1e-9


def as_pairs(data):
    return [EvalPair(c["hyp"], c["ref"]) for c in data["cases"]]


def impl_scores(pairs):
    return {
        "BLEU": bleu_corpus(pairs),
        "chrF2": chrf_corpus(pairs, CHRF2),
        "chrF++": chrf_corpus(pairs, CHRF_PP),
        "TER": ter_corpus(pairs),
        "RIBES": ribes_corpus(pairs),
    }


def oracle_scores(cases):
    return {
        "BLEU": oracle_bleu(cases),
        "chrF2": oracle_chrf(cases, 6, 0, 2.0),
        "chrF++": oracle_chrf(cases, 6, 2, 2.0),
        "TER": oracle_ter(cases),
        "RIBES": oracle_ribes(cases),
    }


class TestGoldenCorpus:
    def test_implementations_match_frozen_values(self, golden):
        got = impl_scores(as_pairs(golden))
        for metric, frozen in golden["expected"]["corpus"].items():
            assert got[metric] == pytest.approx(frozen, abs=TOL), metric

    def test_oracles_still_reproduce_frozen_values(self, golden):
        cases = [(c["hyp"], c["ref"]) for c in golden["cases"]]
        got = oracle_scores(cases)
        for metric, frozen in golden["expected"]["corpus"].items():
            assert got[metric] == pytest.approx(frozen, abs=TOL), metric

    @pytest.mark.parametrize("block", [f"block_{i}" for i in range(5)])
    def test_blocks_match(self, golden, block):
        i = int(block[-1])
        pairs = as_pairs(golden)[i * 10:(i + 1) * 10]
        got = impl_scores(pairs)
        for metric, frozen in golden["expected"][block].items():
            assert got[metric] == pytest.approx(frozen, abs=TOL), metric

    def test_identity_panel_is_exact(self, golden):
        pairs = [EvalPair(c["ref"], c["ref"]) for c in golden["cases"]]
        panel = impl_scores(pairs)
        assert panel["BLEU"] == 100.0
        assert panel["chrF2"] == 100.0
        assert panel["chrF++"] == 100.0
        assert panel["TER"] == 0.0
        assert panel["RIBES"] == 1.0


class TestBleu:
    def test_all_empty_hypotheses(self):
        pairs = [EvalPair("", "some reference here") for _ in range(4)]
        assert bleu_corpus(pairs) == 0.0

    def test_randomized_agreement_with_fresh_oracle(self):
        rng = random.Random(99)
        words = ["a", "bb", "ccc", "1", "2.5", "x-ray", "end."]
        cases = []
        for _ in range(20):
            ref = " ".join(rng.choices(words, k=rng.randint(3, 9)))
            hyp = " ".join(rng.choices(words, k=rng.randint(1, 9)))
            cases.append((hyp, ref))
        pairs = [EvalPair(h, r) for h, r in cases]
        assert bleu_corpus(pairs) == pytest.approx(oracle_bleu(cases), abs=TOL)

    def test_13a_tokenizer_matches_independent_rules(self):
        samples = ["Hello, world!", "A 1.5-litre jug.", "x:y;z", "(1+2)=3",
                    "war-\ntime", "&quot;quoted&amp;", "nums 1,000.5 end",
                    "dash 5-6 and a-b"]
        for text in samples:
            assert tokenize_13a(text) == oracle_tokenize_13a(text)

    def test_order_permutation_invariant(self, golden):
        pairs = as_pairs(golden)
        shuffled = list(pairs)
        random.Random(1).shuffle(shuffled)
        assert bleu_corpus(pairs) == pytest.approx(bleu_corpus(shuffled), abs=TOL)


class TestChrf:
    def test_disjoint_ngrams_zero(self):
        assert chrf_corpus([EvalPair("cat", "dog")], CHRF2) == pytest.approx(0.0, abs=1e-9)

    def test_cat_sat_example_matches_oracle(self):
        cases = [("cat sat", "cat mat")]
        got = chrf_corpus([EvalPair(*cases[0])], CHRF2)
        assert got == pytest.approx(oracle_chrf(cases, 6, 0, 2.0), abs=TOL)

    def test_whitespace_only_difference_ignored(self):
        assert chrf_corpus([EvalPair("ab c", "a bc")], CHRF2) == 100.0

    def test_word_order_changes_chrfpp_not_chrf2(self):
        pair = [EvalPair("the cat sat", "the  cat   sat")]
        assert chrf_corpus(pair, CHRF2) == 100.0
        assert chrf_corpus(pair, CHRF_PP) == 100.0  # word split also normalizes

    def test_empty_hypotheses_zero(self):
        assert chrf_corpus([EvalPair("", "ref text")], CHRF2) == pytest.approx(
            0.0, abs=1e-9)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ChrfConfig(char_order=0)


class TestTer:
    def test_single_substitution(self):
        edits, words = ter_sentence_edits("a x c", "a b c")
        assert (edits, words) == (1, 3)
        assert ter_corpus([EvalPair("a x c", "a b c")]) == pytest.approx(100 / 3)

    def test_single_shift(self):
        edits, words = ter_sentence_edits("c a b", "a b c")
        assert (edits, words) == (1, 3)

    def test_matches_oracle_on_reorderings(self):
        cases = [("b c a d", "a b c d"), ("x a b c", "a b c y"),
                 ("one two three four", "four one two three")]
        for hyp, ref in cases:
            assert ter_sentence_edits(hyp, ref) == oracle_ter_edits(hyp, ref)

    def test_empty_hypothesis_costs_all_insertions(self):
        edits, words = ter_sentence_edits("", "a b c")
        assert (edits, words) == (3, 3)

    def test_corpus_is_sum_ratio(self):
        pairs = [EvalPair("a b", "a b"), EvalPair("x", "a b c")]
        # 0 edits/2 words + 3 edits/3 words -> 3/5
        assert ter_corpus(pairs) == pytest.approx(100 * 3 / 5)


class TestRibes:
    def test_swapped_two_words_zero(self):
        assert ribes_sentence("b a", "a b") == 0.0

    def test_no_overlap_zero(self):
        assert ribes_sentence("x y", "a b") == 0.0

    def test_identity_single_word(self):
        assert ribes_sentence("hello", "hello") == 1.0

    def test_repeated_words_context_disambiguation(self, golden):
        cases = [(c["hyp"], c["ref"]) for c in golden["cases"]]
        for hyp, ref in cases:
            assert ribes_sentence(hyp, ref) == pytest.approx(
                oracle_ribes([(hyp, ref)]), abs=TOL)

    def test_brevity_and_precision_penalties(self):
        score = ribes_sentence("a b", "a b c d")
        # nkt=1, p=1, bp=exp(1-4/2)=exp(-1)
        import math
        assert score == pytest.approx(math.exp(-1) ** 0.10, abs=1e-12)


class TestPanelAndErrors:
    def test_score_panel_keys(self):
        panel = score_panel([EvalPair("a b", "a b")])
        assert tuple(panel) == METRIC_COLUMNS

    @pytest.mark.parametrize("fn", [bleu_corpus, ter_corpus, ribes_corpus,
                                    lambda p: chrf_corpus(p, CHRF2)])
    def test_empty_corpus_rejected(self, fn):
        with pytest.raises(EmptyCorpus):
            fn([])

    def test_reference_must_be_nonempty(self):
        with pytest.raises(ValueError):
            EvalPair("hyp", "   ")


class TestReport:
    def full_results(self):
        regimes = ["bilingual", "multilingual", "multi2bi", "frozen_encoder",
                   "frozen_encoder_embedding", "grouped"]
        results = {}
        value = 10.0
        for regime in regimes:
            for direction in ("en2xx", "xx2en"):
                for lang in ("as", "kha", "lus", "mni"):
                    results[(regime, direction, lang)] = {
                        m: value for m in METRIC_COLUMNS}
                    value += 0.25
        return results

    def test_six_regime_table_structure(self):
        text = render_report(self.full_results())
        lines = text.splitlines()
        assert lines[0] == "chrF2"
        # one row per regime between the rule line and the blank separator
        first_table = lines[: lines.index("")]
        data_rows = first_table[5:]
        assert len(data_rows) == 6
        assert data_rows[0].startswith("Bilingual FT")
        header = first_table[3]
        assert header.count("as") == 2 and header.count("mni") == 2
        assert "English > Indic" in first_table[2]
        assert "Indic > English" in first_table[2]

    def test_empty_results_is_header_only(self):
        text = render_report({})
        for metric in METRIC_COLUMNS:
            assert metric in text
        assert "Bilingual FT" not in text

    def test_single_cell_has_seven_dashes(self):
        results = {("bilingual", "en2xx", "kha"): {m: 42.0 for m in METRIC_COLUMNS}}
        text = render_report(results, metrics=("chrF2",))
        row = next(line for line in text.splitlines()
                   if line.startswith("Bilingual FT"))
        assert row.count("—") == 7
        assert "42.00" in row

    def test_delta_column_against_baseline(self):
        results = {
            ("bilingual", "en2xx", "kha"): {"chrF2": 40.0},
            ("multilingual", "en2xx", "kha"): {"chrF2": 42.5},
        }
        text = render_report(results, metrics=("chrF2",), baseline="bilingual")
        assert "(+2.50)" in text

    def test_tsv_twin(self):
        tsv = render_report_tsv(self.full_results())
        lines = tsv.splitlines()
        assert lines[0] == "metric\tregime\tdirection\tlanguage\tscore"
        assert len(lines) == 1 + len(METRIC_COLUMNS) * 6 * 8

    def test_write_files_and_figures(self, tmp_path):
        paths = write_report_files(self.full_results(), tmp_path)
        assert paths["txt"].exists() and paths["tsv"].exists()
        assert len(paths["figures"]) == len(METRIC_COLUMNS)
        for fig in paths["figures"]:
            assert fig.exists() and fig.stat().st_size > 0

    def test_comet_column_renders_empty(self):
        results = {("bilingual", "en2xx", "kha"): {"chrF2": 40.0}}
        text = render_report(results, metrics=("chrF2", "COMET"))
        assert "COMET" in text
        comet_table = text.split("COMET")[1]
        assert "—" in comet_table
