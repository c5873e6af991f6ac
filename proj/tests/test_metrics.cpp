#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <regex>

#include <doctest.h>

#include "sqa/error.hpp"
#include "sqa/metrics.hpp"
#include "sqa/rng.hpp"
#include "sqa/text.hpp"

using namespace sqa;

namespace {

// Memoized recursive edit distance, an independent route from the two-row
// iterative production kernel.
int oracle_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<std::size_t, std::size_t>, int> memo;
    std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
        if (i == a.size()) return static_cast<int>(b.size() - j);
        if (j == b.size()) return static_cast<int>(a.size() - i);
        const auto key = std::make_pair(i, j);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        int best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        best = std::min(best, go(i + 1, j) + 1);
        best = std::min(best, go(i, j + 1) + 1);
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

// Exhaustive alignment for short sequences: no memo, every path explored.
int exhaustive_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b,
                             std::size_t i = 0, std::size_t j = 0) {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    int best = exhaustive_edit_distance(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, exhaustive_edit_distance(a, b, i + 1, j) + 1);
    best = std::min(best, exhaustive_edit_distance(a, b, i, j + 1) + 1);
    return best;
}

int oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<std::size_t, std::size_t>, int> memo;
    std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
        if (i == a.size() || j == b.size()) return 0;
        const auto key = std::make_pair(i, j);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        int best;
        if (a[i] == b[j]) {
            best = 1 + go(i + 1, j + 1);
        } else {
            best = std::max(go(i + 1, j), go(i, j + 1));
        }
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

std::string random_sentence(Rng& rng, std::size_t max_words) {
    static const std::vector<std::string> pool = {"a",   "b",   "c",  "dd", "ee",
                                                  "fff", "ggg", "hi", "jk", "lm"};
    const std::size_t n = rng.uniform_index(max_words + 1);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += " ";
        s += pool[rng.uniform_index(pool.size())];
    }
    return s;
}

// Independent scanner for extract_option built on std::regex.
OptionLabel regex_extract_option(const std::string& text) {
    static const std::regex lead(R"(^\s*([A-Da-d])\.)");
    std::smatch m;
    if (std::regex_search(text, m, lead)) {
        return option_label_from_char(m[1].str()[0]);
    }
    static const std::regex opt(R"([Oo][Pp][Tt][Ii][Oo][Nn] *([A-Za-z0-9]?))");
    auto begin = std::sregex_iterator(text.begin(), text.end(), opt);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::size_t pos = static_cast<std::size_t>(it->position(0));
        if (pos > 0 && std::isalnum(static_cast<unsigned char>(text[pos - 1]))) continue;
        const std::size_t after = pos + 6;
        if (after < text.size() && std::isalnum(static_cast<unsigned char>(text[after]))) continue;
        const std::string tail = it->str(1);
        if (tail.empty()) return OptionLabel::Invalid;
        const std::size_t letter_pos = static_cast<std::size_t>(it->position(1));
        if (letter_pos + 1 < text.size() &&
            std::isalnum(static_cast<unsigned char>(text[letter_pos + 1]))) {
            return OptionLabel::Invalid;
        }
        return option_label_from_char(tail[0]);
    }
    return OptionLabel::Invalid;
}

}  // namespace

TEST_CASE("wer hand examples") {
    CHECK(wer("same words here", "same words here") == 0.0);
    CHECK(wer("", "a b c") == 1.0);
    CHECK(wer("a b c", "a b c d") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(wer("anything", "...!?"), MetricError);  // empty after normalization
    // Normalization: case and punctuation are ignored.
    CHECK(wer("Hello, World!", "hello world") == 0.0);
}

TEST_CASE("wer can exceed 1 on over-long hypotheses") {
    CHECK(wer("w x y z q", "a") == 5.0);
}

TEST_CASE("wer matches the DP oracle on 1000 random pairs") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string hyp = random_sentence(rng, 8);
        std::string ref = random_sentence(rng, 8);
        if (word_tokens(ref).empty()) ref = "a";
        const auto ht = word_tokens(hyp);
        const auto rt = word_tokens(ref);
        const double expected =
            static_cast<double>(oracle_edit_distance(ht, rt)) / static_cast<double>(rt.size());
        CHECK(wer(hyp, ref) == expected);
    }
}

TEST_CASE("wer triangle-style bound against the exhaustive-alignment oracle") {
    Rng rng(2025);
    for (int trial = 0; trial < 200; ++trial) {
        std::string a = random_sentence(rng, 6);
        std::string b = random_sentence(rng, 6);
        std::string c = random_sentence(rng, 6);
        if (word_tokens(b).empty()) b = "a";
        if (word_tokens(c).empty()) c = "b";
        const auto ta = word_tokens(a), tb = word_tokens(b), tc = word_tokens(c);
        const double lhs = wer(a, c) * static_cast<double>(tc.size());
        const double rhs = wer(a, b) * static_cast<double>(tb.size()) +
                           exhaustive_edit_distance(tb, tc);
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("bleu1 hand examples") {
    CHECK(bleu1("the cat sat", "the cat sat") == 1.0);
    // precision 1.0, BP = e^(1 - 6/3)
    CHECK(bleu1("the cat sat", "the cat sat on the mat") ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(bleu1("the cat sat", "the cat sat on the mat") == doctest::Approx(0.36788).epsilon(1e-5));
    CHECK(bleu1("xyz qq", "ab cd") == 0.0);
    CHECK(bleu1("", "a b") == 0.0);  // convention
}

TEST_CASE("bleu1 clips repeated unigrams") {
    // hyp repeats "the" 4x, ref has it twice: clipped 2/4, no brevity penalty.
    CHECK(bleu1("the the the the", "the cat the mat") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rouge_n hand examples") {
    CHECK(rouge_n("the cat", "the dog", 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rouge_n("same tokens", "same tokens", 1) == 1.0);
    CHECK(rouge_n("same tokens", "same tokens", 2) == 1.0);
    CHECK(rouge_n("one", "two", 2) == 0.0);  // no bigrams on either side
    CHECK_THROWS_AS(rouge_n("a", "b", 3), MetricError);
}

TEST_CASE("rouge_l hand examples and oracle") {
    CHECK(rouge_l("a b c", "a c d") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rouge_l("x y z", "x y z") == 1.0);
    CHECK(rouge_l("p q", "r s") == 0.0);

    Rng rng(2026);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string hyp = random_sentence(rng, 7);
        const std::string ref = random_sentence(rng, 7);
        const auto ht = word_tokens(hyp);
        const auto rt = word_tokens(ref);
        double expected = 0.0;
        if (!ht.empty() && !rt.empty()) {
            const int lcs = oracle_lcs(ht, rt);
            const double p = static_cast<double>(lcs) / static_cast<double>(ht.size());
            const double r = static_cast<double>(lcs) / static_cast<double>(rt.size());
            expected = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
        }
        CHECK(rouge_l(hyp, ref) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("overlap metrics are bounded and exact-1 only on identical token streams") {
    Rng rng(2027);
    for (int trial = 0; trial < 300; ++trial) {
        const std::string hyp = random_sentence(rng, 6);
        const std::string ref = random_sentence(rng, 6);
        const auto ht = word_tokens(hyp);
        const auto rt = word_tokens(ref);
        if (ht.empty() || rt.empty()) continue;
        for (double score : {bleu1(hyp, ref), rouge_n(hyp, ref, 1), rouge_n(hyp, ref, 2),
                             rouge_l(hyp, ref)}) {
            CHECK(score >= 0.0);
            CHECK(score <= 1.0 + 1e-12);
        }
        if (ht == rt) {
            CHECK(bleu1(hyp, ref) == 1.0);
            CHECK(rouge_n(hyp, ref, 1) == 1.0);
            CHECK(rouge_l(hyp, ref) == 1.0);
        } else {
            CHECK(rouge_n(hyp, ref, 1) < 1.0);
            CHECK(rouge_l(hyp, ref) < 1.0);
        }
    }
}

TEST_CASE("extract_option hand examples") {
    CHECK(extract_option("The answer is Option B because the speech says so.") == OptionLabel::B);
    CHECK(extract_option("No idea.") == OptionLabel::Invalid);
    CHECK(extract_option("option c is correct; option A is wrong") == OptionLabel::C);
    CHECK(extract_option("B. because of the second line") == OptionLabel::B);
    CHECK(extract_option("  d. lowercase leading works too") == OptionLabel::D);
    CHECK(extract_option("Optional reading is irrelevant") == OptionLabel::Invalid);
    CHECK(extract_option("Option Brief has no standalone letter") == OptionLabel::Invalid);
    CHECK(extract_option("Option E") == OptionLabel::Invalid);
    CHECK(extract_option("The answer is Option") == OptionLabel::Invalid);
}

TEST_CASE("extract_option recovers the label from every part-2 template answer") {
    for (char label : {'A', 'B', 'C', 'D'}) {
        const std::string answer = std::string("The answer is Option ") + label +
                                   " because Option A is x, Option B is y, Option C is z, "
                                   "Option D is w";
        CHECK(extract_option(answer) == option_label_from_char(label));
    }
}

TEST_CASE("extract_option agrees with an independent regex scanner") {
    Rng rng(2028);
    const std::vector<std::string> pieces = {
        "Option A", "option b", "OPTION C", "Option D", "Option E", "Option",  "optional",
        "A.",       "b.",       "no idea",  "the",      "answer",   "is",      "because",
        "Option  B"};
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        const std::size_t n = 1 + rng.uniform_index(5);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) text += " ";
            text += pieces[rng.uniform_index(pieces.size())];
        }
        CHECK(extract_option(text) == regex_extract_option(text));
    }
}

TEST_CASE("macro accuracy and F1 hand computations") {
    {
        const std::vector<OptionLabel> pred = {OptionLabel::A, OptionLabel::B, OptionLabel::C,
                                               OptionLabel::D};
        const MacroScores s = macro_accuracy_f1(pred, {'A', 'B', 'C', 'D'});
        CHECK(s.accuracy == 1.0);
        CHECK(s.macro_f1 == 1.0);
        CHECK(s.macro_recall == 1.0);
    }
    {
        // gold [A,B], pred [A,A]: F1(A)=2/3, F1(B)=0.
        const MacroScores s = macro_accuracy_f1({OptionLabel::A, OptionLabel::A}, {'A', 'B'});
        CHECK(s.accuracy == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    {
        const MacroScores s =
            macro_accuracy_f1({OptionLabel::Invalid, OptionLabel::Invalid}, {'A', 'B'});
        CHECK(s.accuracy == 0.0);
        CHECK(s.macro_f1 == 0.0);
    }
    CHECK_THROWS_AS(macro_accuracy_f1({OptionLabel::A}, {'A', 'B'}), InputError);
    CHECK_THROWS_AS(macro_accuracy_f1({OptionLabel::A}, std::vector<char>{'E'}), InputError);
}

TEST_CASE("macro scores are invariant to record order") {
    Rng rng(2029);
    std::vector<OptionLabel> pred;
    std::vector<char> gold;
    for (int i = 0; i < 64; ++i) {
        pred.push_back(static_cast<OptionLabel>(rng.uniform_index(5)));
        gold.push_back(static_cast<char>('A' + rng.uniform_index(4)));
    }
    const MacroScores base = macro_accuracy_f1(pred, gold);
    std::vector<std::size_t> order(pred.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<OptionLabel> pred2;
    std::vector<char> gold2;
    for (std::size_t i : order) {
        pred2.push_back(pred[i]);
        gold2.push_back(gold[i]);
    }
    const MacroScores shuffled = macro_accuracy_f1(pred2, gold2);
    CHECK(base.accuracy == shuffled.accuracy);
    CHECK(base.macro_f1 == shuffled.macro_f1);
    CHECK(base.macro_recall == shuffled.macro_recall);
}

TEST_CASE("embedding similarity under the default trigram provider") {
    TrigramHashEmbedder provider;
    CHECK(embed_similarity("identical strings", "identical strings", provider) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // Disjoint trigram sets (checked below) give cosine 0.
    const std::string a = "aaaa";
    const std::string b = "zzzz";
    CHECK(embed_similarity(a, b, provider) == doctest::Approx(0.0).epsilon(1e-12));

    // Mixed pair against a direct dot-product oracle over provider vectors.
    const std::string h = "the cat sat on the mat";
    const std::string r = "the cat sat quietly";
    const auto va = provider.embed(h);
    const auto vb = provider.embed(r);
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    const double expected = dot / (std::sqrt(na) * std::sqrt(nb));
    CHECK(embed_similarity(h, r, provider) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("evaluate_pairs populates exactly the task's fields") {
    std::vector<ScoredPair> asr_pairs = {{"1", "a b", "a b c", 0}};
    const EvalReport asr_report = evaluate_pairs(TaskKind::asr, asr_pairs, nullptr);
    CHECK(asr_report.wer.has_value());
    CHECK_FALSE(asr_report.accuracy.has_value());
    CHECK_FALSE(asr_report.bleu1.has_value());

    TrigramHashEmbedder provider;
    std::vector<ScoredPair> sqa1_pairs = {{"1", "the cat", "the cat sat", 0}};
    const EvalReport sqa1_report = evaluate_pairs(TaskKind::sqa1, sqa1_pairs, &provider);
    CHECK_FALSE(sqa1_report.wer.has_value());
    CHECK(sqa1_report.bleu1.has_value());
    CHECK(sqa1_report.embed_sim.has_value());
    CHECK_FALSE(sqa1_report.accuracy.has_value());

    std::vector<ScoredPair> sqa2_pairs = {
        {"1", "The answer is Option A because x.", "The answer is Option A because y.", 'A'},
        {"2", "The answer is Option B because x.", "The answer is Option C because y.", 'C'}};
    const EvalReport sqa2_report = evaluate_pairs(TaskKind::sqa2, sqa2_pairs, &provider);
    CHECK(sqa2_report.accuracy.has_value());
    CHECK(*sqa2_report.accuracy == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sqa2_report.macro_f1.has_value());
    CHECK(sqa2_report.bleu1.has_value());
    // Scores live in [0,1]; wer may exceed 1 but not here.
    for (const auto& v : {sqa2_report.accuracy, sqa2_report.macro_f1, sqa2_report.bleu1,
                          sqa2_report.rouge1, sqa2_report.rouge2, sqa2_report.rouge_l,
                          sqa2_report.embed_sim}) {
        REQUIRE(v.has_value());
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
    }
}

TEST_CASE("evaluate_pairs counts embedding-provider failures as exclusions") {
    struct FlakyEmbedder : Embedder {
        int calls = 0;
        std::vector<double> embed(const std::string& text) override {
            ++calls;
            if (calls > 2) throw MetricError("provider outage");
            return {1.0, 0.0, static_cast<double>(text.size())};
        }
        bool signed_vectors() const override { return true; }
    } flaky;
    std::vector<ScoredPair> pairs = {{"1", "a b", "a b", 0}, {"2", "c d", "c d", 0}};
    const EvalReport report = evaluate_pairs(TaskKind::sqa1, pairs, &flaky);
    CHECK(report.embed_exclusions == 1);
    CHECK(report.embed_sim.has_value());  // the surviving pair still averages
    CHECK(report.rows[1].embed_failed);
}
