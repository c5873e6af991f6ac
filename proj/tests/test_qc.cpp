#include <algorithm>
#include <map>
#include <set>

#include <doctest.h>

#include "sqa/error.hpp"
#include "sqa/qc.hpp"
#include "sqa/rng.hpp"
#include "sqa/text.hpp"

using namespace sqa;

namespace {

SqaRecord basic_record(const std::string& id = "r1") {
    SqaRecord r;
    r.id = id;
    r.task = TaskKind::sqa1;
    r.speech_path = "f.sqaf";
    r.document = "the harbor master counted seventeen boats before the storm arrived";
    r.question = "How many boats did the harbor master count?";
    r.answer = "The harbor master counted seventeen boats.";
    return r;
}

SqaRecord mc_record(const std::string& id = "m1") {
    SqaRecord r;
    r.id = id;
    r.task = TaskKind::sqa2;
    r.speech_path = "f.sqaf";
    r.document = "the painter mixed blue and yellow to make green for the mural";
    r.question = "Which color did the painter make?";
    r.options = {"red", "green", "purple", "orange"};
    r.answer = "The answer is Option B because Option A red is not mixed, Option B green is the "
               "color the painter mixed, Option C purple is not in the mural, Option D orange "
               "is not in the mural.";
    r.label = 'B';
    return r;
}

// Independent longest-common-substring oracle: suffix automaton over the
// first string, walked with the second.
int lcs_suffix_automaton(const std::string& a, const std::string& b) {
    struct State {
        int len = 0, link = -1;
        std::map<char, int> next;
    };
    std::vector<State> st(2 * std::max<std::size_t>(a.size(), 1) + 2);
    int last = 0, size = 1;
    st[0].len = 0;
    st[0].link = -1;
    for (char ch : a) {
        int cur = size++;
        st[cur].len = st[last].len + 1;
        int p = last;
        while (p != -1 && !st[p].next.count(ch)) {
            st[p].next[ch] = cur;
            p = st[p].link;
        }
        if (p == -1) {
            st[cur].link = 0;
        } else {
            int q = st[p].next[ch];
            if (st[p].len + 1 == st[q].len) {
                st[cur].link = q;
            } else {
                int clone = size++;
                st[clone] = st[q];
                st[clone].len = st[p].len + 1;
                while (p != -1 && st[p].next[ch] == q) {
                    st[p].next[ch] = clone;
                    p = st[p].link;
                }
                st[q].link = clone;
                st[cur].link = clone;
            }
        }
        last = cur;
    }
    int v = 0, length = 0, best = 0;
    for (char ch : b) {
        while (v && !st[v].next.count(ch)) {
            v = st[v].link;
            length = st[v].len;
        }
        if (st[v].next.count(ch)) {
            v = st[v].next[ch];
            ++length;
        }
        best = std::max(best, length);
    }
    return best;
}

}  // namespace

TEST_CASE("terminology: standalone 'text' becomes 'speech', case preserved") {
    SqaRecord r = basic_record();
    r.question = "According to the text, what happened?";
    r.answer = "Text says so. The textual context stays. TEXT!";
    r.document = "the text document stays untouched";
    const TerminologyResult out = refine_terminology(r);
    CHECK(out.record.question == "According to the speech, what happened?");
    CHECK(out.record.answer == "Speech says so. The textual context stays. SPEECH!");
    CHECK(*out.record.document == "the text document stays untouched");
    CHECK(out.edits == 3);

    // Idempotent.
    const TerminologyResult again = refine_terminology(out.record);
    CHECK(again.edits == 0);
    CHECK(again.record.question == out.record.question);
    CHECK(again.record.answer == out.record.answer);
}

TEST_CASE("terminology handles options and word boundaries") {
    SqaRecord r = mc_record();
    r.options = {"text", "context", "text-book", "plain text"};
    const TerminologyResult out = refine_terminology(r);
    CHECK(out.record.options[0] == "speech");
    CHECK(out.record.options[1] == "context");
    CHECK(out.record.options[2] == "speech-book");
    CHECK(out.record.options[3] == "plain speech");
}

TEST_CASE("repetition: a question embedding the whole document never passes") {
    SqaRecord r = basic_record();
    r.question = "Given that " + *r.document + ", what came next?";
    const RepetitionResult out = filter_repetition(r, 50);
    CHECK(out.outcome != RepetitionOutcome::pass);
}

TEST_CASE("repetition: short shared phrases pass") {
    SqaRecord r = basic_record();
    r.question = "How many boats did the harbor master count?";  // shares < min_run chars
    const RepetitionResult out = filter_repetition(r, 50);
    CHECK(out.outcome == RepetitionOutcome::pass);
    CHECK(out.record.question == r.question);
}

TEST_CASE("repetition: removing the quoted span can fix the question") {
    SqaRecord r = basic_record();
    r.document = "in the spring of that year the expedition crossed the frozen river at dawn "
                 "carrying supplies for nine weeks";
    r.question = "Considering that in the spring of that year the expedition crossed the frozen "
                 "river at dawn carrying supplies, how long were they provisioned for?";
    const RepetitionResult out = filter_repetition(r, 50);
    CHECK(out.outcome == RepetitionOutcome::fixed);
    CHECK(out.record.question.find("expedition crossed") == std::string::npos);
    CHECK(out.record.question.find('?') != std::string::npos);
    // The fixed question still passes a second time through.
    const RepetitionResult again = filter_repetition(out.record, 50);
    CHECK(again.outcome == RepetitionOutcome::pass);
}

TEST_CASE("repetition: a question that is nothing but quotation is rejected") {
    SqaRecord r = basic_record();
    r.document = "a long and very specific sentence about the lighthouse keeper who counted "
                 "ships every single morning";
    r.question = "a long and very specific sentence about the lighthouse keeper who counted "
                 "ships every single morning";
    const RepetitionResult out = filter_repetition(r, 50);
    CHECK(out.outcome == RepetitionOutcome::reject);
}

TEST_CASE("repetition threshold agrees with the suffix-automaton oracle") {
    Rng rng(404);
    const std::string alphabet = "ab cd";
    for (int trial = 0; trial < 200; ++trial) {
        std::string doc, question;
        const std::size_t doc_len = 20 + rng.uniform_index(60);
        const std::size_t q_len = 10 + rng.uniform_index(50);
        for (std::size_t i = 0; i < doc_len; ++i) {
            doc.push_back(alphabet[rng.uniform_index(alphabet.size())]);
        }
        for (std::size_t i = 0; i < q_len; ++i) {
            question.push_back(alphabet[rng.uniform_index(alphabet.size())]);
        }
        if (rng.uniform_index(2) == 0 && doc.size() > 12) {
            // Plant a shared run.
            const std::size_t start = rng.uniform_index(doc.size() - 12);
            question += " " + doc.substr(start, 12 + rng.uniform_index(doc.size() - start - 11));
        }
        const std::string nd = normalize_whitespace(doc);
        const std::string nq = normalize_whitespace(question);
        const int expected = lcs_suffix_automaton(nd, nq);
        CHECK(longest_shared_run(doc, question) == expected);

        // pass exactly when the longest shared run is under the threshold
        for (int min_run : {5, 12, 30}) {
            SqaRecord r = basic_record("fuzz");
            r.document = doc;
            r.question = question;
            const RepetitionResult out = filter_repetition(r, min_run);
            if (expected < min_run) {
                CHECK(out.outcome == RepetitionOutcome::pass);
            } else {
                CHECK(out.outcome != RepetitionOutcome::pass);
            }
        }
    }
}

TEST_CASE("relevance: verbatim overlap scores 10, disjoint scores 0") {
    LexicalJudge judge;
    SqaRecord full = basic_record();
    full.question = "harbor master counted seventeen boats";
    full.answer = "storm arrived";
    CHECK(score_relevance(full, judge) == 10);

    SqaRecord none = basic_record();
    none.question = "Why do penguins migrate?";
    none.answer = "Because winter approaches.";
    CHECK(score_relevance(none, judge) == 0);
}

TEST_CASE("relevance agrees with an independent word-set oracle") {
    LexicalJudge judge;
    Rng rng(905);
    const std::vector<std::string> pool = {"boat",  "storm",  "harbor", "count", "green",
                                           "mural", "paint",  "river",  "dawn",  "nine",
                                           "weeks", "keeper", "ship",   "blue",  "yellow"};
    for (int trial = 0; trial < 100; ++trial) {
        auto draw_words = [&](std::size_t n) {
            std::string s;
            for (std::size_t i = 0; i < n; ++i) {
                if (i) s += " ";
                s += pool[rng.uniform_index(pool.size())];
            }
            return s;
        };
        SqaRecord r = basic_record("fuzz");
        r.document = draw_words(6 + rng.uniform_index(6));
        r.question = draw_words(2 + rng.uniform_index(4)) + "?";
        r.answer = draw_words(2 + rng.uniform_index(4)) + ".";

        // Oracle: plain set intersection over content words.
        std::set<std::string> qa;
        for (const auto& w : content_words(r.question + " " + r.answer)) qa.insert(w);
        std::set<std::string> doc;
        for (const auto& w : content_words(*r.document)) doc.insert(w);
        std::size_t overlap = 0;
        for (const auto& w : qa) overlap += doc.count(w);
        const int expected = static_cast<int>(
            std::lround(10.0 * static_cast<double>(overlap) / static_cast<double>(qa.size())));
        CHECK(score_relevance(r, judge) == expected);
    }
}

TEST_CASE("sufficiency: extractive answers pass, novel entities regenerate") {
    LexicalJudge judge;
    SqaRecord ok = basic_record();
    CHECK(check_sufficiency(ok, judge) == Sufficiency::pass);

    SqaRecord missing = basic_record();
    missing.answer = "The captain was named Archibald.";  // nowhere in doc or question
    CHECK(check_sufficiency(missing, judge) == Sufficiency::regenerate);

    // Only the key (first) sentence matters.
    SqaRecord tail = basic_record();
    tail.answer = "The harbor master counted seventeen boats. Archibald disagreed later.";
    CHECK(check_sufficiency(tail, judge) == Sufficiency::pass);

    // Question words count as available context.
    SqaRecord via_question = basic_record();
    via_question.question = "Did Archibald see seventeen boats?";
    via_question.answer = "Archibald did see seventeen boats.";
    CHECK(check_sufficiency(via_question, judge) == Sufficiency::pass);
}

TEST_CASE("part-2 structure: the golden rejection set") {
    SqaRecord good = mc_record();
    CHECK(validate_part2_structure(good) == StructureReason::ok);

    SqaRecord dup = mc_record();
    dup.options = {"red", "green", "green ", "orange"};  // B and C collide after normalization
    CHECK(validate_part2_structure(dup) == StructureReason::dup_option);

    SqaRecord three = mc_record();
    three.options = {"red", "green", "purple"};
    CHECK(validate_part2_structure(three) == StructureReason::option_count);

    SqaRecord wrong_label = mc_record();
    wrong_label.answer = "The answer is Option C because Option A no, Option B no, Option C "
                         "yes, Option D no.";
    CHECK(validate_part2_structure(wrong_label) == StructureReason::label_mismatch);

    SqaRecord no_option_named = mc_record();
    no_option_named.answer = "Green, clearly.";
    CHECK(validate_part2_structure(no_option_named) == StructureReason::label_mismatch);

    SqaRecord no_analysis = mc_record();
    no_analysis.answer = "The answer is Option B.";
    CHECK(validate_part2_structure(no_analysis) == StructureReason::missing_analysis);

    SqaRecord not_mc = basic_record();
    CHECK_THROWS_AS(validate_part2_structure(not_mc), InputError);
}

TEST_CASE("qc pipeline: report rows sorted, each record exactly once, survivors valid") {
    std::vector<SqaRecord> records;
    records.push_back(mc_record("z-last"));
    records.push_back(basic_record("a-first"));
    SqaRecord rejected = mc_record("m-dup");
    rejected.options = {"x", "x", "y", "z"};
    records.push_back(rejected);
    SqaRecord insufficient = basic_record("q-insufficient");
    insufficient.answer = "Zanzibar exports cloves.";
    records.push_back(insufficient);

    LexicalJudge judge;
    std::vector<SqaRecord> kept;
    const QcReport report = run_qc_pipeline(records, judge, kept);

    REQUIRE(report.rows.size() == records.size());
    CHECK(std::is_sorted(report.rows.begin(), report.rows.end(),
                         [](const QcRow& a, const QcRow& b) { return a.id < b.id; }));
    std::set<std::string> seen;
    for (const auto& row : report.rows) CHECK(seen.insert(row.id).second);

    for (const auto& r : kept) CHECK_NOTHROW(r.validate());
    std::set<std::string> kept_ids;
    for (const auto& r : kept) kept_ids.insert(r.id);
    CHECK(kept_ids.count("a-first") == 1);
    CHECK(kept_ids.count("z-last") == 1);
    CHECK(kept_ids.count("m-dup") == 0);
    CHECK(kept_ids.count("q-insufficient") == 0);

    for (const auto& row : report.rows) {
        if (row.id == "m-dup") {
            CHECK_FALSE(row.kept);
            CHECK(row.reject_reason == "dup_option");
        }
        if (row.id == "q-insufficient") {
            CHECK_FALSE(row.kept);
            CHECK(row.reject_reason == "regenerate");
        }
    }
}

TEST_CASE("qc pipeline fuzz: every survivor satisfies the record schema") {
    Rng rng(31337);
    std::vector<SqaRecord> records;
    const std::vector<std::string> words = {"text", "boat", "storm", "green", "river", "dawn"};
    for (int i = 0; i < 120; ++i) {
        SqaRecord r;
        r.id = "fz-" + std::to_string(i);
        r.speech_path = "f.sqaf";
        const int kind = static_cast<int>(rng.uniform_index(3));
        r.task = kind == 0 ? TaskKind::asr : kind == 1 ? TaskKind::sqa1 : TaskKind::sqa2;
        auto sentence = [&](std::size_t n) {
            std::string s;
            for (std::size_t k = 0; k < n; ++k) {
                if (k) s += " ";
                s += words[rng.uniform_index(words.size())];
            }
            return s;
        };
        r.document = sentence(8);
        r.question = "What about " + sentence(1 + rng.uniform_index(3)) + "?";
        if (r.task == TaskKind::sqa2) {
            r.options = {"text", "boat xx", "green yy", "river zz"};
            if (rng.uniform_index(4) == 0) r.options[1] = "text";  // sometimes duplicate
            const int li = static_cast<int>(rng.uniform_index(4));
            r.label = static_cast<char>('A' + li);
            r.answer = "The answer is Option " + std::string(1, *r.label) +
                       " because Option A " + sentence(1) + ", Option B " + sentence(1) +
                       ", Option C " + sentence(1) + ", Option D " + sentence(1) + ".";
        } else {
            r.answer = sentence(2 + rng.uniform_index(3)) + ".";
        }
        records.push_back(std::move(r));
    }
    LexicalJudge judge;
    std::vector<SqaRecord> kept;
    const QcReport report = run_qc_pipeline(records, judge, kept);
    CHECK(report.rows.size() == records.size());
    for (const auto& r : kept) CHECK_NOTHROW(r.validate());
}
