// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <algorithm>
#include <numeric>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "judgeval/dataset.h"
#include "judgeval/error.h"
#include "judgeval/extraction.h"
#include "judgeval/metrics.h"
#include "judgeval/prompt_registry.h"
#include "judgeval/report.h"
#include "judgeval/runner.h"
#include "oracles.h"
#include "test_util.h"

namespace {

using namespace judgeval;
using Clock = std::chrono::steady_clock;
using V = std::vector<double>;

struct Check {
    bool ok = true;
    std::string why;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool close_rel(const Coefficient& got, const std::optional<double>& want, double rel) {
    if (!got || !want) return got.has_value() == want.has_value();
    return std::fabs(*got - *want) <= rel * std::fabs(*want) || *got == *want;
}

std::string show(const Coefficient& c) {
    return c ? std::to_string(*c) : std::string("undefined");
}

// 1. Random integer series with ties against brute-force implementations.
Check correlation_oracles() {
    Check c;
    const auto start = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> size(2, 8);
    int series_checked = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const int n = size(rng);
        // Narrow value ranges force ties; wide ones exercise the untied path.
        std::uniform_int_distribution<int> value(0, trial % 3 == 0 ? 2 : (trial % 3 == 1 ? 6 : 100));
        V x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = value(rng);
            y[i] = value(rng);
        }
        ScoreSeries s(x, y);
        const auto label = " at trial " + std::to_string(trial);
        c.expect(close_rel(kendall_tau(s, KendallVariant::kTauA), oracle::tau_a(x, y), 1e-12), "tau_a" + label);
        c.expect(close_rel(kendall_tau(s, KendallVariant::kTauB), oracle::tau_b(x, y), 1e-12), "tau_b" + label);
        c.expect(close_rel(pearson(s), oracle::pearson(x, y), 1e-12), "pearson" + label);
        c.expect(close_rel(spearman(s), oracle::spearman(x, y), 1e-12), "spearman" + label);
        ++series_checked;
    }
    const double elapsed = seconds_since(start);
    c.expect(series_checked >= 1000, "too few series");
    c.expect(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
    if (c.ok) c.why = std::to_string(series_checked) + " series, " + std::to_string(elapsed) + " s";
    return c;
}

// 2. Identity, reversal and constant series.
Check boundaries() {
    Check c;
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + trial % 30;
        std::uniform_int_distribution<int> value(0, 100);
        V x(n);
        for (auto& v : x) v = value(rng);
        V reversed(n);
        for (int i = 0; i < n; ++i) reversed[i] = 1000 - x[i];
        bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
        if (constant) continue;

        ScoreSeries same(x, x);
        c.expect(kendall_tau(same) == 1.0, "kendall(x,x) = " + show(kendall_tau(same)));
        c.expect(pearson(same) == 1.0, "pearson(x,x) = " + show(pearson(same)));
        c.expect(spearman(same) == 1.0, "spearman(x,x) = " + show(spearman(same)));
        ScoreSeries rev(x, reversed);
        c.expect(kendall_tau(rev) == -1.0, "kendall reversal = " + show(kendall_tau(rev)));
        c.expect(spearman(rev) == -1.0, "spearman reversal = " + show(spearman(rev)));

        V flat(n, 42.0);
        for (const auto& s : {ScoreSeries(flat, x), ScoreSeries(x, flat), ScoreSeries(flat, flat)}) {
            c.expect(!kendall_tau(s, KendallVariant::kTauB), "kendall on constant defined");
            c.expect(!pearson(s), "pearson on constant defined");
            c.expect(!spearman(s), "spearman on constant defined");
        }
        c.expect(!kendall_tau(ScoreSeries(flat, flat), KendallVariant::kTauA), "tau_a on constant defined");
    }
    // Undefined coefficients must not turn into zeros downstream.
    CorrelationReport report;
    TemplateRow row;
    report.rows.push_back(row);
    c.expect(report_to_json(report).find("\"kendall\": null") != std::string::npos, "json undefined");
    c.expect(format_table(report).find("undefined") != std::string::npos, "table undefined");
    return c;
}

bool no_score(std::string_view text) {
    try {
        extract_score(text);
    } catch (const Error& e) {
        return e.code() == ErrorCode::kNoScoreFound;
    }
    return false;
}

// 3. Extraction round trip, fuzz and long digit runs.
Check extraction() {
    Check c;
    const auto start = Clock::now();
    for (int n = 0; n <= 100; ++n) {
        const auto text = "Score: " + std::to_string(n);
        c.expect(!no_score(text) && extract_score(text).score == n, "round trip " + std::to_string(n));
    }

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(0, 32);
    std::uniform_int_distribution<int> printable(32, 126);
    const std::string digit_heavy = "0123456789012345678901234 .:/-xS\n";
    std::uniform_int_distribution<std::size_t> pick(0, digit_heavy.size() - 1);
    for (int i = 0; i < 10000; ++i) {
        std::string text;
        for (int k = len(rng); k > 0; --k) {
            text.push_back(i % 2 ? digit_heavy[pick(rng)] : static_cast<char>(printable(rng)));
        }
        auto want = oracle::score_matches(text);
        auto got = find_score_tokens(text);
        bool same = got.size() == want.size();
        for (std::size_t k = 0; same && k < got.size(); ++k) {
            same = got[k].begin == want[k].first && got[k].end == want[k].second;
        }
        if (same && !want.empty()) {
            auto j = extract_score(text);
            same = j.match_span.begin == want[0].first && j.ambiguous == (want.size() > 1);
        } else if (same) {
            same = no_score(text);
        }
        c.expect(same, "fuzz disagreement on \"" + text + "\"");
    }

    std::uniform_int_distribution<int> digit(0, 9);
    std::uniform_int_distribution<int> run_len(4, 24);
    for (int i = 0; i < 5000; ++i) {
        std::string run;
        for (int k = run_len(rng); k > 0; --k) run.push_back(static_cast<char>('0' + digit(rng)));
        c.expect(no_score("Score: " + run + "."), "false positive on " + run);
    }
    for (int n = 1000; n <= 9999; ++n) c.expect(no_score(std::to_string(n)), "false positive on " + std::to_string(n));

    const double elapsed = seconds_since(start);
    c.expect(elapsed < 5.0, "runtime " + std::to_string(elapsed) + " s");
    if (c.ok) c.why = "101 round trips, 10000 fuzz strings, " + std::to_string(elapsed) + " s";
    return c;
}

// 4. Golden renders with anchor phrases.
Check golden_renders() {
    Check c;
    const auto root = testing::source_dir() / "tests/golden";
    auto fixture = nlohmann::json::parse(testing::slurp(root / "fixture_item.json"));
    EvalItem item{fixture.at("id"), fixture.at("source"), fixture.at("summary"), std::nullopt, {}};
    const std::map<TemplateId, std::string> anchors = {
        {TemplateId::P1, "comparing the key points and overall coherence"},
        {TemplateId::P2, "To calculate Score, first answer the following questions"},
        {TemplateId::P3, "score the Samaritan quality"},
        {TemplateId::P4, "Source text:"},
        {TemplateId::P5, "let's think step by step"},
        {TemplateId::P6, "Consider these example that summarization is graded in scale 0 - 100"},
    };
    for (auto id : kAllTemplates) {
        const auto name = std::string(to_string(id));
        const auto golden = testing::slurp(root / "render" / (name + ".txt"));
        c.expect(!golden.empty(), "missing golden " + name);
        c.expect(render(PromptRegistry::builtin().get(id), item).text == golden, name + " differs from golden");
        c.expect(golden.find(anchors.at(id)) != std::string::npos, name + " lacks its anchor phrase");
    }
    return c;
}

// Gold values are distinct integers so ranks and scores coincide.
std::vector<EvalItem> synthetic_items(int n) {
    std::vector<int> gold(101);
    std::iota(gold.begin(), gold.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(gold.begin(), gold.end(), rng);
    std::vector<EvalItem> items;
    for (int i = 0; i < n; ++i) {
        items.push_back({"syn-" + std::to_string(i), "Synthetic source document number " + std::to_string(i) + ".",
                         "Summary " + std::to_string(i) + ".", static_cast<double>(gold[i]), {}});
    }
    return items;
}

int noisy_score(const EvalItem& item, std::size_t index) {
    // Deterministic, rank-perturbing: shifts of up to +-12.
    const int noise = static_cast<int>((index * 7919 + 13) % 25) - 12;
    return std::clamp(static_cast<int>(*item.gold) + noise, 0, 100);
}

MockBackend::Script script_for(const std::vector<EvalItem>& items, bool noisy) {
    MockBackend::Script script;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const int score = noisy ? noisy_score(items[i], i) : static_cast<int>(*items[i].gold);
        script[item_content_hash(items[i])] = {"Score: " + std::to_string(score)};
    }
    return script;
}

RunConfig run_config(const std::filesystem::path& dir) {
    RunConfig config;
    config.dataset_path = dir / "synthetic.jsonl";
    config.template_ids.assign(kAllTemplates.begin(), kAllTemplates.end());
    config.cache_dir = dir / "cache";
    config.concurrency = 8;
    return config;
}

struct E2E {
    Check check;
    testing::TempDir dir;
    std::string report_json;
    std::string table;
};

// 5. Scripted end-to-end runs.
Check end_to_end(E2E& state) {
    Check& c = state.check;
    const auto start = Clock::now();
    const auto items = synthetic_items(50);
    save_dataset(items, state.dir / "synthetic.jsonl", DatasetFormat::kJsonl);

    auto identity = Runner(run_config(state.dir.path()), std::make_shared<MockBackend>(script_for(items, false))).run();
    c.expect(identity.report.rows.size() == 6, "expected six rows");
    for (const auto& row : identity.report.rows) {
        const auto name = std::string(to_string(row.template_id));
        c.expect(row.kendall == 1.0 && row.pearson == 1.0 && row.spearman == 1.0,
                 name + " identity run: " + show(row.kendall) + " " + show(row.pearson) + " " + show(row.spearman));
        c.expect(row.n_scored == 50 && row.n_failed == 0, name + " counts");
    }
    state.report_json = report_to_json(identity.report);
    state.table = format_table(identity.report);

    testing::TempDir noisy_dir;
    save_dataset(items, noisy_dir / "synthetic.jsonl", DatasetFormat::kJsonl);
    auto noisy = Runner(run_config(noisy_dir.path()), std::make_shared<MockBackend>(script_for(items, true))).run();
    V metric, human;
    for (std::size_t i = 0; i < items.size(); ++i) {
        metric.push_back(noisy_score(items[i], i));
        human.push_back(*items[i].gold);
    }
    const auto want_tau = oracle::tau_b(metric, human);
    const auto want_pearson = oracle::pearson_pairwise(metric, human);
    const auto want_spearman = oracle::spearman_pairwise(metric, human);
    c.expect(want_tau && *want_tau < 1.0, "noise did not perturb ranks");
    for (const auto& row : noisy.report.rows) {
        const auto name = std::string(to_string(row.template_id));
        c.expect(row.kendall == want_tau, name + " noisy kendall " + show(row.kendall) + " vs " + show(want_tau));
        c.expect(row.pearson == want_pearson, name + " noisy pearson " + show(row.pearson) + " vs " + show(want_pearson));
        c.expect(row.spearman == want_spearman,
                 name + " noisy spearman " + show(row.spearman) + " vs " + show(want_spearman));
    }
    const double elapsed = seconds_since(start);
    c.expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s");
    if (c.ok) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "identity 1/1/1; noisy tau %.6f pearson %.6f spearman %.6f; %.2f s",
                      *want_tau, *want_pearson, *want_spearman, elapsed);
        c.why = buf;
    }
    return c;
}

std::map<std::pair<std::string, std::string>, RunRecord> keyed(const std::vector<RunRecord>& records) {
    std::map<std::pair<std::string, std::string>, RunRecord> out;
    for (const auto& r : records) out[{r.item_id, r.template_id}] = r;
    return out;
}

// 6. Cache reuse and resume.
Check cache_and_resume(const E2E& previous) {
    Check c;
    const auto items = synthetic_items(50);

    auto config = run_config(previous.dir.path());
    config.records_path = previous.dir / "rerun.jsonl";
    auto silent = std::make_shared<MockBackend>(MockBackend::Script{});
    auto rerun = Runner(config, silent).run();
    c.expect(silent->calls() == 0, "rerun made " + std::to_string(silent->calls()) + " backend calls");
    c.expect(report_to_json(rerun.report) == previous.report_json, "rerun JSON report differs");
    c.expect(format_table(rerun.report) == previous.table, "rerun table differs");

    testing::TempDir clean_dir, broken_dir;
    for (const auto* d : {&clean_dir, &broken_dir}) save_dataset(items, *d / "synthetic.jsonl", DatasetFormat::kJsonl);
    auto clean_config = run_config(clean_dir.path());
    clean_config.concurrency = 1;
    Runner(clean_config, std::make_shared<MockBackend>(script_for(items, true))).run();
    const auto clean = read_records(clean_config.effective_records_path());

    auto broken_config = run_config(broken_dir.path());
    broken_config.flush_every = 7;
    auto flaky = std::make_shared<MockBackend>(script_for(items, true));
    flaky->fail_after(137);
    bool interrupted = false;
    try {
        Runner(broken_config, flaky).run();
    } catch (const BackendUnavailable&) {
        interrupted = true;
    }
    c.expect(interrupted, "the flaky run did not stop");
    const auto partial = read_records(broken_config.effective_records_path());
    c.expect(!partial.empty() && partial.size() < clean.size(), "partial record count " + std::to_string(partial.size()));

    auto resumed_outcome = Runner(broken_config, std::make_shared<MockBackend>(script_for(items, true))).run();
    const auto resumed = read_records(broken_config.effective_records_path());
    c.expect(resumed_outcome.stats.resumed == partial.size(), "resume skipped the wrong number of pairs");
    c.expect(resumed.size() == clean.size(), "record counts differ after resume");
    auto a = keyed(clean), b = keyed(resumed);
    c.expect(a.size() == b.size() && a.size() == resumed.size(), "duplicate records after resume");
    for (const auto& [key, record] : a) {
        auto it = b.find(key);
        c.expect(it != b.end() && same_outcome(it->second, record), "record differs for " + key.first + "/" + key.second);
    }
    if (c.ok) {
        c.why = "0 backend calls on rerun; resumed " + std::to_string(partial.size()) + "+" +
                std::to_string(resumed.size() - partial.size()) + " records equal the clean run";
    }
    return c;
}

// 7. Table layout against the golden.
Check table_format() {
    Check c;
    CorrelationReport report;
    report.meta.model = "orca_mini_v3_7b";
    report.meta.explanations_enabled = true;
    const double values[6][3] = {{0.477, 0.495, 0.619}, {0.470, 0.468, 0.607}, {0.472, 0.498, 0.612},
                                 {0.467, 0.504, 0.610}, {0.454, 0.543, 0.589}, {0.283, 0.513, 0.376}};
    for (int i = 0; i < 6; ++i) {
        TemplateRow row;
        row.template_id = kAllTemplates[i];
        row.kendall = values[i][0];
        row.pearson = values[i][1];
        row.spearman = values[i][2];
        row.n_scored = i == 4 ? 98 : 100;
        row.n_failed = i == 4 ? 2 : 0;
        report.rows.push_back(row);
    }
    const auto golden = testing::slurp(testing::source_dir() / "tests/golden/report_table.txt");
    c.expect(!golden.empty(), "missing golden table");
    c.expect(format_table(report) == golden, "table differs from golden");
    return c;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int n, const std::string& name, const std::function<Check()>& fn) {
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.why = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %d (%s)%s%s\n", c.ok ? "PASS" : "FAIL", n, name.c_str(),
                    c.why.empty() ? "" : ": ", c.why.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    };

    report(1, "correlation oracles", correlation_oracles);
    report(2, "boundaries", boundaries);
    report(3, "extraction", extraction);
    report(4, "golden renders", golden_renders);
    E2E e2e;
    report(5, "end-to-end mock run", [&] { return end_to_end(e2e); });
    report(6, "cache and resume", [&] { return cache_and_resume(e2e); });
    report(7, "report format", table_format);
    return failures == 0 ? 0 : 1;
}
