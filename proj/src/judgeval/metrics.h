#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace judgeval {

enum class KendallVariant { kTauA, kTauB };

std::string_view to_string(KendallVariant variant);
/// Accepts "a", "b", "tau_a", "tau_b".
KendallVariant parse_kendall_variant(std::string_view text);

/// A correlation value, or nullopt when the coefficient is undefined for the
/// data (a constant series, no comparable pairs).
using Coefficient = std::optional<double>;

/// Paired metric/human scores. Construction checks equal lengths, n >= 2 and
/// finite values, throwing Error(kInvalidArgument) otherwise.
class ScoreSeries {
public:
    ScoreSeries(std::vector<double> metric, std::vector<double> human);

    std::span<const double> metric() const noexcept { return metric_; }
    std::span<const double> human() const noexcept { return human_; }
    std::size_t size() const noexcept { return metric_.size(); }

    /// Same pairs with the roles of the two series exchanged.
    ScoreSeries swapped() const { return ScoreSeries(human_, metric_); }

private:
    std::vector<double> metric_;
    std::vector<double> human_;
};

/// Pair counts behind Kendall's tau. x is the metric series, y the human one.
struct KendallCounts {
    long long pairs = 0;          // n(n-1)/2
    long long tied_x = 0;         // pairs tied in x (including tied in both)
    long long tied_y = 0;         // pairs tied in y (including tied in both)
    long long tied_both = 0;
    long long discordant = 0;

    long long concordant() const { return pairs - tied_x - tied_y + tied_both - discordant; }
};

/// O(n log n) counting by sort + merge-sort inversions.
KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y);

/// tau_b = (C - D) / sqrt((C + D + T_x)(C + D + T_y)); tau_a = (C - D) / (n(n-1)/2).
Coefficient kendall_tau(const ScoreSeries& series, KendallVariant variant = KendallVariant::kTauB);

Coefficient pearson(const ScoreSeries& series);

/// Pearson over mid-ranks.
Coefficient spearman(const ScoreSeries& series);

/// 1-based ranks with ties sharing the mean of the positions they span.
std::vector<double> mid_ranks(std::span<const double> values);

}  // namespace judgeval
