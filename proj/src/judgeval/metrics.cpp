#include "judgeval/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "judgeval/error.h"

namespace judgeval {

namespace {

long long tied_pairs(long long run) { return run * (run - 1) / 2; }

// Sorts values in place and returns the number of strictly inverted pairs.
long long count_inversions(std::vector<double>& values) {
    std::vector<double> buffer(values.size());
    long long inversions = 0;
    for (std::size_t width = 1; width < values.size(); width *= 2) {
        for (std::size_t lo = 0; lo < values.size(); lo += 2 * width) {
            auto mid = std::min(lo + width, values.size());
            auto hi = std::min(lo + 2 * width, values.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (values[j] < values[i]) {
                    inversions += static_cast<long long>(mid - i);
                    buffer[k++] = values[j++];
                } else {
                    buffer[k++] = values[i++];
                }
            }
            while (i < mid) buffer[k++] = values[i++];
            while (j < hi) buffer[k++] = values[j++];
        }
        values.swap(buffer);
    }
    return inversions;
}

bool is_constant(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(),
                       [&](double v) { return v == values.front(); });
}

Coefficient pearson_of(std::span<const double> x, std::span<const double> y) {
    if (is_constant(x) || is_constant(y)) return std::nullopt;
    const auto n = static_cast<double>(x.size());
    const double sum_x = std::accumulate(x.begin(), x.end(), 0.0);
    const double sum_y = std::accumulate(y.begin(), y.end(), 0.0);
    // Deviations scaled by n keep integer-valued input exact.
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = n * x[i] - sum_x;
        const double dy = n * y[i] - sum_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

std::string_view to_string(KendallVariant variant) {
    return variant == KendallVariant::kTauA ? "tau_a" : "tau_b";
}

KendallVariant parse_kendall_variant(std::string_view text) {
    if (text == "a" || text == "tau_a") return KendallVariant::kTauA;
    if (text == "b" || text == "tau_b") return KendallVariant::kTauB;
    throw Error(ErrorCode::kInvalidArgument, "unknown Kendall variant '" + std::string(text) + "'");
}

ScoreSeries::ScoreSeries(std::vector<double> metric, std::vector<double> human)
    : metric_(std::move(metric)), human_(std::move(human)) {
    if (metric_.size() != human_.size()) {
        throw Error(ErrorCode::kInvalidArgument, "metric and human series differ in length");
    }
    if (metric_.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "a score series needs at least two pairs");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(metric_.begin(), metric_.end(), finite) ||
        !std::all_of(human_.begin(), human_.end(), finite)) {
        throw Error(ErrorCode::kInvalidArgument, "score series contains a non-finite value");
    }
}

KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
    });

    KendallCounts counts;
    counts.pairs = tied_pairs(static_cast<long long>(n));

    long long run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
        const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
        if (same_x) {
            ++run_x;
        } else {
            counts.tied_x += tied_pairs(run_x);
            run_x = 1;
        }
        if (same_xy) {
            ++run_xy;
        } else {
            counts.tied_both += tied_pairs(run_xy);
            run_xy = 1;
        }
    }

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    counts.discordant = count_inversions(ys);

    long long run_y = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && ys[i] == ys[i - 1]) {
            ++run_y;
        } else {
            counts.tied_y += tied_pairs(run_y);
            run_y = 1;
        }
    }
    return counts;
}

Coefficient kendall_tau(const ScoreSeries& series, KendallVariant variant) {
    const auto c = kendall_counts(series.metric(), series.human());
    const long long numerator = c.concordant() - c.discordant;
    if (variant == KendallVariant::kTauA) {
        if (c.concordant() + c.discordant == 0) return std::nullopt;
        return static_cast<double>(numerator) / static_cast<double>(c.pairs);
    }
    const long long untied_x = c.pairs - c.tied_x;  // C + D + pairs tied only in y
    const long long untied_y = c.pairs - c.tied_y;
    if (untied_x == 0 || untied_y == 0) return std::nullopt;
    const double denom =
        std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
    return std::clamp(static_cast<double>(numerator) / denom, -1.0, 1.0);
}

Coefficient pearson(const ScoreSeries& series) {
    return pearson_of(series.metric(), series.human());
}

std::vector<double> mid_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && values[order[end]] == values[order[start]]) ++end;
        // Positions start+1 .. end share their mean.
        const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
        start = end;
    }
    return ranks;
}

Coefficient spearman(const ScoreSeries& series) {
    const auto rx = mid_ranks(series.metric());
    const auto ry = mid_ranks(series.human());
    return pearson_of(rx, ry);
}

}  // namespace judgeval
