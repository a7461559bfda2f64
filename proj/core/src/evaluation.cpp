#include "coshare/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "coshare/errors.hpp"
#include "coshare/text.hpp"

namespace coshare {

ConfusionCounts score(const Watchlist& watchlist, const std::vector<Ipv4>& actual,
                      const std::vector<Ipv4>& universe) {
    auto in_universe = [&](Ipv4 ip) {
        return std::binary_search(universe.begin(), universe.end(), ip);
    };
    for (const WatchlistEntry& e : watchlist.entries)
        if (!in_universe(e.source_ip))
            throw InputError("score: listed source " + format_ipv4(e.source_ip) +
                             " outside the universe");
    for (Ipv4 ip : actual)
        if (!in_universe(ip))
            throw InputError("score: actual attacker " + format_ipv4(ip) +
                             " outside the universe");

    ConfusionCounts counts;
    counts.victim = watchlist.victim;
    counts.test_day = watchlist.test_day;
    counts.universe_size = universe.size();
    for (const WatchlistEntry& e : watchlist.entries) {
        if (std::binary_search(actual.begin(), actual.end(), e.source_ip))
            ++counts.tp;
        else
            ++counts.fp;
    }
    counts.fn = actual.size() - counts.tp;
    counts.tn = universe.size() - counts.tp - counts.fp - counts.fn;
    return counts;
}

BoundsReport bounds(const Dataset& sampled, const std::string& victim, int test_day,
                    const PredictionParams& params) {
    const DayRange train = training_window(params, test_day);
    const DayRange test{test_day, test_day + params.t_test - 1};
    const std::vector<Ipv4>& attackers = source_set(sampled, victim, test).ips;
    const std::vector<Ipv4>& own_train = source_set(sampled, victim, train).ips;

    BoundsReport report;
    report.victim = victim;
    report.test_day = test_day;
    for (Ipv4 ip : attackers)
        if (std::binary_search(own_train.begin(), own_train.end(), ip)) ++report.lub;

    // Union of every sampled victim's training sources.
    std::vector<Ipv4> any_train;
    for (const std::string& v : sampled.victims()) {
        const std::vector<Ipv4>& ips = source_set(sampled, v, train).ips;
        any_train.insert(any_train.end(), ips.begin(), ips.end());
    }
    std::sort(any_train.begin(), any_train.end());
    any_train.erase(std::unique(any_train.begin(), any_train.end()), any_train.end());
    for (Ipv4 ip : attackers)
        if (std::binary_search(any_train.begin(), any_train.end(), ip)) ++report.gub;
    return report;
}

std::optional<double> improvement(std::size_t tp_baseline, std::size_t tp_collab) {
    if (tp_baseline == 0) return std::nullopt;
    return (static_cast<double>(tp_collab) - static_cast<double>(tp_baseline)) /
           static_cast<double>(tp_baseline);
}

ImprovementStats summarize_improvements(std::span<const std::optional<double>> values) {
    ImprovementStats stats;
    double sum = 0.0;
    for (const auto& value : values) {
        if (!value) {
            ++stats.undefined;
            continue;
        }
        if (stats.defined == 0) {
            stats.min = stats.max = *value;
        } else {
            stats.min = std::min(stats.min, *value);
            stats.max = std::max(stats.max, *value);
        }
        ++stats.defined;
        sum += *value;
    }
    if (stats.defined > 0) stats.mean = sum / static_cast<double>(stats.defined);
    return stats;
}

std::optional<RocPoint> roc_point(const ConfusionCounts& counts) {
    const std::size_t negatives = counts.fp + counts.tn;
    const std::size_t positives = counts.tp + counts.fn;
    if (negatives == 0 || positives == 0) return std::nullopt;
    return RocPoint{static_cast<double>(counts.fp) / static_cast<double>(negatives),
                    static_cast<double>(counts.tp) / static_cast<double>(positives)};
}

std::optional<double> coalition_stability(const PartnershipRound& earlier,
                                          const PartnershipRound& later) {
    double sum = 0.0;
    std::size_t victims = 0;
    for (const auto& [victim, partners] : earlier.coalitions) {
        if (partners.empty()) continue;
        const std::vector<std::string>* kept = later.partners_of(victim);
        std::size_t overlap = 0;
        if (kept)
            for (const std::string& p : partners)
                if (std::binary_search(kept->begin(), kept->end(), p)) ++overlap;
        sum += static_cast<double>(overlap) / static_cast<double>(partners.size());
        ++victims;
    }
    if (victims == 0) return std::nullopt;
    return sum / static_cast<double>(victims);
}

RoundStats round_stats(const PartnershipRound& round) {
    RoundStats stats;
    std::size_t total_partners = 0;
    for (const auto& [victim, partners] : round.coalitions) {
        if (partners.empty()) continue;
        ++stats.collaborators;
        total_partners += partners.size();
    }
    if (stats.collaborators > 0)
        stats.mean_coalition_size =
            static_cast<double>(total_partners) / static_cast<double>(stats.collaborators);
    return stats;
}

namespace {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0; // n-1 denominator
    std::size_t n = 0;
};

SampleMoments moments(std::span<const double> sample, const char* label) {
    if (sample.size() < 2)
        throw InputError(std::string(label) + ": need at least two values");
    SampleMoments m;
    m.n = sample.size();
    for (double v : sample) m.mean += v;
    m.mean /= static_cast<double>(m.n);
    for (double v : sample) m.variance += (v - m.mean) * (v - m.mean);
    m.variance /= static_cast<double>(m.n - 1);
    if (m.variance <= 0.0)
        throw InputError(std::string(label) + ": zero variance makes the test degenerate");
    return m;
}

// Continued fraction for the regularized incomplete beta (its standard
// even/odd-step form); converges fast for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
    constexpr double eps = 1e-16, tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw InputError("incomplete beta: parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double regularized_gamma_q(double s, double x) {
    if (!(s > 0.0)) throw InputError("incomplete gamma: shape must be positive");
    if (x < 0.0) throw InputError("incomplete gamma: argument must be non-negative");
    if (x == 0.0) return 1.0;
    const double ln_front = -x + s * std::log(x) - std::lgamma(s);
    if (x < s + 1.0) {
        // Series for the lower function P; Q = 1 - P.
        double term = 1.0 / s, sum = term, ap = s;
        for (int n = 1; n <= 500; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(ln_front);
    }
    // Continued fraction for Q directly.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(ln_front) * h;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    const SampleMoments ma = moments(a, "welch_t_test: first sample");
    const SampleMoments mb = moments(b, "welch_t_test: second sample");
    const double va = ma.variance / static_cast<double>(ma.n);
    const double vb = mb.variance / static_cast<double>(mb.n);

    TTestResult result;
    result.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
    result.df = (va + vb) * (va + vb) /
                (va * va / static_cast<double>(ma.n - 1) +
                 vb * vb / static_cast<double>(mb.n - 1));
    // Two-sided p from the t distribution's tail mass.
    const double x = result.df / (result.df + result.t * result.t);
    result.p = regularized_incomplete_beta(result.df / 2.0, 0.5, x);
    return result;
}

ChiSquareResult chi_square_test(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    if (rows < 2) throw InputError("chi_square_test: need at least two rows");
    const std::size_t cols = table[0].size();
    if (cols < 2) throw InputError("chi_square_test: need at least two columns");

    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (table[r].size() != cols)
            throw InputError("chi_square_test: ragged table");
        for (std::size_t c = 0; c < cols; ++c) {
            if (table[r][c] < 0.0)
                throw InputError("chi_square_test: negative cell count");
            row_sum[r] += table[r][c];
            col_sum[c] += table[r][c];
            total += table[r][c];
        }
    }

    ChiSquareResult result;
    result.df = static_cast<int>((rows - 1) * (cols - 1));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = row_sum[r] * col_sum[c] / total;
            if (!(expected > 0.0))
                throw InputError("chi_square_test: zero expected count");
            const double diff = table[r][c] - expected;
            result.chi2 += diff * diff / expected;
        }
    }
    result.p = regularized_gamma_q(result.df / 2.0, result.chi2 / 2.0);
    return result;
}

void confusion_csv(std::ostream& out, std::span<const ConfusionCounts> rows) {
    out << "victim,test_day,tp,fp,tn,fn,universe_size\n";
    for (const ConfusionCounts& row : rows)
        out << row.victim << ',' << row.test_day << ',' << row.tp << ',' << row.fp << ','
            << row.tn << ',' << row.fn << ',' << row.universe_size << '\n';
}

void bounds_csv(std::ostream& out, std::span<const BoundsReport> rows) {
    out << "victim,test_day,lub,gub\n";
    for (const BoundsReport& row : rows)
        out << row.victim << ',' << row.test_day << ',' << row.lub << ',' << row.gub << '\n';
}

void roc_csv(std::ostream& out, std::span<const ConfusionCounts> rows) {
    out << "victim,test_day,fpr,tpr\n";
    for (const ConfusionCounts& row : rows) {
        out << row.victim << ',' << row.test_day << ',';
        if (auto point = roc_point(row))
            out << format_double(point->fpr) << ',' << format_double(point->tpr);
        else
            out << ',';
        out << '\n';
    }
}

void summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
    out << "metric,strategy,scope,mean_improvement,min_improvement,max_improvement,"
           "improvement_defined,improvement_undefined,mean_collaborators,"
           "mean_coalition_size\n";
    for (const SummaryRow& row : rows) {
        out << row.metric << ',' << row.strategy << ',' << row.scope << ',';
        if (row.improvement.defined > 0)
            out << format_double(row.improvement.mean) << ','
                << format_double(row.improvement.min) << ','
                << format_double(row.improvement.max);
        else
            out << ",,";
        out << ',' << row.improvement.defined << ',' << row.improvement.undefined << ','
            << format_double(row.mean_collaborators) << ','
            << format_double(row.mean_coalition_size) << '\n';
    }
}

} // namespace coshare
