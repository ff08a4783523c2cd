#ifndef LIMDIST_LAB_HPP
#define LIMDIST_LAB_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <limdist/arith.hpp>
#include <limdist/compensated.hpp>
#include <limdist/error.hpp>
#include <limdist/model.hpp>
#include <limdist/parallel.hpp>

namespace limdist
{

// c + secular(y) + Re sum_{lambda_n <= X} r_n e^{i lambda_n y} at each y.
inline std::vector<double> eval_trig_sum(const coefficient_model &m, double X, std::span<const double> y_grid,
                                         unsigned workers = default_workers())
{
    if (X < m.x0) {
        fail(error_kind::domain, "eval_trig_sum: X below the model's X0");
    }
    const std::size_t n = m.count_upto(X);
    std::vector<double> out(y_grid.size());
    constexpr std::size_t chunk = 512;
    const std::size_t nchunks = (y_grid.size() + chunk - 1) / chunk;
    parallel_for(nchunks, workers, [&](std::size_t ci) {
        const std::size_t lo = ci * chunk;
        const std::size_t hi = std::min(y_grid.size(), lo + chunk);
        for (std::size_t j = lo; j < hi; ++j) {
            const double y = y_grid[j];
            compensated_sum<double> s;
            s += m.c;
            s += m.secular_value(y);
            for (std::size_t k = 0; k < n; ++k) {
                const auto &t = m.terms[k];
                const double ph = t.lambda * y;
                s += t.r.real() * std::cos(ph) - t.r.imag() * std::sin(ph);
            }
            out[j] = s.value();
        }
    });
    return out;
}

struct lab_config {
    sieve_config sieve{};
    // Largest e^Y the lab will sieve.
    double sieve_limit = 1e8;
};

inline void check_sieve_capacity(double Y, const lab_config &cfg)
{
    if (!(Y > 0.0) || std::exp(Y) > cfg.sieve_limit * (1.0 + 1e-12)) {
        fail(error_kind::capacity, "Y beyond the sieve limit (e^Y <= " + detail::fmt15(cfg.sieve_limit) + ")");
    }
}

// Normalized error term for the model's label on the grid.
inline std::vector<double> model_truth(const coefficient_model &m, std::span<const double> y_grid,
                                       const lab_config &cfg = {})
{
    const auto id = error_term_id::parse(m.label);
    if (!y_grid.empty()) {
        check_sieve_capacity(y_grid.back(), cfg);
    }
    const auto s = error_term_series(id, y_grid, cfg.sieve);
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i] = s[i].value[0];
    }
    return out;
}

struct residual_report {
    double X = 0.0;
    double Y = 0.0;
    double y_start = 0.0;
    double grid_step = 0.0;
    std::size_t points = 0;
    double rms = 0.0;
    double max_abs = 0.0;
};

// Compares precomputed truth on y_grid with the model truncated at X. The
// secular part of the model is added back to the truth.
inline residual_report residual_against(const coefficient_model &m, double X, std::span<const double> y_grid,
                                        std::span<const double> truth, unsigned workers = default_workers())
{
    if (truth.size() != y_grid.size() || y_grid.empty()) {
        fail(error_kind::arity_mismatch, "residual: truth and grid sizes differ or are empty");
    }
    const auto approx = eval_trig_sum(m, X, y_grid, workers);
    residual_report r;
    r.X = X;
    r.y_start = y_grid.front();
    r.Y = y_grid.back();
    r.grid_step = y_grid.size() > 1 ? (y_grid.back() - y_grid.front()) / static_cast<double>(y_grid.size() - 1) : 0.0;
    r.points = y_grid.size();
    compensated_sum<double> ss;
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        const double e = truth[i] + m.secular_value(y_grid[i]) - approx[i];
        ss += e * e;
        r.max_abs = std::max(r.max_abs, std::abs(e));
    }
    r.rms = std::sqrt(ss.value() / static_cast<double>(y_grid.size()));
    return r;
}

inline residual_report residual(const coefficient_model &m, double X, double Y, double step,
                                std::optional<double> y_start = std::nullopt, const lab_config &cfg = {})
{
    check_sieve_capacity(Y, cfg);
    const double y0 = y_start.value_or(m.y0);
    const auto grid = uniform_grid(y0, Y, step);
    const auto truth = model_truth(m, grid, cfg);
    return residual_against(m, X, grid, truth, cfg.sieve.workers);
}

struct axis_bins {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 1;

    double width() const noexcept
    {
        return (hi - lo) / static_cast<double>(count);
    }

    std::size_t index(double v) const noexcept
    {
        const double f = (v - lo) / width();
        if (!(f > 0.0)) {
            return 0;
        }
        return std::min(count - 1, static_cast<std::size_t>(f));
    }
};

enum class weighting { uniform_in_y, logarithmic_in_x };

struct empirical_distribution {
    std::size_t dim = 1;
    std::vector<axis_bins> axes;
    std::vector<double> mass; // row-major, last axis fastest
    std::vector<double> mean;
    std::vector<double> variance;
    std::size_t sample_count = 0;
    weighting weight = weighting::uniform_in_y;

    double total_mass() const
    {
        compensated_sum<double> s;
        for (double v : mass) {
            s += v;
        }
        return s.value();
    }

    // Moments of the binned mass placed at bin centres.
    double binned_mean(std::size_t axis) const
    {
        compensated_sum<double> s;
        for_each_bin([&](const std::vector<std::size_t> &idx, double w) {
            s += w * center(axis, idx[axis]);
        });
        return s.value();
    }

    double binned_variance(std::size_t axis) const
    {
        const double mu = binned_mean(axis);
        compensated_sum<double> s;
        for_each_bin([&](const std::vector<std::size_t> &idx, double w) {
            const double d = center(axis, idx[axis]) - mu;
            s += w * d * d;
        });
        return s.value();
    }

    double center(std::size_t axis, std::size_t i) const
    {
        return axes[axis].lo + (static_cast<double>(i) + 0.5) * axes[axis].width();
    }

    template <typename Fn>
    void for_each_bin(Fn &&fn) const
    {
        std::vector<std::size_t> idx(dim, 0);
        for (std::size_t flat = 0; flat < mass.size(); ++flat) {
            std::size_t rem = flat;
            for (std::size_t a = dim; a-- > 0;) {
                idx[a] = rem % axes[a].count;
                rem /= axes[a].count;
            }
            fn(idx, mass[flat]);
        }
    }
};

struct histogram_options {
    // Explicit per-axis bins; otherwise Freedman-Diaconis on each axis.
    std::optional<std::vector<axis_bins>> bins;
    // Bin count override with the data range (0 = Freedman-Diaconis).
    std::size_t bin_count = 0;
    std::size_t min_samples = 1000;
    std::size_t max_bins_per_axis = 100000;
};

namespace detail
{

inline double quantile_sorted(const std::vector<double> &v, double p)
{
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

inline axis_bins auto_bins(std::vector<double> col, const histogram_options &opt)
{
    std::sort(col.begin(), col.end());
    const double lo = col.front();
    const double hi = col.back();
    if (!(hi > lo)) {
        fail(error_kind::degenerate_range, "empirical_distribution: all samples equal; supply explicit bins");
    }
    std::size_t count = opt.bin_count;
    if (count == 0) {
        const double iqr = quantile_sorted(col, 0.75) - quantile_sorted(col, 0.25);
        const double n = static_cast<double>(col.size());
        if (iqr > 0.0) {
            const double h = 2.0 * iqr / std::cbrt(n);
            count = static_cast<std::size_t>(std::ceil((hi - lo) / h));
        } else {
            count = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
        }
    }
    count = std::clamp<std::size_t>(count, 1, opt.max_bins_per_axis);
    return {lo, hi, count};
}

} // namespace detail

// Histogram and moments of equally weighted points (rows of `columns`
// transposed: columns[a][i] is axis a of sample i).
inline empirical_distribution make_distribution(const std::vector<std::vector<double>> &columns,
                                                const histogram_options &opt = {})
{
    if (columns.empty()) {
        fail(error_kind::arity_mismatch, "empirical_distribution: no axes");
    }
    const std::size_t n = columns[0].size();
    for (const auto &c : columns) {
        if (c.size() != n) {
            fail(error_kind::arity_mismatch, "empirical_distribution: ragged samples");
        }
        for (double v : c) {
            if (!std::isfinite(v)) {
                fail(error_kind::domain, "empirical_distribution: non-finite sample");
            }
        }
    }
    if (n < std::max<std::size_t>(opt.min_samples, 1)) {
        fail(error_kind::insufficient_data, "empirical_distribution: at least " + std::to_string(opt.min_samples) +
                                                " samples required");
    }
    empirical_distribution d;
    d.dim = columns.size();
    d.sample_count = n;
    if (opt.bins) {
        if (opt.bins->size() != d.dim) {
            fail(error_kind::arity_mismatch, "empirical_distribution: bin spec arity differs from sample dimension");
        }
        for (const auto &b : *opt.bins) {
            if (!(b.hi > b.lo) || b.count == 0) {
                fail(error_kind::degenerate_range, "empirical_distribution: empty bin range");
            }
        }
        d.axes = *opt.bins;
    } else {
        for (const auto &c : columns) {
            d.axes.push_back(detail::auto_bins(c, opt));
        }
    }
    std::size_t total_bins = 1;
    for (const auto &a : d.axes) {
        total_bins *= a.count;
    }
    std::vector<std::size_t> counts(total_bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < d.dim; ++a) {
            flat = flat * d.axes[a].count + d.axes[a].index(columns[a][i]);
        }
        ++counts[flat];
    }
    d.mass.resize(total_bins);
    for (std::size_t b = 0; b < total_bins; ++b) {
        d.mass[b] = static_cast<double>(counts[b]) / static_cast<double>(n);
    }
    for (const auto &c : columns) {
        compensated_sum<double> s;
        for (double v : c) {
            s += v;
        }
        const double mu = s.value() / static_cast<double>(n);
        compensated_sum<double> s2;
        for (double v : c) {
            s2 += (v - mu) * (v - mu);
        }
        d.mean.push_back(mu);
        d.variance.push_back(s2.value() / static_cast<double>(n));
    }
    return d;
}

inline empirical_distribution make_distribution(std::span<const double> samples, const histogram_options &opt = {})
{
    return make_distribution(std::vector<std::vector<double>>{{samples.begin(), samples.end()}}, opt);
}

inline empirical_distribution make_distribution(std::span<const error_term_sample> samples,
                                                const histogram_options &opt = {})
{
    if (samples.empty()) {
        fail(error_kind::insufficient_data, "empirical_distribution: no samples");
    }
    std::vector<std::vector<double>> cols(samples[0].value.size());
    for (const auto &s : samples) {
        if (s.value.size() != cols.size()) {
            fail(error_kind::arity_mismatch, "empirical_distribution: ragged samples");
        }
        for (std::size_t a = 0; a < cols.size(); ++a) {
            cols[a].push_back(s.value[a]);
        }
    }
    return make_distribution(cols, opt);
}

// Estimate of sum_{lambda > lambda_max} |r|^2 from a power-law fit of the
// |r|^2 density over the last decade of frequencies. Infinite when the
// fitted decay is not summable.
inline double l2_tail_estimate(const coefficient_model &m, std::size_t bins = 10)
{
    if (m.terms.size() < 20) {
        return std::numeric_limits<double>::infinity();
    }
    const double top = m.terms.back().lambda;
    const double bottom = std::max(top / 10.0, m.terms.front().lambda);
    if (!(bottom < top)) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<double> lx;
    std::vector<double> ly;
    const double ratio = std::pow(top / bottom, 1.0 / static_cast<double>(bins));
    for (std::size_t b = 0; b < bins; ++b) {
        const double a = bottom * std::pow(ratio, static_cast<double>(b));
        const double c = a * ratio;
        const double mass = m.l2_sum(c) - m.l2_sum(a);
        if (mass > 0.0) {
            lx.push_back(std::log(std::sqrt(a * c)));
            ly.push_back(std::log(mass / (c - a)));
        }
    }
    if (lx.size() < 3) {
        return std::numeric_limits<double>::infinity();
    }
    const auto fit = detail::least_squares(lx, ly);
    const double p = -fit.slope;
    if (!(p > 1.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(fit.intercept) * std::pow(top, 1.0 - p) / (p - 1.0);
}

struct parseval_result {
    double Y = 0.0;
    double step = 0.0;
    std::size_t n_terms = 0;
    double lhs = 0.0;         // (1/Y) int_0^Y phi^2 dy on the sieved truth
    double rhs = 0.0;         // c^2 + (1/2) sum |r|^2 over available terms
    double rhs_tail = 0.0;    // (1/2) estimated omitted sum
    double first_moment = 0.0; // (1/Y) int_0^Y phi dy
};

inline double trapezoid_mean(std::span<const double> y, std::span<const double> f)
{
    compensated_sum<double> s;
    for (std::size_t i = 1; i < y.size(); ++i) {
        s += 0.5 * (f[i] + f[i - 1]) * (y[i] - y[i - 1]);
    }
    return s.value() / (y.back() - y.front());
}

inline parseval_result parseval_from_truth(const coefficient_model &m, std::span<const double> y_grid,
                                           std::span<const double> truth)
{
    if (y_grid.size() < 2 || truth.size() != y_grid.size()) {
        fail(error_kind::arity_mismatch, "parseval: grid and truth sizes differ");
    }
    parseval_result r;
    r.Y = y_grid.back();
    r.step = y_grid[1] - y_grid[0];
    r.n_terms = m.terms.size();
    std::vector<double> sq(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        sq[i] = truth[i] * truth[i];
    }
    r.lhs = trapezoid_mean(y_grid, sq);
    r.first_moment = trapezoid_mean(y_grid, truth);
    r.rhs = m.second_moment();
    r.rhs_tail = 0.5 * l2_tail_estimate(m);
    return r;
}

// The grid starts at 0 (at `step` for pi_li, where y = 0 is singular).
inline parseval_result parseval_check(const coefficient_model &m, double Y, double step, const lab_config &cfg = {})
{
    check_sieve_capacity(Y, cfg);
    const auto id = error_term_id::parse(m.label);
    const double start = id.kind == error_term_kind::pi_li ? step : 0.0;
    const auto grid = uniform_grid(start, Y, step);
    const auto truth = model_truth(m, grid, cfg);
    return parseval_from_truth(m, grid, truth);
}

// x_{order[0]} > x_{order[1]} > ... (strict).
struct strict_order {
    std::vector<std::size_t> order;

    bool operator()(std::span<const double> v) const
    {
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (!(v[order[i - 1]] > v[order[i]])) {
                return false;
            }
        }
        return true;
    }
};

// Fraction of uniform-in-y samples satisfying the predicate.
inline double log_density(std::span<const error_term_sample> samples, std::size_t arity,
                          const std::function<bool(std::span<const double>)> &pred)
{
    if (samples.empty()) {
        fail(error_kind::insufficient_data, "log_density: no samples");
    }
    std::size_t hits = 0;
    for (const auto &s : samples) {
        if (s.value.size() != arity) {
            fail(error_kind::arity_mismatch, "log_density: predicate arity differs from sample dimension");
        }
        if (pred(s.value)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

inline double log_density(std::span<const error_term_sample> samples, const strict_order &pred)
{
    for (std::size_t i = 0; i < pred.order.size(); ++i) {
        if (pred.order[i] >= pred.order.size() ||
            std::count(pred.order.begin(), pred.order.end(), pred.order[i]) != 1) {
            fail(error_kind::domain, "log_density: order must be a permutation");
        }
    }
    return log_density(samples, pred.order.size(), pred);
}

using metadata = std::vector<std::pair<std::string, std::string>>;

inline void write_metadata(std::ostream &os, const metadata &meta)
{
    for (const auto &[k, v] : meta) {
        os << "# " << k << "=" << v << "\n";
    }
}

inline void write_histogram_csv(std::ostream &os, const empirical_distribution &d, const metadata &meta = {})
{
    write_metadata(os, meta);
    if (d.dim == 1) {
        os << "bin_lo,bin_hi,mass\n";
    } else {
        for (std::size_t a = 0; a < d.dim; ++a) {
            os << "bin" << a << "_lo,bin" << a << "_hi,";
        }
        os << "mass\n";
    }
    d.for_each_bin([&](const std::vector<std::size_t> &idx, double w) {
        for (std::size_t a = 0; a < d.dim; ++a) {
            const double lo = d.axes[a].lo + static_cast<double>(idx[a]) * d.axes[a].width();
            os << detail::fmt15(lo) << ',' << detail::fmt15(lo + d.axes[a].width()) << ',';
        }
        os << detail::fmt15(w) << '\n';
    });
}

inline void write_residual_csv(std::ostream &os, const std::vector<residual_report> &rows, const metadata &meta = {})
{
    write_metadata(os, meta);
    os << "X,y_start,Y,step,points,rms,max_abs\n";
    for (const auto &r : rows) {
        os << detail::fmt15(r.X) << ',' << detail::fmt15(r.y_start) << ',' << detail::fmt15(r.Y) << ','
           << detail::fmt15(r.grid_step) << ',' << r.points << ',' << detail::fmt15(r.rms) << ','
           << detail::fmt15(r.max_abs) << '\n';
    }
}

inline void write_parseval_csv(std::ostream &os, const parseval_result &r, const metadata &meta = {})
{
    write_metadata(os, meta);
    os << "Y,step,n_terms,lhs,rhs,rhs_tail,first_moment\n";
    os << detail::fmt15(r.Y) << ',' << detail::fmt15(r.step) << ',' << r.n_terms << ',' << detail::fmt15(r.lhs) << ','
       << detail::fmt15(r.rhs) << ',' << detail::fmt15(r.rhs_tail) << ',' << detail::fmt15(r.first_moment) << '\n';
}

} // namespace limdist

#endif
