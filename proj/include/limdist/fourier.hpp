#ifndef LIMDIST_FOURIER_HPP
#define LIMDIST_FOURIER_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include <limdist/compensated.hpp>
#include <limdist/error.hpp>
#include <limdist/lab.hpp>
#include <limdist/model.hpp>
#include <limdist/parallel.hpp>

namespace limdist
{

namespace detail
{

inline double j0_series(double x)
{
    const double q = -0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) {
            break;
        }
    }
    return sum;
}

// Miller's backward recurrence normalized by J0 + 2 sum J_{2k} = 1.
inline double j0_miller(double x)
{
    const int start = 2 * (static_cast<int>(x + 12.0 * std::cbrt(x) + 30.0) / 2);
    double jp1 = 0.0;
    double j = 1e-300;
    double norm = 0.0;
    double j0 = 0.0;
    for (int n = start; n > 0; --n) {
        const double jm1 = 2.0 * n / x * j - jp1;
        jp1 = j;
        j = jm1;
        if ((n - 1) % 2 == 0 && n - 1 > 0) {
            norm += 2.0 * j;
        }
        if (n - 1 == 0) {
            j0 = j;
        }
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
        }
    }
    return j0 / (j0 + norm);
}

// Hankel asymptotic expansion, x >= 25.
inline double j0_asymptotic(double x)
{
    const double mu = 0.0;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    const double ex = 8.0 * x;
    for (int k = 1; k < 60; ++k) {
        const double a = 2.0 * k - 1.0;
        term *= (mu - a * a) / (static_cast<double>(k) * ex);
        if (std::abs(term) < 1e-17) {
            break;
        }
        // term_k = prod (mu - (2j-1)^2) / (k! (8x)^k); P takes even k with sign
        // (-1)^{k/2}, Q odd k with sign (-1)^{(k-1)/2}.
        if (k % 2 == 0) {
            p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        } else {
            q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        }
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

inline double bessel_j0(double x)
{
    x = std::abs(x);
    if (!std::isfinite(x)) {
        fail(error_kind::domain, "bessel_j0: non-finite argument");
    }
    if (x <= 8.0) {
        return detail::j0_series(x);
    }
    if (x < 25.0) {
        return detail::j0_miller(x);
    }
    return detail::j0_asymptotic(x);
}

// The characteristic function of c + Re sum_m r(lambda_m) e^{i theta_m}
// with independent uniform phases (conditional on linear independence of the
// frequencies), truncated to n_terms factors.
struct char_fn_spec {
    std::vector<double> c;
    std::vector<double> lambdas;
    std::vector<std::vector<cplx>> rows; // rows[k][m]
    std::size_t n_terms = 0;
    // Omitted sum over m of sum_k |r_k(lambda_m)|^2 (terms beyond n_terms plus
    // the extrapolated tail past the data).
    double tail_l2 = 0.0;
    // Largest omitted row norm, for the quadratic-regime check.
    double tail_max_norm = 0.0;
    // Optional Gaussian smoothing exp(-sigma^2 |xi|^2 / 2) (0 = off).
    double smoothing = 0.0;

    std::size_t dim() const noexcept
    {
        return c.size();
    }

    void validate() const
    {
        if (c.empty() || rows.size() != c.size()) {
            fail(error_kind::arity_mismatch, "char_fn_spec: rows and constants disagree");
        }
        for (const auto &r : rows) {
            if (r.size() != lambdas.size()) {
                fail(error_kind::arity_mismatch, "char_fn_spec: row length differs from frequency count");
            }
        }
        if (n_terms > lambdas.size()) {
            fail(error_kind::domain, "char_fn_spec: n_terms exceeds model size");
        }
        if (!(tail_l2 >= 0.0)) {
            fail(error_kind::domain, "char_fn_spec: tail_l2 must be nonnegative");
        }
    }
};

namespace detail
{

inline double row_norm_sq(const char_fn_spec &s, std::size_t m)
{
    double v = 0.0;
    for (const auto &row : s.rows) {
        v += std::norm(row[m]);
    }
    return v;
}

inline void fill_tail(char_fn_spec &s, double extrapolated)
{
    s.tail_l2 = 0.0;
    s.tail_max_norm = 0.0;
    for (std::size_t m = s.n_terms; m < s.lambdas.size(); ++m) {
        const double v = row_norm_sq(s, m);
        s.tail_l2 += v;
        s.tail_max_norm = std::max(s.tail_max_norm, std::sqrt(v));
    }
    if (std::isfinite(extrapolated)) {
        s.tail_l2 += extrapolated;
    }
    if (!s.lambdas.empty()) {
        // Beyond the data the coefficients are at most about the last one.
        s.tail_max_norm = std::max(s.tail_max_norm, std::sqrt(row_norm_sq(s, s.lambdas.size() - 1)));
    }
}

} // namespace detail

// All terms of a scalar model, with the extrapolated tail as tail_l2.
inline char_fn_spec make_char_fn_spec(const coefficient_model &m, std::optional<std::size_t> n_terms = std::nullopt,
                                      bool extrapolate_tail = true)
{
    char_fn_spec s;
    s.c = {m.c};
    s.rows.resize(1);
    for (const auto &t : m.terms) {
        s.lambdas.push_back(t.lambda);
        s.rows[0].push_back(t.r);
    }
    s.n_terms = std::min(n_terms.value_or(m.terms.size()), m.terms.size());
    detail::fill_tail(s, extrapolate_tail ? l2_tail_estimate(m) : 0.0);
    return s;
}

inline char_fn_spec make_char_fn_spec(const vector_model &v, std::optional<std::size_t> n_terms = std::nullopt,
                                      bool extrapolate_tail = true)
{
    char_fn_spec s;
    s.c = v.constants();
    s.lambdas = v.lambdas;
    s.rows = v.rows;
    s.n_terms = std::min(n_terms.value_or(v.size()), v.size());
    double extra = 0.0;
    if (extrapolate_tail) {
        for (std::size_t k = 0; k < v.dim(); ++k) {
            const double t = l2_tail_estimate(v.collapse(k));
            extra += std::isfinite(t) ? t : 0.0;
        }
    }
    detail::fill_tail(s, extra);
    return s;
}

struct char_fn_value {
    cplx value{};
    // The omitted factors multiply value by exp(-t) with 0 <= t <= log_bound.
    double log_bound = 0.0;

    double abs_error_bound() const
    {
        return std::abs(value) * -std::expm1(-log_bound);
    }
};

// -log J0(u) <= k u^2 on [0, 1] with k = -log J0(1).
inline constexpr double j0_log_quadratic = 0.26763262060939;

inline char_fn_value char_fn(const char_fn_spec &s, std::span<const double> xi)
{
    if (xi.size() != s.dim()) {
        fail(error_kind::arity_mismatch, "char_fn: xi dimension differs from the model");
    }
    double xi2 = 0.0;
    double phase = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        xi2 += xi[k] * xi[k];
        phase += s.c[k] * xi[k];
    }
    const double xi_norm = std::sqrt(xi2);
    if (xi_norm * s.tail_max_norm > 1.0 && s.tail_l2 > 0.0) {
        fail(error_kind::tail_bound, "char_fn: omitted factor argument exceeds 1; raise n_terms or lower |xi|");
    }
    double prod = 1.0;
    for (std::size_t m = 0; m < s.n_terms; ++m) {
        cplx arg{};
        for (std::size_t k = 0; k < xi.size(); ++k) {
            arg += s.rows[k][m] * xi[k];
        }
        prod *= bessel_j0(std::abs(arg));
        if (prod == 0.0) {
            break;
        }
    }
    if (s.smoothing > 0.0) {
        prod *= std::exp(-0.5 * s.smoothing * s.smoothing * xi2);
    }
    char_fn_value out;
    out.value = prod * std::exp(cplx{0.0, -phase});
    out.log_bound = j0_log_quadratic * xi2 * s.tail_l2;
    return out;
}

inline char_fn_value char_fn(const char_fn_spec &s, double xi)
{
    return char_fn(s, std::span<const double>(&xi, 1));
}

struct inversion_options {
    // Grid: lo, hi per axis (points, endpoints included); automatic when unset.
    std::optional<std::vector<std::pair<double, double>>> range;
    std::size_t points = 256; // rounded up to a power of two
    double decay_threshold = 1e-10;
    double xi_cap = 4096.0;
    unsigned workers = default_workers();
};

struct density_grid {
    std::size_t dim = 1;
    std::vector<double> lo;
    std::vector<double> hi;
    std::size_t points = 0; // per axis
    std::vector<double> values; // row-major
    double xi_max = 0.0;
    double xi_step = 0.0;
    double mass = 0.0;
    double mass_defect = 0.0;
    double clipped_mass = 0.0;
    double peak = 0.0;

    double step(std::size_t axis) const
    {
        return (hi[axis] - lo[axis]) / static_cast<double>(points - 1);
    }

    double coord(std::size_t axis, std::size_t i) const
    {
        return lo[axis] + static_cast<double>(i) * step(axis);
    }

    double cell() const
    {
        double v = 1.0;
        for (std::size_t a = 0; a < dim; ++a) {
            v *= step(a);
        }
        return v;
    }

    double mean(std::size_t axis = 0) const
    {
        compensated_sum<double> s;
        for (std::size_t f = 0; f < values.size(); ++f) {
            s += values[f] * coord(axis, index(f, axis));
        }
        return s.value() * cell() / mass;
    }

    double variance(std::size_t axis = 0) const
    {
        const double mu = mean(axis);
        compensated_sum<double> s;
        for (std::size_t f = 0; f < values.size(); ++f) {
            const double d = coord(axis, index(f, axis)) - mu;
            s += values[f] * d * d;
        }
        return s.value() * cell() / mass;
    }

    std::size_t index(std::size_t flat, std::size_t axis) const
    {
        return dim == 1 ? flat : (axis == 0 ? flat / points : flat % points);
    }
};

namespace detail
{

inline std::size_t pow2_at_least(std::size_t n)
{
    return std::bit_ceil(std::max<std::size_t>(n, 2));
}

// Smallest xi (along each axis direction and the diagonals) past which
// |char_fn| stays below the threshold over a trailing window.
inline double decay_radius(const char_fn_spec &s, const inversion_options &opt, double scale)
{
    const std::size_t d = s.dim();
    std::vector<std::vector<double>> dirs;
    if (d == 1) {
        dirs = {{1.0}};
    } else {
        const double h = std::sqrt(0.5);
        dirs = {{1.0, 0.0}, {0.0, 1.0}, {h, h}, {h, -h}};
    }
    const double dxi = 0.25 / scale;
    double radius = 0.0;
    for (const auto &dir : dirs) {
        double below_since = -1.0;
        double r = dxi;
        for (;; r += dxi) {
            if (r > opt.xi_cap) {
                fail(error_kind::insufficient_decay,
                     "invert_to_density: characteristic function does not decay below threshold within the xi cap");
            }
            std::vector<double> xi(d);
            for (std::size_t k = 0; k < d; ++k) {
                xi[k] = r * dir[k];
            }
            const double v = std::abs(char_fn(s, xi).value);
            if (v < opt.decay_threshold) {
                if (below_since < 0.0) {
                    below_since = r;
                }
                if (r >= 1.25 * below_since + 4.0 * dxi) {
                    break;
                }
            } else {
                below_since = -1.0;
            }
        }
        radius = std::max(radius, r);
    }
    return radius;
}

} // namespace detail

// Standard deviation per axis implied by the spec (constants excluded).
inline std::vector<double> spec_sigma(const char_fn_spec &s)
{
    std::vector<double> out;
    for (const auto &row : s.rows) {
        double v = 0.0;
        for (std::size_t m = 0; m < s.n_terms; ++m) {
            v += 0.5 * std::norm(row[m]);
        }
        out.push_back(std::sqrt(v + 0.5 * s.tail_l2));
    }
    return out;
}

// Density on a regular grid by trapezoidal inverse Fourier transform.
inline density_grid invert_to_density(const char_fn_spec &s, const inversion_options &opt = {})
{
    s.validate();
    const std::size_t d = s.dim();
    if (d > 2) {
        fail(error_kind::capacity, "invert_to_density: dimension above 2");
    }
    const auto sigma = spec_sigma(s);
    double smax = 0.0;
    for (double v : sigma) {
        smax = std::max(smax, v);
    }
    if (!(smax > 0.0)) {
        fail(error_kind::degenerate_range, "invert_to_density: distribution is a point mass");
    }
    density_grid g;
    g.dim = d;
    g.points = detail::pow2_at_least(opt.points);
    if (opt.range) {
        if (opt.range->size() != d) {
            fail(error_kind::arity_mismatch, "invert_to_density: range arity differs from dimension");
        }
        for (const auto &[a, b] : *opt.range) {
            if (!(b > a)) {
                fail(error_kind::degenerate_range, "invert_to_density: empty range");
            }
            g.lo.push_back(a);
            g.hi.push_back(b);
        }
    } else {
        for (std::size_t k = 0; k < d; ++k) {
            g.lo.push_back(s.c[k] - 8.0 * sigma[k]);
            g.hi.push_back(s.c[k] + 8.0 * sigma[k]);
        }
    }
    double span = 16.0 * smax;
    for (std::size_t k = 0; k < d; ++k) {
        span = std::max(span, g.hi[k] - g.lo[k]);
        span = std::max(span, 2.0 * std::max(std::abs(g.hi[k] - s.c[k]), std::abs(g.lo[k] - s.c[k])));
    }
    g.xi_max = detail::decay_radius(s, opt, smax);
    // Aliases sit 2 pi / dxi >= 2 span apart.
    std::size_t nxi = detail::pow2_at_least(static_cast<std::size_t>(std::ceil(g.xi_max * span / std::numbers::pi)));
    nxi = std::max<std::size_t>(nxi, d == 1 ? 256 : 64);
    g.xi_step = g.xi_max / static_cast<double>(nxi);

    const std::size_t npts = d == 1 ? g.points : g.points * g.points;
    g.values.assign(npts, 0.0);
    if (d == 1) {
        // f(x) = (1/pi) int_0^inf Re(phi(xi) e^{i xi x}) dxi
        std::vector<cplx> phi(nxi + 1);
        parallel_for(nxi + 1, opt.workers, [&](std::size_t i) {
            phi[i] = char_fn(s, static_cast<double>(i) * g.xi_step).value;
        });
        parallel_for(g.points, opt.workers, [&](std::size_t j) {
            const double x = g.coord(0, j);
            compensated_sum<double> acc;
            for (std::size_t i = 0; i <= nxi; ++i) {
                const double w = (i == 0 || i == nxi) ? 0.5 : 1.0;
                acc += w * (phi[i] * std::exp(cplx{0.0, static_cast<double>(i) * g.xi_step * x})).real();
            }
            g.values[j] = acc.value() * g.xi_step / std::numbers::pi;
        });
    } else {
        // f(x) = (1/(2 pi^2)) int_{xi_1 >= 0} Re(phi(xi) e^{i xi.x}) dxi
        const std::size_t n2 = 2 * nxi + 1;
        std::vector<cplx> phi((nxi + 1) * n2);
        parallel_for(nxi + 1, opt.workers, [&](std::size_t i) {
            for (std::size_t j = 0; j < n2; ++j) {
                const double xi[2] = {static_cast<double>(i) * g.xi_step,
                                      (static_cast<double>(j) - static_cast<double>(nxi)) * g.xi_step};
                phi[i * n2 + j] = char_fn(s, xi).value;
            }
        });
        // Separable: first sum over xi_2 for each (xi_1, x_2), then over xi_1.
        std::vector<cplx> partial((nxi + 1) * g.points);
        parallel_for(nxi + 1, opt.workers, [&](std::size_t i) {
            for (std::size_t b = 0; b < g.points; ++b) {
                const double x2 = g.coord(1, b);
                compensated_complex_sum<double> acc;
                for (std::size_t j = 0; j < n2; ++j) {
                    const double wj = (j == 0 || j == n2 - 1) ? 0.5 : 1.0;
                    const double xi2 = (static_cast<double>(j) - static_cast<double>(nxi)) * g.xi_step;
                    acc += wj * phi[i * n2 + j] * std::exp(cplx{0.0, xi2 * x2});
                }
                partial[i * g.points + b] = acc.value();
            }
        });
        parallel_for(g.points, opt.workers, [&](std::size_t a) {
            const double x1 = g.coord(0, a);
            for (std::size_t b = 0; b < g.points; ++b) {
                compensated_sum<double> acc;
                for (std::size_t i = 0; i <= nxi; ++i) {
                    const double wi = (i == 0 || i == nxi) ? 0.5 : 1.0;
                    const cplx e1 = std::exp(cplx{0.0, static_cast<double>(i) * g.xi_step * x1});
                    acc += wi * (e1 * partial[i * g.points + b]).real();
                }
                g.values[a * g.points + b] =
                    acc.value() * g.xi_step * g.xi_step / (2.0 * std::numbers::pi * std::numbers::pi);
            }
        });
    }
    compensated_sum<double> mass;
    compensated_sum<double> clipped;
    for (double &v : g.values) {
        if (v < 0.0) {
            clipped += -v;
            v = 0.0;
        }
        mass += v;
        g.peak = std::max(g.peak, v);
    }
    g.mass = mass.value() * g.cell();
    g.clipped_mass = clipped.value() * g.cell();
    g.mass_defect = std::abs(1.0 - g.mass);
    return g;
}

struct race_result {
    double probability = 0.5; // P(X_i > X_j)
    double gil_pelaez = 0.5;  // the same from the characteristic function directly
    double tie_mass = 0.0;
    bool degenerate = false;
    density_grid density;
};

// P(X_i > X_j) through the scalar difference model.
inline race_result race_probability(const vector_model &v, std::size_t i = 0, std::size_t j = 1,
                                    const inversion_options &opt = {})
{
    const auto diff = difference_model(v, i, j);
    race_result out;
    const bool all_zero = std::all_of(diff.terms.begin(), diff.terms.end(), [](const model_term &t) {
        return t.r == cplx{};
    });
    if (all_zero) {
        out.degenerate = true;
        out.tie_mass = diff.c == 0.0 ? 1.0 : 0.0;
        out.probability = diff.c > 0.0 ? 1.0 : (diff.c < 0.0 ? 0.0 : 0.5);
        out.gil_pelaez = out.probability;
        return out;
    }
    const auto spec = make_char_fn_spec(diff);
    out.density = invert_to_density(spec, opt);
    const auto &g = out.density;
    compensated_sum<double> above;
    const double h = g.step(0);
    for (std::size_t k = 0; k < g.points; ++k) {
        const double x = g.coord(0, k);
        const double a = x - 0.5 * h;
        const double b = x + 0.5 * h;
        if (a >= 0.0) {
            above += g.values[k] * h;
        } else if (b > 0.0) {
            above += g.values[k] * b;
        }
    }
    out.probability = above.value() / g.mass;
    // 1/2 - (1/pi) int_0^inf Im(phi(xi)) / xi dxi, with phi(xi) = E[exp(-i xi X)]
    compensated_sum<double> gp;
    const std::size_t n = static_cast<std::size_t>(std::ceil(g.xi_max / g.xi_step));
    for (std::size_t k = 1; k <= n; ++k) {
        const double xi = static_cast<double>(k) * g.xi_step;
        const double w = k == n ? 0.5 : 1.0;
        gp += w * char_fn(spec, xi).value.imag() / xi;
    }
    // Integrand at xi -> 0 tends to -E[X] (the constant c here).
    gp += 0.5 * -diff.c;
    out.gil_pelaez = 0.5 - gp.value() * g.xi_step / std::numbers::pi;
    return out;
}

struct symmetry_report {
    double max_abs_diff = 0.0;
    double peak = 0.0;
    double tolerance = 0.0;
    bool symmetric = false;
};

// 1-D: reflection about the constant c. 2-D: swap of the coordinates on a
// common axis.
inline symmetry_report symmetry_test(const char_fn_spec &s, inversion_options opt = {}, double rel_tol = 1e-6)
{
    const auto sigma = spec_sigma(s);
    if (s.dim() == 1) {
        opt.range = std::vector<std::pair<double, double>>{{s.c[0] - 8.0 * sigma[0], s.c[0] + 8.0 * sigma[0]}};
    } else if (s.dim() == 2) {
        const double lo = std::min(s.c[0] - 8.0 * sigma[0], s.c[1] - 8.0 * sigma[1]);
        const double hi = std::max(s.c[0] + 8.0 * sigma[0], s.c[1] + 8.0 * sigma[1]);
        opt.range = std::vector<std::pair<double, double>>{{lo, hi}, {lo, hi}};
    } else {
        fail(error_kind::capacity, "symmetry_test: dimension above 2");
    }
    const auto g = invert_to_density(s, opt);
    symmetry_report rep;
    rep.peak = g.peak;
    const std::size_t n = g.points;
    if (g.dim == 1) {
        for (std::size_t k = 0; k < n; ++k) {
            const double x = g.coord(0, k);
            const double xm = 2.0 * s.c[0] - x;
            const double f = (xm - g.lo[0]) / g.step(0);
            if (f < 0.0 || f > static_cast<double>(n - 1)) {
                continue;
            }
            const auto i = std::min(static_cast<std::size_t>(f), n - 2);
            const double t = f - static_cast<double>(i);
            const double mirrored = g.values[i] * (1.0 - t) + g.values[i + 1] * t;
            rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(g.values[k] - mirrored));
        }
    } else {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(g.values[a * n + b] - g.values[b * n + a]));
            }
        }
    }
    rep.tolerance = rel_tol * g.peak + g.clipped_mass;
    rep.symmetric = rep.max_abs_diff <= rep.tolerance;
    return rep;
}

struct mc_estimate {
    cplx mean{};
    double se_re = 0.0;
    double se_im = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t mc_streams = 16;

// Average of f(c + Re sum_n r_n e^{2 pi i theta_n}) over independent uniform
// theta (at most six terms). Streams are seeded from (seed, stream index)
// and reduced in stream order, so results do not depend on the worker count.
template <typename F>
mc_estimate torus_mc_oracle(const char_fn_spec &s, std::size_t n_terms, F &&f, std::size_t n_samples,
                            std::uint64_t seed, unsigned workers = default_workers())
{
    if (n_terms > 6 || n_terms > s.lambdas.size()) {
        fail(error_kind::domain, "torus_mc_oracle: at most six terms");
    }
    if (n_samples < 100000) {
        fail(error_kind::insufficient_data, "torus_mc_oracle: at least 1e5 samples required");
    }
    struct partial {
        compensated_sum<double> re, im, re2, im2;
    };
    std::vector<partial> parts(mc_streams);
    const std::size_t d = s.dim();
    parallel_for(mc_streams, workers, [&](std::size_t st) {
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(st)};
        std::mt19937_64 rng(sq);
        const std::size_t count = n_samples / mc_streams + (st < n_samples % mc_streams ? 1 : 0);
        std::vector<double> x(d);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = s.c[k];
            }
            for (std::size_t m = 0; m < n_terms; ++m) {
                const double theta = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
                const cplx e{std::cos(theta), std::sin(theta)};
                for (std::size_t k = 0; k < d; ++k) {
                    x[k] += (s.rows[k][m] * e).real();
                }
            }
            const cplx v = f(std::span<const double>(x));
            parts[st].re += v.real();
            parts[st].im += v.imag();
            parts[st].re2 += v.real() * v.real();
            parts[st].im2 += v.imag() * v.imag();
        }
    });
    partial tot;
    for (const auto &p : parts) {
        tot.re += p.re;
        tot.im += p.im;
        tot.re2 += p.re2;
        tot.im2 += p.im2;
    }
    const auto n = static_cast<double>(n_samples);
    mc_estimate out;
    out.samples = n_samples;
    out.seed = seed;
    out.mean = {tot.re.value() / n, tot.im.value() / n};
    const double vr = std::max(0.0, tot.re2.value() / n - out.mean.real() * out.mean.real());
    const double vi = std::max(0.0, tot.im2.value() / n - out.mean.imag() * out.mean.imag());
    out.se_re = std::sqrt(vr / (n - 1.0));
    out.se_im = std::sqrt(vi / (n - 1.0));
    return out;
}

inline void write_density_csv(std::ostream &os, const density_grid &g, const metadata &meta = {})
{
    write_metadata(os, meta);
    os << "# mass=" << detail::fmt15(g.mass) << " mass_defect=" << detail::fmt15(g.mass_defect)
       << " clipped_mass=" << detail::fmt15(g.clipped_mass) << " xi_max=" << detail::fmt15(g.xi_max) << "\n";
    if (g.dim == 1) {
        os << "x,density\n";
        for (std::size_t k = 0; k < g.points; ++k) {
            os << detail::fmt15(g.coord(0, k)) << ',' << detail::fmt15(g.values[k]) << '\n';
        }
    } else {
        os << "x1,x2,density\n";
        for (std::size_t a = 0; a < g.points; ++a) {
            for (std::size_t b = 0; b < g.points; ++b) {
                os << detail::fmt15(g.coord(0, a)) << ',' << detail::fmt15(g.coord(1, b)) << ','
                   << detail::fmt15(g.values[a * g.points + b]) << '\n';
            }
        }
    }
}

inline void write_char_fn_csv(std::ostream &os, const char_fn_spec &s, std::span<const double> xis,
                              const metadata &meta = {})
{
    write_metadata(os, meta);
    os << "xi,re,im,log_bound\n";
    for (double xi : xis) {
        const auto v = char_fn(s, xi);
        os << detail::fmt15(xi) << ',' << detail::fmt15(v.value.real()) << ',' << detail::fmt15(v.value.imag()) << ','
           << detail::fmt15(v.log_bound) << '\n';
    }
}

} // namespace limdist

#endif
