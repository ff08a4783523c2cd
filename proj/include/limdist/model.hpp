#ifndef LIMDIST_MODEL_HPP
#define LIMDIST_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <limdist/arith.hpp>
#include <limdist/characters.hpp>
#include <limdist/compensated.hpp>
#include <limdist/error.hpp>
#include <limdist/parallel.hpp>
#include <limdist/zero_store.hpp>
#include <limdist/zeta.hpp>

namespace limdist
{

struct model_term {
    double lambda = 0.0;
    cplx r{};
};

enum class secular_kind { none, log_linear };

// phi(y) = c + secular(y) + Re sum r_n e^{i lambda_n y}, valid for y >= y0.
struct coefficient_model {
    std::string label;
    double c = 0.0;
    std::vector<model_term> terms;
    secular_kind secular = secular_kind::none;
    double slope = 0.0;
    double y0 = std::numbers::ln2;
    double x0 = 2.0;

    std::size_t size() const noexcept
    {
        return terms.size();
    }

    double secular_value(double y) const noexcept
    {
        return secular == secular_kind::log_linear ? slope * y : 0.0;
    }

    // Terms with lambda <= X.
    std::size_t count_upto(double X) const
    {
        return static_cast<std::size_t>(
            std::upper_bound(terms.begin(), terms.end(), X,
                             [](double x, const model_term &t) { return x < t.lambda; }) -
            terms.begin());
    }

    coefficient_model truncated(double X) const
    {
        coefficient_model m = *this;
        m.terms.resize(count_upto(X));
        return m;
    }

    coefficient_model first_terms(std::size_t n) const
    {
        coefficient_model m = *this;
        m.terms.resize(std::min(n, terms.size()));
        return m;
    }

    double l2_sum(double X = std::numeric_limits<double>::infinity()) const
    {
        compensated_sum<double> s;
        for (const auto &t : terms) {
            if (t.lambda > X) {
                break;
            }
            s += std::norm(t.r);
        }
        return s.value();
    }

    // c^2 + (1/2) sum |r_n|^2.
    double second_moment(double X = std::numeric_limits<double>::infinity()) const
    {
        return c * c + 0.5 * l2_sum(X);
    }

    void validate() const
    {
        if (!std::isfinite(c)) {
            fail(error_kind::domain, "model: non-finite constant");
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto &t = terms[i];
            if (!(t.lambda > 0.0) || !std::isfinite(t.lambda) || !std::isfinite(t.r.real()) ||
                !std::isfinite(t.r.imag())) {
                fail(error_kind::domain, "model: term " + std::to_string(i + 1) + " is not finite and positive");
            }
            if (i > 0 && t.lambda < terms[i - 1].lambda) {
                fail(error_kind::monotonicity, "model: frequencies decrease at term " + std::to_string(i + 1));
            }
        }
    }
};

inline bool operator==(const model_term &a, const model_term &b)
{
    return a.lambda == b.lambda && a.r == b.r;
}

inline bool operator==(const coefficient_model &a, const coefficient_model &b)
{
    return a.label == b.label && a.c == b.c && a.terms == b.terms && a.secular == b.secular && a.slope == b.slope &&
           a.y0 == b.y0 && a.x0 == b.x0;
}

namespace detail
{

inline cplx rho_of(double gamma)
{
    return {0.5, gamma};
}

inline void require_zeta(const zero_dataset &ds, const char *who)
{
    if (ds.kind != dataset_kind::zeta) {
        fail(error_kind::domain, std::string(who) + ": zeta dataset required");
    }
}

// Complex L'(rho) for every zero, recomputed when a dataset lacks phases.
inline std::vector<cplx> complex_derivatives(const zero_dataset &ds, unsigned workers)
{
    std::vector<cplx> out(ds.zeros.size());
    std::vector<l_function> fns;
    if (ds.kind == dataset_kind::zeta) {
        fns.push_back(l_function::riemann_zeta());
    } else {
        const character_table table(ds.q);
        for (std::size_t i = 0; i < table.size(); ++i) {
            fns.push_back(l_function::dirichlet(table[i]));
        }
    }
    parallel_for(ds.zeros.size(), workers, [&](std::size_t i) {
        const auto &z = ds.zeros[i];
        if (z.deriv) {
            out[i] = *z.deriv;
            return;
        }
        const std::size_t id = ds.kind == dataset_kind::zeta ? 0 : static_cast<std::size_t>(*z.char_id);
        if (id >= fns.size()) {
            fail(error_kind::domain, "model: char id " + std::to_string(id) + " out of range");
        }
        out[i] = deriv_complex_at_zero(fns[id], z.gamma);
    });
    return out;
}

inline std::string fmt_alpha(double alpha)
{
    return error_term_id::mobius(alpha).label().substr(std::string("mobius:alpha=").size());
}

} // namespace detail

// psi(e^y) - e^y scaled by e^{-y/2}: r = -2 / rho.
inline coefficient_model build_psi_model(const zero_dataset &ds)
{
    detail::require_zeta(ds, "build_psi_model");
    coefficient_model m;
    m.label = error_term_id::psi().label();
    for (const auto &z : ds.zeros) {
        m.terms.push_back({z.gamma, -2.0 / detail::rho_of(z.gamma)});
    }
    return m;
}

// y e^{-y/2} (pi(e^y) - Li(e^y)): c = -1, r = -2 / rho.
inline coefficient_model build_pi_li_model(const zero_dataset &ds)
{
    coefficient_model m = build_psi_model(ds);
    m.label = error_term_id::pi_li().label();
    m.c = -1.0;
    return m;
}

inline coefficient_model build_mobius_model(const zero_dataset &ds, double alpha, unsigned workers = default_workers())
{
    detail::require_zeta(ds, "build_mobius_model");
    check_alpha(alpha);
    if (!ds.coefficient_ready()) {
        fail(error_kind::not_coefficient_ready, "build_mobius_model: zeros lack derivative values");
    }
    const auto d = detail::complex_derivatives(ds, workers);
    coefficient_model m;
    m.label = error_term_id::mobius(alpha).label();
    m.c = detail::is_half(alpha) ? 1.0 / zeta(0.5, 1e-13) : 0.0;
    for (std::size_t i = 0; i < ds.zeros.size(); ++i) {
        const cplx rho = detail::rho_of(ds.zeros[i].gamma);
        m.terms.push_back({ds.zeros[i].gamma, 2.0 / ((rho - alpha) * d[i])});
    }
    return m;
}

// Constant of the Liouville model.
inline double liouville_constant(double alpha)
{
    check_alpha(alpha);
    const double z = zeta(0.5, 1e-13);
    if (detail::is_half(alpha)) {
        return euler_gamma / z - zeta_derivative(0.5, 1e-13) / (2.0 * z * z);
    }
    return 1.0 / ((1.0 - 2.0 * alpha) * z);
}

inline coefficient_model build_liouville_model(const zero_dataset &ds, double alpha,
                                               unsigned workers = default_workers())
{
    detail::require_zeta(ds, "build_liouville_model");
    check_alpha(alpha);
    if (!ds.coefficient_ready()) {
        fail(error_kind::not_coefficient_ready, "build_liouville_model: zeros lack derivative values");
    }
    if (!ds.has_zeta2rho()) {
        fail(error_kind::not_coefficient_ready, "build_liouville_model: zeros lack zeta(2 rho) values");
    }
    const auto d = detail::complex_derivatives(ds, workers);
    coefficient_model m;
    m.label = error_term_id::liouville(alpha).label();
    m.c = liouville_constant(alpha);
    if (detail::is_half(alpha)) {
        m.secular = secular_kind::log_linear;
        m.slope = 1.0 / (2.0 * zeta(0.5, 1e-13));
    }
    for (std::size_t i = 0; i < ds.zeros.size(); ++i) {
        const auto &z = ds.zeros[i];
        const cplx rho = detail::rho_of(z.gamma);
        m.terms.push_back({z.gamma, 2.0 * *z.zeta2rho / ((rho - alpha) * d[i])});
    }
    return m;
}

// Smallest |L(1/2, chi)| over the characters mod q.
inline double min_central_value(std::uint64_t q)
{
    const character_table table(q);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.size(); ++i) {
        best = std::min(best, std::abs(dirichlet_l(cplx{0.5, 0.0}, table[i], 1e-13)));
    }
    return best;
}

// e^{-y/2} M(e^y; q, a) over the merged zeros of all L(s, chi) mod q.
inline coefficient_model build_mobius_ap_model(const zero_dataset &ds, std::uint64_t a,
                                               unsigned workers = default_workers())
{
    if (ds.kind != dataset_kind::dirichlet) {
        fail(error_kind::domain, "build_mobius_ap_model: Dirichlet dataset required");
    }
    if (std::gcd(a, ds.q) != 1) {
        fail(error_kind::invalid_residue, "build_mobius_ap_model: gcd(a, q) != 1");
    }
    if (!ds.coefficient_ready()) {
        fail(error_kind::not_coefficient_ready, "build_mobius_ap_model: zeros lack derivative values");
    }
    if (min_central_value(ds.q) <= 1e-8) {
        fail(error_kind::accuracy, "build_mobius_ap_model: some L(1/2, chi) vanishes; residue term unsupported");
    }
    const character_table table(ds.q);
    const auto d = detail::complex_derivatives(ds, workers);
    const double phi = static_cast<double>(table.phi());
    coefficient_model m;
    m.label = error_term_id::mobius_ap(ds.q, a % ds.q).label();
    for (std::size_t i = 0; i < ds.zeros.size(); ++i) {
        const auto &z = ds.zeros[i];
        const cplx chi_bar = std::conj(table[static_cast<std::size_t>(*z.char_id)](a));
        m.terms.push_back({z.gamma, 2.0 * chi_bar / (phi * detail::rho_of(z.gamma) * d[i])});
    }
    return m;
}

// Several error terms on one merged frequency list; rows[k][m] is zero
// where component k has no term at lambdas[m].
struct vector_model {
    std::vector<coefficient_model> components; // metadata; terms cleared
    std::vector<double> lambdas;
    std::vector<std::vector<cplx>> rows;
    std::vector<std::vector<bool>> present;

    std::size_t dim() const noexcept
    {
        return rows.size();
    }

    std::size_t size() const noexcept
    {
        return lambdas.size();
    }

    std::vector<double> constants() const
    {
        std::vector<double> c;
        for (const auto &m : components) {
            c.push_back(m.c);
        }
        return c;
    }

    coefficient_model collapse(std::size_t k) const
    {
        coefficient_model m = components.at(k);
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            if (present[k][j]) {
                m.terms.push_back({lambdas[j], rows[k][j]});
            }
        }
        return m;
    }

    vector_model first_terms(std::size_t n) const
    {
        vector_model v = *this;
        n = std::min(n, lambdas.size());
        v.lambdas.resize(n);
        for (auto &r : v.rows) {
            r.resize(n);
        }
        for (auto &p : v.present) {
            p.resize(n);
        }
        return v;
    }

    vector_model truncated(double X) const
    {
        return first_terms(static_cast<std::size_t>(std::upper_bound(lambdas.begin(), lambdas.end(), X) -
                                                    lambdas.begin()));
    }
};

// Equal frequencies share a column; repeated frequencies within one
// component open new columns.
inline vector_model build_vector_model(const std::vector<coefficient_model> &models)
{
    if (models.size() < 2) {
        fail(error_kind::domain, "build_vector_model: at least two components required");
    }
    struct entry {
        double lambda;
        std::size_t comp;
        std::size_t idx;
    };
    std::vector<entry> all;
    for (std::size_t k = 0; k < models.size(); ++k) {
        models[k].validate();
        for (std::size_t i = 0; i < models[k].terms.size(); ++i) {
            all.push_back({models[k].terms[i].lambda, k, i});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const entry &a, const entry &b) {
        return a.lambda != b.lambda ? a.lambda < b.lambda : a.comp < b.comp;
    });
    vector_model v;
    for (const auto &m : models) {
        coefficient_model meta = m;
        meta.terms.clear();
        v.components.push_back(meta);
    }
    v.rows.resize(models.size());
    v.present.resize(models.size());
    for (const auto &e : all) {
        const bool reuse = !v.lambdas.empty() && v.lambdas.back() == e.lambda && !v.present[e.comp].back();
        if (!reuse) {
            v.lambdas.push_back(e.lambda);
            for (std::size_t k = 0; k < models.size(); ++k) {
                v.rows[k].push_back(0.0);
                v.present[k].push_back(false);
            }
        }
        v.rows[e.comp].back() = models[e.comp].terms[e.idx].r;
        v.present[e.comp].back() = true;
    }
    return v;
}

// Component i minus component j as a scalar model.
inline coefficient_model difference_model(const vector_model &v, std::size_t i = 0, std::size_t j = 1)
{
    if (i >= v.dim() || j >= v.dim()) {
        fail(error_kind::arity_mismatch, "difference_model: component index out of range");
    }
    coefficient_model m;
    m.label = "diff(" + v.components[i].label + "," + v.components[j].label + ")";
    m.c = v.components[i].c - v.components[j].c;
    m.y0 = std::max(v.components[i].y0, v.components[j].y0);
    m.x0 = std::max(v.components[i].x0, v.components[j].x0);
    const auto &a = v.components[i];
    const auto &b = v.components[j];
    if (a.secular != secular_kind::none || b.secular != secular_kind::none) {
        m.secular = secular_kind::log_linear;
        m.slope = a.secular_value(1.0) - b.secular_value(1.0);
    }
    for (std::size_t col = 0; col < v.size(); ++col) {
        if (v.present[i][col] || v.present[j][col]) {
            m.terms.push_back({v.lambdas[col], v.rows[i][col] - v.rows[j][col]});
        }
    }
    return m;
}

struct condition_options {
    // Fit window for theta: T from fit_lo_fraction * lambda_max to lambda_max.
    double fit_lo_fraction = 0.1;
    std::size_t fit_points = 48;
    // Power of log T divided out before fitting the exponent.
    double log_power = 1.0;
    // Log exponent gamma in the unit-window normalization (log T)^gamma / T^beta.
    double si_gamma = 1.0;
};

struct condition_report {
    std::size_t n_terms = 0;
    double fit_T_lo = 0.0;
    double fit_T_hi = 0.0;
    double log_power = 1.0;
    double theta_hat = 0.0;   // exponent with (log T)^log_power divided out
    double theta_raw = 0.0;   // plain log-log slope
    double theta_residual = 0.0;
    double theta_bound = 3.0 - std::numbers::sqrt3;
    bool theta_pass = false;
    double beta_hat = 0.0;
    double si_gamma = 1.0;
    double si_sup = 0.0; // max over windows of sum|r| * T^beta_hat / (log T)^gamma
    bool si_pass = false;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    bool alpha_feasible = false;
};

namespace detail
{

struct line_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

inline line_fit least_squares(const std::vector<double> &x, const std::vector<double> &y)
{
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    line_fit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss += e * e;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

} // namespace detail

// Upper end of the admissible alpha range for a given beta.
inline double alpha_upper(double beta)
{
    return std::sqrt(beta * beta + beta + 1.0 / 16.0) - 0.25;
}

inline condition_report check_conditions(const coefficient_model &model, const condition_options &opt = {})
{
    if (model.terms.size() < 100) {
        fail(error_kind::insufficient_data, "check_conditions: at least 100 terms required");
    }
    model.validate();
    condition_report rep;
    rep.n_terms = model.terms.size();
    rep.log_power = opt.log_power;
    rep.si_gamma = opt.si_gamma;

    // Cumulative sum of lambda^2 |r|^2.
    std::vector<double> cum(model.terms.size());
    compensated_sum<double> s;
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
        s += model.terms[i].lambda * model.terms[i].lambda * std::norm(model.terms[i].r);
        cum[i] = s.value();
    }
    const double t_hi = model.terms.back().lambda;
    const double t_lo = std::max({opt.fit_lo_fraction * t_hi, model.terms[9].lambda, std::exp(1.0)});
    if (!(t_lo < t_hi)) {
        fail(error_kind::insufficient_data, "check_conditions: fit window is empty");
    }
    rep.fit_T_lo = t_lo;
    rep.fit_T_hi = t_hi;
    std::vector<double> lx;
    std::vector<double> ly;
    std::vector<double> ly_raw;
    for (std::size_t k = 0; k < opt.fit_points; ++k) {
        const double T = t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (opt.fit_points - 1));
        const std::size_t n = model.count_upto(T);
        if (n == 0 || cum[n - 1] <= 0.0) {
            continue;
        }
        const double v = std::log(cum[n - 1]);
        lx.push_back(std::log(T));
        ly_raw.push_back(v);
        ly.push_back(v - opt.log_power * std::log(std::log(T)));
    }
    if (lx.size() < 3) {
        fail(error_kind::insufficient_data, "check_conditions: too few fit points");
    }
    const auto fit = detail::least_squares(lx, ly);
    rep.theta_hat = fit.slope;
    rep.theta_residual = fit.rms;
    rep.theta_raw = detail::least_squares(lx, ly_raw).slope;
    rep.theta_pass = rep.theta_hat >= 0.0 && rep.theta_hat < rep.theta_bound;

    // Unit windows (T, T + 1] for T >= 2.
    std::vector<double> wx;
    std::vector<double> wy;
    std::vector<std::pair<double, double>> windows;
    {
        std::size_t i = 0;
        const auto top = static_cast<std::int64_t>(std::floor(t_hi));
        for (std::int64_t T = 2; T < top; ++T) {
            double sum = 0.0;
            while (i < model.terms.size() && model.terms[i].lambda <= static_cast<double>(T + 1)) {
                if (model.terms[i].lambda > static_cast<double>(T)) {
                    sum += std::abs(model.terms[i].r);
                }
                ++i;
            }
            if (sum > 0.0) {
                const double lt = std::log(static_cast<double>(T));
                windows.emplace_back(static_cast<double>(T), sum);
                wx.push_back(lt);
                wy.push_back(std::log(sum) - opt.si_gamma * std::log(lt));
            }
        }
    }
    if (wx.size() < 3) {
        fail(error_kind::insufficient_data, "check_conditions: too few occupied unit windows");
    }
    rep.beta_hat = -detail::least_squares(wx, wy).slope;
    for (const auto &[T, sum] : windows) {
        rep.si_sup = std::max(rep.si_sup, sum * std::pow(T, rep.beta_hat) / std::pow(std::log(T), opt.si_gamma));
    }
    rep.si_pass = rep.beta_hat > 0.0;
    rep.alpha_lo = std::max(rep.beta_hat, 0.0);
    rep.alpha_hi = alpha_upper(rep.alpha_lo);
    rep.alpha_feasible = rep.beta_hat > 0.0 && rep.alpha_lo < rep.alpha_hi;
    return rep;
}

// Share of sum |r|^2 contributed by frequencies in (lambda_max / ratio, lambda_max].
inline double l2_last_span_fraction(const coefficient_model &m, double ratio = 10.0)
{
    if (m.terms.empty()) {
        return 0.0;
    }
    const double total = m.l2_sum();
    const double cut = m.terms.back().lambda / ratio;
    return total > 0.0 ? (total - m.l2_sum(cut)) / total : 0.0;
}

namespace detail
{

inline std::string secular_tag(const coefficient_model &m)
{
    return m.secular == secular_kind::none ? "none" : "loglinear:" + fmt15(m.slope);
}

} // namespace detail

inline void write_model(std::ostream &os, const coefficient_model &m)
{
    os << "model=" << m.label << " c=" << detail::fmt15(m.c) << " secular=" << detail::secular_tag(m) << "\n";
    os << "# y0=" << detail::fmt15(m.y0) << " x0=" << detail::fmt15(m.x0) << "\n";
    for (const auto &t : m.terms) {
        os << detail::fmt15(t.lambda) << ' ' << detail::fmt15(t.r.real()) << ' ' << detail::fmt15(t.r.imag()) << '\n';
    }
}

inline coefficient_model read_model(std::istream &is, const std::string &source = "stream")
{
    coefficient_model m;
    bool header = false;
    std::string line;
    std::size_t lineno = 0;
    auto parse_error = [&](const std::string &what) {
        fail(error_kind::parse, source + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) {
            toks.push_back(t);
        }
        if (toks.empty()) {
            continue;
        }
        if (toks[0][0] == '#') {
            for (const auto &t : toks) {
                double v = 0.0;
                if (t.rfind("y0=", 0) == 0 && detail::parse_double(t.substr(3), v)) {
                    m.y0 = v;
                } else if (t.rfind("x0=", 0) == 0 && detail::parse_double(t.substr(3), v)) {
                    m.x0 = v;
                }
            }
            continue;
        }
        if (!header) {
            if (toks.size() != 3 || toks[0].rfind("model=", 0) != 0 || toks[1].rfind("c=", 0) != 0 ||
                toks[2].rfind("secular=", 0) != 0) {
                parse_error("expected 'model=<label> c=<real> secular=<tag>'");
            }
            m.label = toks[0].substr(6);
            if (!detail::parse_double(toks[1].substr(2), m.c)) {
                parse_error("bad constant");
            }
            const std::string tag = toks[2].substr(8);
            if (tag == "none") {
                m.secular = secular_kind::none;
            } else if (tag.rfind("loglinear:", 0) == 0 && detail::parse_double(tag.substr(10), m.slope)) {
                m.secular = secular_kind::log_linear;
            } else {
                parse_error("bad secular tag '" + tag + "'");
            }
            header = true;
            continue;
        }
        if (toks.size() != 3) {
            parse_error("expected '<lambda> <re> <im>'");
        }
        double v[3];
        for (int k = 0; k < 3; ++k) {
            if (!detail::parse_double(toks[static_cast<std::size_t>(k)], v[k])) {
                parse_error("malformed number '" + toks[static_cast<std::size_t>(k)] + "'");
            }
        }
        if (!(v[0] > 0.0)) {
            parse_error("frequency must be positive");
        }
        if (!m.terms.empty() && v[0] < m.terms.back().lambda) {
            fail(error_kind::monotonicity, source + ":" + std::to_string(lineno) + ": frequencies decrease");
        }
        m.terms.push_back({v[0], {v[1], v[2]}});
    }
    if (!header) {
        fail(error_kind::parse, source + ": missing model header");
    }
    return m;
}

inline void save_model(const coefficient_model &m, const std::string &path)
{
    std::ofstream os(path);
    if (!os) {
        fail(error_kind::io, "save_model: cannot open " + path);
    }
    write_model(os, m);
    if (!os.flush()) {
        fail(error_kind::io, "save_model: write failed for " + path);
    }
}

inline coefficient_model load_model(const std::string &path)
{
    std::ifstream is(path);
    if (!is) {
        fail(error_kind::io, "load_model: cannot open " + path);
    }
    return read_model(is, path);
}

} // namespace limdist

#endif
