#ifndef LIMDIST_ZERO_STORE_HPP
#define LIMDIST_ZERO_STORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <limdist/characters.hpp>
#include <limdist/compensated.hpp>
#include <limdist/error.hpp>
#include <limdist/zeta.hpp>

namespace limdist
{

enum class dataset_kind { zeta, dirichlet };

// Zeros of zeta, or the merged zeros of every L(s, chi) mod q with char_id
// set. Kept sorted by (gamma, char_id).
struct zero_dataset {
    dataset_kind kind = dataset_kind::zeta;
    std::uint64_t q = 1;
    std::vector<zero_datum> zeros;
    double gamma_max = 0.0;
    std::string provenance;

    bool coefficient_ready() const
    {
        return std::all_of(zeros.begin(), zeros.end(), [](const zero_datum &z) { return z.deriv_abs.has_value(); });
    }

    bool has_zeta2rho() const
    {
        return std::all_of(zeros.begin(), zeros.end(), [](const zero_datum &z) { return z.zeta2rho.has_value(); });
    }

    std::size_t size() const noexcept
    {
        return zeros.size();
    }

    // Zeros with gamma <= T.
    zero_dataset truncated(double T) const
    {
        zero_dataset out = *this;
        out.zeros.clear();
        for (const auto &z : zeros) {
            if (z.gamma <= T) {
                out.zeros.push_back(z);
            }
        }
        out.gamma_max = std::min(gamma_max, T);
        return out;
    }

    // Strictly increasing per character; merged order sorted.
    void validate() const
    {
        std::map<std::uint64_t, double> last;
        for (std::size_t i = 0; i < zeros.size(); ++i) {
            const auto &z = zeros[i];
            if (!(z.gamma > 0.0) || !std::isfinite(z.gamma)) {
                fail(error_kind::domain, "zero dataset: ordinates must be positive and finite");
            }
            const std::uint64_t id = z.char_id.value_or(0);
            auto it = last.find(id);
            if (it != last.end() && !(z.gamma > it->second)) {
                fail(error_kind::monotonicity, "zero dataset: ordinates not strictly increasing at entry " +
                                                   std::to_string(i + 1));
            }
            last[id] = z.gamma;
            if (z.deriv_abs && !(*z.deriv_abs > 0.0)) {
                fail(error_kind::domain, "zero dataset: deriv_abs must be positive");
            }
        }
        if (!zeros.empty() && gamma_max < zeros.back().gamma) {
            fail(error_kind::domain, "zero dataset: gamma_max below the last ordinate");
        }
    }

    void sort_merged()
    {
        std::stable_sort(zeros.begin(), zeros.end(), [](const zero_datum &a, const zero_datum &b) {
            if (a.gamma != b.gamma) {
                return a.gamma < b.gamma;
            }
            return a.char_id.value_or(0) < b.char_id.value_or(0);
        });
    }
};

inline bool operator==(const zero_datum &a, const zero_datum &b)
{
    return a.gamma == b.gamma && a.deriv_abs == b.deriv_abs && a.zeta2rho == b.zeta2rho && a.char_id == b.char_id;
}

inline bool operator==(const zero_dataset &a, const zero_dataset &b)
{
    return a.kind == b.kind && a.q == b.q && a.gamma_max == b.gamma_max && a.zeros == b.zeros;
}

struct compute_options {
    bool derivatives = true;
    bool zeta2rho = true;
    double tol = 1e-10;
    zero_search_config search{};
};

// Zeta zeros up to gamma_max with derivatives (and zeta(2 rho)) attached.
inline zero_dataset compute_zeta_zeros(double gamma_max, const compute_options &opt = {})
{
    zero_dataset ds;
    ds.kind = dataset_kind::zeta;
    const auto lf = l_function::riemann_zeta();
    ds.zeros = find_zeros(lf, gamma_max, opt.tol, opt.search);
    if (opt.derivatives) {
        attach_derivatives(lf, ds.zeros, opt.zeta2rho, opt.search.workers);
    }
    ds.gamma_max = gamma_max;
    ds.provenance = "computed";
    return ds;
}

// Merged zeros of all L(s, chi) mod q with gamma in (0, gamma_max].
// Characters with L(1/2, chi) numerically zero are rejected by find_zeros.
inline zero_dataset compute_dirichlet_zeros(std::uint64_t q, double gamma_max, const compute_options &opt = {})
{
    if (q < 2) {
        fail(error_kind::domain, "compute_dirichlet_zeros: q >= 2 required");
    }
    if (q > 100) {
        fail(error_kind::capacity, "compute_dirichlet_zeros: modulus above 100");
    }
    const character_table table(q);
    zero_dataset ds;
    ds.kind = dataset_kind::dirichlet;
    ds.q = q;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto lf = l_function::dirichlet(table[i]);
        auto zs = find_zeros(lf, gamma_max, opt.tol, opt.search);
        if (opt.derivatives) {
            attach_derivatives(lf, zs, false, opt.search.workers);
        }
        for (auto &z : zs) {
            z.char_id = i;
            ds.zeros.push_back(z);
        }
    }
    ds.sort_merged();
    ds.gamma_max = gamma_max;
    ds.provenance = "computed";
    return ds;
}

namespace detail
{

inline std::string fmt15(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline bool parse_double(const std::string &tok, double &out)
{
    if (tok.empty()) {
        return false;
    }
    char *end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size() && std::isfinite(out);
}

inline bool parse_uint(const std::string &tok, std::uint64_t &out)
{
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
        return false;
    }
    try {
        out = std::stoull(tok);
    } catch (const std::out_of_range &) {
        return false;
    }
    return true;
}

} // namespace detail

inline void write_zeros(std::ostream &os, const zero_dataset &ds)
{
    if (ds.kind == dataset_kind::zeta) {
        os << "kind=zeta\n";
    } else {
        os << "kind=dirichlet q=" << ds.q << "\n";
    }
    os << "# gamma_max=" << detail::fmt15(ds.gamma_max) << "\n";
    if (!ds.provenance.empty()) {
        std::string p = ds.provenance;
        std::replace(p.begin(), p.end(), '\n', ' ');
        os << "# provenance=" << p << "\n";
    }
    for (const auto &z : ds.zeros) {
        os << detail::fmt15(z.gamma);
        if (z.deriv_abs) {
            os << ' ' << detail::fmt15(*z.deriv_abs);
            if (z.zeta2rho) {
                os << ' ' << detail::fmt15(z.zeta2rho->real()) << ' ' << detail::fmt15(z.zeta2rho->imag());
            }
        }
        if (z.char_id) {
            os << " char=" << *z.char_id;
        }
        os << '\n';
    }
}

inline void export_zeros(const zero_dataset &ds, const std::string &path)
{
    std::ofstream os(path);
    if (!os) {
        fail(error_kind::io, "export_zeros: cannot open " + path);
    }
    write_zeros(os, ds);
    os.flush();
    if (!os) {
        fail(error_kind::io, "export_zeros: write failed for " + path);
    }
}

// text-v1 reader. A missing header means kind=zeta; gamma_max defaults to the
// last ordinate.
inline zero_dataset read_zeros(std::istream &is, const std::string &source = "stream")
{
    zero_dataset ds;
    ds.provenance = "imported " + source;
    bool header_seen = false;
    bool data_seen = false;
    std::optional<double> declared_max;
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
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        if (line[first] == '#') {
            std::string body = line.substr(first + 1);
            body.erase(0, body.find_first_not_of(" \t"));
            if (body.rfind("gamma_max=", 0) == 0) {
                double v = 0;
                if (!detail::parse_double(body.substr(10), v)) {
                    parse_error("bad gamma_max");
                }
                declared_max = v;
            } else if (body.rfind("provenance=", 0) == 0) {
                ds.provenance = body.substr(11);
            }
            continue;
        }
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) {
            toks.push_back(t);
        }
        if (toks[0].rfind("kind=", 0) == 0) {
            if (header_seen || data_seen) {
                parse_error("header must precede data and appear once");
            }
            header_seen = true;
            const std::string kind = toks[0].substr(5);
            if (kind == "zeta" && toks.size() == 1) {
                ds.kind = dataset_kind::zeta;
            } else if (kind == "dirichlet" && toks.size() == 2 && toks[1].rfind("q=", 0) == 0) {
                ds.kind = dataset_kind::dirichlet;
                if (!detail::parse_uint(toks[1].substr(2), ds.q) || ds.q < 2) {
                    parse_error("bad modulus");
                }
            } else {
                parse_error("bad header '" + line + "'");
            }
            continue;
        }
        data_seen = true;
        zero_datum z;
        if (!toks.empty() && toks.back().rfind("char=", 0) == 0) {
            std::uint64_t id = 0;
            if (!detail::parse_uint(toks.back().substr(5), id)) {
                parse_error("bad char id");
            }
            z.char_id = id;
            toks.pop_back();
        }
        if (toks.empty() || toks.size() == 3 || toks.size() > 4) {
            parse_error("expected <gamma> [<deriv_abs> [<re> <im>]] [char=<id>]");
        }
        std::vector<double> v(toks.size());
        for (std::size_t k = 0; k < toks.size(); ++k) {
            if (!detail::parse_double(toks[k], v[k])) {
                parse_error("malformed number '" + toks[k] + "'");
            }
        }
        z.gamma = v[0];
        if (v.size() >= 2) {
            z.deriv_abs = v[1];
        }
        if (v.size() == 4) {
            z.zeta2rho = cplx{v[2], v[3]};
        }
        if (ds.kind == dataset_kind::zeta && z.char_id) {
            parse_error("char= column in a zeta dataset");
        }
        if (ds.kind == dataset_kind::dirichlet && !z.char_id) {
            parse_error("dirichlet data line lacks char=");
        }
        if (!(z.gamma > 0.0)) {
            parse_error("ordinate must be positive");
        }
        if (z.deriv_abs && !(*z.deriv_abs > 0.0)) {
            parse_error("deriv_abs must be positive");
        }
        if (ds.kind == dataset_kind::zeta && !ds.zeros.empty() && !(z.gamma > ds.zeros.back().gamma)) {
            fail(error_kind::monotonicity, source + ":" + std::to_string(lineno) + ": ordinates not strictly increasing");
        }
        ds.zeros.push_back(z);
    }
    if (ds.kind == dataset_kind::dirichlet) {
        std::map<std::uint64_t, double> last;
        for (const auto &z : ds.zeros) {
            auto it = last.find(*z.char_id);
            if (it != last.end() && !(z.gamma > it->second)) {
                fail(error_kind::monotonicity, source + ": ordinates for char=" + std::to_string(*z.char_id) +
                                                   " not strictly increasing");
            }
            last[*z.char_id] = z.gamma;
        }
        ds.sort_merged();
    }
    ds.gamma_max = ds.zeros.empty() ? 0.0 : ds.zeros.back().gamma;
    if (declared_max) {
        if (*declared_max < ds.gamma_max) {
            fail(error_kind::parse, source + ": declared gamma_max below the last ordinate");
        }
        ds.gamma_max = *declared_max;
    }
    return ds;
}

inline zero_dataset import_zeros(const std::string &path)
{
    std::ifstream is(path);
    if (!is) {
        fail(error_kind::io, "import_zeros: cannot open " + path);
    }
    return read_zeros(is, path);
}

// Sum of |L'(rho)|^{-2} over 0 < gamma <= T (all characters for Dirichlet data).
inline double j_minus_one(const zero_dataset &ds, double T)
{
    if (!ds.coefficient_ready()) {
        fail(error_kind::not_coefficient_ready, "j_minus_one: dataset lacks derivative values");
    }
    if (T > ds.gamma_max && !ds.zeros.empty()) {
        fail(error_kind::domain, "j_minus_one: T above the dataset's gamma_max");
    }
    compensated_sum<double> s;
    for (const auto &z : ds.zeros) {
        if (z.gamma > T) {
            break;
        }
        s += 1.0 / (*z.deriv_abs * *z.deriv_abs);
    }
    return s.value();
}

struct unit_count {
    std::int64_t T = 0;
    std::int64_t count = 0;
};

// Number of zeros in (T, T + 1] for T = 1 .. floor(T_max).
inline std::vector<unit_count> unit_interval_counts(const zero_dataset &ds, double T_max)
{
    if (T_max > ds.gamma_max) {
        fail(error_kind::domain, "unit_interval_counts: T_max above the dataset's gamma_max");
    }
    const auto top = static_cast<std::int64_t>(std::floor(T_max));
    std::vector<unit_count> out;
    for (std::int64_t T = 1; T <= top; ++T) {
        out.push_back({T, 0});
    }
    for (const auto &z : ds.zeros) {
        auto T = static_cast<std::int64_t>(std::ceil(z.gamma)) - 1;
        if (T >= 1 && T <= top) {
            ++out[static_cast<std::size_t>(T - 1)].count;
        }
    }
    return out;
}

// max over T >= 3 of count(T) / log T; the windows (T, T+1] must lie below gamma_max.
inline double unit_count_log_constant(const std::vector<unit_count> &counts)
{
    double best = 0.0;
    for (const auto &c : counts) {
        if (c.T >= 3) {
            best = std::max(best, static_cast<double>(c.count) / std::log(static_cast<double>(c.T)));
        }
    }
    return best;
}

} // namespace limdist

#endif
