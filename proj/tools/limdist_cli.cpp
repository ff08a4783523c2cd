#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <limdist/arith.hpp>
#include <limdist/fourier.hpp>
#include <limdist/lab.hpp>
#include <limdist/model.hpp>
#include <limdist/zero_store.hpp>

namespace
{

using namespace limdist;
using json = nlohmann::json;

constexpr const char *tool_version = "limdist 1.0.0";

using cell = std::variant<double, std::int64_t, std::string, bool>;

struct report {
    metadata meta;
    std::vector<std::pair<std::string, cell>> summary;
    std::vector<std::string> columns;
    std::vector<std::vector<cell>> rows;
};

std::string cell_text(const cell &c)
{
    return std::visit(
        [](const auto &v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return detail::fmt15(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return v;
            }
        },
        c);
}

json cell_json(const cell &c)
{
    return std::visit(
        [](const auto &v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) {
                    return nullptr;
                }
                return std::stod(detail::fmt15(v));
            } else {
                return v;
            }
        },
        c);
}

struct global_options {
    std::string config;
    unsigned workers = default_workers();
    std::uint64_t seed = 1;
    std::string format = "csv";
};

void emit(std::ostream &os, const report &r, const std::string &format)
{
    if (format == "json") {
        json doc;
        doc["meta"] = json::object();
        for (const auto &[k, v] : r.meta) {
            doc["meta"][k] = v;
        }
        doc["summary"] = json::object();
        for (const auto &[k, v] : r.summary) {
            doc["summary"][k] = cell_json(v);
        }
        doc["columns"] = r.columns;
        doc["rows"] = json::array();
        for (const auto &row : r.rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                obj[r.columns[i]] = cell_json(row[i]);
            }
            doc["rows"].push_back(obj);
        }
        os << doc.dump(2) << '\n';
        return;
    }
    write_metadata(os, r.meta);
    for (const auto &[k, v] : r.summary) {
        os << "# " << k << '=' << cell_text(v) << '\n';
    }
    if (!r.columns.empty()) {
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            os << (i ? "," : "") << r.columns[i];
        }
        os << '\n';
        for (const auto &row : r.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "") << cell_text(row[i]);
            }
            os << '\n';
        }
    }
}

std::string fnv1a_file(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        fail(error_kind::io, "cannot open " + path);
    }
    std::uint64_t h = 14695981039346656037ull;
    for (std::istreambuf_iterator<char> it(is), end; it != end; ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Provenance: version, command path, every option of the command (given or
// default), seed and checksums of input files.
metadata provenance(const CLI::App *leaf, const global_options &g, const std::vector<std::string> &inputs)
{
    metadata m;
    m.emplace_back("tool", tool_version);
    std::string path;
    for (const CLI::App *a = leaf; a && a->get_parent(); a = a->get_parent()) {
        path = a->get_name() + (path.empty() ? "" : " " + path);
    }
    m.emplace_back("command", path);
    std::vector<std::pair<std::string, std::string>> opts;
    for (const CLI::Option *o : leaf->get_options()) {
        if (o->get_name() == "--help" || o->get_name().empty()) {
            continue;
        }
        std::string value;
        if (o->count() > 0) {
            const auto &res = o->results();
            for (std::size_t i = 0; i < res.size(); ++i) {
                value += (i ? " " : "") + res[i];
            }
        } else {
            value = o->get_default_str();
        }
        std::string name = o->get_single_name();
        opts.emplace_back("config." + name, value);
    }
    std::sort(opts.begin(), opts.end());
    m.insert(m.end(), opts.begin(), opts.end());
    m.emplace_back("seed", std::to_string(g.seed));
    m.emplace_back("format", g.format);
    for (const auto &p : inputs) {
        m.emplace_back("checksum." + p, "fnv1a64:" + fnv1a_file(p));
    }
    return m;
}

// Line-oriented key=value file; applies to options of the selected command
// that were not given on the command line.
void apply_config(CLI::App &app, CLI::App *leaf, const std::string &path)
{
    std::ifstream is(path);
    if (!is) {
        fail(error_kind::io, "cannot open config " + path);
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(error_kind::parse, path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option *opt = leaf->get_option_no_throw("--" + key);
        if (!opt) {
            opt = app.get_option_no_throw("--" + key);
        }
        if (!opt) {
            fail(error_kind::usage, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (opt->count() == 0) {
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

void write_text(const std::string &out, const std::function<void(std::ostream &)> &fn)
{
    if (out.empty() || out == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream os(out);
    if (!os) {
        fail(error_kind::io, "cannot open " + out);
    }
    fn(os);
    if (!os.flush()) {
        fail(error_kind::io, "write failed for " + out);
    }
}

std::vector<cell> summary_row(const zero_dataset &ds)
{
    return {std::string(ds.kind == dataset_kind::zeta ? "zeta" : "dirichlet"), static_cast<std::int64_t>(ds.q),
            static_cast<std::int64_t>(ds.size()), ds.gamma_max, ds.coefficient_ready(),
            ds.zeros.empty() ? 0.0 : ds.zeros.front().gamma, ds.zeros.empty() ? 0.0 : ds.zeros.back().gamma};
}

const std::vector<std::string> summary_columns{"kind", "q", "zeros", "gamma_max", "coefficient_ready", "first_gamma",
                                               "last_gamma"};

struct zeros_options {
    std::string kind = "zeta";
    std::uint64_t q = 0;
    double gamma_max = 0.0;
    double tol = 1e-10;
    bool no_derivatives = false;
    std::string out;
    std::string in;
    double jm1 = 0.0;
    double step = 0.0;
    bool unit_counts = false;
};

struct model_options {
    std::string kind = "psi";
    std::string zeros;
    double gamma_max = 0.0;
    double alpha = 0.0;
    std::uint64_t q = 0;
    std::uint64_t a = 0;
    std::string out;
    std::string in;
    double log_power = 1.0;
    double si_gamma = 1.0;
    double fit_lo = 0.1;
};

struct dist_options {
    std::string model;
    std::vector<double> X;
    double Y = 0.0;
    double step = 1e-3;
    double y_start = -1.0;
    double sieve_limit = 1e8;
    std::size_t bins = 0;
    std::string source = "truth";
    std::size_t points = 256;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t terms = 0;
    double smoothing = 0.0;
    std::uint64_t q = 3;
    std::uint64_t a1 = 1;
    std::uint64_t a2 = 2;
    std::string zeros;
    double gamma_max = 1000.0;
    std::vector<double> xi;
    std::size_t mc_samples = 0;
};

zero_dataset dataset_for_model(const model_options &o, bool dirichlet, const global_options &g,
                               std::vector<std::string> &inputs)
{
    if (!o.zeros.empty()) {
        inputs.push_back(o.zeros);
        return import_zeros(o.zeros);
    }
    compute_options co;
    co.search.workers = g.workers;
    if (dirichlet) {
        return compute_dirichlet_zeros(o.q, o.gamma_max > 0.0 ? o.gamma_max : 200.0, co);
    }
    return compute_zeta_zeros(o.gamma_max > 0.0 ? o.gamma_max : 1000.0, co);
}

coefficient_model build_model(const model_options &o, const zero_dataset &ds, unsigned workers)
{
    if (o.kind == "psi") {
        return build_psi_model(ds);
    }
    if (o.kind == "pi-li") {
        return build_pi_li_model(ds);
    }
    if (o.kind == "mobius") {
        return build_mobius_model(ds, o.alpha, workers);
    }
    if (o.kind == "liouville") {
        return build_liouville_model(ds, o.alpha, workers);
    }
    if (o.kind == "mobius-ap") {
        return build_mobius_ap_model(ds, o.a, workers);
    }
    fail(error_kind::usage, "unknown model kind '" + o.kind + "'");
}

lab_config lab_cfg(const dist_options &o, const global_options &g)
{
    lab_config c;
    c.sieve.workers = g.workers;
    c.sieve_limit = o.sieve_limit;
    return c;
}

int run(int argc, char **argv)
{
    CLI::App app{"Limiting distributions of prime-counting error terms: zeros, explicit-formula models, "
                 "empirical and J0-product distributions.\n\nConfig files (--config) hold one key=value per line, "
                 "keys being long option names of the chosen command; command-line flags take precedence."};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    global_options g;
    app.add_option("--config", g.config, "key=value config file");
    app.add_option("--workers", g.workers, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", g.seed, "seed for Monte Carlo estimates");
    app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"csv", "json"}));

    zeros_options zo;
    model_options mo;
    dist_options d;

    auto *zeros = app.add_subcommand("zeros", "compute, import, export and summarize zero datasets");
    zeros->require_subcommand(1);
    auto *zfind = zeros->add_subcommand("find", "locate zeros on the critical line");
    zfind->add_option("--kind", zo.kind)->check(CLI::IsMember({"zeta", "dirichlet"}));
    zfind->add_option("--q", zo.q, "modulus for --kind dirichlet");
    zfind->add_option("--gamma-max", zo.gamma_max, "height limit")->required();
    zfind->add_option("--tol", zo.tol, "ordinate tolerance");
    zfind->add_flag("--no-derivatives", zo.no_derivatives, "skip |L'(rho)| and zeta(2 rho)");
    zfind->add_option("--out", zo.out, "dataset file (default stdout)");
    auto *zimport = zeros->add_subcommand("import", "validate a text-v1 dataset");
    zimport->add_option("path", zo.in)->required();
    zimport->add_option("--out", zo.out, "re-export the validated dataset");
    auto *zexport = zeros->add_subcommand("export", "rewrite a dataset in canonical text-v1");
    zexport->add_option("path", zo.in)->required();
    zexport->add_option("--out", zo.out, "destination (default stdout)");
    auto *zstats = zeros->add_subcommand("stats", "J_{-1}(T) table and unit-interval counts");
    zstats->add_option("path", zo.in)->required();
    zstats->add_option("--j-minus-one", zo.jm1, "largest T of the table (default gamma_max)");
    zstats->add_option("--step", zo.step, "T spacing (default T/10)");
    zstats->add_flag("--unit-counts", zo.unit_counts, "tabulate zeros in (T, T+1] instead");

    auto *model = app.add_subcommand("model", "build explicit-formula models and check their hypotheses");
    model->require_subcommand(1);
    auto *mbuild = model->add_subcommand("build", "coefficient model from zeros");
    mbuild->add_option("--kind", mo.kind)->check(CLI::IsMember({"psi", "pi-li", "mobius", "liouville", "mobius-ap"}));
    mbuild->add_option("--zeros", mo.zeros, "dataset (computed when absent)");
    mbuild->add_option("--gamma-max", mo.gamma_max, "height for computed zeros (1000 zeta, 200 Dirichlet)");
    mbuild->add_option("--alpha", mo.alpha, "weight exponent for mobius / liouville");
    mbuild->add_option("--q", mo.q, "modulus for mobius-ap");
    mbuild->add_option("--a", mo.a, "residue class for mobius-ap");
    mbuild->add_option("--out", mo.out, "model file (default stdout)");
    auto *mcond = model->add_subcommand("conditions", "growth exponents and admissibility verdicts");
    mcond->add_option("path", mo.in)->required();
    mcond->add_option("--log-power", mo.log_power, "power of log T divided out before the exponent fit");
    mcond->add_option("--si-gamma", mo.si_gamma, "log exponent of the unit-window normalization");
    mcond->add_option("--fit-lo", mo.fit_lo, "fit window starts at this fraction of the top frequency");

    auto *dist = app.add_subcommand("dist", "residuals, histograms, second moments, densities and races");
    dist->require_subcommand(1);
    auto *dres = dist->add_subcommand("residual", "truth minus truncated model");
    auto *dhist = dist->add_subcommand("hist", "histogram of the error term over a y-grid");
    auto *dpar = dist->add_subcommand("parseval", "time-averaged square against c^2 + sum |r|^2 / 2");
    auto *dden = dist->add_subcommand("density", "density from the J0-product characteristic function");
    auto *drace = dist->add_subcommand("race", "two-way Mobius race between residue classes");
    auto *dcf = dist->add_subcommand("charfn", "characteristic function, optionally against the torus oracle");
    for (auto *s : {dres, dhist, dpar, dden, dcf}) {
        s->add_option("--model", d.model, "model file")->required();
    }
    for (auto *s : {dres, dhist, dpar, drace}) {
        s->add_option("--Y", d.Y, "upper end of the y-range (log x)");
        s->add_option("--step", d.step, "y-grid spacing");
        s->add_option("--sieve-limit", d.sieve_limit, "largest e^Y allowed");
    }
    dres->add_option("--X", d.X, "truncation heights (default: all terms)");
    dres->add_option("--y-start", d.y_start, "lower end of the y-range (default model y0)");
    dhist->add_option("--bins", d.bins, "bin count (0 = Freedman-Diaconis)");
    dhist->add_option("--source", d.source, "truth or model")->check(CLI::IsMember({"truth", "model"}));
    dhist->add_option("--y-start", d.y_start, "lower end of the y-range (default model y0)");
    for (auto *s : {dden, drace}) {
        s->add_option("--points", d.points, "grid points per axis (power of two)");
    }
    dden->add_option("--lo", d.lo, "grid start (with --hi)");
    dden->add_option("--hi", d.hi, "grid end");
    for (auto *s : {dden, dcf}) {
        s->add_option("--terms", d.terms, "factors kept in the product (0 = all)");
    }
    dden->add_option("--smoothing", d.smoothing, "Gaussian smoothing width");
    drace->add_option("--q", d.q, "modulus");
    drace->add_option("--a1", d.a1, "first residue");
    drace->add_option("--a2", d.a2, "second residue");
    drace->add_option("--zeros", d.zeros, "Dirichlet dataset (computed when absent)");
    drace->add_option("--gamma-max", d.gamma_max, "height for computed zeros");
    dcf->add_option("--xi", d.xi, "frequencies")->required();
    dcf->add_option("--mc-samples", d.mc_samples, "torus Monte Carlo samples (0 = off, needs --terms <= 6)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    CLI::App *leaf = &app;
    while (!leaf->get_subcommands().empty()) {
        leaf = leaf->get_subcommands().front();
    }
    if (!g.config.empty()) {
        apply_config(app, leaf, g.config);
    }
    std::vector<std::string> inputs;
    report r;

    if (leaf == zfind) {
        compute_options co;
        co.tol = zo.tol;
        co.derivatives = !zo.no_derivatives;
        co.search.workers = g.workers;
        zero_dataset ds;
        if (zo.kind == "zeta") {
            ds = compute_zeta_zeros(zo.gamma_max, co);
        } else {
            ds = compute_dirichlet_zeros(zo.q, zo.gamma_max, co);
        }
        ds.provenance = std::string("computed ") + tool_version;
        write_text(zo.out, [&](std::ostream &os) { write_zeros(os, ds); });
        if (zo.out.empty() || zo.out == "-") {
            return 0;
        }
        r.columns = summary_columns;
        r.rows.push_back(summary_row(ds));
    } else if (leaf == zimport || leaf == zexport) {
        inputs.push_back(zo.in);
        const auto ds = import_zeros(zo.in);
        if (leaf == zexport || !zo.out.empty()) {
            write_text(zo.out, [&](std::ostream &os) { write_zeros(os, ds); });
            if (leaf == zexport && (zo.out.empty() || zo.out == "-")) {
                return 0;
            }
        }
        r.columns = summary_columns;
        r.rows.push_back(summary_row(ds));
    } else if (leaf == zstats) {
        inputs.push_back(zo.in);
        const auto ds = import_zeros(zo.in);
        const double tmax = zo.jm1 > 0.0 ? zo.jm1 : ds.gamma_max;
        const auto counts = unit_interval_counts(ds, tmax);
        r.summary.emplace_back("zeros", static_cast<std::int64_t>(ds.size()));
        r.summary.emplace_back("unit_count_max", static_cast<std::int64_t>(
            counts.empty() ? 0 : std::max_element(counts.begin(), counts.end(), [](auto &x, auto &y) {
                return x.count < y.count;
            })->count));
        r.summary.emplace_back("unit_count_log_constant", unit_count_log_constant(counts));
        if (zo.unit_counts) {
            r.columns = {"T", "count"};
            for (const auto &c : counts) {
                r.rows.push_back({c.T, c.count});
            }
        } else {
            const double step = zo.step > 0.0 ? zo.step : tmax / 10.0;
            r.columns = {"T", "zeros_upto", "j_minus_one", "j_minus_one_over_T"};
            for (double T = step; T <= tmax * (1.0 + 1e-12); T += step) {
                const double j = j_minus_one(ds, std::min(T, tmax));
                const auto n = std::count_if(ds.zeros.begin(), ds.zeros.end(), [&](auto &z) { return z.gamma <= T; });
                r.rows.push_back({T, static_cast<std::int64_t>(n), j, j / T});
            }
        }
    } else if (leaf == mbuild) {
        const auto ds = dataset_for_model(mo, mo.kind == "mobius-ap", g, inputs);
        const auto m = build_model(mo, ds, g.workers);
        write_text(mo.out, [&](std::ostream &os) { write_model(os, m); });
        if (mo.out.empty() || mo.out == "-") {
            return 0;
        }
        r.columns = {"label", "c", "terms", "second_moment"};
        r.rows.push_back({m.label, m.c, static_cast<std::int64_t>(m.size()), m.second_moment()});
    } else if (leaf == mcond) {
        inputs.push_back(mo.in);
        const auto m = load_model(mo.in);
        condition_options co;
        co.log_power = mo.log_power;
        co.si_gamma = mo.si_gamma;
        co.fit_lo_fraction = mo.fit_lo;
        const auto c = check_conditions(m, co);
        r.columns = {"label", "n_terms", "fit_T_lo", "fit_T_hi", "theta_hat", "theta_raw", "theta_residual",
                     "theta_bound", "theta_pass", "beta_hat", "si_sup", "si_pass", "alpha_lo", "alpha_hi",
                     "alpha_feasible"};
        r.rows.push_back({m.label, static_cast<std::int64_t>(c.n_terms), c.fit_T_lo, c.fit_T_hi, c.theta_hat,
                          c.theta_raw, c.theta_residual, c.theta_bound, c.theta_pass, c.beta_hat, c.si_sup, c.si_pass,
                          c.alpha_lo, c.alpha_hi, c.alpha_feasible});
    } else if (leaf == dres || leaf == dhist || leaf == dpar) {
        inputs.push_back(d.model);
        const auto m = load_model(d.model);
        const auto cfg = lab_cfg(d, g);
        const double Y = d.Y > 0.0 ? d.Y : std::log(1e6);
        if (leaf == dpar) {
            const auto p = parseval_check(m, Y, d.step, cfg);
            r.columns = {"Y", "step", "n_terms", "lhs", "rhs", "rhs_tail", "first_moment"};
            r.rows.push_back({p.Y, p.step, static_cast<std::int64_t>(p.n_terms), p.lhs, p.rhs, p.rhs_tail,
                              p.first_moment});
        } else {
            check_sieve_capacity(Y, cfg);
            const double y0 = d.y_start >= 0.0 ? d.y_start : m.y0;
            const auto grid = uniform_grid(y0, Y, d.step);
            if (leaf == dres) {
                const auto truth = model_truth(m, grid, cfg);
                std::vector<double> xs = d.X;
                if (xs.empty()) {
                    xs.push_back(m.terms.empty() ? m.x0 : std::max(m.x0, m.terms.back().lambda));
                }
                r.columns = {"X", "terms", "y_start", "Y", "step", "points", "rms", "max_abs"};
                for (double X : xs) {
                    const auto rr = residual_against(m, X, grid, truth, g.workers);
                    r.rows.push_back({rr.X, static_cast<std::int64_t>(m.count_upto(X)), rr.y_start, rr.Y,
                                      rr.grid_step, static_cast<std::int64_t>(rr.points), rr.rms, rr.max_abs});
                }
            } else {
                std::vector<double> samples;
                if (d.source == "truth") {
                    samples = model_truth(m, grid, cfg);
                } else {
                    samples = eval_trig_sum(m, std::max(m.x0, m.terms.empty() ? m.x0 : m.terms.back().lambda),
                                            grid, g.workers);
                }
                histogram_options ho;
                ho.bin_count = d.bins;
                const auto dist = make_distribution(samples, ho);
                r.summary.emplace_back("samples", static_cast<std::int64_t>(dist.sample_count));
                r.summary.emplace_back("mean", dist.mean[0]);
                r.summary.emplace_back("variance", dist.variance[0]);
                r.summary.emplace_back("mass", dist.total_mass());
                r.columns = {"bin_lo", "bin_hi", "mass"};
                const auto &ax = dist.axes[0];
                for (std::size_t k = 0; k < ax.count; ++k) {
                    const double lo = ax.lo + static_cast<double>(k) * ax.width();
                    r.rows.push_back({lo, lo + ax.width(), dist.mass[k]});
                }
            }
        }
    } else if (leaf == dden || leaf == dcf) {
        inputs.push_back(d.model);
        const auto m = load_model(d.model);
        auto spec = make_char_fn_spec(m, d.terms > 0 ? std::optional<std::size_t>(d.terms) : std::nullopt);
        if (leaf == dden) {
            spec.smoothing = d.smoothing;
            inversion_options io;
            io.points = d.points;
            io.workers = g.workers;
            if (d.hi > d.lo) {
                io.range = std::vector<std::pair<double, double>>{{d.lo, d.hi}};
            }
            const auto grid = invert_to_density(spec, io);
            r.summary.emplace_back("mass", grid.mass);
            r.summary.emplace_back("mass_defect", grid.mass_defect);
            r.summary.emplace_back("clipped_mass", grid.clipped_mass);
            r.summary.emplace_back("mean", grid.mean());
            r.summary.emplace_back("variance", grid.variance());
            r.summary.emplace_back("xi_max", grid.xi_max);
            r.summary.emplace_back("tail_l2", spec.tail_l2);
            r.columns = {"x", "density"};
            for (std::size_t k = 0; k < grid.points; ++k) {
                r.rows.push_back({grid.coord(0, k), grid.values[k]});
            }
        } else {
            r.columns = {"xi", "re", "im", "log_bound"};
            if (d.mc_samples > 0) {
                r.columns.insert(r.columns.end(), {"mc_re", "mc_im", "mc_se_re", "mc_se_im"});
            }
            for (double xi : d.xi) {
                const auto v = char_fn(spec, xi);
                std::vector<cell> row{xi, v.value.real(), v.value.imag(), v.log_bound};
                if (d.mc_samples > 0) {
                    const auto mc = torus_mc_oracle(
                        spec, spec.n_terms,
                        [&](std::span<const double> x) { return std::exp(cplx{0.0, -xi * x[0]}); }, d.mc_samples,
                        g.seed, g.workers);
                    row.insert(row.end(), {mc.mean.real(), mc.mean.imag(), mc.se_re, mc.se_im});
                }
                r.rows.push_back(row);
            }
        }
    } else if (leaf == drace) {
        zero_dataset ds;
        if (!d.zeros.empty()) {
            inputs.push_back(d.zeros);
            ds = import_zeros(d.zeros);
        } else {
            compute_options co;
            co.search.workers = g.workers;
            ds = compute_dirichlet_zeros(d.q, d.gamma_max, co);
        }
        const auto v = build_vector_model({build_mobius_ap_model(ds, d.a1, g.workers),
                                           build_mobius_ap_model(ds, d.a2, g.workers)});
        inversion_options io;
        io.points = d.points;
        io.workers = g.workers;
        const auto rr = race_probability(v, 0, 1, io);
        r.columns = {"route", "probability"};
        r.rows.push_back({std::string("density"), rr.probability});
        r.rows.push_back({std::string("gil_pelaez"), rr.gil_pelaez});
        r.summary.emplace_back("degenerate", rr.degenerate);
        r.summary.emplace_back("mass_defect", rr.density.mass_defect);
        if (d.Y > 0.0) {
            const auto cfg = lab_cfg(d, g);
            check_sieve_capacity(d.Y, cfg);
            const auto grid = uniform_grid(std::numbers::ln2, d.Y, d.step);
            const std::vector<error_term_id> ids{error_term_id::mobius_ap(d.q, d.a1 % d.q),
                                                 error_term_id::mobius_ap(d.q, d.a2 % d.q)};
            const auto samples = error_term_series(ids, grid, cfg.sieve);
            r.rows.push_back({std::string("log_density"), log_density(samples, strict_order{{0, 1}})});
        }
    }
    r.meta = provenance(leaf, g, inputs);
    emit(std::cout, r, g.format);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    try {
        return run(argc, argv);
    } catch (const limdist::error &e) {
        std::cerr << "error (" << limdist::to_string(e.kind()) << "): " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
