#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "oracle.hpp"

namespace
{

struct run_result {
    int code = -1;
    std::string out;
};

run_result run(const std::string &args)
{
    const std::string cmd = std::string(LIMDIST_CLI) + " " + args + " 2>/dev/null";
    run_result r;
    FILE *pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        return r;
    }
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, n);
    }
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// CSV body rows after the header line that starts with `header`.
std::vector<std::vector<std::string>> csv_rows(const std::string &text, const std::string &header)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    bool body = false;
    while (std::getline(is, line)) {
        if (!body) {
            body = line.rfind(header, 0) == 0;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) {
            cells.push_back(c);
        }
        rows.push_back(cells);
    }
    return rows;
}

std::string header_value(const std::string &text, const std::string &key)
{
    const auto pos = text.find("# " + key + "=");
    if (pos == std::string::npos) {
        return {};
    }
    const auto start = pos + key.size() + 3;
    return text.substr(start, text.find('\n', start) - start);
}

const std::string &zeros_file()
{
    static const std::string path = [] {
        const auto p = fixtures::temp_path("cli_zeros_1000.txt");
        run("zeros find --gamma-max 1000 --out " + p);
        return p;
    }();
    return path;
}

const std::string &psi_file()
{
    static const std::string path = [] {
        const auto p = fixtures::temp_path("cli_psi.txt");
        run("model build --kind psi --zeros " + zeros_file() + " --out " + p);
        return p;
    }();
    return path;
}

} // namespace

TEST(CliZeros, FindCountsAndStats)
{
    const auto path = fixtures::temp_path("cli_zeros_500.txt");
    const auto r = run("zeros find --kind zeta --gamma-max 500 --out " + path);
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out, "kind,");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(std::stoi(rows[0][2]), oracle::zeros_upto_500);
    EXPECT_EQ(rows[0][4], "true");

    const auto s = run("zeros stats " + path + " --j-minus-one 100");
    ASSERT_EQ(s.code, 0);
    const auto table = csv_rows(s.out, "T,");
    ASSERT_EQ(table.size(), 10u);
    double prev = 0.0;
    for (const auto &row : table) {
        const double j = std::stod(row[2]);
        EXPECT_GE(j, prev);
        prev = j;
    }
    EXPECT_NE(header_value(s.out, "checksum." + path).rfind("fnv1a64:", 0), std::string::npos);
}

TEST(CliZeros, UnitCountsAndRoundTrip)
{
    const auto s = run("zeros stats " + zeros_file() + " --unit-counts --j-minus-one 20");
    ASSERT_EQ(s.code, 0);
    const auto rows = csv_rows(s.out, "T,count");
    ASSERT_EQ(rows.size(), 20u);
    EXPECT_EQ(rows[13][0], "14");
    EXPECT_EQ(rows[13][1], "1");

    const auto exported = fixtures::temp_path("cli_exported.txt");
    ASSERT_EQ(run("zeros export " + zeros_file() + " --out " + exported).code, 0);
    EXPECT_EQ(slurp(exported), slurp(zeros_file()));
}

TEST(CliZeros, BadInputExitCodes)
{
    const auto bad = fixtures::temp_path("cli_bad.txt");
    std::ofstream(bad) << "14.1 0.8\n21.0 x\n";
    const std::string cmd = std::string(LIMDIST_CLI) + " zeros import " + bad + " 2>&1";
    FILE *pipe = popen(cmd.c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    std::string err;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) {
        err += buf;
    }
    const int status = pclose(pipe);
    EXPECT_EQ(WEXITSTATUS(status), 2);
    EXPECT_NE(err.find(bad + ":2:"), std::string::npos) << err;

    const auto mono = fixtures::temp_path("cli_mono.txt");
    std::ofstream(mono) << "21.0\n14.0\n";
    EXPECT_EQ(run("zeros import " + mono).code, 2);
    EXPECT_EQ(run("zeros import " + fixtures::temp_path("cli_missing.txt")).code, 2);
    EXPECT_EQ(run("zeros find").code, 2);
    EXPECT_EQ(run("zeros find --gamma-max 10 --kind theta").code, 2);
    EXPECT_EQ(run("zeros find --kind dirichlet --q 101 --gamma-max 10").code, 3);
}

TEST(CliModel, BuildAndConditions)
{
    const auto text = slurp(psi_file());
    EXPECT_EQ(text.rfind("model=psi c=0 ", 0), 0u);

    const auto r = run("--format json model conditions " + psi_file());
    ASSERT_EQ(r.code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    const auto &row = doc["rows"][0];
    EXPECT_EQ(row["label"], "psi");
    EXPECT_EQ(row["n_terms"], oracle::zeros_upto_1000);
    const double theta = row["theta_hat"];
    EXPECT_GE(theta, 0.9);
    EXPECT_LE(theta, 1.3);
    EXPECT_NEAR(static_cast<double>(row["theta_bound"]), 3.0 - std::sqrt(3.0), 1e-14);
    EXPECT_EQ(row["theta_pass"], theta < 3.0 - std::sqrt(3.0));
    EXPECT_EQ(doc["meta"]["command"], "model conditions");
    EXPECT_EQ(doc["meta"]["seed"], "1");
}

TEST(CliModel, MobiusApFromComputedZeros)
{
    const auto path = fixtures::temp_path("cli_ap.txt");
    ASSERT_EQ(run("model build --kind mobius-ap --q 3 --a 2 --gamma-max 60 --out " + path).code, 0);
    EXPECT_EQ(slurp(path).rfind("model=mobius_ap:q=3:a=2 ", 0), 0u);
    EXPECT_EQ(run("model build --kind mobius-ap --q 3 --a 3 --gamma-max 60").code, 2);
    EXPECT_EQ(run("model conditions " + path).code, 1);
}

TEST(CliDist, HistogramMassIsOne)
{
    const auto r = run("dist hist --model " + psi_file() + " --Y 12 --step 0.005 --bins 200");
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out, "bin_lo,");
    ASSERT_EQ(rows.size(), 200u);
    double mass = 0.0;
    for (const auto &row : rows) {
        mass += std::stod(row[2]);
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_NEAR(std::stod(header_value(r.out, "mass")), 1.0, 1e-12);
}

TEST(CliDist, ParsevalReport)
{
    const auto r = run("dist parseval --model " + psi_file() + " --Y 12");
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out, "Y,step");
    ASSERT_EQ(rows.size(), 1u);
    const double rhs = std::stod(rows[0][4]);
    EXPECT_LT(rhs, oracle::zero_sum_limit);
    EXPECT_NEAR(rhs, oracle::zero_sum_1000, 1e-12);
    EXPECT_EQ(run("dist parseval --model " + psi_file() + " --Y 30").code, 3);
}

TEST(CliDist, RaceModThreeIsEven)
{
    const auto r = run("dist race --q 3 --a1 1 --a2 2 --gamma-max 100");
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out, "route,");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_NEAR(std::stod(rows[0][1]), 0.5, 0.02);
    EXPECT_NEAR(std::stod(rows[1][1]), 0.5, 0.02);
}

TEST(CliDist, DensityAndCharFn)
{
    const auto d = run("dist density --model " + psi_file() + " --terms 100 --points 128");
    ASSERT_EQ(d.code, 0);
    EXPECT_EQ(csv_rows(d.out, "x,density").size(), 128u);
    EXPECT_LT(std::stod(header_value(d.out, "mass_defect")), 1e-3);

    const auto c = run("--seed 3 dist charfn --model " + psi_file() + " --terms 2 --xi 0 1 --mc-samples 100000");
    ASSERT_EQ(c.code, 0);
    const auto rows = csv_rows(c.out, "xi,re,im,log_bound");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0][1], "1");
    EXPECT_EQ(header_value(c.out, "seed"), "3");
    EXPECT_EQ(run("dist charfn --model " + psi_file() + " --terms 10 --xi 1000").code, 1);
}

TEST(CliReproducibility, RerunsAreByteIdentical)
{
    const auto a = fixtures::temp_path("cli_rerun_a.txt");
    const auto b = fixtures::temp_path("cli_rerun_b.txt");
    ASSERT_EQ(run("--workers 1 zeros find --gamma-max 200 --out " + a).code, 0);
    ASSERT_EQ(run("--workers 2 zeros find --gamma-max 200 --out " + b).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const std::string cmd = "--seed 5 dist charfn --model " + psi_file() + " --terms 3 --xi 0.5 --mc-samples 100000";
    EXPECT_EQ(run(cmd).out, run(cmd).out);
    const std::string hist = "dist hist --model " + psi_file() + " --Y 10";
    EXPECT_EQ(run(hist).out, run(hist).out);
}

TEST(CliConfig, FlagsOverrideFileOverridesDefaults)
{
    const auto cfg = fixtures::temp_path("cli_config.txt");
    std::ofstream(cfg) << "# hist settings\nbins = 17\nY=9\nseed=11\n";
    const auto from_file = run("--config " + cfg + " dist hist --model " + psi_file());
    ASSERT_EQ(from_file.code, 0);
    EXPECT_EQ(csv_rows(from_file.out, "bin_lo,").size(), 17u);
    EXPECT_EQ(header_value(from_file.out, "config.Y"), "9");
    EXPECT_EQ(header_value(from_file.out, "seed"), "11");

    const auto flagged = run("--config " + cfg + " dist hist --model " + psi_file() + " --bins 5");
    ASSERT_EQ(flagged.code, 0);
    EXPECT_EQ(csv_rows(flagged.out, "bin_lo,").size(), 5u);

    const auto plain = run("dist hist --model " + psi_file() + " --Y 9");
    EXPECT_EQ(header_value(plain.out, "config.bins"), "0");

    const auto bad = fixtures::temp_path("cli_config_bad.txt");
    std::ofstream(bad) << "nonsense=1\n";
    EXPECT_EQ(run("--config " + bad + " dist hist --model " + psi_file()).code, 2);
}

TEST(CliOutput, JsonMirrorsCsv)
{
    const std::string args = "dist hist --model " + psi_file() + " --Y 10 --bins 8";
    const auto csv = run(args);
    const auto js = run("--format json " + args);
    ASSERT_EQ(js.code, 0);
    const auto doc = nlohmann::json::parse(js.out);
    ASSERT_EQ(doc["rows"].size(), 8u);
    const auto rows = csv_rows(csv.out, "bin_lo,");
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(static_cast<double>(doc["rows"][k]["mass"]), std::stod(rows[k][2]));
    }
    EXPECT_EQ(doc["columns"], nlohmann::json({"bin_lo", "bin_hi", "mass"}));
    EXPECT_EQ(doc["meta"]["tool"], header_value(csv.out, "tool"));
}
