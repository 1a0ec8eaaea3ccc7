#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tanova/anova.hpp"
#include "tanova/error.hpp"
#include "tanova/io.hpp"
#include "tanova/report.hpp"
#include "tanova/rng.hpp"
#include "tanova/transport.hpp"
#include "support.hpp"

using namespace tanova;
using namespace tanova::testing;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, removed on destruction.
struct ScratchDir {
    fs::path root;

    explicit ScratchDir(const std::string& tag)
        : root(fs::temp_directory_path() / ("tanova_io_" + tag)) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    std::string file(const std::string& name) const { return (root / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

}  // namespace

TEST_CASE("load_curves parses a wide CSV") {
    ScratchDir dir("basic");
    const std::string path = dir.file("curves.csv");
    write_text(path,
               "A,1,2,3\n"
               "A,4,5,6\n"
               "B,7,8,9\n"
               "B,1,0,1\n");

    CurveGroupSet set = load_curves(path);
    REQUIRE(set.n_groups() == 2);
    REQUIRE(set.dim() == 3);
    CHECK(set.labels()[0] == "A");
    CHECK(set.labels()[1] == "B");
    CHECK(set.curves()[0].rows() == 2);
    CHECK(set.curves()[1].rows() == 2);
    CHECK(set.curves()[0](0, 0) == 1.0);
    CHECK(set.curves()[0](1, 2) == 6.0);
    CHECK(set.curves()[1](1, 1) == 0.0);
}

TEST_CASE("load_curves header handling") {
    ScratchDir dir("header");
    const std::string body =
        "A,0.25,0.5\n"
        "A,0.75,1\n"
        "B,2,3\n"
        "B,4,5\n";

    const std::string bare = dir.file("bare.csv");
    const std::string with_header = dir.file("header.csv");
    write_text(bare, body);
    write_text(with_header, "group,t1,t2\n" + body);

    CurveGroupSet a = load_curves(bare);
    CurveGroupSet b = load_curves(with_header);
    REQUIRE(a.n_groups() == b.n_groups());
    for (int g = 0; g < a.n_groups(); ++g) {
        CHECK(a.labels()[static_cast<size_t>(g)] == b.labels()[static_cast<size_t>(g)]);
        CHECK((a.curves()[static_cast<size_t>(g)] - b.curves()[static_cast<size_t>(g)])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }

    // A string label with numeric values is data, not a header: dropping the
    // first row here would silently discard a curve.
    const std::string labeled = dir.file("labeled.csv");
    write_text(labeled,
               "ctrl,0.1,0.2\n"
               "ctrl,0.3,0.4\n"
               "case,0.5,0.6\n"
               "case,0.7,0.8\n");
    CurveGroupSet c = load_curves(labeled);
    REQUIRE(c.n_groups() == 2);
    CHECK(c.labels()[0] == "ctrl");
    CHECK(c.curves()[0].rows() == 2);
    CHECK(c.curves()[0](0, 0) == 0.1);

    // Numeric labels never trigger header detection.
    const std::string numeric = dir.file("numeric.csv");
    write_text(numeric,
               "1,0.5,0.25\n"
               "1,0.75,0.5\n"
               "2,1,2\n"
               "2,3,4\n");
    CurveGroupSet d = load_curves(numeric);
    REQUIRE(d.n_groups() == 2);
    CHECK(d.labels()[0] == "1");
    CHECK(d.curves()[0].rows() == 2);
}

TEST_CASE("load_curves skips blank lines and trims whitespace") {
    ScratchDir dir("blank");
    const std::string path = dir.file("curves.csv");
    write_text(path,
               "\n"
               " A , 1 , 2 \n"
               "A,3,4\r\n"
               "\n"
               "B,5,6\n"
               "B,7,8\n"
               "\n");
    CurveGroupSet set = load_curves(path);
    REQUIRE(set.n_groups() == 2);
    CHECK(set.labels()[0] == "A");
    CHECK(set.curves()[0](0, 1) == 2.0);
    CHECK(set.curves()[0](1, 1) == 4.0);
}

TEST_CASE("load_curves error contract") {
    ScratchDir dir("errors");

    CHECK_THROWS_AS(load_curves(dir.file("missing.csv")), IoError);

    const std::string ragged = dir.file("ragged.csv");
    write_text(ragged,
               "A,1,2,3\n"
               "A,4,5,6\n"
               "B,7,8\n");
    try {
        load_curves(ragged);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("2 values") != std::string::npos);
    }

    const std::string bad_value = dir.file("bad_value.csv");
    write_text(bad_value,
               "A,1,2\n"
               "A,1,oops\n");
    try {
        load_curves(bad_value);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("oops") != std::string::npos);
    }

    const std::string lonely = dir.file("lonely.csv");
    write_text(lonely,
               "A,1,2\n"
               "A,3,4\n"
               "B,5,6\n");
    CHECK_THROWS_AS(load_curves(lonely), InsufficientData);

    const std::string empty = dir.file("empty.csv");
    write_text(empty, "\n\n");
    CHECK_THROWS_AS(load_curves(empty), InsufficientData);

    const std::string one_column = dir.file("one_column.csv");
    write_text(one_column, "A\n");
    CHECK_THROWS_AS(load_curves(one_column), ParseError);
}

TEST_CASE("write_curves_csv round-trips at full precision") {
    ScratchDir dir("roundtrip");
    std::mt19937_64 rng = rng_stream(7001);

    std::vector<Matrix> curves;
    curves.push_back(random_gaussian(3, 5, rng));
    curves.push_back(random_gaussian(4, 5, rng));
    // Exercise awkward magnitudes, not just O(1) entries.
    curves[0](0, 0) = 1.0 / 3.0;
    curves[0](1, 2) = 1e-17;
    curves[1](2, 4) = -9.87654321e12;
    CurveGroupSet original({"low", "high"}, curves);

    const std::string path = dir.file("curves.csv");
    write_curves_csv(path, original);
    CurveGroupSet loaded = load_curves(path);

    REQUIRE(loaded.n_groups() == 2);
    REQUIRE(loaded.dim() == 5);
    for (int g = 0; g < 2; ++g) {
        const Matrix& a = original.curves()[static_cast<size_t>(g)];
        const Matrix& b = loaded.curves()[static_cast<size_t>(g)];
        REQUIRE(a.rows() == b.rows());
        CHECK((a.array() == b.array()).all());
    }
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-0.25) == "-0.25");

    const double values[] = {1.0 / 3.0,     3.141592653589793, 1e-300, 6.02214076e23,
                             -1.2345678e-7, 0.0,               42.0};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("matrix CSV layout and round-trip") {
    ScratchDir dir("matrix");

    const std::string ident = dir.file("ident.csv");
    write_matrix_csv(ident, Matrix::Identity(2, 2));
    CHECK(read_text(ident) == "rows=2,cols=2\n1,0\n0,1\n");

    std::mt19937_64 rng = rng_stream(7002);
    Matrix m = random_gaussian(5, 3, rng);
    m *= 1.7e-9;
    const std::string path = dir.file("m.csv");
    write_matrix_csv(path, m);
    Matrix back = read_matrix_csv(path);
    REQUIRE(back.rows() == 5);
    REQUIRE(back.cols() == 3);
    CHECK((m.array() == back.array()).all());

    const std::string bad_header = dir.file("bad_header.csv");
    write_text(bad_header, "shape 2x2\n1,0\n0,1\n");
    CHECK_THROWS_AS(read_matrix_csv(bad_header), ParseError);

    const std::string truncated = dir.file("truncated.csv");
    write_text(truncated, "rows=3,cols=2\n1,0\n0,1\n");
    CHECK_THROWS_AS(read_matrix_csv(truncated), ParseError);
}

TEST_CASE("basis_reduce projects onto the pooled principal subspace") {
    std::mt19937_64 rng = rng_stream(7003);
    const Index q = 5;
    // Curves confined to a planted 2-dim subspace (including group means).
    Matrix span = random_orthogonal(q, rng).leftCols(2);
    std::vector<Matrix> curves;
    curves.push_back(random_gaussian(4, 2, rng) * span.transpose());
    curves.push_back(random_gaussian(6, 2, rng) * span.transpose());
    CurveGroupSet set({"A", "B"}, curves);

    BasisReduction red = basis_reduce(set, RankPolicy::fixed(2));
    CHECK_FALSE(red.rank_capped);
    REQUIRE(red.reduced.dim() == 2);
    REQUIRE(red.basis.rows() == q);
    REQUIRE(red.basis.cols() == 2);
    CHECK((red.basis.transpose() * red.basis - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-10);
    // Nothing is lost: back-projection reproduces the original curves.
    for (int g = 0; g < 2; ++g) {
        Matrix rebuilt = red.reduced.curves()[static_cast<size_t>(g)] * red.basis.transpose();
        CHECK(max_abs_diff(rebuilt, curves[static_cast<size_t>(g)]) < 1e-10);
    }

    // Asking for more than the pooled rank caps with a flag.
    BasisReduction capped = basis_reduce(set, RankPolicy::fixed(4));
    CHECK(capped.rank_capped);
    CHECK(capped.reduced.dim() == 2);
}

TEST_CASE("basis_reduce energy policy") {
    std::mt19937_64 rng = rng_stream(7004);
    const Index q = 6;
    std::vector<Matrix> curves;
    curves.push_back(random_gaussian(20, q, rng));
    curves.push_back(random_gaussian(20, q, rng));
    CurveGroupSet set({"A", "B"}, curves);

    BasisReduction full = basis_reduce(set, RankPolicy::energy_frac(1.0));
    CHECK(full.reduced.dim() == q);
    CHECK((full.basis.transpose() * full.basis - Matrix::Identity(q, q)).cwiseAbs().maxCoeff() <
          1e-10);

    BasisReduction partial = basis_reduce(set, RankPolicy::energy_frac(0.5));
    CHECK(partial.reduced.dim() >= 1);
    CHECK(partial.reduced.dim() < q);

    // The retained eigenvalue mass meets the requested fraction.
    Matrix pooled(40, q);
    Index row = 0;
    for (const Matrix& g : set.curves()) {
        pooled.middleRows(row, g.rows()) = g.rowwise() - g.colwise().mean();
        row += g.rows();
    }
    Vector spectrum = sym_eig(SymMatrix((pooled.transpose() * pooled) / 40.0)).values;
    const Index m = partial.reduced.dim();
    CHECK(spectrum.head(m).sum() >= 0.5 * spectrum.sum());
    CHECK(spectrum.head(m - 1).sum() < 0.5 * spectrum.sum());
}

TEST_CASE("basis_reduce rejects degenerate input") {
    // Constant curves within each group: all centered data vanish.
    std::vector<Matrix> curves;
    curves.push_back(Matrix::Ones(3, 4));
    curves.push_back(Matrix::Constant(2, 4, 5.0));
    CurveGroupSet set({"A", "B"}, curves);
    CHECK_THROWS_AS(basis_reduce(set, RankPolicy()), Degenerate);

    CHECK_THROWS_AS(basis_reduce(set, RankPolicy::fixed(0)), InvalidInput);
    CHECK_THROWS_AS(basis_reduce(set, RankPolicy::energy_frac(0.0)), InvalidInput);
    CHECK_THROWS_AS(basis_reduce(set, RankPolicy::energy_frac(1.5)), InvalidInput);
}

TEST_CASE("basis reduction commutes with orthogonal transforms of the curves") {
    std::mt19937_64 rng = rng_stream(7005);
    const Index q = 6;
    const int n = 8;
    std::vector<Matrix> curves;
    curves.push_back(random_gaussian(n, q, rng));
    curves.push_back(random_gaussian(n, q, rng));
    CurveGroupSet set({"A", "B"}, curves);

    Matrix rot = random_orthogonal(q, rng);
    std::vector<Matrix> rotated;
    for (const Matrix& g : curves) rotated.push_back(g * rot.transpose());
    CurveGroupSet set_rot({"A", "B"}, rotated);

    BasisReduction red = basis_reduce(set, RankPolicy::fixed(4));
    BasisReduction red_rot = basis_reduce(set_rot, RankPolicy::fixed(4));

    // Distances between the reduced group covariances are unchanged, and so
    // is the permutation statistic for a fixed seed.
    std::vector<CovOperator> covs, covs_rot;
    for (int g = 0; g < 2; ++g) {
        covs.push_back(empirical_covariance(red.reduced.curves()[static_cast<size_t>(g)]));
        covs_rot.push_back(
            empirical_covariance(red_rot.reduced.curves()[static_cast<size_t>(g)]));
    }
    CHECK(bw_distance(covs[0], covs[1]) ==
          doctest::Approx(bw_distance(covs_rot[0], covs_rot[1])).epsilon(1e-8));

    AnovaConfig cfg;
    cfg.permutations = 50;
    cfg.seed = 99;
    AnovaResult res = permutation_test(red.reduced, cfg);
    AnovaResult res_rot = permutation_test(red_rot.reduced, cfg);
    CHECK(res.statistic == doctest::Approx(res_rot.statistic).epsilon(1e-8));
    CHECK(res.p_value == res_rot.p_value);
}

TEST_CASE("report round-trip preserves every field") {
    ScratchDir dir("report");

    RunReport rep;
    rep.command = "anova";
    rep.seed = 123456789012345ull;
    rep.config = {{"norm", "hs"}, {"permutations", 200}, {"energy", 1.0 - 1e-8}};
    rep.results = {{"statistic", 1.0 / 3.0},
                   {"p_value", 0.004975124378109453},
                   {"group_sizes", {4, 5, 6}}};
    rep.timings = {{"total_s", 0.125}};
    rep.version = version_string();

    const std::string path = write_report(rep, dir.file("out"));
    CHECK(fs::path(path).filename() == "report.json");
    RunReport back = read_report(path);

    CHECK(back.command == rep.command);
    CHECK(back.seed == rep.seed);
    CHECK(back.config == rep.config);
    CHECK(back.results == rep.results);
    CHECK(back.timings == rep.timings);
    CHECK(back.version == rep.version);
    CHECK(back.to_json() == rep.to_json());

    // Numeric payloads survive at full precision, not display precision.
    CHECK(back.results["statistic"].get<double>() == 1.0 / 3.0);

    const std::string broken = dir.file("broken.json");
    write_text(broken, "{ not json ");
    CHECK_THROWS_AS(read_report(broken), ParseError);
    write_text(broken, "{\"command\": \"x\"}");
    CHECK_THROWS_AS(read_report(broken), ParseError);
    CHECK_THROWS_AS(read_report(dir.file("missing.json")), IoError);
}
