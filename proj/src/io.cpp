#include "tanova/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <vector>

namespace tanova {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string_view trimmed(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_value(std::string_view token, double* out) {
    token = trimmed(token);
    if (token.empty()) return false;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto res = std::from_chars(begin, end, *out);
    return res.ec == std::errc{} && res.ptr == end;
}

bool blank(const std::string& line) {
    return trimmed(line).empty();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CurveGroupSet load_curves(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }

    std::vector<std::string> order;                 // labels by first appearance
    std::map<std::string, std::vector<Vector>> rows;
    Index q = -1;
    std::string line;
    long lineno = 0;
    bool first_content = true;

    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        std::vector<std::string> tokens = split_csv(line);
        if (tokens.size() < 2) {
            throw ParseError("expected a label and at least one value", lineno);
        }

        if (first_content) {
            first_content = false;
            // Header detection: a non-numeric first token alone is ambiguous
            // (labels are arbitrary strings), so also require some later
            // token to be non-numeric; data rows are numeric past column 1.
            double probe = 0.0;
            if (!parse_value(tokens[0], &probe)) {
                bool nonnumeric_value = false;
                for (size_t i = 1; i < tokens.size(); ++i) {
                    if (!parse_value(tokens[i], &probe)) {
                        nonnumeric_value = true;
                        break;
                    }
                }
                if (nonnumeric_value) continue;  // header row
            }
        }

        const Index nvals = static_cast<Index>(tokens.size()) - 1;
        if (q < 0) {
            q = nvals;
        } else if (nvals != q) {
            throw ParseError("row has " + std::to_string(nvals) + " values, expected " +
                                 std::to_string(q),
                             lineno);
        }
        Vector values(q);
        for (Index i = 0; i < q; ++i) {
            double v = 0.0;
            if (!parse_value(tokens[static_cast<size_t>(i) + 1], &v)) {
                throw ParseError("cannot parse value '" + tokens[static_cast<size_t>(i) + 1] +
                                     "'",
                                 lineno);
            }
            values(i) = v;
        }
        std::string label(trimmed(tokens[0]));
        auto it = rows.find(label);
        if (it == rows.end()) {
            order.push_back(label);
            it = rows.emplace(label, std::vector<Vector>{}).first;
        }
        it->second.push_back(std::move(values));
    }

    if (order.empty()) {
        throw InsufficientData("'" + path + "' holds no curves");
    }
    std::vector<Matrix> groups;
    groups.reserve(order.size());
    for (const std::string& label : order) {
        const std::vector<Vector>& list = rows[label];
        if (list.size() < 2) {
            throw InsufficientData("group '" + label + "' has fewer than 2 curves");
        }
        Matrix g(static_cast<Index>(list.size()), q);
        for (size_t r = 0; r < list.size(); ++r) {
            g.row(static_cast<Index>(r)) = list[r].transpose();
        }
        groups.push_back(std::move(g));
    }
    return CurveGroupSet(std::move(order), std::move(groups));
}

BasisReduction basis_reduce(const CurveGroupSet& groups, const RankPolicy& policy) {
    if (policy.kind == RankPolicyKind::fixed_rank && policy.rank < 1) {
        throw InvalidInput("fixed rank must be at least 1");
    }
    if (policy.kind == RankPolicyKind::energy_threshold &&
        !(policy.energy > 0.0 && policy.energy <= 1.0)) {
        throw InvalidInput("energy fraction must lie in (0, 1]");
    }

    const Index q = groups.dim();
    const Index n_total = groups.total_curves();
    Matrix pooled(n_total, q);
    {
        Index row = 0;
        for (const Matrix& g : groups.curves()) {
            pooled.middleRows(row, g.rows()) =
                g.rowwise() - g.colwise().mean();
            row += g.rows();
        }
    }
    const Matrix pooled_cov =
        sym_part(pooled.transpose() * pooled) / static_cast<double>(n_total);

    Eigen::SelfAdjointEigenSolver<Matrix> es(pooled_cov);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    Vector values = es.eigenvalues().reverse().cwiseMax(0.0);
    Matrix vectors = es.eigenvectors().rowwise().reverse();

    const double lmax = values(0);
    if (!(lmax > 0.0)) {
        throw Degenerate("all group-centered curves are zero; nothing to reduce");
    }
    Index rank = 0;
    while (rank < q && values(rank) > clip_band() * lmax) ++rank;

    Index m = 0;
    bool capped = false;
    if (policy.kind == RankPolicyKind::fixed_rank) {
        m = policy.rank;
        if (m > rank) {
            m = rank;
            capped = true;
        }
    } else {
        const double total = values.sum();
        double cum = 0.0;
        while (m < rank) {
            cum += values(m);
            ++m;
            if (cum >= policy.energy * total) break;
        }
    }

    Matrix basis = vectors.leftCols(m);
    std::vector<Matrix> reduced;
    reduced.reserve(groups.curves().size());
    for (const Matrix& g : groups.curves()) reduced.push_back(g * basis);

    return BasisReduction{CurveGroupSet(groups.labels(), std::move(reduced)),
                          std::move(basis), capped};
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << "rows=" << m.rows() << ",cols=" << m.cols() << "\n";
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("missing matrix header", 1);
    }
    Index rows = 0;
    Index cols = 0;
    {
        const std::string_view h = trimmed(header);
        int r = 0, c = 0;
        if (std::sscanf(std::string(h).c_str(), "rows=%d,cols=%d", &r, &c) != 2 ||
            r < 1 || c < 1) {
            throw ParseError("expected header 'rows=R,cols=C'", 1);
        }
        rows = r;
        cols = c;
    }
    Matrix m(rows, cols);
    std::string line;
    for (Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) {
            throw ParseError("expected " + std::to_string(rows) + " data rows",
                             i + 1);
        }
        std::vector<std::string> tokens = split_csv(line);
        if (static_cast<Index>(tokens.size()) != cols) {
            throw ParseError("row has " + std::to_string(tokens.size()) +
                                 " values, expected " + std::to_string(cols),
                             i + 2);
        }
        for (Index j = 0; j < cols; ++j) {
            double v = 0.0;
            if (!parse_value(tokens[static_cast<size_t>(j)], &v)) {
                throw ParseError("cannot parse value '" + tokens[static_cast<size_t>(j)] + "'",
                                 i + 2);
            }
            m(i, j) = v;
        }
    }
    return m;
}

void write_curves_csv(const std::string& path, const CurveGroupSet& groups) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    const Index q = groups.dim();
    out << "group";
    for (Index i = 1; i <= q; ++i) out << ",t" << i;
    out << '\n';
    for (int g = 0; g < groups.n_groups(); ++g) {
        const Matrix& curves = groups.curves()[static_cast<size_t>(g)];
        for (Index r = 0; r < curves.rows(); ++r) {
            out << groups.labels()[static_cast<size_t>(g)];
            for (Index j = 0; j < q; ++j) out << ',' << format_double(curves(r, j));
            out << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

}  // namespace tanova
