#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "neocc/core.hpp"
#include "neocc/eval.hpp"
#include "neocc/solver.hpp"

// File formats: MatrixMarket and dense CSV input, assignment TSV,
// per-iteration trace CSV, run summary JSON, and the spy-plot artifacts.

namespace neocc {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double_field(const std::string& field, const std::string& file, long line,
                                 long column) {
    const std::string t = trim(field);
    if (t.empty()) throw ParseError(file, line, column, "empty numeric field");
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError(file, line, column, "invalid number '" + t + "'");
    return value;
}

inline long parse_long_field(const std::string& field, const std::string& file, long line,
                             long column) {
    const std::string t = trim(field);
    long value = 0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (t.empty() || ec != std::errc() || ptr != end)
        throw ParseError(file, line, column, "invalid integer '" + t + "'");
    return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, 0, "cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrix input

/// Rectangular comma-separated numeric grid.
inline DataMatrix read_dense_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    std::vector<std::vector<double>> rows;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        if (detail::trim(line).empty()) {
            if (li + 1 == lines.size()) continue;  // trailing newline
            throw ParseError(path, static_cast<long>(li + 1), 1, "blank line inside matrix");
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string field =
                line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            row.push_back(detail::parse_double_field(field, path, static_cast<long>(li + 1),
                                                     static_cast<long>(start + 1)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path, static_cast<long>(li + 1), 1,
                             "ragged row: expected " + std::to_string(rows.front().size()) +
                                 " fields, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path, 1, 1, "empty matrix");
    Matrixd x(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j)
            x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return DataMatrix::dense(std::move(x));
}

/// 1-based coordinate MatrixMarket file with the
/// `%%MatrixMarket matrix coordinate real general` banner.
inline DataMatrix read_matrix_market(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path, 1, 1, "empty file");

    std::istringstream banner(lines[0]);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    };
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate" ||
        lower(field) != "real" || lower(symmetry) != "general")
        throw ParseError(path, 1, 1,
                         "expected header '%%MatrixMarket matrix coordinate real general'");

    std::size_t li = 1;
    while (li < lines.size() &&
           (detail::trim(lines[li]).empty() || detail::trim(lines[li])[0] == '%'))
        ++li;
    if (li >= lines.size()) throw ParseError(path, static_cast<long>(lines.size()), 1, "missing size line");

    long n = 0, m = 0, nnz = 0;
    {
        std::istringstream sz(lines[li]);
        std::string a, b, c, extra;
        sz >> a >> b >> c;
        if (sz >> extra)
            throw ParseError(path, static_cast<long>(li + 1), 1, "size line has extra fields");
        n = detail::parse_long_field(a, path, static_cast<long>(li + 1), 1);
        m = detail::parse_long_field(b, path, static_cast<long>(li + 1), 1);
        nnz = detail::parse_long_field(c, path, static_cast<long>(li + 1), 1);
        if (n < 1 || m < 1 || nnz < 0)
            throw ParseError(path, static_cast<long>(li + 1), 1, "invalid matrix sizes");
    }
    ++li;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    long seen = 0;
    for (; li < lines.size(); ++li) {
        const std::string t = detail::trim(lines[li]);
        if (t.empty() || t[0] == '%') continue;
        if (seen >= nnz)
            throw ParseError(path, static_cast<long>(li + 1), 1,
                             "more entries than declared (" + std::to_string(nnz) + ")");
        std::istringstream es(t);
        std::string a, b, c, extra;
        es >> a >> b >> c;
        if (c.empty()) throw ParseError(path, static_cast<long>(li + 1), 1, "entry needs 'row col value'");
        if (es >> extra)
            throw ParseError(path, static_cast<long>(li + 1), 1, "entry has extra fields");
        const long r = detail::parse_long_field(a, path, static_cast<long>(li + 1), 1);
        const long cidx = detail::parse_long_field(b, path, static_cast<long>(li + 1), 1);
        const double v = detail::parse_double_field(c, path, static_cast<long>(li + 1), 1);
        if (r < 1 || r > n || cidx < 1 || cidx > m)
            throw ParseError(path, static_cast<long>(li + 1), 1,
                             "coordinate out of range (1-based)");
        triplets.emplace_back(static_cast<Index>(r - 1), static_cast<Index>(cidx - 1), v);
        ++seen;
    }
    if (seen != nnz)
        throw ParseError(path, static_cast<long>(lines.size()), 1,
                         "declared " + std::to_string(nnz) + " entries, found " +
                             std::to_string(seen));
    return DataMatrix::sparse(static_cast<Index>(n), static_cast<Index>(m), triplets);
}

enum class MatrixFormat { Auto, DenseCsv, MatrixMarket };

inline DataMatrix read_matrix(const std::string& path, MatrixFormat format = MatrixFormat::Auto) {
    if (format == MatrixFormat::Auto) {
        const auto ext = std::filesystem::path(path).extension().string();
        format = (ext == ".mtx" || ext == ".mm") ? MatrixFormat::MatrixMarket
                                                 : MatrixFormat::DenseCsv;
    }
    return format == MatrixFormat::MatrixMarket ? read_matrix_market(path) : read_dense_csv(path);
}

// ---------------------------------------------------------------------------
// Assignment TSV: one line per point, "index TAB comma-separated cluster
// ids", the id list empty for outliers.

inline void write_assignment_tsv(const std::string& path, const AssignmentMatrix& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (Index p = 0; p < a.points(); ++p) {
        out << p << '\t';
        const auto cs = a.point_clusters(p);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (i) out << ',';
            out << cs[i];
        }
        out << '\n';
    }
}

/// Reads the writer's format back. Points must appear in order, one line
/// each. Pass n_clusters when the caller knows the intended cluster count
/// (trailing clusters may have no members); -1 infers it from the ids.
inline AssignmentMatrix read_assignment_tsv(const std::string& path, Index n_clusters = -1) {
    const auto lines = detail::read_lines(path);
    std::vector<std::vector<Index>> labels;
    Index max_id = -1;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty() && li + 1 == lines.size()) continue;
        const std::size_t tab = lines[li].find('\t');
        if (tab == std::string::npos)
            throw ParseError(path, static_cast<long>(li + 1), 1, "expected 'index<TAB>clusters'");
        const long idx = detail::parse_long_field(lines[li].substr(0, tab), path,
                                                  static_cast<long>(li + 1), 1);
        if (idx != static_cast<long>(li))
            throw ParseError(path, static_cast<long>(li + 1), 1,
                             "point indices must be consecutive from 0");
        std::vector<Index> cs;
        const std::string rest = lines[li].substr(tab + 1);
        if (!detail::trim(rest).empty()) {
            std::size_t start = 0;
            while (true) {
                const std::size_t comma = rest.find(',', start);
                const std::string field = rest.substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start);
                const long c = detail::parse_long_field(field, path, static_cast<long>(li + 1),
                                                        static_cast<long>(tab + 2 + start));
                if (c < 0)
                    throw ParseError(path, static_cast<long>(li + 1),
                                     static_cast<long>(tab + 2 + start), "negative cluster id");
                cs.push_back(static_cast<Index>(c));
                max_id = std::max(max_id, static_cast<Index>(c));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
        labels.push_back(std::move(cs));
    }
    if (labels.empty()) throw ParseError(path, 1, 1, "no points");
    const Index k = n_clusters >= 1 ? n_clusters : std::max<Index>(max_id + 1, 1);
    if (max_id >= k)
        throw ParseError(path, 1, 1,
                         "cluster id " + std::to_string(max_id) + " exceeds cluster count " +
                             std::to_string(k));
    std::vector<std::pair<Index, Index>> pairs;
    for (std::size_t p = 0; p < labels.size(); ++p)
        for (Index c : labels[p]) pairs.emplace_back(static_cast<Index>(p), c);
    return build_assignment(static_cast<Index>(labels.size()), k, pairs);
}

/// Full 0/1 grid, tab-separated (interop form).
inline void write_dense_assignment_tsv(const std::string& path, const AssignmentMatrix& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (Index p = 0; p < a.points(); ++p) {
        for (Index c = 0; c < a.clusters(); ++c) {
            if (c) out << '\t';
            out << (a.contains(p, c) ? 1 : 0);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Trace CSV

inline void write_trace_csv(const std::string& path, const std::vector<double>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "iteration,objective\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << i << ',' << detail::format_double(trace[i]) << '\n';
}

inline std::vector<double> read_trace_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != "iteration,objective")
        throw ParseError(path, 1, 1, "expected 'iteration,objective' header");
    std::vector<double> trace;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty() && li + 1 == lines.size()) continue;
        const std::size_t comma = lines[li].find(',');
        if (comma == std::string::npos)
            throw ParseError(path, static_cast<long>(li + 1), 1, "expected 'iteration,objective'");
        trace.push_back(detail::parse_double_field(lines[li].substr(comma + 1), path,
                                                   static_cast<long>(li + 1),
                                                   static_cast<long>(comma + 2)));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Summary JSON

inline nlohmann::json summary_json(const CoClusterResult& r, Index n, Index m) {
    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["params"] = {{"k", r.params_used.k},
                   {"l", r.params_used.l},
                   {"alpha_r", r.params_used.alpha_r},
                   {"beta_r", r.params_used.beta_r},
                   {"alpha_c", r.params_used.alpha_c},
                   {"beta_c", r.params_used.beta_c},
                   {"objective", objective_name(r.params_used.objective)},
                   {"t_max", r.params_used.t_max},
                   {"tol", r.params_used.tol},
                   {"seed", r.params_used.seed}};
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["final_objective"] = r.trace.empty() ? 0.0 : r.trace.back();
    j["row_outlier_count"] = r.row_outliers.size();
    j["col_outlier_count"] = r.col_outliers.size();
    j["row_outliers"] = r.row_outliers;
    j["col_outliers"] = r.col_outliers;
    return j;
}

inline void write_summary_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, 0, "cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, 0, e.what());
    }
    return j;
}

// ---------------------------------------------------------------------------
// Spy artifacts

inline void write_order_txt(const std::string& path, const std::vector<Index>& order) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (Index p : order) out << p << '\n';
}

inline std::vector<Index> read_order_txt(const std::string& path) {
    const auto lines = detail::read_lines(path);
    std::vector<Index> order;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty() && li + 1 == lines.size()) continue;
        order.push_back(detail::parse_long_field(lines[li], path, static_cast<long>(li + 1), 1));
    }
    return order;
}

inline nlohmann::json intervals_json(const SpyLayout& layout) {
    nlohmann::json j;
    auto fill = [](const SpySide& side) {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t c = 0; c < side.intervals.size(); ++c)
            arr.push_back({{"cluster", c},
                           {"start", side.intervals[c].first},
                           {"end", side.intervals[c].second}});
        return arr;
    };
    j["rows"] = fill(layout.rows);
    j["cols"] = fill(layout.cols);
    return j;
}

/// Permuted nonzero pattern as dots plus one boundary rectangle per
/// nonempty cluster: row-cluster rectangles span the full width,
/// column-cluster rectangles the full height.
inline void write_spy_svg(const std::string& path, const DataMatrix& x, const SpyLayout& layout) {
    const Index n = x.rows(), m = x.cols();
    const double cell = 4.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << static_cast<double>(m) * cell << "\" height=\"" << static_cast<double>(n) * cell
        << "\" viewBox=\"0 0 " << static_cast<double>(m) * cell << ' '
        << static_cast<double>(n) * cell << "\">\n";

    std::vector<Index> col_pos(static_cast<std::size_t>(m));
    for (Index pos = 0; pos < m; ++pos)
        col_pos[static_cast<std::size_t>(layout.cols.order[static_cast<std::size_t>(pos)])] = pos;
    std::vector<Index> row_pos(static_cast<std::size_t>(n));
    for (Index pos = 0; pos < n; ++pos)
        row_pos[static_cast<std::size_t>(layout.rows.order[static_cast<std::size_t>(pos)])] = pos;
    auto dot = [&](Index i, Index j) {
        const double cx = (static_cast<double>(col_pos[static_cast<std::size_t>(j)]) + 0.5) * cell;
        const double cy = (static_cast<double>(row_pos[static_cast<std::size_t>(i)]) + 0.5) * cell;
        out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << 0.35 * cell
            << "\" fill=\"#2b6cb0\"/>\n";
    };
    if (x.storage() == Storage::Sparse) {
        const SparseMatrixd& s = x.sparse_data();
        for (Index i = 0; i < s.outerSize(); ++i)
            for (SparseMatrixd::InnerIterator it(s, i); it; ++it)
                if (it.value() != 0.0) dot(it.row(), it.col());
    } else {
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m; ++j)
                if (x.coeff(i, j) != 0.0) dot(i, j);
    }

    static const char* row_colors[] = {"#e53e3e", "#dd6b20", "#b83280", "#975a16"};
    static const char* col_colors[] = {"#6b46c1", "#2f855a", "#2c5282", "#4a5568"};
    std::size_t ci = 0;
    for (const auto& [start, end] : layout.rows.intervals) {
        if (end <= start) {
            ++ci;
            continue;
        }
        out << "<rect x=\"0\" y=\"" << static_cast<double>(start) * cell << "\" width=\""
            << static_cast<double>(m) * cell << "\" height=\""
            << static_cast<double>(end - start) * cell << "\" fill=\"none\" stroke=\""
            << row_colors[ci % 4] << "\" stroke-width=\"2\"/>\n";
        ++ci;
    }
    ci = 0;
    for (const auto& [start, end] : layout.cols.intervals) {
        if (end <= start) {
            ++ci;
            continue;
        }
        out << "<rect x=\"" << static_cast<double>(start) * cell << "\" y=\"0\" width=\""
            << static_cast<double>(end - start) * cell << "\" height=\""
            << static_cast<double>(n) * cell << "\" fill=\"none\" stroke=\"" << col_colors[ci % 4]
            << "\" stroke-width=\"2\"/>\n";
        ++ci;
    }
    out << "</svg>\n";
}

}  // namespace neocc
