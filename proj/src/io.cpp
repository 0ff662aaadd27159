#include "cjdesign/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cjdesign::io {

namespace {

std::string trim(std::string_view s) {
    auto begin = s.begin();
    auto end = s.end();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) {
        ++begin;
    }
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) {
        --end;
    }
    return std::string(begin, end);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("cannot parse number '" + s + "'");
    }
}

Index parse_index(const std::string& s) {
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("cannot parse integer '" + s + "'");
    }
    return v;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                os << ',';
            }
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        std::vector<double> row;
        for (const auto& field : split(t, ',')) {
            row.push_back(parse_double(field));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error("ragged CSV matrix");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error("empty CSV matrix");
    }
    Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return m;
}

void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& m) {
    Index nnz = 0;
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            nnz += m(i, j) != 0.0 ? 1 : 0;
        }
    }
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (m(i, j) != 0.0) {
                os << i + 1 << ' ' << j + 1 << ' ' << format_double(m(i, j)) << '\n';
            }
        }
    }
}

Eigen::MatrixXd read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("empty Matrix Market file");
    }
    std::istringstream banner(lower(line));
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
        throw std::runtime_error("only Matrix Market coordinate matrices are supported");
    }
    const bool pattern = field == "pattern";
    if (!pattern && field != "real" && field != "integer") {
        throw std::runtime_error("unsupported Matrix Market field '" + field + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") {
        throw std::runtime_error("unsupported Matrix Market symmetry '" + symmetry + "'");
    }
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '%') {
            break;
        }
    }
    std::istringstream header(line);
    Index rows = 0, cols = 0, nnz = 0;
    if (!(header >> rows >> cols >> nnz) || rows < 1 || cols < 1) {
        throw std::runtime_error("malformed Matrix Market size line");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (Index k = 0; k < nnz; ++k) {
        if (!std::getline(is, line)) {
            throw std::runtime_error("Matrix Market file ended early");
        }
        std::istringstream entry(line);
        Index i = 0, j = 0;
        double v = 1.0;
        if (!(entry >> i >> j) || (!pattern && !(entry >> v))) {
            throw std::runtime_error("malformed Matrix Market entry '" + line + "'");
        }
        if (i < 1 || j < 1 || i > rows || j > cols) {
            throw std::runtime_error("Matrix Market entry out of range");
        }
        m(i - 1, j - 1) = v;
        if (symmetric) {
            m(j - 1, i - 1) = v;
        }
    }
    return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    auto out = open_out(path);
    if (lower(path.extension().string()) == ".mtx") {
        write_matrix_market(out, m);
    } else {
        write_matrix_csv(out, m);
    }
    finish_write(out, path);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
    auto in = open_in(path);
    if (lower(path.extension().string()) == ".mtx") {
        return read_matrix_market(in);
    }
    return read_matrix_csv(in);
}

Eigen::VectorXd load_vector(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Eigen::MatrixXd m = read_matrix_csv(in);
    if (m.cols() == 1) {
        return m.col(0);
    }
    if (m.rows() == 1) {
        return m.row(0).transpose();
    }
    throw std::runtime_error("'" + path.string() + "' does not hold a vector");
}

void save_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
    auto out = open_out(path);
    write_matrix_csv(out, v);
    finish_write(out, path);
}

nlohmann::json schedule_to_json(const SchedulingDistribution& s, const ScheduleMeta& meta) {
    nlohmann::json pairs = nlohmann::json::array();
    for (Index r = 1; r <= s.size(); ++r) {
        const auto p = index_to_pair(r, s.n_objects());
        pairs.push_back({{"i", p.i}, {"j", p.j}, {"q", s.at(r)}});
    }
    nlohmann::json m = nlohmann::json::object();
    if (meta.tol) {
        m["tol"] = *meta.tol;
    }
    if (meta.d) {
        m["d"] = *meta.d;
    }
    if (meta.residual) {
        m["residual"] = *meta.residual;
    }
    if (meta.seconds) {
        m["seconds"] = *meta.seconds;
    }
    return {{"n", s.n_objects()}, {"method", meta.method}, {"pairs", std::move(pairs)}, {"meta", std::move(m)}};
}

SchedulingDistribution schedule_from_json(const nlohmann::json& j) {
    const Index n = j.at("n").get<Index>();
    const auto& pairs = j.at("pairs");
    if (n < 2 || static_cast<Index>(pairs.size()) != pair_count(n)) {
        throw std::runtime_error("schedule JSON must list all N(N-1)/2 pairs");
    }
    Eigen::VectorXd probs(pair_count(n));
    for (const auto& p : pairs) {
        const Index r = pair_to_index(p.at("i").get<Index>(), p.at("j").get<Index>(), n);
        probs[r - 1] = p.at("q").get<double>();
    }
    return SchedulingDistribution(n, std::move(probs));
}

void write_schedule_csv(std::ostream& os, const SchedulingDistribution& s) {
    os << "r,i,j,q\n";
    for (Index r = 1; r <= s.size(); ++r) {
        const auto p = index_to_pair(r, s.n_objects());
        os << r << ',' << p.i << ',' << p.j << ',' << format_double(s.at(r)) << '\n';
    }
}

SchedulingDistribution read_schedule_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || lower(trim(line)) != "r,i,j,q") {
        throw std::runtime_error("schedule CSV must start with header r,i,j,q");
    }
    std::vector<std::pair<PairIndex, double>> rows;
    Index n = 0;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto f = split(t, ',');
        if (f.size() != 4) {
            throw std::runtime_error("schedule CSV rows need 4 fields");
        }
        PairIndex p{parse_index(f[1]), parse_index(f[2]), parse_index(f[0])};
        n = std::max(n, p.j);
        rows.emplace_back(p, parse_double(f[3]));
    }
    if (n < 2 || static_cast<Index>(rows.size()) != pair_count(n)) {
        throw std::runtime_error("schedule CSV must list all N(N-1)/2 pairs");
    }
    Eigen::VectorXd probs(pair_count(n));
    for (const auto& [p, q] : rows) {
        const Index r = pair_to_index(p.i, p.j, n);
        if (r != p.r) {
            throw std::runtime_error("schedule CSV row index does not match its pair");
        }
        probs[r - 1] = q;
    }
    return SchedulingDistribution(n, std::move(probs));
}

void save_schedule(const std::filesystem::path& path, const SchedulingDistribution& s, const ScheduleMeta& meta) {
    auto out = open_out(path);
    if (lower(path.extension().string()) == ".csv") {
        write_schedule_csv(out, s);
    } else {
        out << schedule_to_json(s, meta).dump(2) << '\n';
    }
    finish_write(out, path);
}

SchedulingDistribution load_schedule(const std::filesystem::path& path) {
    auto in = open_in(path);
    if (lower(path.extension().string()) == ".csv") {
        return read_schedule_csv(in);
    }
    try {
        return schedule_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed schedule JSON '" + path.string() + "': " + e.what());
    }
}

ComparisonData read_comparisons(std::istream& is, Index n_objects) {
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("comparison file is empty");
    }
    const auto header = split(lower(trim(line)), ',');
    const bool counts = header == std::vector<std::string>{"i", "j", "y", "n"};
    const bool winners = header == std::vector<std::string>{"i", "j", "winner"};
    if (!counts && !winners) {
        throw std::runtime_error("comparison header must be i,j,y,n or i,j,winner");
    }
    struct Row {
        Index i, j;
        double a, b;
    };
    std::vector<Row> rows;
    Index max_index = 0;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto f = split(t, ',');
        if (f.size() != header.size()) {
            throw std::runtime_error("comparison row '" + t + "' has the wrong number of fields");
        }
        Row row{parse_index(f[0]), parse_index(f[1]), 0.0, 0.0};
        if (counts) {
            row.a = parse_double(f[2]);
            row.b = parse_double(f[3]);
        } else {
            row.a = static_cast<double>(parse_index(f[2]));
        }
        max_index = std::max({max_index, row.i, row.j});
        rows.push_back(row);
    }
    const Index n = n_objects > 0 ? n_objects : std::max<Index>(max_index, 2);
    ComparisonData data(n);
    for (const auto& row : rows) {
        if (counts) {
            data.add_counts(row.i, row.j, row.a, row.b);
        } else {
            data.add_judgement(row.i, row.j, static_cast<Index>(row.a));
        }
    }
    return data;
}

ComparisonData load_comparisons(const std::filesystem::path& path, Index n_objects) {
    auto in = open_in(path);
    return read_comparisons(in, n_objects);
}

} // namespace cjdesign::io
