#include "lidskii/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lidskii {

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(to_json(v[i]));
    return out;
}

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const OperatorSpec& op) {
    Json j;
    j["dimension"] = op.dimension;
    j["entries"] = to_json(op.dense);
    if (op.structured) {
        Json s;
        Json blocks = Json::array();
        for (const auto& b : op.structured->blocks)
            blocks.push_back({{"eigenvalue", to_json(b.eigenvalue)}, {"size", b.size}});
        s["blocks"] = std::move(blocks);
        s["basis"] = to_json(op.structured->basis);
        j["structured"] = std::move(s);
    }
    if (!op.label.empty()) j["label"] = op.label;
    return j;
}

Json to_json(const SpectralDecomposition& d) {
    Json groups = Json::array();
    for (const auto& g : d.groups) {
        Json jg;
        jg["mu"] = to_json(g.mu);
        jg["lambda"] = g.mu_invertible ? to_json(g.lambda()) : Json(nullptr);
        Json chains = Json::array();
        for (const auto& ch : g.chains) {
            Json jc;
            Json e = Json::array();
            for (const auto& v : ch.e) e.push_back(to_json(v));
            jc["e"] = std::move(e);
            Json gg = Json::array();
            for (const auto& v : ch.g) gg.push_back(to_json(v));
            jc["g"] = std::move(gg);
            chains.push_back(std::move(jc));
        }
        jg["chains"] = std::move(chains);
        groups.push_back(std::move(jg));
    }
    Json j;
    j["dimension"] = d.dimension;
    j["groups"] = std::move(groups);
    return j;
}

Json to_json(const ContourSpec& c) {
    Json j;
    j["kind"] = c.kind == ContourKind::gamma_B ? "gamma_B" : "Gamma_A";
    j["r"] = c.r;
    j["theta"] = c.theta;
    j["eps"] = c.eps;
    j["iota"] = c.iota;
    j["theta_iota"] = c.theta_iota;
    j["R_max"] = c.R_max;
    j["orientation"] = c.orientation;
    j["panels"] = c.panels;
    return j;
}

Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2)
        throw Error("json: complex numbers are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw Error("json: vector must be an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = complex_from_json(j[i]);
    return v;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw Error("json: matrix must be a nonempty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols) throw Error("json: ragged matrix rows");
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<int>(i), static_cast<int>(k)) = complex_from_json(j[i][k]);
    }
    return m;
}

OperatorSpec operator_from_json(const Json& j) {
    if (!j.contains("dimension")) throw Error("operator json: missing dimension");
    const int n = j["dimension"].get<int>();
    std::string label = j.value("label", std::string{});

    std::optional<StructuredForm> structured;
    if (j.contains("structured")) {
        StructuredForm sf;
        for (const auto& b : j["structured"]["blocks"])
            sf.blocks.push_back({complex_from_json(b["eigenvalue"]), b["size"].get<int>()});
        sf.basis = matrix_from_json(j["structured"]["basis"]);
        structured = std::move(sf);
    }

    OperatorSpec op;
    if (j.contains("entries")) {
        Matrix m = matrix_from_json(j["entries"]);
        if (m.rows() != m.cols()) throw Error("operator json: matrix is not square");
        if (static_cast<int>(m.rows()) != n)
            throw Error("operator json: dimension field disagrees with the entries");
        op = make_operator(std::move(m), label);
        if (structured) {
            op.structured = std::move(structured);
            validate_operator(op);  // reconstruction invariant
        }
    } else if (structured) {
        op = make_structured_operator(structured->blocks, structured->basis, label);
        if (op.dimension != n) throw Error("operator json: dimension field disagrees with blocks");
    } else {
        throw Error("operator json: need entries and/or structured");
    }
    return op;
}

OperatorSpec load_operator(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_operator: cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("load_operator: malformed JSON in " + path.string() + ": " + e.what());
    }
    return operator_from_json(j);
}

void save_operator(const OperatorSpec& op, const std::filesystem::path& path) {
    write_text(path, to_json(op).dump(2) + "\n");
}

ModulusSequence load_sequence_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_sequence_csv: cannot open " + path.string());
    std::vector<Complex> pts;
    bool any_imag = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double re = 0.0, im = 0.0;
        if (!(ss >> re)) throw Error("load_sequence_csv: malformed line '" + line + "'");
        if (ss >> im) any_imag = any_imag || im != 0.0;
        pts.emplace_back(re, im);
    }
    if (any_imag) return make_sequence(std::move(pts));
    std::vector<double> mods;
    mods.reserve(pts.size());
    for (auto z : pts) mods.push_back(z.real());
    std::sort(mods.begin(), mods.end());
    return make_sequence(std::move(mods));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_text: cannot open " + path.string() + " for writing");
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("read_text: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

}  // namespace lidskii
