#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gkit/bilinear.hpp"
#include "gkit/errors.hpp"
#include "gkit/kernels.hpp"
#include "gkit/multilinear.hpp"
#include "gkit/sdp.hpp"
#include "gkit/space.hpp"

namespace gkit::io {

using nlohmann::json;

// shortest round-trip representation, used for all CSV output so that
// emit -> parse -> re-emit is a byte-level fixed point
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("invalid number: '" + std::string(s) + "'");
    return v;
}

inline NormTag norm_tag_from_string(const std::string& s) {
    if (s == "l1") return NormTag::L1;
    if (s == "l2") return NormTag::L2;
    if (s == "linf") return NormTag::LInf;
    if (s == "wl2") return NormTag::WeightedL2;
    throw ParseError("unknown norm tag '" + s + "' (expected l1|l2|linf|wl2)");
}

inline VectorXd vector_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("expected a numeric array");
    VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError("expected a numeric array");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline json vector_to_json(const VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline MatrixXd matrix_from_json(const json& j, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ParseError("entries: expected " + std::to_string(rows) + " rows");
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError("entries: expected " + std::to_string(cols) + " columns per row");
        for (int c = 0; c < cols; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number())
                throw ParseError("entries: expected numbers");
            m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

inline void check_schema(const json& j) {
    if (j.contains("schema") && j["schema"] != 1)
        throw ParseError("unsupported schema version");
}

// ---------------------------------------------------------------------------
// bilinear forms and tensor elements
// ---------------------------------------------------------------------------

inline json form_to_json(const BilinearForm& phi) {
    json j;
    j["schema"] = 1;
    j["rows"] = phi.domain_e.dim;
    j["cols"] = phi.domain_f.dim;
    j["entries"] = matrix_to_json(phi.coeffs);
    j["domain_e"] = to_string(phi.domain_e.tag);
    j["domain_f"] = to_string(phi.domain_f.tag);
    if (phi.domain_e.tag == NormTag::WeightedL2) j["weights_e"] = vector_to_json(phi.domain_e.weights);
    if (phi.domain_f.tag == NormTag::WeightedL2) j["weights_f"] = vector_to_json(phi.domain_f.weights);
    return j;
}

inline SpaceSpec space_from_fields(int dim, const std::string& tag, const json& j,
                                   const char* weights_key) {
    const NormTag t = norm_tag_from_string(tag);
    if (t == NormTag::WeightedL2) {
        if (!j.contains(weights_key))
            throw ParseError(std::string("wl2 domain needs '") + weights_key + "'");
        return SpaceSpec::weighted_l2(vector_from_json(j[weights_key]));
    }
    return {dim, t};
}

inline BilinearForm form_from_json(const json& j) {
    try {
        check_schema(j);
        for (const char* key : {"rows", "cols", "entries", "domain_e", "domain_f"})
            if (!j.contains(key)) throw ParseError(std::string("form: missing '") + key + "'");
        const int rows = j["rows"].get<int>();
        const int cols = j["cols"].get<int>();
        SpaceSpec e = space_from_fields(rows, j["domain_e"].get<std::string>(), j, "weights_e");
        SpaceSpec f = space_from_fields(cols, j["domain_f"].get<std::string>(), j, "weights_f");
        return {matrix_from_json(j["entries"], rows, cols), std::move(e), std::move(f)};
    } catch (const json::exception& ex) {
        throw ParseError(std::string("form: ") + ex.what());
    }
}

inline json element_to_json(const TensorElement& x) {
    json terms = json::array();
    for (const auto& [e, f] : x.terms) {
        json t;
        t["e"] = vector_to_json(e);
        t["f"] = vector_to_json(f);
        terms.push_back(std::move(t));
    }
    json j;
    j["schema"] = 1;
    j["terms"] = std::move(terms);
    return j;
}

/// The element file carries only the terms; the spaces come from the form
/// it is paired with.
inline TensorElement element_from_json(const json& j, SpaceSpec e, SpaceSpec f) {
    try {
        check_schema(j);
        if (!j.contains("terms") || !j["terms"].is_array())
            throw ParseError("element: missing 'terms' array");
        std::vector<std::pair<VectorXd, VectorXd>> terms;
        for (const json& t : j["terms"]) {
            if (!t.contains("e") || !t.contains("f"))
                throw ParseError("element: each term needs 'e' and 'f'");
            terms.emplace_back(vector_from_json(t["e"]), vector_from_json(t["f"]));
        }
        return {std::move(terms), std::move(e), std::move(f)};
    } catch (const json::exception& ex) {
        throw ParseError(std::string("element: ") + ex.what());
    }
}

inline json certificate_to_json(const NormCertificate& c) {
    json j;
    j["schema"] = 1;
    j["lower"] = c.lower;
    j["upper"] = c.upper;
    j["method"] = to_string(c.method);
    return j;
}

// ---------------------------------------------------------------------------
// multilinear forms
// ---------------------------------------------------------------------------

inline json multilinear_to_json(const MultilinearForm& mu) {
    json j;
    j["schema"] = 1;
    json dims = json::array();
    json spaces = json::array();
    for (int k = 0; k < mu.order(); ++k) {
        dims.push_back(mu.dim(k));
        if (mu.space(k).tag == NormTag::WeightedL2) {
            json s;
            s["norm"] = "wl2";
            s["weights"] = vector_to_json(mu.space(k).weights);
            spaces.push_back(std::move(s));
        } else {
            spaces.push_back(to_string(mu.space(k).tag));
        }
    }
    j["dims"] = std::move(dims);
    j["spaces"] = std::move(spaces);
    json entries = json::array();
    for (double v : mu.data()) entries.push_back(v);
    j["entries"] = std::move(entries);
    return j;
}

inline MultilinearForm multilinear_from_json(const json& j) {
    try {
        check_schema(j);
        for (const char* key : {"dims", "entries", "spaces"})
            if (!j.contains(key)) throw ParseError(std::string("multilinear: missing '") + key + "'");
        const json& dims = j["dims"];
        const json& spaces_j = j["spaces"];
        if (!dims.is_array() || !spaces_j.is_array() || dims.size() != spaces_j.size())
            throw ParseError("multilinear: dims and spaces must be arrays of equal length");
        std::vector<SpaceSpec> spaces;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const int d = dims[k].get<int>();
            const json& s = spaces_j[k];
            if (s.is_string()) {
                const NormTag t = norm_tag_from_string(s.get<std::string>());
                if (t == NormTag::WeightedL2)
                    throw ParseError("multilinear: wl2 space needs a weights object");
                spaces.emplace_back(d, t);
            } else if (s.is_object()) {
                if (!s.contains("norm")) throw ParseError("multilinear: space object needs 'norm'");
                const NormTag t = norm_tag_from_string(s["norm"].get<std::string>());
                if (t == NormTag::WeightedL2) {
                    if (!s.contains("weights"))
                        throw ParseError("multilinear: wl2 space needs 'weights'");
                    spaces.push_back(SpaceSpec::weighted_l2(vector_from_json(s["weights"])));
                } else {
                    spaces.emplace_back(d, t);
                }
            } else {
                throw ParseError("multilinear: space entries must be tag strings or objects");
            }
        }
        const json& entries_j = j["entries"];
        if (!entries_j.is_array()) throw ParseError("multilinear: entries must be a flat array");
        std::vector<double> entries;
        entries.reserve(entries_j.size());
        for (const json& v : entries_j) {
            if (!v.is_number()) throw ParseError("multilinear: entries must be numbers");
            entries.push_back(v.get<double>());
        }
        return {std::move(spaces), std::move(entries)};
    } catch (const json::exception& ex) {
        throw ParseError(std::string("multilinear: ") + ex.what());
    }
}

inline json multi_element_to_json(const std::vector<VectorXd>& vectors) {
    json vs = json::array();
    for (const auto& v : vectors) vs.push_back(vector_to_json(v));
    json j;
    j["schema"] = 1;
    j["vectors"] = std::move(vs);
    return j;
}

inline std::vector<VectorXd> multi_element_from_json(const json& j) {
    try {
        check_schema(j);
        if (!j.contains("vectors") || !j["vectors"].is_array())
            throw ParseError("multi element: missing 'vectors' array");
        std::vector<VectorXd> out;
        for (const json& v : j["vectors"]) out.push_back(vector_from_json(v));
        return out;
    } catch (const json::exception& ex) {
        throw ParseError(std::string("multi element: ") + ex.what());
    }
}

// ---------------------------------------------------------------------------
// kernel CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string join_csv(const VectorXd& v) {
    std::string out;
    for (int i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline VectorXd parse_row(const std::vector<std::string>& cells, std::size_t from) {
    VectorXd v(static_cast<Eigen::Index>(cells.size() - from));
    for (std::size_t i = from; i < cells.size(); ++i)
        v[static_cast<Eigen::Index>(i - from)] = parse_double(cells[i]);
    return v;
}

} // namespace detail

inline std::string kernel_to_csv(const Kernel& k) {
    std::string out;
    out += "x_points," + detail::join_csv(k.grid_x.points) + "\n";
    out += "x_weights," + detail::join_csv(k.grid_x.weights) + "\n";
    out += "y_points," + detail::join_csv(k.grid_y.points) + "\n";
    out += "y_weights," + detail::join_csv(k.grid_y.weights) + "\n";
    for (int i = 0; i < k.values.rows(); ++i) {
        for (int j = 0; j < k.values.cols(); ++j) {
            if (j) out += ',';
            out += format_double(k.values(i, j));
        }
        out += '\n';
    }
    return out;
}

inline Kernel kernel_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    QuadratureGrid gx, gy;
    gx.rule = gy.rule = QuadratureRule::Custom;
    auto read_header = [&](const char* name) -> VectorXd {
        if (!std::getline(in, line)) throw ParseError(std::string("kernel csv: missing ") + name);
        auto cells = detail::split_csv(line);
        if (cells.empty() || cells[0] != name)
            throw ParseError(std::string("kernel csv: expected header row '") + name + "'");
        return detail::parse_row(cells, 1);
    };
    gx.points = read_header("x_points");
    gx.weights = read_header("x_weights");
    gy.points = read_header("y_points");
    gy.weights = read_header("y_weights");
    gx.a = gx.points.size() ? gx.points[0] : 0.0;
    gx.b = gx.points.size() ? gx.points[gx.points.size() - 1] : 1.0;
    gy.a = gy.points.size() ? gy.points[0] : 0.0;
    gy.b = gy.points.size() ? gy.points[gy.points.size() - 1] : 1.0;
    MatrixXd values(gx.points.size(), gy.points.size());
    for (int i = 0; i < values.rows(); ++i) {
        if (!std::getline(in, line)) throw ParseError("kernel csv: missing value rows");
        auto cells = detail::split_csv(line);
        if (static_cast<int>(cells.size()) != values.cols())
            throw ParseError("kernel csv: wrong number of columns in value row");
        for (int j = 0; j < values.cols(); ++j) values(i, j) = parse_double(cells[static_cast<std::size_t>(j)]);
    }
    return discretize(std::move(values), gx, gy);
}

// ---------------------------------------------------------------------------
// witness matrices (CSV with a d=<rank> header, or JSON arrays)
// ---------------------------------------------------------------------------

inline std::string witness_to_csv(const FactorizationWitness& w) {
    std::string out = "d=" + std::to_string(w.rank()) + "\n";
    out += "U\n";
    for (int i = 0; i < w.U.rows(); ++i) {
        for (int j = 0; j < w.U.cols(); ++j) {
            if (j) out += ',';
            out += format_double(w.U(i, j));
        }
        out += '\n';
    }
    out += "V\n";
    for (int i = 0; i < w.V.rows(); ++i) {
        for (int j = 0; j < w.V.cols(); ++j) {
            if (j) out += ',';
            out += format_double(w.V(i, j));
        }
        out += '\n';
    }
    return out;
}

inline std::string sdp_witness_to_csv(const MatrixXd& u, const MatrixXd& v) {
    FactorizationWitness w;
    w.U = u;
    w.V = v;
    return witness_to_csv(w);
}

inline json sdp_witness_to_json(const MatrixXd& u, const MatrixXd& v) {
    json j;
    j["schema"] = 1;
    j["d"] = static_cast<int>(u.cols());
    j["U"] = matrix_to_json(u);
    j["V"] = matrix_to_json(v);
    return j;
}

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

inline json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON");
    return j;
}

} // namespace gkit::io
