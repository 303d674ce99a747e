#include "gsaw/model_io.hpp"

#include <fstream>
#include <sstream>

namespace gsaw {

using nlohmann::json;

namespace {

Rational parse_real(const json& v, const std::string& where) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.dump());
    if (v.is_number_float()) return parse_rational(v.dump());
    throw ModelError(where + ": expected a number or rational string, got " + v.dump());
}

ExactComplex parse_at(const json& v, const std::string& where) {
    try {
        if (v.is_array()) {
            if (v.size() != 2) throw ModelError(where + ": complex value must be [re, im]");
            return {parse_real(v[0], where), parse_real(v[1], where)};
        }
        return ExactComplex(parse_real(v, where));
    } catch (const ModelError&) {
        throw;
    } catch (const Error& e) {
        throw ModelError(where + ": " + e.what());
    }
}

std::vector<ExactComplex> parse_vector(const json& v, std::size_t m, const std::string& key) {
    if (!v.is_array() || v.size() != m)
        throw ModelError("'" + key + "' must be an array of " + std::to_string(m) + " scalars");
    std::vector<ExactComplex> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back(parse_at(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace

ExactComplex parse_scalar(const json& value) { return parse_at(value, "scalar"); }

CouplingModel parse_model(const json& doc) {
    if (!doc.is_object()) throw ModelError("model document must be a JSON object");
    for (const char* key : {"size", "diag", "offdiag"})
        if (!doc.contains(key)) throw ModelError(std::string("missing key '") + key + "'");
    if (!doc["size"].is_number_integer() || doc["size"].get<long>() < 1)
        throw ModelError("'size' must be a positive integer");
    const auto m = static_cast<std::size_t>(doc["size"].get<long>());

    auto diag = parse_vector(doc["diag"], m, "diag");
    const json& off = doc["offdiag"];
    if (!off.is_array() || off.size() != m)
        throw ModelError("'offdiag' must be a " + std::to_string(m) + "x" + std::to_string(m) + " array");
    ExactMatrix j(m, m);
    for (std::size_t x = 0; x < m; ++x) {
        auto row = parse_vector(off[x], m, "offdiag[" + std::to_string(x) + "]");
        for (std::size_t y = 0; y < m; ++y) j(x, y) = row[y];
    }
    std::vector<ExactComplex> potential;
    if (doc.contains("potential") && !doc["potential"].is_null()) potential = parse_vector(doc["potential"], m, "potential");

    Arithmetic arithmetic = Arithmetic::exact;
    if (doc.contains("arithmetic")) {
        std::string mode = doc["arithmetic"].get<std::string>();
        if (mode == "exact" || mode == "exact-rational-complex")
            arithmetic = Arithmetic::exact;
        else if (mode == "float" || mode == "floating-complex")
            arithmetic = Arithmetic::floating;
        else
            throw ModelError("'arithmetic' must be \"exact\" or \"float\", got \"" + mode + "\"");
    }
    return CouplingModel(std::move(diag), std::move(j), std::move(potential), arithmetic);
}

CouplingModel parse_model_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Report the line and column of the byte offset nlohmann gives us.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::istringstream lines(text);
        std::string context;
        for (std::size_t l = 0; l < line && std::getline(lines, context); ++l) {
        }
        throw ModelError("malformed model file at line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + context);
    }
    return parse_model(doc);
}

CouplingModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str());
}

json scalar_to_json(const ExactComplex& z) {
    if (z.is_real()) return to_string(z.real());
    return json::array({to_string(z.real()), to_string(z.imag())});
}

json scalar_to_json(const FloatComplex& z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

json model_to_json(const CouplingModel& model) {
    const std::size_t m = model.size();
    json doc;
    doc["size"] = m;
    doc["diag"] = json::array();
    doc["potential"] = json::array();
    doc["offdiag"] = json::array();
    for (std::size_t x = 0; x < m; ++x) {
        doc["diag"].push_back(scalar_to_json(model.diag()[x]));
        doc["potential"].push_back(scalar_to_json(model.potential()[x]));
        json row = json::array();
        for (std::size_t y = 0; y < m; ++y) row.push_back(scalar_to_json(model.offdiag()(x, y)));
        doc["offdiag"].push_back(row);
    }
    doc["arithmetic"] = model.arithmetic() == Arithmetic::exact ? "exact" : "float";
    return doc;
}

}  // namespace gsaw
