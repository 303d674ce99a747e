#ifndef GSAW_MODEL_IO_HPP
#define GSAW_MODEL_IO_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gsaw/model.hpp"

namespace gsaw {

/// Model file schema (JSON):
///
///   {
///     "size": 2,
///     "diag": ["3", "3"],
///     "offdiag": [["0", "1"], ["1", "0"]],
///     "potential": ["0", "0"],          // optional, defaults to zero
///     "arithmetic": "exact"             // optional, "exact" | "float"
///   }
///
/// A scalar is a JSON number, a rational string "p/q" (or "p", or a decimal
/// literal), or a two-element array [re, im] of those. Numbers are converted
/// through their decimal text, so 0.1 means 1/10.
CouplingModel parse_model(const nlohmann::json& doc);
CouplingModel parse_model_text(const std::string& text);
CouplingModel load_model(const std::filesystem::path& path);

nlohmann::json model_to_json(const CouplingModel& model);

ExactComplex parse_scalar(const nlohmann::json& value);
/// Real values serialize as "p/q", complex ones as ["p/q", "r/s"].
nlohmann::json scalar_to_json(const ExactComplex& z);
nlohmann::json scalar_to_json(const FloatComplex& z);

}  // namespace gsaw

#endif
