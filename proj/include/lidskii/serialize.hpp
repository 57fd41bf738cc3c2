#pragma once

#include "lidskii/abel.hpp"
#include "lidskii/contour.hpp"
#include "lidskii/evolution.hpp"
#include "lidskii/exponents.hpp"
#include "lidskii/operator_core.hpp"
#include "lidskii/spectral.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace lidskii {

using Json = nlohmann::ordered_json;

// ---- matrix / vector JSON schema ----
// matrix: { "dimension": n, "entries": [[[re,im],...],...],
//           "structured": { "blocks": [{"eigenvalue":[re,im],"size":k}], "basis": entries },
//           "label": "..." }
// vector: [[re,im], ...]

Json to_json(Complex z);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const OperatorSpec& op);
Json to_json(const SpectralDecomposition& d);
Json to_json(const ContourSpec& c);

Complex complex_from_json(const Json& j);
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);
OperatorSpec operator_from_json(const Json& j);

OperatorSpec load_operator(const std::filesystem::path& path);
void save_operator(const OperatorSpec& op, const std::filesystem::path& path);

/// One modulus (or a re,im pair) per line.
ModulusSequence load_sequence_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Stable CSV writer: fixed column order, %.17g numbers, '\n' line ends.
std::string csv_line(const std::vector<std::string>& cells);
std::string format_double(double v);

}  // namespace lidskii
