#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <json.hpp>

#include "kaslib/error.hpp"
#include "kaslib/numerics.hpp"

namespace kas {

/// Matrices are stored as arrays of rows.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// Pretty-printed with a trailing newline; doubles use shortest round-trip
/// formatting so reloads are bit-exact.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Runs a JSON decoder, reporting missing keys and type mismatches as
/// SchemaError prefixed with `what`.
template <class F>
auto schema_guard(const char* what, F&& decode) -> decltype(decode()) {
  try {
    return std::forward<F>(decode)();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

}  // namespace kas
