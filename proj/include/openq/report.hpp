#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "openq/verify.hpp"

namespace openq {

using Json = nlohmann::ordered_json;

/// A CLI report: {command, params, backend, results[], residuals[], timing}.
/// Keys keep insertion order so identical runs serialise identically.
struct Report {
  std::string command;
  Json params = Json::object();
  std::string backend;
  Json results = Json::array();
  Json residuals = Json::array();
  /// Stays null unless timing was requested.
  Json timing = nullptr;
};

Json to_json(const Report& report);
/// Pretty-printed JSON with a trailing newline.
std::string render_json(const Report& report);
/// One row per entry of results[]; columns are the union of keys in order of
/// first appearance. Nested values are written as compact JSON.
std::string render_csv(const Report& report);

/// Shortest round-trip decimal form of a double ("0" for zero).
std::string format_real(double v);

template <Scalar T>
std::string format_scalar(const T& v) {
  return ScalarTraits<T>::to_string(v);
}

Json residual_json(const ResidualReport& r);

}  // namespace openq
