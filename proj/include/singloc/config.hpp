#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "singloc/model.hpp"

namespace singloc {

/// Flat `key = value` text block. Keys are sorted on serialization so the
/// same map always produces the same bytes. Lines starting with '#' and
/// blank lines are ignored on parse.
using KeyValue = std::map<std::string, std::string>;

KeyValue parse_key_value(const std::string& text);
KeyValue load_key_value(const std::filesystem::path& file);
std::string serialize_key_value(const KeyValue& kv);

/// Decimal text with 17 significant digits (round-trips IEEE doubles).
std::string format_double(double x);

double get_double(const KeyValue& kv, const std::string& key);
double get_double_or(const KeyValue& kv, const std::string& key, double fallback);
std::int64_t get_int_or(const KeyValue& kv, const std::string& key, std::int64_t fallback);
std::uint64_t get_u64_or(const KeyValue& kv, const std::string& key, std::uint64_t fallback);
std::string get_string_or(const KeyValue& kv, const std::string& key, const std::string& fallback);

/// Model block keys: a, b, p, theta, T, alpha, beta, psi_c0..psi_c3.
/// An optional prefix ("model.") scopes the keys inside a larger config.
KeyValue model_to_key_value(const IntensityModel& model, const std::string& prefix = "");
IntensityModel model_from_key_value(const KeyValue& kv, const std::string& prefix = "");

/// FNV-1a hash of the serialized model block, as fixed-width hex. Batches
/// carry it so a loaded file can be checked against the intended model.
std::string model_fingerprint(const IntensityModel& model);

}  // namespace singloc
