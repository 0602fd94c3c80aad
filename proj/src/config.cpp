#include "singloc/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "singloc/errors.hpp"

namespace singloc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    raise(errc::bad_config, "key '" + key + "' has non-numeric value '" + text + "'");
  }
  return v;
}

}  // namespace

KeyValue parse_key_value(const std::string& text) {
  KeyValue kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      raise(errc::bad_config, "line " + std::to_string(lineno) + " is not 'key = value': " + line);
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      raise(errc::bad_config, "empty key at line " + std::to_string(lineno));
    }
    kv[key] = value;
  }
  return kv;
}

KeyValue load_key_value(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) raise(errc::io_error, "cannot open config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_value(buf.str());
}

std::string serialize_key_value(const KeyValue& kv) {
  std::ostringstream out;
  for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
  return out.str();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double get_double(const KeyValue& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) raise(errc::bad_config, "missing key '" + key + "'");
  return parse_double(key, it->second);
}

double get_double_or(const KeyValue& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_double(key, it->second);
}

std::int64_t get_int_or(const KeyValue& kv, const std::string& key, std::int64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  return static_cast<std::int64_t>(parse_double(key, it->second));
}

std::uint64_t get_u64_or(const KeyValue& kv, const std::string& key, std::uint64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    raise(errc::bad_config, "key '" + key + "' has non-integer value '" + it->second + "'");
  }
  return v;
}

std::string get_string_or(const KeyValue& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

KeyValue model_to_key_value(const IntensityModel& model, const std::string& prefix) {
  KeyValue kv;
  kv[prefix + "a"] = format_double(model.sing.a);
  kv[prefix + "b"] = format_double(model.sing.b);
  kv[prefix + "p"] = format_double(model.sing.p);
  kv[prefix + "theta"] = format_double(model.theta);
  kv[prefix + "T"] = format_double(model.T);
  kv[prefix + "alpha"] = format_double(model.theta_interval.lo);
  kv[prefix + "beta"] = format_double(model.theta_interval.hi);
  for (int k = 0; k < 4; ++k) {
    kv[prefix + "psi_c" + std::to_string(k)] = format_double(model.smooth.c[k]);
  }
  return kv;
}

IntensityModel model_from_key_value(const KeyValue& kv, const std::string& prefix) {
  IntensityModel m;
  m.sing.a = get_double(kv, prefix + "a");
  m.sing.b = get_double(kv, prefix + "b");
  m.sing.p = get_double(kv, prefix + "p");
  m.theta = get_double(kv, prefix + "theta");
  m.T = get_double(kv, prefix + "T");
  m.theta_interval.lo = get_double(kv, prefix + "alpha");
  m.theta_interval.hi = get_double(kv, prefix + "beta");
  for (int k = 0; k < 4; ++k) {
    m.smooth.c[k] = get_double_or(kv, prefix + "psi_c" + std::to_string(k), 0.0);
  }
  return m;
}

std::string model_fingerprint(const IntensityModel& model) {
  const std::string text = serialize_key_value(model_to_key_value(model));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace singloc
