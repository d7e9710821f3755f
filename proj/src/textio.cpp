#include "compclass/textio.hpp"

#include <charconv>
#include <istream>

#include "compclass/error.hpp"

namespace compclass {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ValidationError("not a number: '" + t + "'");
  }
  return value;
}

std::string format_values(const Matrix& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (!out.empty()) out += ' ';
      out += format_double(values(i, j));
    }
  }
  return out;
}

std::vector<double> parse_values(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == ',')) ++pos;
    std::size_t end = pos;
    while (end < text.size() && text[end] != ' ' && text[end] != '\t' && text[end] != ',') ++end;
    if (end > pos) out.push_back(parse_double(text.substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (!kv.emplace(key, trim(std::string_view(t).substr(eq + 1))).second) {
      throw ConfigError("duplicate key '" + key + "'", line_no);
    }
  }
  return kv;
}

const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ValidationError("missing key '" + key + "'");
  return it->second;
}

}  // namespace compclass
