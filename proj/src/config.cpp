#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "compclass/error.hpp"
#include "compclass/experiment.hpp"
#include "compclass/textio.hpp"

namespace compclass {

std::vector<double> SigmaGridSpec::values() const {
  std::vector<double> out;
  const int steps = (start_decade - stop_decade) * points_per_decade;
  for (int k = 0; k <= steps; ++k) {
    out.push_back(std::pow(10.0, start_decade - static_cast<double>(k) / points_per_decade));
  }
  return out;
}

namespace {

long long parse_integer(const std::string& text, int line, const std::string& key) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'", line);
  }
  return v;
}

double parse_real(const std::string& text, int line, const std::string& key) {
  try {
    return parse_double(text);
  } catch (const ValidationError&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'", line);
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// "1, 2, 5-7" -> {1, 2, 5, 6, 7}
std::vector<int> parse_int_list(const std::string& text, int line, const std::string& key) {
  std::vector<int> out;
  for (const auto& tok : split_list(text)) {
    const auto dash = tok.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(static_cast<int>(parse_integer(tok, line, key)));
    } else {
      const auto lo = parse_integer(tok.substr(0, dash), line, key);
      const auto hi = parse_integer(tok.substr(dash + 1), line, key);
      if (hi < lo) throw ConfigError(key + ": empty range '" + tok + "'", line);
      for (auto v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
    }
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Handler = std::function<void(ExperimentConfig&, const Entry&)>;

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, Entry> entries;  // "section.key"
  std::set<std::string> sections;

  static const std::set<std::string> known_sections = {"experiment", "model", "measurement",
                                                       "sweep",      "analysis", "output"};
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string t = trim(raw);
    if (const auto hash = t.find('#'); hash != std::string::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("malformed section header '" + t + "'", line_no);
      section = trim(t.substr(1, t.size() - 2));
      if (!known_sections.count(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      if (!sections.insert(section).second) throw ConfigError("duplicate section [" + section + "]", line_no);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + t + "'", line_no);
    if (section.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string key = section + "." + trim(t.substr(0, eq));
    if (!entries.emplace(key, Entry{trim(t.substr(eq + 1)), line_no}).second) {
      throw ConfigError("duplicate key '" + key + "'", line_no);
    }
  }

  auto integer = [](const Entry& e, const char* key) { return parse_integer(e.value, e.line, key); };

  const std::map<std::string, Handler> handlers = {
      {"experiment.name", [](ExperimentConfig& c, const Entry& e) { c.name = e.value; }},
      {"model.ambient_dim",
       [&](ExperimentConfig& c, const Entry& e) { c.rank_spec.ambient_dim = int(integer(e, "ambient_dim")); }},
      {"model.class_ranks",
       [](ExperimentConfig& c, const Entry& e) { c.rank_spec.class_ranks = parse_int_list(e.value, e.line, "class_ranks"); }},
      {"model.union_ranks",
       [](ExperimentConfig& c, const Entry& e) {
         for (const auto& tok : split_list(e.value)) {
           const auto dash = tok.find('-');
           const auto colon = tok.find(':');
           if (dash == std::string::npos || colon == std::string::npos || colon < dash) {
             throw ConfigError("union_ranks: expected entries like '1-2:4', got '" + tok + "'", e.line);
           }
           const int i = int(parse_integer(tok.substr(0, dash), e.line, "union_ranks"));
           const int j = int(parse_integer(tok.substr(dash + 1, colon - dash - 1), e.line, "union_ranks"));
           const int r = int(parse_integer(tok.substr(colon + 1), e.line, "union_ranks"));
           if (i < 1 || j < 1 || i == j) throw ConfigError("union_ranks: invalid pair '" + tok + "'", e.line);
           const ClassPair key{std::min(i, j) - 1, std::max(i, j) - 1};
           if (!c.rank_spec.union_ranks.emplace(key, r).second) {
             throw ConfigError("union_ranks: pair listed twice '" + tok + "'", e.line);
           }
         }
       }},
      {"model.mean_mode",
       [](ExperimentConfig& c, const Entry& e) {
         if (e.value == "zero") c.rank_spec.mean_mode = MeanMode::Zero;
         else if (e.value == "distinct") c.rank_spec.mean_mode = MeanMode::DistinctNonzero;
         else throw ConfigError("mean_mode must be 'zero' or 'distinct'", e.line);
       }},
      {"model.priors",
       [](ExperimentConfig& c, const Entry& e) {
         for (const auto& tok : split_list(e.value)) c.synthesis.priors.push_back(parse_real(tok, e.line, "priors"));
       }},
      {"model.eigen_min",
       [](ExperimentConfig& c, const Entry& e) { c.synthesis.eigen_min = parse_real(e.value, e.line, "eigen_min"); }},
      {"model.eigen_max",
       [](ExperimentConfig& c, const Entry& e) { c.synthesis.eigen_max = parse_real(e.value, e.line, "eigen_max"); }},
      {"measurement.m_values",
       [](ExperimentConfig& c, const Entry& e) { c.m_values = parse_int_list(e.value, e.line, "m_values"); }},
      {"measurement.phi_draws",
       [&](ExperimentConfig& c, const Entry& e) { c.phi_draws = int(integer(e, "phi_draws")); }},
      {"sweep.sigma2_start_decade",
       [&](ExperimentConfig& c, const Entry& e) { c.grid.start_decade = int(integer(e, "sigma2_start_decade")); }},
      {"sweep.sigma2_stop_decade",
       [&](ExperimentConfig& c, const Entry& e) { c.grid.stop_decade = int(integer(e, "sigma2_stop_decade")); }},
      {"sweep.points_per_decade",
       [&](ExperimentConfig& c, const Entry& e) { c.grid.points_per_decade = int(integer(e, "points_per_decade")); }},
      {"sweep.trials", [&](ExperimentConfig& c, const Entry& e) { c.trials = integer(e, "trials"); }},
      {"sweep.seed",
       [&](ExperimentConfig& c, const Entry& e) {
         const auto v = integer(e, "seed");
         if (v < 0) throw ConfigError("seed must be >= 0", e.line);
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"analysis.union_bound",
       [](ExperimentConfig& c, const Entry& e) {
         try {
           c.union_bound = parse_union_bound_variant(e.value);
         } catch (const ValidationError& err) {
           throw ConfigError(err.what(), e.line);
         }
       }},
      {"analysis.fit_window_decades",
       [](ExperimentConfig& c, const Entry& e) {
         const auto d = split_list(e.value);
         if (d.size() != 2) throw ConfigError("fit_window_decades: expected two decades, e.g. '-6 -4'", e.line);
         const double lo = parse_real(d[0], e.line, "fit_window_decades");
         const double hi = parse_real(d[1], e.line, "fit_window_decades");
         if (!(lo < hi)) throw ConfigError("fit_window_decades: lower decade must be below the upper", e.line);
         c.fit_window = FitWindow{std::pow(10.0, lo), std::pow(10.0, hi)};
       }},
      {"analysis.reference_diversity",
       [](ExperimentConfig& c, const Entry& e) {
         c.reference_diversity = parse_real(e.value, e.line, "reference_diversity");
       }},
      {"output.path", [](ExperimentConfig& c, const Entry& e) { c.output_path = e.value; }},
  };

  for (const auto& [key, entry] : entries) {
    auto h = handlers.find(key);
    if (h == handlers.end()) throw ConfigError("unknown key '" + key + "'", entry.line);
    h->second(cfg, entry);
  }

  auto line_of = [&](const std::string& key) {
    auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
  };
  for (const char* required : {"model", "measurement"}) {
    if (!sections.count(required)) throw ConfigError(std::string("missing section [") + required + "]");
  }
  for (const char* required : {"model.ambient_dim", "model.class_ranks", "model.union_ranks", "measurement.m_values"}) {
    if (!entries.count(required)) throw ConfigError(std::string("missing required key '") + required + "'");
  }

  try {
    validate(cfg.rank_spec);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), line_of("model.union_ranks"));
  }
  const int n = cfg.rank_spec.ambient_dim;
  if (cfg.m_values.empty()) throw ConfigError("m_values must not be empty", line_of("measurement.m_values"));
  for (int m : cfg.m_values) {
    if (m < 1 || m > n) {
      throw ConfigError("m_values: each M must satisfy 1 <= M <= N = " + std::to_string(n) + " (got " +
                            std::to_string(m) + ")",
                        line_of("measurement.m_values"));
    }
  }
  if (cfg.phi_draws < 1) throw ConfigError("phi_draws must be >= 1", line_of("measurement.phi_draws"));
  if (cfg.grid.start_decade <= cfg.grid.stop_decade) {
    throw ConfigError("sigma2_start_decade must be greater than sigma2_stop_decade (the grid runs toward low noise)",
                      line_of("sweep.sigma2_stop_decade"));
  }
  if (cfg.grid.points_per_decade < 1) {
    throw ConfigError("points_per_decade must be >= 1", line_of("sweep.points_per_decade"));
  }
  if (cfg.trials < 0) throw ConfigError("trials must be >= 0", line_of("sweep.trials"));
  if (!cfg.synthesis.priors.empty()) {
    if (cfg.synthesis.priors.size() != cfg.rank_spec.class_ranks.size()) {
      throw ConfigError("priors: expected one value per class", line_of("model.priors"));
    }
    double total = 0.0;
    for (double p : cfg.synthesis.priors) {
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("priors must lie in (0, 1]", line_of("model.priors"));
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("priors must sum to 1", line_of("model.priors"));
  }
  if (!(cfg.synthesis.eigen_min > 0.0 && cfg.synthesis.eigen_max >= cfg.synthesis.eigen_min)) {
    throw ConfigError("eigenvalue range must satisfy 0 < eigen_min <= eigen_max", line_of("model.eigen_max"));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace compclass
