#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <sstream>

#include "compclass/experiment.hpp"
#include "compclass/textio.hpp"

namespace compclass {

std::string format_from_log(double log_value) {
  if (std::isnan(log_value)) return "nan";
  if (log_value == -std::numeric_limits<double>::infinity()) return "0";
  // exp() stays normal down to about e^-708.
  if (log_value > -700.0) return format_double(std::exp(log_value));
  const double log10v = log_value / std::log(10.0);
  double exponent = std::floor(log10v);
  double mantissa = std::pow(10.0, log10v - exponent);
  if (mantissa >= 9.99999999999995) {
    mantissa = 1.0;
    exponent += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15ge%lld", mantissa, static_cast<long long>(exponent));
  return buf;
}

namespace {

std::string pair_name(ClassPair p) {
  return "(" + std::to_string(p.first + 1) + "," + std::to_string(p.second + 1) + ")";
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  out << std::setprecision(6) << '[';
  for (std::size_t k = 0; k < values.size(); ++k) out << (k ? ", " : "") << values[k];
  out << ']';
  return out.str();
}

template <class T>
std::string join_pairs(const std::map<ClassPair, T>& values) {
  std::ostringstream out;
  out << std::setprecision(6) << '{';
  bool first = true;
  for (const auto& [p, v] : values) {
    out << (first ? "" : ", ") << p.first + 1 << '-' << p.second + 1 << ": " << v;
    first = false;
  }
  out << '}';
  return out.str();
}

void write_prediction(std::ostream& out, const RegimePrediction& p, const std::string& indent) {
  out << indent << "regime: " << to_string(p.regime) << '\n';
  if (p.diversity) out << indent << "predicted d = " << fmt(*p.diversity) << '\n';
  if (p.measurement_gain) out << indent << "predicted g_m = " << fmt(*p.measurement_gain) << '\n';
  if (p.offset_unknown) out << indent << "offset: unknown constant a > 1 multiplies g_m (means inside the image)\n";
  if (p.dominating_pair) out << indent << "dominating pair: " << pair_name(*p.dominating_pair) << '\n';
}

}  // namespace

std::string curve_csv(const ErrorCurve& curve, std::uint64_t seed, int phi_draws, Eigen::Index n_ambient) {
  std::ostringstream out;
  out << "# compclass error curve; M=" << curve.m << " N=" << n_ambient << " seed=" << seed
      << " phi_draws=" << phi_draws << "; phi entries iid N(0, 1/N)\n";
  out << "sigma2,inv_sigma2,bound,bound_variant,mc_estimate,mc_ci,trials\n";
  for (const auto& row : curve.rows) {
    out << format_double(row.sigma2) << ',' << format_double(1.0 / row.sigma2) << ','
        << format_from_log(row.log_bound) << ',' << to_string(curve.variant) << ',';
    if (row.mc) {
      out << format_double(row.mc->p_hat) << ',' << format_double(row.mc->ci_half_width) << ',' << row.mc->trials;
    } else {
      out << ",,0";
    }
    out << '\n';
  }
  return out.str();
}

std::string curve_csv(const ErrorCurve& curve, const ExperimentConfig& cfg, Eigen::Index n_ambient) {
  return curve_csv(curve, cfg.seed, cfg.phi_draws, n_ambient);
}

std::string report_text(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::ostringstream out;
  const auto& model = result.model;
  const auto& spec = cfg.rank_spec;
  out << "compclass report: " << cfg.name << "\n\n";
  out << "model: L = " << model.num_classes() << ", N = " << model.ambient_dim()
      << ", source ranks " << join(spec.class_ranks) << ", union ranks " << join_pairs(spec.union_ranks)
      << ", means " << (spec.mean_mode == MeanMode::Zero ? "zero" : "distinct nonzero") << '\n';
  out << "priors: " << join(model.priors()) << "; covariance eigenvalues uniform on [" << cfg.synthesis.eigen_min
      << ", " << cfg.synthesis.eigen_max << "]\n";
  out << "model seed " << model.metadata().seed << ", basis attempts " << model.metadata().basis_attempts
      << ", mean policy: " << model.metadata().mean_policy << " (redraws: " << model.metadata().mean_redraws << ")\n";
  out << "measurement: phi entries iid N(0, 1/N), " << cfg.phi_draws << " draw(s) per M\n";
  out << "sweep: sigma^2 from 1e" << cfg.grid.start_decade << " to 1e" << cfg.grid.stop_decade << ", "
      << cfg.grid.points_per_decade << " points/decade, " << cfg.trials << " Monte Carlo trials per point\n";
  out << "union bound variant: " << to_string(cfg.union_bound) << '\n';

  for (const auto& r : result.per_m) {
    out << "\n== M = " << r.m << " ==\n";
    const auto& g = r.geometry;
    out << "measured geometry: r = " << join(g.ranks) << ", v = " << join(g.volumes)
        << ", r_ij = " << join_pairs(g.union_ranks) << ", v_ij = " << join_pairs(g.union_volumes) << '\n';
    write_prediction(out, r.prediction, "");
    out << "fit window: sigma^2 in [" << fmt(r.window.sigma2_min) << ", " << fmt(r.window.sigma2_max) << "]\n";
    if (r.fitted_diversity) {
      out << "fitted d = " << fmt(r.fitted_diversity->slope, 5) << " +/- " << fmt(r.fitted_diversity->std_error, 2)
          << " (" << r.fitted_diversity->points << " points)\n";
    }
    if (r.fitted_gain) out << "fitted g_m = " << fmt(*r.fitted_gain) << '\n';
    if (r.exponential_correlation) {
      out << "corr(log bound, 1/sigma^2) = " << fmt(*r.exponential_correlation, 8) << '\n';
    }
    if (model.num_classes() > 2) {
      for (const auto& [pair, p] : r.pair_predictions) {
        out << "  pair " << pair_name(pair) << ": " << to_string(p.regime);
        if (p.diversity) out << ", d = " << fmt(*p.diversity);
        if (auto it = r.pair_fits.find(pair); it != r.pair_fits.end()) {
          out << ", fitted d = " << fmt(it->second.slope, 5);
        }
        out << '\n';
      }
    }
    for (const auto& line : r.discrepancies) out << "DISCREPANCY: " << line << '\n';
    for (const auto& line : r.violations) out << "VIOLATION: " << line << '\n';
  }

  out << '\n';
  if (result.failures.empty()) {
    out << "invariants: all passed\n";
  } else {
    out << "invariants: " << result.failures.size() << " failure(s)\n";
    for (const auto& f : result.failures) out << "  " << f << '\n';
  }
  return out.str();
}

std::string plot_svg(const ExperimentConfig& cfg, const ExperimentResult& result) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double width = 760, height = 500, left = 70, right = 150, top = 30, bottom = 50;
  constexpr double kFloorDecade = -12.0;

  double xmin = 1e300, xmax = -1e300, ymax = -1e300, ymin = 1e300;
  for (const auto& r : result.per_m) {
    for (const auto& row : r.curve.rows) {
      const double x = -std::log10(row.sigma2);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      const double y = row.log_bound / std::log(10.0);
      ymax = std::max(ymax, y);
      ymin = std::min(ymin, y);
      if (row.mc && row.mc->p_hat > 0) ymin = std::min(ymin, std::log10(row.mc->p_hat));
    }
  }
  ymax = std::max(0.0, std::ceil(ymax));
  ymin = std::max(kFloorDecade, std::floor(ymin));
  if (ymin >= ymax) ymin = ymax - 1.0;
  if (xmin >= xmax) xmax = xmin + 1.0;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (width - left - right); };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * (height - top - bottom); };

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"18\">" << cfg.name << ": error bound (line) and Monte Carlo (markers)</text>\n";
  for (double d = std::ceil(xmin); d <= xmax + 1e-9; d += 1.0) {
    out << "<line x1=\"" << px(d) << "\" y1=\"" << top << "\" x2=\"" << px(d) << "\" y2=\"" << height - bottom
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << px(d) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">1e"
        << static_cast<int>(d) << "</text>\n";
  }
  for (double d = ymin; d <= ymax + 1e-9; d += 1.0) {
    out << "<line x1=\"" << left << "\" y1=\"" << py(d) << "\" x2=\"" << width - right << "\" y2=\"" << py(d)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(d)
        << "</text>\n";
  }
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
      << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">1/sigma^2</text>\n";
  out << "<text transform=\"translate(18," << (top + height - bottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">probability of misclassification</text>\n";

  for (std::size_t k = 0; k < result.per_m.size(); ++k) {
    const auto& r = result.per_m[k];
    const char* color = palette[k % 10];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& row : r.curve.rows) {
      const double y = row.log_bound / std::log(10.0);
      if (y < ymin) break;
      out << px(-std::log10(row.sigma2)) << ',' << py(std::min(y, ymax)) << ' ';
    }
    out << "\"/>\n";
    for (const auto& row : r.curve.rows) {
      if (!row.mc || row.mc->p_hat <= 0) continue;
      const double y = std::log10(row.mc->p_hat);
      if (y < ymin) continue;
      out << "<circle cx=\"" << px(-std::log10(row.sigma2)) << "\" cy=\"" << py(y) << "\" r=\"2.5\" fill=\"none\" stroke=\""
          << color << "\"/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(k + 1);
    out << "<line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 36 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << width - right + 42 << "\" y=\"" << ly + 4 << "\">M = " << r.m << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string replay_text(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::ostringstream out;
  out << "# compclass replay file: model, measurement matrices and sweep settings.\n";
  out << "format = compclass-replay\n";
  out << "version = 1\n";
  out << "name = " << cfg.name << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "trials = " << cfg.trials << '\n';
  out << "union_bound = " << to_string(cfg.union_bound) << '\n';
  out << "phi_draws = " << cfg.phi_draws << '\n';
  std::vector<double> grid = cfg.grid.values();
  out << "sigma2 = " << format_values(Eigen::Map<const Vector>(grid.data(), Eigen::Index(grid.size())).transpose())
      << '\n';
  out << "m_values =";
  for (const auto& r : result.per_m) out << ' ' << r.m;
  out << '\n';
  write_model(out, result.model, "model");
  for (const auto& r : result.per_m) {
    for (std::size_t k = 0; k < r.phis.size(); ++k) {
      out << "phi.M" << r.m << ".draw" << k + 1 << " = " << format_values(r.phis[k]) << '\n';
    }
  }
  return out.str();
}

}  // namespace compclass
