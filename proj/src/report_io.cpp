#include "aht/report_io.hpp"

#include <sstream>

#include "aht/format.hpp"

namespace aht {

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json opt_vec(const std::vector<std::optional<double>>& v) {
  auto a = nlohmann::json::array();
  for (const auto& x : v) a.push_back(opt(x));
  return a;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  return format_real(*v);
}

}  // namespace

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["mode"] = r.mode == RunMode::Exact ? "exact" : "mc";
  j["horizon"] = r.horizon;
  j["selection"] = r.selection;
  j["inference"] = r.inference;
  j["psi"] = opt_vec(r.psi);
  j["phi"] = opt_vec(r.phi);
  j["gamma"] = opt(r.gamma);
  j["jng"] = opt_vec(r.jng);
  j["stderr"] = {{"psi", opt_vec(r.standard_error.psi)},
                 {"phi", opt_vec(r.standard_error.phi)},
                 {"gamma", opt(r.standard_error.gamma)},
                 {"jng", opt_vec(r.standard_error.jng)}};
  if (r.mode == RunMode::Exact) {
    j["paths"] = r.paths;
    j["path_mass"] = r.path_mass;
  } else {
    j["episodes"] = r.episodes;
    j["misclassified"] = r.misclassified;
  }
  j["seed"] = r.seed;
  return j;
}

nlohmann::json to_json(const SaddlePoint& s, const Model& model) {
  nlohmann::json beta = nlohmann::json::object();
  for (std::size_t k = 0; k < s.rivals.size(); ++k)
    beta[model.hypotheses().at(s.rivals[k])] = s.beta_star[k];
  nlohmann::json alpha = nlohmann::json::object();
  for (std::size_t u = 0; u < s.alpha_star.size(); ++u)
    alpha[model.experiments().at(u)] = s.alpha_star[u];
  return {{"hypothesis", model.hypotheses().at(s.hypothesis)},
          {"index", s.hypothesis},
          {"d_star", s.d_star},
          {"gap", s.gap},
          {"lower", s.lower},
          {"upper", s.upper},
          {"alpha", alpha},
          {"beta", beta}};
}

std::string csv_header(const Model& model) {
  std::ostringstream os;
  os << "mode,N,selection,inference,seed,count,gamma,gamma_stderr";
  for (const auto& h : model.hypotheses()) os << ",psi_" << h << ",phi_" << h << ",jng_" << h;
  return os.str();
}

std::string csv_row(const RunReport& r) {
  std::ostringstream os;
  os << (r.mode == RunMode::Exact ? "exact" : "mc") << ',' << r.horizon << ',' << r.selection
     << ',' << '"' << r.inference << '"' << ',' << r.seed << ','
     << (r.mode == RunMode::Exact ? r.paths : r.episodes) << ',' << cell(r.gamma) << ','
     << cell(r.standard_error.gamma);
  for (std::size_t i = 0; i < r.psi.size(); ++i)
    os << ',' << cell(r.psi[i]) << ',' << cell(r.phi[i]) << ',' << cell(r.jng[i]);
  return os.str();
}

}  // namespace aht
