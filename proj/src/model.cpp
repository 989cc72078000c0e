#include "aht/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aht/divergence.hpp"
#include "aht/format.hpp"

namespace aht {

namespace {

ModelError invalid(const std::string& what) {
  return ModelError(ModelError::Kind::Validation, what);
}

std::string idx3(std::size_t h, std::size_t u, std::size_t y) {
  std::ostringstream os;
  os << "(h=" << h << ", u=" << u << ", y=" << y << ")";
  return os.str();
}

}  // namespace

Model::Model(std::vector<std::string> hypotheses, std::vector<std::string> experiments,
             std::vector<std::string> observations, std::vector<double> channel,
             std::vector<double> prior)
    : hypotheses_(std::move(hypotheses)),
      experiments_(std::move(experiments)),
      observations_(std::move(observations)),
      channel_(std::move(channel)),
      prior_(std::move(prior)) {
  validate();
  log_channel_.resize(channel_.size());
  std::transform(channel_.begin(), channel_.end(), log_channel_.begin(),
                 [](double v) { return std::log(v); });
  const std::size_t m = num_hypotheses();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      for (std::size_t u = 0; u < num_experiments(); ++u)
        for (std::size_t y = 0; y < num_observations(); ++y)
          lambda_bound_ = std::max(lambda_bound_,
                                   std::abs(log_p(i, u, y) - log_p(j, u, y)));
    }
}

void Model::validate() const {
  const std::size_t m = hypotheses_.size();
  const std::size_t nu = experiments_.size();
  const std::size_t ny = observations_.size();
  if (m < 2) throw invalid("size: at least 2 hypotheses required, got " + std::to_string(m));
  if (nu < 1) throw invalid("size: at least 1 experiment required");
  if (ny < 2)
    throw invalid("size: at least 2 observations required, got " + std::to_string(ny));
  if (channel_.size() != m * nu * ny)
    throw invalid("shape: channel must be " + std::to_string(m) + "x" + std::to_string(nu) +
                  "x" + std::to_string(ny));
  if (prior_.size() != m) throw invalid("shape: prior must have one entry per hypothesis");

  double prior_sum = 0.0;
  for (std::size_t h = 0; h < m; ++h) {
    if (!std::isfinite(prior_[h]) || !(prior_[h] > 0.0))
      throw invalid("prior: entry for h=" + std::to_string(h) + " must be > 0");
    prior_sum += prior_[h];
  }
  if (std::abs(prior_sum - 1.0) > kRowSumTolerance)
    throw invalid("prior: entries must sum to 1");

  for (std::size_t h = 0; h < m; ++h)
    for (std::size_t u = 0; u < nu; ++u) {
      double sum = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        const double v = channel_[index(h, u, y)];
        if (!std::isfinite(v) || !(v > 0.0))
          throw invalid("full support: channel entry " + idx3(h, u, y) + " must be > 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw invalid("normalization: channel row (h=" + std::to_string(h) +
                      ", u=" + std::to_string(u) + ") sums to " + std::to_string(sum));
    }

  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        const double d = kl_divergence(row(i, u), row(j, u));
        if (!(d > 0.0))
          throw invalid("distinguishability: D(p_" + std::to_string(i) + "^" +
                        std::to_string(u) + " || p_" + std::to_string(j) + "^" +
                        std::to_string(u) + ") is zero");
      }
}

Model parse_model(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError(ModelError::Kind::Parse, std::string("malformed model file: ") + e.what());
  }
  try {
    auto hyps = doc.at("hypotheses").get<std::vector<std::string>>();
    auto exps = doc.at("experiments").get<std::vector<std::string>>();
    auto obs = doc.at("observations").get<std::vector<std::string>>();
    auto prior = doc.at("prior").get<std::vector<double>>();
    const auto& ch = doc.at("channel");
    std::vector<double> flat;
    flat.reserve(hyps.size() * exps.size() * obs.size());
    if (!ch.is_array() || ch.size() != hyps.size())
      throw ModelError(ModelError::Kind::Validation,
                       "shape: channel must have one block per hypothesis");
    for (std::size_t h = 0; h < ch.size(); ++h) {
      if (!ch[h].is_array() || ch[h].size() != exps.size())
        throw ModelError(ModelError::Kind::Validation,
                         "shape: channel[" + std::to_string(h) +
                             "] must have one row per experiment");
      for (std::size_t u = 0; u < ch[h].size(); ++u) {
        auto row = ch[h][u].get<std::vector<double>>();
        if (row.size() != obs.size())
          throw ModelError(ModelError::Kind::Validation,
                           "shape: channel[" + std::to_string(h) + "][" + std::to_string(u) +
                               "] must have one entry per observation");
        flat.insert(flat.end(), row.begin(), row.end());
      }
    }
    return Model(std::move(hyps), std::move(exps), std::move(obs), std::move(flat),
                 std::move(prior));
  } catch (const json::exception& e) {
    throw ModelError(ModelError::Kind::Parse, std::string("model schema: ") + e.what());
  }
}

Model load_model(std::istream& source) {
  std::ostringstream buf;
  buf << source.rdbuf();
  return parse_model(buf.str());
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open model file: " + path);
  return load_model(in);
}

double log_likelihood_ratio(const Model& model, Hypothesis i, Hypothesis j, Experiment u,
                            Observation y) {
  if (i == j) throw std::invalid_argument("log_likelihood_ratio: i and j must differ");
  if (i >= model.num_hypotheses() || j >= model.num_hypotheses() ||
      u >= model.num_experiments() || y >= model.num_observations())
    throw std::out_of_range("log_likelihood_ratio: index out of range");
  return model.log_p(i, u, y) - model.log_p(j, u, y);
}

double lambda_bound(const Model& model) { return model.lambda_bound(); }

EpsilonSchedule EpsilonSchedule::fixed(double value) {
  if (!(value > 0.0) || !(value < 1.0))
    throw std::invalid_argument("fixed epsilon must lie in (0, 1)");
  return EpsilonSchedule(Rule::Fixed, value);
}

EpsilonSchedule EpsilonSchedule::parse(std::string_view text) {
  if (text == "half-inverse") return half_inverse();
  constexpr std::string_view prefix = "fixed:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != rest.size() || rest.empty())
      throw std::invalid_argument("bad epsilon rule: " + std::string(text));
    return fixed(v);
  }
  throw std::invalid_argument("unknown epsilon rule: " + std::string(text));
}

double EpsilonSchedule::value(int horizon) const {
  if (horizon < 1) throw std::invalid_argument("epsilon schedule: horizon must be >= 1");
  if (rule_ == Rule::Fixed) return fixed_;
  return 1.0 / (2.0 * horizon);
}

bool EpsilonSchedule::admissible(int horizon) const {
  const double e = value(horizon);
  return e > 0.0 && e <= 1.0 / (2.0 * horizon);
}

std::string EpsilonSchedule::describe() const {
  if (rule_ == Rule::HalfInverse) return "half-inverse";
  return "fixed:" + format_real(fixed_);
}

}  // namespace aht
