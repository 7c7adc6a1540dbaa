#include "cdpclust/config.hpp"

#include <fstream>
#include <set>

#include "cdp/error.hpp"
#include "cdpclust/dataset.hpp"

namespace cdpclust {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw cdp::InvalidInput(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw cdp::InvalidInput("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw cdp::InvalidInput(std::string("config key '") + key + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

Eigen::VectorXd expand_vector(const json& spec, int dim, const std::string& what) {
  Eigen::VectorXd v(dim);
  if (spec.is_number()) {
    v.setConstant(spec.get<double>());
    return v;
  }
  if (!spec.is_array() || static_cast<int>(spec.size()) != dim) {
    throw cdp::InvalidInput(what + " must be a number or an array of length " + std::to_string(dim));
  }
  for (int i = 0; i < dim; ++i) v(i) = spec[static_cast<std::size_t>(i)].get<double>();
  return v;
}

// number: c I; flat array: diagonal; array of arrays: full matrix
Eigen::MatrixXd expand_matrix(const json& spec, int dim, const std::string& what) {
  if (spec.is_number()) return spec.get<double>() * Eigen::MatrixXd::Identity(dim, dim);
  if (!spec.is_array() || static_cast<int>(spec.size()) != dim) {
    throw cdp::InvalidInput(what + " must be a number, a diagonal of length " + std::to_string(dim) + " or a " +
                            std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const json& row = spec[static_cast<std::size_t>(i)];
    if (row.is_number()) {
      m(i, i) = row.get<double>();
    } else if (row.is_array() && static_cast<int>(row.size()) == dim) {
      for (int j = 0; j < dim; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    } else {
      throw cdp::InvalidInput(what + ": row " + std::to_string(i + 1) + " has the wrong shape");
    }
  }
  return m;
}

PriorConfig parse_prior(const json& obj, PriorConfig base, const std::string& where) {
  reject_unknown(obj, {"a", "b", "m_delta", "t_delta", "m_beta", "t_beta", "delta0"}, where);
  base.a = get_or(obj, "a", base.a);
  base.b = get_or(obj, "b", base.b);
  for (const char* key : {"m_delta", "t_delta", "m_beta", "t_beta", "delta0"}) {
    if (obj.contains(key)) {
      json& slot = std::string(key) == "m_delta"   ? base.m_delta
                   : std::string(key) == "t_delta" ? base.t_delta
                   : std::string(key) == "m_beta"  ? base.m_beta
                   : std::string(key) == "t_beta"  ? base.t_beta
                                                   : base.delta0;
      slot = obj.at(key);
    }
  }
  return base;
}

json prior_to_json(const PriorConfig& p) {
  return json{{"a", p.a},           {"b", p.b},           {"m_delta", p.m_delta}, {"t_delta", p.t_delta},
              {"m_beta", p.m_beta}, {"t_beta", p.t_beta}, {"delta0", p.delta0}};
}

cdp::NormalGammaSpec regular_spec(const PriorConfig& p, int z, int x) {
  return cdp::NormalGammaSpec::regular(p.a, p.b, expand_vector(p.m_delta, z, "m_delta"),
                                       expand_matrix(p.t_delta, z, "t_delta"), expand_vector(p.m_beta, x, "m_beta"),
                                       expand_matrix(p.t_beta, x, "t_beta"));
}

cdp::NormalGammaSpec background_spec(const PriorConfig& p, int z, int x) {
  return cdp::NormalGammaSpec::background_cluster(p.a, p.b, expand_vector(p.m_beta, x, "m_beta"),
                                                  expand_matrix(p.t_beta, x, "t_beta"),
                                                  expand_vector(p.delta0, z, "delta0"));
}

double param(const json& params, const char* key) {
  if (!params.contains(key)) throw cdp::InvalidInput(std::string("model needs parameter '") + key + "'");
  return params.at(key).get<double>();
}

}  // namespace

cdp::PartitionPriorModel RunConfig::prior_model() const {
  const json& p = model_params;
  if (family == "dp") return cdp::DirichletProcess{param(p, "theta")};
  if (family == "dirmult") {
    return cdp::DirichletMultinomial{static_cast<int>(param(p, "components")), param(p, "delta")};
  }
  if (family == "pitman-yor") return cdp::PitmanYor{param(p, "discount"), param(p, "strength")};
  if (family == "background") return cdp::BackgroundDP{param(p, "gamma"), param(p, "theta")};
  if (family == "cdp") {
    if (!p.contains("colours") || !p.at("colours").is_array()) {
      throw cdp::InvalidInput("cdp model needs a 'colours' array of {gamma, theta}");
    }
    cdp::ColouredDP m;
    for (const auto& c : p.at("colours")) m.colours.push_back({param(c, "gamma"), param(c, "theta")});
    return m;
  }
  throw cdp::InvalidInput("unknown model family '" + family + "' (dp, dirmult, pitman-yor, cdp, background)");
}

std::vector<cdp::NormalGammaSpec> RunConfig::likelihood_priors(int z_cols, int x_cols) const {
  std::vector<cdp::NormalGammaSpec> out;
  if (family == "background") {
    out.push_back(background_spec(background_prior.value_or(prior), z_cols, x_cols));
    out.push_back(regular_spec(prior, z_cols, x_cols));
  } else if (family == "cdp" && !colour_priors.empty()) {
    for (const auto& p : colour_priors) out.push_back(regular_spec(p, z_cols, x_cols));
  } else {
    out.push_back(regular_spec(prior, z_cols, x_cols));
  }
  for (const auto& s : out) s.validate();
  return out;
}

void RunConfig::validate() const {
  const cdp::PartitionPriorModel model = prior_model();
  if (family == "cdp" && !colour_priors.empty() && static_cast<int>(colour_priors.size()) != model.num_colours()) {
    throw cdp::InvalidInput("colour_priors must list one prior per colour");
  }
  plan.validate();
  loss.validate();
  if (chains < 1) throw cdp::InvalidInput("need at least one chain");
  if (strategy != "auto" && strategy != "exact" && strategy != "greedy") {
    throw cdp::InvalidInput("loss strategy must be auto, exact or greedy");
  }
  if (data.empty()) throw cdp::InvalidInput("config names no data file");
  for (const auto* p : {&prior, background_prior ? &*background_prior : nullptr}) {
    if (p && (!(p->a > 0.0) || !(p->b > 0.0))) throw cdp::DomainError("prior a and b must be positive");
  }
}

RunConfig wen_rat_preset() {
  RunConfig c;
  c.preset = "wen-rat";
  c.family = "background";
  c.model_params = json{{"theta", 1.0}, {"gamma", 5.0}};
  c.prior = PriorConfig{};
  c.plan.sweeps = 20000;
  c.plan.burn_in = 10000;
  c.plan.thin = 1;
  c.plan.coherence_check_interval = 0;
  return c;
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc,
                 {"preset", "data", "annotation_columns", "model", "prior", "background_prior", "colour_priors",
                  "design", "sampler", "chains", "loss", "output", "seed"},
                 "config");
  RunConfig c;
  c.plan.coherence_check_interval = 0;
  if (doc.contains("preset")) {
    const auto name = doc.at("preset").get<std::string>();
    if (name != "wen-rat") throw cdp::InvalidInput("unknown preset '" + name + "'");
    c = wen_rat_preset();
  }
  if (doc.contains("data")) c.data = resolve(base_dir, doc.at("data").get<std::string>());
  c.annotation_columns = get_or(doc, "annotation_columns", c.annotation_columns);
  if (doc.contains("model")) {
    json m = doc.at("model");
    if (!m.is_object()) throw cdp::InvalidInput("model must be a JSON object");
    if (m.contains("family")) {
      const auto family = m.at("family").get<std::string>();
      if (family != c.family) c.model_params = json::object();
      c.family = family;
      m.erase("family");
    }
    for (const auto& [key, value] : m.items()) c.model_params[key] = value;
  }
  if (doc.contains("prior")) c.prior = parse_prior(doc.at("prior"), c.prior, "prior");
  if (doc.contains("background_prior")) {
    c.background_prior = parse_prior(doc.at("background_prior"), c.prior, "background_prior");
  }
  if (doc.contains("colour_priors")) {
    c.colour_priors.clear();
    for (const auto& p : doc.at("colour_priors")) c.colour_priors.push_back(parse_prior(p, c.prior, "colour_priors"));
  }
  if (doc.contains("design")) {
    const json& d = doc.at("design");
    reject_unknown(d, {"z", "x"}, "design");
    if (d.contains("z") && !d.at("z").is_null()) c.design_z = resolve(base_dir, d.at("z").get<std::string>());
    if (d.contains("x") && !d.at("x").is_null()) c.design_x = resolve(base_dir, d.at("x").get<std::string>());
  }
  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    reject_unknown(s, {"sweeps", "burn_in", "thin", "subset_move_rate", "subset_cap", "coherence_check_interval"},
                   "sampler");
    c.plan.sweeps = get_or(s, "sweeps", c.plan.sweeps);
    c.plan.burn_in = get_or(s, "burn_in", c.plan.burn_in);
    c.plan.thin = get_or(s, "thin", c.plan.thin);
    c.plan.subset_move_rate = get_or(s, "subset_move_rate", c.plan.subset_move_rate);
    c.plan.subset_cap = get_or(s, "subset_cap", c.plan.subset_cap);
    c.plan.coherence_check_interval = get_or(s, "coherence_check_interval", c.plan.coherence_check_interval);
  }
  c.chains = get_or(doc, "chains", c.chains);
  if (doc.contains("loss")) {
    const json& l = doc.at("loss");
    reject_unknown(l, {"false_positive", "false_negative", "strategy"}, "loss");
    c.loss.weight_false_positive = get_or(l, "false_positive", c.loss.weight_false_positive);
    c.loss.weight_false_negative = get_or(l, "false_negative", c.loss.weight_false_negative);
    c.strategy = get_or(l, "strategy", c.strategy);
  }
  if (doc.contains("output")) c.output = resolve(base_dir, doc.at("output").get<std::string>());
  c.seed = get_or(doc, "seed", c.seed);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw cdp::LoadError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw cdp::LoadError(path.string() + ": " + e.what());
  }
  return parse_run_config(doc, std::filesystem::absolute(path).parent_path());
}

json to_json(const RunConfig& c) {
  json model = c.model_params;
  model["family"] = c.family;
  json doc{{"data", c.data.string()},
           {"annotation_columns", c.annotation_columns},
           {"model", model},
           {"prior", prior_to_json(c.prior)},
           {"design", {{"z", c.design_z ? json(c.design_z->string()) : json(nullptr)},
                       {"x", c.design_x ? json(c.design_x->string()) : json(nullptr)}}},
           {"sampler",
            {{"sweeps", c.plan.sweeps},
             {"burn_in", c.plan.burn_in},
             {"thin", c.plan.thin},
             {"subset_move_rate", c.plan.subset_move_rate},
             {"subset_cap", c.plan.subset_cap},
             {"coherence_check_interval", c.plan.coherence_check_interval}}},
           {"chains", c.chains},
           {"loss",
            {{"false_positive", c.loss.weight_false_positive},
             {"false_negative", c.loss.weight_false_negative},
             {"strategy", c.strategy}}},
           {"output", std::filesystem::absolute(c.output).lexically_normal().string()},
           {"seed", c.seed}};
  if (!c.preset.empty()) doc["preset"] = c.preset;
  if (c.background_prior) doc["background_prior"] = prior_to_json(*c.background_prior);
  if (!c.colour_priors.empty()) {
    json arr = json::array();
    for (const auto& p : c.colour_priors) arr.push_back(prior_to_json(p));
    doc["colour_priors"] = arr;
  }
  return doc;
}

cdp::CheckConfig parse_check_config(const json& doc) {
  reject_unknown(doc,
                 {"seed", "dp_thetas", "eppf_log_offset", "construction_samples", "finite_mixture_components",
                  "moment_replicates", "marginal_instances", "chain_sweeps", "chain_thin", "loss_instances"},
                 "check config");
  cdp::CheckConfig c;
  c.seed = get_or(doc, "seed", c.seed);
  c.dp_thetas = get_or(doc, "dp_thetas", c.dp_thetas);
  c.eppf_log_offset = get_or(doc, "eppf_log_offset", c.eppf_log_offset);
  c.construction_samples = get_or(doc, "construction_samples", c.construction_samples);
  c.finite_mixture_components = get_or(doc, "finite_mixture_components", c.finite_mixture_components);
  c.moment_replicates = get_or(doc, "moment_replicates", c.moment_replicates);
  c.marginal_instances = get_or(doc, "marginal_instances", c.marginal_instances);
  c.chain_sweeps = get_or(doc, "chain_sweeps", c.chain_sweeps);
  c.chain_thin = get_or(doc, "chain_thin", c.chain_thin);
  c.loss_instances = get_or(doc, "loss_instances", c.loss_instances);
  for (int v : {c.construction_samples, c.finite_mixture_components, c.moment_replicates, c.marginal_instances,
                c.chain_sweeps, c.chain_thin, c.loss_instances}) {
    if (v < 1) throw cdp::InvalidInput("check counts must be positive");
  }
  for (double theta : c.dp_thetas) {
    if (!(theta > 0.0)) throw cdp::DomainError("DP concentration must be positive (got " + std::to_string(theta) + ")");
  }
  return c;
}

cdp::CheckConfig load_check_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw cdp::LoadError("cannot open check config " + path.string());
  try {
    return parse_check_config(json::parse(in));
  } catch (const json::exception& e) {
    throw cdp::LoadError(path.string() + ": " + e.what());
  }
}

Eigen::MatrixXd default_time_design() {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(9, 5);
  const double embryonic[] = {11, 13, 15, 18, 21};
  for (int s = 0; s < 5; ++s) {
    z(s, 0) = 1.0;
    z(s, 1) = embryonic[s];
  }
  const double postnatal[] = {0, 7, 14};
  for (int s = 0; s < 3; ++s) {
    z(5 + s, 2) = 1.0;
    z(5 + s, 3) = postnatal[s];
  }
  z(8, 4) = 1.0;
  return z;
}

cdp::DesignBlock build_design(const RunConfig& cfg, int samples) {
  cdp::DesignBlock d;
  if (cfg.design_z) {
    d.z = load_matrix_csv(*cfg.design_z);
  } else if (samples == 9) {
    d.z = default_time_design();
  } else {
    throw cdp::InvalidInput("data has " + std::to_string(samples) +
                            " samples; the default time design needs 9, so supply design.z");
  }
  d.x = cfg.design_x ? load_matrix_csv(*cfg.design_x) : Eigen::MatrixXd(d.z.rows(), 0);
  if (d.z.rows() != samples) {
    throw cdp::InvalidInput("design Z has " + std::to_string(d.z.rows()) + " rows but the data has " +
                            std::to_string(samples) + " samples");
  }
  if (d.x.rows() != samples) throw cdp::InvalidInput("design X row count does not match the data");
  d.validate();
  return d;
}

}  // namespace cdpclust
