#include "cdp/partition_prior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdp/error.hpp"
#include "cdp/log_math.hpp"

namespace cdp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

/// Pads or trims `counts` to the model's colour count. Trimmed colours must be empty.
ColouredCounts fit_colours(const ColouredCounts& counts, int num_colours) {
  ColouredCounts out;
  out.sizes.resize(static_cast<std::size_t>(num_colours));
  for (int k = 0; k < counts.num_colours(); ++k) {
    if (k < num_colours) {
      out.sizes[static_cast<std::size_t>(k)] = counts.sizes[static_cast<std::size_t>(k)];
    } else if (!counts.sizes[static_cast<std::size_t>(k)].empty()) {
      throw InvalidInput("partition uses a colour the model has no parameters for");
    }
  }
  return out;
}

double sum_log_factorial_minus_one(const std::vector<int>& sizes) {
  double s = 0.0;
  for (int n : sizes) s += log_gamma(static_cast<double>(n));
  return s;
}

double dp_closed_form(const std::vector<int>& sizes, int n, double theta) {
  return log_gamma(theta) - log_gamma(theta + n) + static_cast<double>(sizes.size()) * std::log(theta) +
         sum_log_factorial_minus_one(sizes);
}

double dirmult_closed_form(const std::vector<int>& sizes, int n, const DirichletMultinomial& m) {
  const int d = static_cast<int>(sizes.size());
  if (d > m.components) return kLogZero;
  const double kd = m.components * m.delta;
  double s = log_gamma(m.components + 1.0) - log_gamma(m.components - d + 1.0) + log_gamma(kd) - log_gamma(kd + n);
  for (int nj : sizes) s += log_gamma(nj + m.delta) - log_gamma(m.delta);
  return s;
}

// The first item opens a cluster with probability one, so the i = 0 factors
// cancel; this keeps every log argument positive when strength < 0.
double pitman_yor_closed_form(const std::vector<int>& sizes, int n, const PitmanYor& m) {
  const int d = static_cast<int>(sizes.size());
  double s = 0.0;
  for (int i = 1; i < d; ++i) s += std::log(m.strength + i * m.discount);
  for (int i = 1; i < n; ++i) s -= std::log(m.strength + i);
  for (int nj : sizes) {
    for (int r = 1; r < nj; ++r) s += std::log(r - m.discount);
  }
  return s;
}

double cdp_closed_form(const ColouredCounts& c, const ColouredDP& m) {
  double gamma_sum = 0.0;
  for (const auto& cp : m.colours) gamma_sum += cp.gamma;
  const int n = c.total();
  double s = log_gamma(gamma_sum) - log_gamma(n + gamma_sum);
  for (int k = 0; k < c.num_colours(); ++k) {
    const auto& cp = m.colours[static_cast<std::size_t>(k)];
    const int nk = c.colour_total(k);
    if (nk == 0) continue;
    s += log_gamma(cp.theta) + log_gamma(nk + cp.gamma) - log_gamma(nk + cp.theta) - log_gamma(cp.gamma) +
         c.degree(k) * std::log(cp.theta) + sum_log_factorial_minus_one(c.sizes[static_cast<std::size_t>(k)]);
  }
  return s;
}

double background_closed_form(const ColouredCounts& c, const BackgroundDP& m) {
  if (c.degree(kBackgroundColour) > 1) return kLogZero;
  const int n = c.total();
  const int n0 = c.colour_total(kBackgroundColour);
  const auto& regular = c.sizes[kRegularColour];
  return log_gamma(m.gamma + m.theta) - log_gamma(n + m.gamma + m.theta) + log_gamma(n0 + m.gamma) -
         log_gamma(m.gamma) + static_cast<double>(regular.size()) * std::log(m.theta) +
         sum_log_factorial_minus_one(regular);
}

}  // namespace

PartitionPriorModel::PartitionPriorModel(DirichletProcess m) : model_(m) {
  require(m.theta > 0.0 && std::isfinite(m.theta), "DP concentration must be positive");
}

PartitionPriorModel::PartitionPriorModel(DirichletMultinomial m) : model_(m) {
  require(m.components >= 1, "Dirichlet-multinomial needs at least one component");
  require(m.delta > 0.0 && std::isfinite(m.delta), "Dirichlet-multinomial weight must be positive");
}

PartitionPriorModel::PartitionPriorModel(PitmanYor m) : model_(m) {
  require(m.discount >= 0.0 && m.discount < 1.0, "Pitman-Yor discount must lie in [0,1)");
  require(m.strength > -m.discount && std::isfinite(m.strength), "Pitman-Yor strength must exceed -discount");
}

PartitionPriorModel::PartitionPriorModel(ColouredDP m) : model_(m) {
  require(!m.colours.empty(), "coloured DP needs at least one colour");
  for (const auto& c : m.colours) {
    require(c.gamma > 0.0 && std::isfinite(c.gamma), "colour weight gamma must be positive");
    require(c.theta > 0.0 && std::isfinite(c.theta), "colour concentration theta must be positive");
  }
}

PartitionPriorModel::PartitionPriorModel(BackgroundDP m) : model_(m) {
  require(m.gamma > 0.0 && std::isfinite(m.gamma), "background weight gamma must be positive");
  require(m.theta > 0.0 && std::isfinite(m.theta), "DP concentration must be positive");
}

int PartitionPriorModel::num_colours() const {
  return std::visit(Overloaded{[](const ColouredDP& m) { return static_cast<int>(m.colours.size()); },
                               [](const BackgroundDP&) { return 2; }, [](const auto&) { return 1; }},
                    model_);
}

std::string PartitionPriorModel::name() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const DirichletProcess& m) { os << "DP(theta=" << m.theta << ")"; },
                 [&](const DirichletMultinomial& m) {
                   os << "DirMult(k=" << m.components << ",delta=" << m.delta << ")";
                 },
                 [&](const PitmanYor& m) { os << "PitmanYor(alpha=" << m.discount << ",theta=" << m.strength << ")"; },
                 [&](const ColouredDP& m) {
                   os << "CDP(";
                   for (std::size_t k = 0; k < m.colours.size(); ++k) {
                     os << (k ? "," : "") << "(" << m.colours[k].gamma << "," << m.colours[k].theta << ")";
                   }
                   os << ")";
                 },
                 [&](const BackgroundDP& m) { os << "BackgroundCDP(gamma=" << m.gamma << ",theta=" << m.theta << ")"; }},
             model_);
  return os.str();
}

double log_eppf_dp(const Partition& p, double theta) {
  if (!(theta > 0.0)) throw DomainError("DP concentration must be positive");
  return dp_closed_form(p.cluster_sizes(), p.size(), theta);
}

double log_ewens_config(const ConfigurationCounts& a, double theta) {
  if (!(theta > 0.0)) throw DomainError("DP concentration must be positive");
  a.validate();
  const double log_theta = std::log(theta);
  double s = log_gamma(a.n + 1.0) + log_gamma(theta) - log_gamma(theta + a.n);
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    const double r = static_cast<double>(i + 1);
    const double ar = a.a[i];
    s += ar * log_theta - ar * std::log(r) - log_gamma(ar + 1.0);
  }
  return s;
}

double log_eppf_cdp(const ColouredPartition& p, const ColouredDP& params) {
  return log_eppf(PartitionPriorModel(params), p);
}

double log_eppf_background(const ColouredPartition& p, double gamma, double theta) {
  return log_eppf(PartitionPriorModel(BackgroundDP{gamma, theta}), p);
}

double log_eppf(const PartitionPriorModel& model, const ColouredCounts& raw) {
  const ColouredCounts c = fit_colours(raw, model.num_colours());
  const int n = c.total();
  if (n == 0) return 0.0;
  return std::visit(Overloaded{[&](const DirichletProcess& m) { return dp_closed_form(c.sizes[0], n, m.theta); },
                               [&](const DirichletMultinomial& m) { return dirmult_closed_form(c.sizes[0], n, m); },
                               [&](const PitmanYor& m) { return pitman_yor_closed_form(c.sizes[0], n, m); },
                               [&](const ColouredDP& m) { return cdp_closed_form(c, m); },
                               [&](const BackgroundDP& m) { return background_closed_form(c, m); }},
                    model.get());
}

double log_eppf(const PartitionPriorModel& model, const Partition& p) {
  return log_eppf(model, ColouredCounts::uncoloured(p.cluster_sizes()));
}

double log_eppf(const PartitionPriorModel& model, const ColouredPartition& p) { return log_eppf(model, p.counts()); }

double log_eppf_sequential(const PartitionPriorModel& model, const Partition& p) {
  return log_eppf_sequential(model, ColouredPartition::monochrome(p));
}

double log_eppf_sequential(const PartitionPriorModel& model, const ColouredPartition& p) {
  ColouredCounts counts;
  counts.sizes.resize(static_cast<std::size_t>(std::max(p.num_colours(), model.num_colours())));
  // position of each canonical cluster within its colour's size list, once opened
  std::vector<int> slot(static_cast<std::size_t>(p.degree()), -1);
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const int label = p.partition().label_of(i);
    const int colour = p.cluster_colours()[static_cast<std::size_t>(label)];
    const ReallocWeights w = prior_realloc_weights(model, counts);

    std::vector<double> all;
    for (const auto& ex : w.existing) all.insert(all.end(), ex.begin(), ex.end());
    all.insert(all.end(), w.fresh.begin(), w.fresh.end());
    const double norm = log_sum_exp(all);

    auto& sizes = counts.sizes[static_cast<std::size_t>(colour)];
    int& s = slot[static_cast<std::size_t>(label)];
    double chosen;
    if (s < 0) {
      chosen = w.fresh[static_cast<std::size_t>(colour)];
      s = static_cast<int>(sizes.size());
      sizes.push_back(1);
    } else {
      chosen = w.existing[static_cast<std::size_t>(colour)][static_cast<std::size_t>(s)];
      ++sizes[static_cast<std::size_t>(s)];
    }
    if (is_log_zero(chosen)) return kLogZero;
    total += chosen - norm;
  }
  return total;
}

ReallocWeights prior_realloc_weights(const PartitionPriorModel& model, const ColouredCounts& raw) {
  const int model_colours = model.num_colours();
  const ColouredCounts c = fit_colours(raw, model_colours);
  const int out_colours = std::max(raw.num_colours(), model_colours);

  ReallocWeights w;
  w.existing.resize(static_cast<std::size_t>(out_colours));
  w.fresh.assign(static_cast<std::size_t>(out_colours), kLogZero);
  for (int k = 0; k < model_colours; ++k) {
    w.existing[static_cast<std::size_t>(k)].resize(c.sizes[static_cast<std::size_t>(k)].size());
  }

  auto fill = [&](int k, auto&& existing_weight, double fresh) {
    const auto& sizes = c.sizes[static_cast<std::size_t>(k)];
    auto& out = w.existing[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < sizes.size(); ++j) out[j] = existing_weight(sizes[j]);
    w.fresh[static_cast<std::size_t>(k)] = fresh;
  };
  auto safe_log = [](double x) { return x > 0.0 ? std::log(x) : kLogZero; };

  std::visit(
      Overloaded{
          [&](const DirichletProcess& m) {
            fill(0, [](int nj) { return std::log(static_cast<double>(nj)); }, std::log(m.theta));
          },
          [&](const DirichletMultinomial& m) {
            const int d = c.degree(0);
            fill(0, [&](int nj) { return std::log(nj + m.delta); }, safe_log((m.components - d) * m.delta));
          },
          [&](const PitmanYor& m) {
            const int d = c.degree(0);
            fill(0, [&](int nj) { return safe_log(nj - m.discount); }, safe_log(m.strength + m.discount * d));
          },
          [&](const ColouredDP& m) {
            for (int k = 0; k < model_colours; ++k) {
              const auto& cp = m.colours[static_cast<std::size_t>(k)];
              const double nk = c.colour_total(k);
              const double colour_factor = std::log(cp.gamma + nk) - std::log(cp.theta + nk);
              fill(k, [&](int nj) { return std::log(static_cast<double>(nj)) + colour_factor; },
                   std::log(cp.theta) + colour_factor);
            }
          },
          [&](const BackgroundDP& m) {
            const int d0 = c.degree(kBackgroundColour);
            if (d0 > 1) throw InvalidInput("background colour holds more than one cluster");
            const double n0 = c.colour_total(kBackgroundColour);
            fill(kBackgroundColour, [&](int) { return std::log(m.gamma + n0); },
                 d0 == 0 ? std::log(m.gamma) : kLogZero);
            fill(kRegularColour, [](int nj) { return std::log(static_cast<double>(nj)); }, std::log(m.theta));
          }},
      model.get());
  return w;
}

}  // namespace cdp
