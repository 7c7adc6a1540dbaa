#include "cdp/normal_gamma.hpp"

#include <cmath>
#include <numbers>

#include "cdp/error.hpp"
#include "cdp/log_math.hpp"

namespace cdp {

namespace {

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

Eigen::MatrixXd block_diag(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

void NormalGammaSpec::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("normal-gamma shape a must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("normal-gamma rate b must be positive");
  if (m.size() != t.rows()) throw InvalidInput("prior mean and precision differ in dimension");
  if (!is_spd(t)) throw DomainError("prior precision matrix must be symmetric positive definite");
}

NormalGammaSpec NormalGammaSpec::regular(double a, double b, const Eigen::VectorXd& m_delta,
                                         const Eigen::MatrixXd& t_delta, const Eigen::VectorXd& m_beta,
                                         const Eigen::MatrixXd& t_beta) {
  NormalGammaSpec s;
  s.a = a;
  s.b = b;
  s.m.resize(m_delta.size() + m_beta.size());
  s.m << m_delta, m_beta;
  s.t = block_diag(t_delta, t_beta);
  return s;
}

NormalGammaSpec NormalGammaSpec::background_cluster(double a, double b, const Eigen::VectorXd& m_beta,
                                                    const Eigen::MatrixXd& t_beta, const Eigen::VectorXd& delta0) {
  NormalGammaSpec s;
  s.a = a;
  s.b = b;
  s.m = m_beta;
  s.t = t_beta;
  s.fixed_delta = delta0;
  return s;
}

DesignBlock DesignBlock::z_only(Eigen::MatrixXd z) {
  DesignBlock d;
  d.x = Eigen::MatrixXd(z.rows(), 0);
  d.z = std::move(z);
  return d;
}

void DesignBlock::validate() const {
  if (z.rows() < 1) throw InvalidInput("design needs at least one sample row");
  if (x.rows() != z.rows()) throw InvalidInput("Z and X designs differ in row count");
}

ClusterStats ClusterStats::of_item(const Eigen::Ref<const Eigen::VectorXd>& y) {
  ClusterStats s(static_cast<int>(y.size()));
  s.add(y);
  return s;
}

ClusterStats ClusterStats::of_rows(const Eigen::MatrixXd& data, const std::vector<int>& rows) {
  ClusterStats s(static_cast<int>(data.cols()));
  for (int r : rows) s.add(data.row(r).transpose());
  return s;
}

void ClusterStats::add(const Eigen::Ref<const Eigen::VectorXd>& y) {
  ++count;
  sum += y;
  sum_sq += y.squaredNorm();
}

void ClusterStats::remove(const Eigen::Ref<const Eigen::VectorXd>& y) {
  --count;
  sum -= y;
  sum_sq -= y.squaredNorm();
}

void ClusterStats::merge(const ClusterStats& other) {
  count += other.count;
  sum += other.sum;
  sum_sq += other.sum_sq;
}

void ClusterStats::unmerge(const ClusterStats& other) {
  count -= other.count;
  sum -= other.sum;
  sum_sq -= other.sum_sq;
}

ConjugateMarginal::ConjugateMarginal(NormalGammaSpec prior, DesignBlock design)
    : prior_(std::move(prior)), design_(std::move(design)) {
  design_.validate();
  prior_.validate();
  const int s = design_.samples();
  if (prior_.background()) {
    if (prior_.fixed_delta->size() != design_.z_cols()) {
      throw InvalidInput("fixed delta length must equal the number of Z columns");
    }
    if (prior_.m.size() != design_.x_cols()) throw InvalidInput("background prior must cover the X block");
    coef_design_ = design_.x;
    offset_ = design_.z * *prior_.fixed_delta;
  } else {
    if (prior_.m.size() != design_.z_cols() + design_.x_cols()) {
      throw InvalidInput("regular prior must cover the Z and X blocks");
    }
    coef_design_.resize(s, design_.z_cols() + design_.x_cols());
    coef_design_ << design_.z, design_.x;
    offset_ = Eigen::VectorXd::Zero(s);
  }
  gram_ = coef_design_.transpose() * coef_design_;
  design_offset_ = coef_design_.transpose() * offset_;
  t_m_ = prior_.t * prior_.m;
  m_t_m_ = prior_.m.dot(t_m_);
  offset_sq_ = offset_.squaredNorm();
  if (prior_.t.size() > 0) log_det_t_ = log_det_from_llt(Eigen::LLT<Eigen::MatrixXd>(prior_.t));
}

ConjugateMarginal::Update ConjugateMarginal::update(const ClusterStats& stats) const {
  if (stats.sum.size() != samples()) throw InvalidInput("cluster statistics do not match the design");
  const double e = stats.count;
  const double centred_sq = stats.sum_sq - 2.0 * offset_.dot(stats.sum) + e * offset_sq_;

  Update u;
  u.a = prior_.a + 0.5 * e * samples();
  if (gram_.size() == 0) {
    u.precision = gram_;
    u.mean = Eigen::VectorXd(0);
    u.log_det_precision = 0.0;
    u.b = prior_.b + 0.5 * centred_sq;
    return u;
  }
  u.precision = prior_.t + e * gram_;
  const Eigen::VectorXd r = t_m_ + coef_design_.transpose() * stats.sum - e * design_offset_;
  Eigen::LLT<Eigen::MatrixXd> llt(u.precision);
  if (llt.info() != Eigen::Success) throw NumericalFailure("posterior precision is not positive definite");
  u.mean = llt.solve(r);
  u.log_det_precision = log_det_from_llt(llt);
  u.b = prior_.b + 0.5 * (centred_sq + m_t_m_ - r.dot(u.mean));
  return u;
}

double ConjugateMarginal::log_marginal(const ClusterStats& stats) const {
  if (stats.count == 0) return 0.0;
  const Update u = update(stats);
  if (!(u.b > 0.0)) throw NumericalFailure("posterior rate is not positive");
  const double n_obs = static_cast<double>(stats.count) * samples();
  return log_gamma(u.a) - log_gamma(prior_.a) + prior_.a * std::log(prior_.b) - u.a * std::log(u.b) +
         0.5 * (log_det_t_ - u.log_det_precision) - 0.5 * n_obs * std::log(2.0 * std::numbers::pi);
}

double ConjugateMarginal::log_predictive(const ClusterStats& item, const ClusterStats& cluster) const {
  ClusterStats joined = cluster.count == 0 ? ClusterStats(samples()) : cluster;
  joined.merge(item);
  return log_marginal(joined) - log_marginal(cluster);
}

NormalGammaSpec ConjugateMarginal::posterior(const ClusterStats& stats) const {
  if (stats.count == 0) return prior_;
  Update u = update(stats);
  NormalGammaSpec post;
  post.a = u.a;
  post.b = u.b;
  post.m = std::move(u.mean);
  post.t = std::move(u.precision);
  post.fixed_delta = prior_.fixed_delta;
  return post;
}

NormalGammaSpec posterior_update(const NormalGammaSpec& prior, const ClusterStats& stats, const DesignBlock& design) {
  return ConjugateMarginal(prior, design).posterior(stats);
}

double log_marginal_regular(const ClusterStats& stats, const DesignBlock& design, const NormalGammaSpec& prior) {
  if (prior.background()) throw InvalidInput("regular marginal called with a background prior");
  return ConjugateMarginal(prior, design).log_marginal(stats);
}

double log_marginal_background(const ClusterStats& stats, const DesignBlock& design, const NormalGammaSpec& prior) {
  if (!prior.background()) throw InvalidInput("background marginal needs a fixed delta");
  return ConjugateMarginal(prior, design).log_marginal(stats);
}

double log_predictive(const ClusterStats& item, const ClusterStats& cluster, const DesignBlock& design,
                      const NormalGammaSpec& prior) {
  return ConjugateMarginal(prior, design).log_predictive(item, cluster);
}

double log_mvt(const Eigen::VectorXd& x, double nu, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  if (!(nu > 0.0)) throw DomainError("t degrees of freedom must be positive");
  const auto d = static_cast<double>(x.size());
  if (mu.size() != x.size() || sigma.rows() != x.size() || sigma.cols() != x.size()) {
    throw InvalidInput("t density dimensions disagree");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalFailure("t scale matrix is not positive definite");
  const Eigen::VectorXd z = llt.matrixL().solve(x - mu);
  const double quad = z.squaredNorm();
  return log_gamma(0.5 * (nu + d)) - log_gamma(0.5 * nu) - 0.5 * log_det_from_llt(llt) -
         0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * (nu + d) * std::log1p(quad / nu);
}

double log_marginal_stacked(const Eigen::MatrixXd& rows, const DesignBlock& design, const NormalGammaSpec& prior) {
  design.validate();
  prior.validate();
  const Eigen::Index e = rows.rows();
  const Eigen::Index s = design.samples();
  if (e == 0) return 0.0;
  if (rows.cols() != s) throw InvalidInput("response rows do not match the design");

  Eigen::MatrixXd w;
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(s);
  if (prior.background()) {
    w = design.x;
    offset = design.z * *prior.fixed_delta;
  } else {
    w.resize(s, design.z_cols() + design.x_cols());
    w << design.z, design.x;
  }

  Eigen::VectorXd y(e * s);
  Eigen::VectorXd mean(e * s);
  Eigen::MatrixXd stacked_w(e * s, w.cols());
  for (Eigen::Index i = 0; i < e; ++i) {
    y.segment(i * s, s) = rows.row(i).transpose();
    stacked_w.middleRows(i * s, s) = w;
    mean.segment(i * s, s) = offset;
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(e * s, e * s);
  if (w.cols() > 0) {
    mean += stacked_w * prior.m;
    cov += stacked_w * prior.t.inverse() * stacked_w.transpose();
  }
  return log_mvt(y, 2.0 * prior.a, mean, (prior.b / prior.a) * cov);
}

}  // namespace cdp
