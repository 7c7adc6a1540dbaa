#pragma once

#include <optional>

#include <Eigen/Dense>

namespace cdp {

/// Normal-gamma prior on cluster regression coefficients and precision:
///   tau ~ Gamma(a, rate b),  coef | tau ~ N(m, (tau t)^-1).
/// With `fixed_delta` set this is the background variant: the Z-block
/// coefficients are pinned at fixed_delta and (m, t) cover only the X block.
/// Otherwise (m, t) cover [delta; beta], the Z block followed by the X block.
struct NormalGammaSpec {
  double a = 1.0;
  double b = 1.0;
  Eigen::VectorXd m;
  Eigen::MatrixXd t;
  std::optional<Eigen::VectorXd> fixed_delta;

  bool background() const { return fixed_delta.has_value(); }

  /// Throws DomainError unless a, b > 0 and t is symmetric positive definite.
  void validate() const;

  /// Block-diagonal prior over [delta; beta].
  static NormalGammaSpec regular(double a, double b, const Eigen::VectorXd& m_delta, const Eigen::MatrixXd& t_delta,
                                 const Eigen::VectorXd& m_beta, const Eigen::MatrixXd& t_beta);
  static NormalGammaSpec background_cluster(double a, double b, const Eigen::VectorXd& m_beta,
                                            const Eigen::MatrixXd& t_beta, const Eigen::VectorXd& delta0);
};

/// Per-item covariates shared by every item: y_i = Z delta + X beta + eps,
/// Z is S x K', X is S x K (K may be 0).
struct DesignBlock {
  Eigen::MatrixXd z;
  Eigen::MatrixXd x;

  int samples() const { return static_cast<int>(z.rows()); }
  int z_cols() const { return static_cast<int>(z.cols()); }
  int x_cols() const { return static_cast<int>(x.cols()); }

  /// An S x K' design with an empty X block.
  static DesignBlock z_only(Eigen::MatrixXd z);
  void validate() const;
};

/// Sufficient statistics of a cluster's responses: item count, the sum of the
/// response vectors and the sum of their squared norms. Every item shares the
/// design, so these determine the stacked cross-products.
struct ClusterStats {
  int count = 0;
  Eigen::VectorXd sum;
  double sum_sq = 0.0;

  ClusterStats() = default;
  explicit ClusterStats(int samples) : sum(Eigen::VectorXd::Zero(samples)) {}

  static ClusterStats of_item(const Eigen::Ref<const Eigen::VectorXd>& y);
  /// Statistics of the listed rows of `data` (items x samples).
  static ClusterStats of_rows(const Eigen::MatrixXd& data, const std::vector<int>& rows);

  void add(const Eigen::Ref<const Eigen::VectorXd>& y);
  void remove(const Eigen::Ref<const Eigen::VectorXd>& y);
  void merge(const ClusterStats& other);
  void unmerge(const ClusterStats& other);
};

/// Closed-form marginal and predictive densities for one prior and design,
/// computed in coefficient space from ClusterStats. Construction validates the
/// prior against the design and factorizes t once.
class ConjugateMarginal {
 public:
  ConjugateMarginal(NormalGammaSpec prior, DesignBlock design);

  /// log m(Y_C); 0 for an empty cluster.
  double log_marginal(const ClusterStats& stats) const;

  /// log m(Y_C + item) - log m(Y_C).
  double log_predictive(const ClusterStats& item, const ClusterStats& cluster) const;

  /// Conjugate update (a_j, b_j, m_j, t_j); the prior itself when the cluster is empty.
  NormalGammaSpec posterior(const ClusterStats& stats) const;

  const NormalGammaSpec& prior() const { return prior_; }
  const DesignBlock& design() const { return design_; }
  int samples() const { return design_.samples(); }

 private:
  struct Update {
    Eigen::MatrixXd precision;
    Eigen::VectorXd mean;
    double a;
    double b;
    double log_det_precision;
  };
  Update update(const ClusterStats& stats) const;

  NormalGammaSpec prior_;
  DesignBlock design_;
  Eigen::MatrixXd coef_design_;  // [Z X] or X for the background variant
  Eigen::VectorXd offset_;       // 0 or Z * fixed_delta
  Eigen::MatrixXd gram_;         // coef_design' coef_design
  Eigen::VectorXd design_offset_;  // coef_design' offset
  Eigen::VectorXd t_m_;
  double m_t_m_ = 0.0;
  double offset_sq_ = 0.0;
  double log_det_t_ = 0.0;
};

NormalGammaSpec posterior_update(const NormalGammaSpec& prior, const ClusterStats& stats, const DesignBlock& design);

/// Multivariate-t marginal of a regular cluster; prior must not be the background variant.
double log_marginal_regular(const ClusterStats& stats, const DesignBlock& design, const NormalGammaSpec& prior);

/// Multivariate-t marginal of the background cluster; prior needs fixed_delta.
double log_marginal_background(const ClusterStats& stats, const DesignBlock& design, const NormalGammaSpec& prior);

double log_predictive(const ClusterStats& item, const ClusterStats& cluster, const DesignBlock& design,
                      const NormalGammaSpec& prior);

/// log t_nu(x | mu, sigma) in d = x.size() dimensions via a Cholesky factor of sigma.
double log_mvt(const Eigen::VectorXd& x, double nu, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

/// The same marginal evaluated directly as a multivariate t on the stacked
/// e*S response vector, with the e*S x e*S scale matrix built explicitly.
/// O((eS)^3); intended for cross-checking at small e.
double log_marginal_stacked(const Eigen::MatrixXd& rows, const DesignBlock& design, const NormalGammaSpec& prior);

}  // namespace cdp
