#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvlingam/multiset.hpp"

namespace lvlingam {

inline constexpr int kMaxCumulantOrder = 6;

/// n x p_o observations with optional column labels. Rejects n < 2 and
/// non-finite entries.
struct Sample {
  Sample(Eigen::MatrixXd data, std::vector<std::string> labels = {});

  Eigen::MatrixXd data;
  std::vector<std::string> labels;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
};

/// Symmetric order-k tensor stored by sorted index multiset.
class CumulantTensor {
 public:
  CumulantTensor(int order, std::size_t dim);

  int order() const { return order_; }
  std::size_t dim() const { return dim_; }

  /// Any permutation of the same multiset addresses the same entry. Missing
  /// entries read as zero.
  double operator()(std::span<const std::size_t> idx) const;
  double at(std::initializer_list<std::size_t> idx) const;
  void set(std::span<const std::size_t> idx, double value);

  const std::map<IndexKey, double>& values() const { return values_; }

 private:
  void check(std::span<const std::size_t> idx) const;

  int order_;
  std::size_t dim_;
  std::map<IndexKey, double> values_;
};

/// Diagonal cumulants of the exogenous noises, one row per noise (in mixing
/// matrix column order) and one column per order 2..max_order.
class NoiseCumulants {
 public:
  NoiseCumulants(Eigen::MatrixXd values, int max_order);

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  int max_order() const { return max_order_; }
  double at(std::size_t noise, int order) const;
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
  int max_order_;
};

/// Anything that can answer joint-cumulant queries over `dim()` variables.
///
/// Implementations are exactly multilinear in the variables, so a linear
/// change of variables can be applied either to the data or to the cumulants.
/// Cumulant queries on one object are not safe to call concurrently (results
/// are memoized); distinct objects are independent.
class CumulantSource : public std::enable_shared_from_this<CumulantSource> {
 public:
  virtual ~CumulantSource() = default;

  virtual std::size_t dim() const = 0;
  virtual int max_order() const = 0;
  virtual double cumulant(std::span<const std::size_t> idx) const = 0;

  /// Source for the variables W * V, where V are this source's variables.
  /// The default expands multilinearly over this source's (memoized) cumulants.
  virtual std::shared_ptr<const CumulantSource> linear_map(const Eigen::MatrixXd& w) const;

  double cumulant(std::initializer_list<std::size_t> idx) const {
    return cumulant(std::span<const std::size_t>(idx.begin(), idx.size()));
  }

  /// Variables `columns` of this source, in that order.
  std::shared_ptr<const CumulantSource> select(const std::vector<std::size_t>& columns) const;

 protected:
  void check_query(std::span<const std::size_t> idx) const;
  /// Owning pointer to this object, copying it if it is not shared-owned.
  std::shared_ptr<const CumulantSource> shared_self() const;
  virtual std::shared_ptr<const CumulantSource> clone() const = 0;
};

/// k-statistics for orders 2-4 and plug-in cumulants for orders 5-6 on a
/// column-centered copy of the data.
class SampleCumulants : public CumulantSource {
 public:
  explicit SampleCumulants(const Sample& s);
  explicit SampleCumulants(const Eigen::MatrixXd& data);

  std::size_t dim() const override { return static_cast<std::size_t>(centered_.cols()); }
  int max_order() const override { return kMaxCumulantOrder; }
  using CumulantSource::cumulant;
  double cumulant(std::span<const std::size_t> idx) const override;

  Eigen::Index sample_size() const { return centered_.rows(); }
  /// Central sample moment (1/n normalization) of the multiset.
  double central_moment(const IndexKey& key) const;

 protected:
  std::shared_ptr<const CumulantSource> clone() const override;

 private:
  Eigen::MatrixXd centered_;
  mutable std::map<IndexKey, double> moments_;
  mutable std::map<IndexKey, double> cumulants_;
};

/// Exact cumulants of V_o = B' N from the mixing matrix and the noise cumulants.
class PopulationCumulants : public CumulantSource {
 public:
  PopulationCumulants(Eigen::MatrixXd bprime, NoiseCumulants noise);

  std::size_t dim() const override { return static_cast<std::size_t>(bprime_.rows()); }
  int max_order() const override { return noise_.max_order(); }
  using CumulantSource::cumulant;
  double cumulant(std::span<const std::size_t> idx) const override;
  std::shared_ptr<const CumulantSource> linear_map(const Eigen::MatrixXd& w) const override;

  const Eigen::MatrixXd& bprime() const { return bprime_; }
  const NoiseCumulants& noise() const { return noise_; }

 protected:
  std::shared_ptr<const CumulantSource> clone() const override;

 private:
  Eigen::MatrixXd bprime_;
  NoiseCumulants noise_;
};

/// Cumulants read from explicitly supplied tensors (one per order).
class TensorCumulants : public CumulantSource {
 public:
  explicit TensorCumulants(std::vector<CumulantTensor> tensors);

  std::size_t dim() const override { return dim_; }
  int max_order() const override { return max_order_; }
  using CumulantSource::cumulant;
  double cumulant(std::span<const std::size_t> idx) const override;

 protected:
  std::shared_ptr<const CumulantSource> clone() const override;

 private:
  std::map<int, CumulantTensor> tensors_;
  std::size_t dim_ = 0;
  int max_order_ = 0;
};

/// W * V for a base source, evaluated by multilinear expansion over the base
/// cumulants (which stay memoized in the base).
class MappedCumulants : public CumulantSource {
 public:
  MappedCumulants(std::shared_ptr<const CumulantSource> base, Eigen::MatrixXd w);

  std::size_t dim() const override { return static_cast<std::size_t>(w_.rows()); }
  int max_order() const override { return base_->max_order(); }
  using CumulantSource::cumulant;
  double cumulant(std::span<const std::size_t> idx) const override;
  std::shared_ptr<const CumulantSource> linear_map(const Eigen::MatrixXd& w) const override;

 protected:
  std::shared_ptr<const CumulantSource> clone() const override;

 private:
  std::shared_ptr<const CumulantSource> base_;
  Eigen::MatrixXd w_;
  mutable std::map<IndexKey, double> memo_;
};

/// Single k-statistic / plug-in cumulant for the columns in `idx`.
double sample_cumulant(const Sample& s, std::span<const std::size_t> idx);

/// Full order-k tensor c_{i1..ik} = sum_j kappa_k(j) b'_{i1 j} ... b'_{ik j}.
CumulantTensor population_cumulant_tensor(const Eigen::MatrixXd& bprime,
                                          const NoiseCumulants& noise, int order);

/// All order-k entries of a source as a tensor.
CumulantTensor cumulant_tensor(const CumulantSource& src, int order);

/// [c_{i..i}, c_{i..ij}, ..., c_{ij..j}]: entry m has m copies of j, m = 0..k-1.
Eigen::VectorXd bivariate_cumulant_vector(const CumulantSource& src, std::size_t i,
                                          std::size_t j, int order);

std::shared_ptr<const CumulantSource> make_sample_source(const Sample& s);
std::shared_ptr<const CumulantSource> make_population_source(const Eigen::MatrixXd& bprime,
                                                             const NoiseCumulants& noise);

}  // namespace lvlingam
