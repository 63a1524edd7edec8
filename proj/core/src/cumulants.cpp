#include "lvlingam/cumulants.hpp"

#include <algorithm>
#include <cmath>

#include "lvlingam/errors.hpp"

namespace lvlingam {

Sample::Sample(Eigen::MatrixXd d, std::vector<std::string> l) : data(std::move(d)), labels(std::move(l)) {
  if (data.rows() < 2) throw Error(ErrorCode::kInput, "sample needs at least two rows");
  if (data.cols() < 1) throw Error(ErrorCode::kInput, "sample needs at least one column");
  if (!data.allFinite()) throw Error(ErrorCode::kInput, "sample contains non-finite entries");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(data.cols())) {
    throw Error(ErrorCode::kInput, "label count does not match column count");
  }
}

CumulantTensor::CumulantTensor(int order, std::size_t dim) : order_(order), dim_(dim) {
  if (order < 1) throw Error(ErrorCode::kUnsupportedOrder, "tensor order must be positive");
  if (dim == 0) throw Error(ErrorCode::kInput, "tensor dimension must be positive");
}

void CumulantTensor::check(std::span<const std::size_t> idx) const {
  if (idx.size() != static_cast<std::size_t>(order_)) {
    throw Error(ErrorCode::kInput, "index length does not match tensor order");
  }
  for (std::size_t i : idx) {
    if (i >= dim_) throw Error(ErrorCode::kInput, "tensor index out of range");
  }
}

double CumulantTensor::operator()(std::span<const std::size_t> idx) const {
  check(idx);
  const auto it = values_.find(canonical_key(idx));
  return it == values_.end() ? 0.0 : it->second;
}

double CumulantTensor::at(std::initializer_list<std::size_t> idx) const {
  return (*this)(std::span<const std::size_t>(idx.begin(), idx.size()));
}

void CumulantTensor::set(std::span<const std::size_t> idx, double value) {
  check(idx);
  values_[canonical_key(idx)] = value;
}

NoiseCumulants::NoiseCumulants(Eigen::MatrixXd values, int max_order)
    : values_(std::move(values)), max_order_(max_order) {
  if (max_order_ < 2 || max_order_ > kMaxCumulantOrder) {
    throw Error(ErrorCode::kUnsupportedOrder, "noise cumulants must cover orders 2..k, k <= 6");
  }
  if (values_.cols() != max_order_ - 1) {
    throw Error(ErrorCode::kInput, "noise cumulant table needs one column per order 2..k");
  }
  if (!values_.allFinite()) throw Error(ErrorCode::kInput, "non-finite noise cumulant");
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    if (!(values_(j, 0) > 0.0)) {
      throw Error(ErrorCode::kInput, "noise variances must be strictly positive");
    }
  }
}

double NoiseCumulants::at(std::size_t noise, int order) const {
  if (order < 2 || order > max_order_) {
    throw Error(ErrorCode::kUnsupportedOrder, "noise cumulant order " + std::to_string(order));
  }
  if (noise >= size()) throw Error(ErrorCode::kInput, "noise index out of range");
  return values_(static_cast<Eigen::Index>(noise), order - 2);
}

// CumulantSource

void CumulantSource::check_query(std::span<const std::size_t> idx) const {
  const auto k = static_cast<int>(idx.size());
  if (k < 2 || k > max_order()) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "cumulant order " + std::to_string(k) + " outside 2.." + std::to_string(max_order()));
  }
  for (std::size_t i : idx) {
    if (i >= dim()) throw Error(ErrorCode::kInput, "cumulant index out of range");
  }
}

std::shared_ptr<const CumulantSource> CumulantSource::shared_self() const {
  if (auto self = weak_from_this().lock()) return self;
  return clone();
}

std::shared_ptr<const CumulantSource> CumulantSource::linear_map(const Eigen::MatrixXd& w) const {
  return std::make_shared<MappedCumulants>(shared_self(), w);
}

std::shared_ptr<const CumulantSource> CumulantSource::select(
    const std::vector<std::size_t>& columns) const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(columns.size()),
                                            static_cast<Eigen::Index>(dim()));
  for (std::size_t r = 0; r < columns.size(); ++r) {
    if (columns[r] >= dim()) throw Error(ErrorCode::kInput, "selected column out of range");
    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(columns[r])) = 1.0;
  }
  return linear_map(w);
}

// SampleCumulants

SampleCumulants::SampleCumulants(const Sample& s) : SampleCumulants(s.data) {}

SampleCumulants::SampleCumulants(const Eigen::MatrixXd& data) {
  if (data.rows() < 1 || data.cols() < 1) throw Error(ErrorCode::kInput, "empty sample");
  if (!data.allFinite()) throw Error(ErrorCode::kInput, "sample contains non-finite entries");
  centered_ = data.rowwise() - data.colwise().mean();
}

std::shared_ptr<const CumulantSource> SampleCumulants::clone() const {
  return std::make_shared<SampleCumulants>(*this);
}

double SampleCumulants::central_moment(const IndexKey& key) const {
  if (key.empty()) return 1.0;
  if (key.size() == 1) return 0.0;
  if (auto it = moments_.find(key); it != moments_.end()) return it->second;
  Eigen::ArrayXd prod = centered_.col(static_cast<Eigen::Index>(key[0])).array();
  for (std::size_t r = 1; r < key.size(); ++r) {
    prod *= centered_.col(static_cast<Eigen::Index>(key[r])).array();
  }
  const double m = prod.mean();
  moments_.emplace(key, m);
  return m;
}

double SampleCumulants::cumulant(std::span<const std::size_t> idx) const {
  check_query(idx);
  const auto k = idx.size();
  const auto n_rows = static_cast<std::size_t>(centered_.rows());
  if (n_rows < k) {
    throw Error(ErrorCode::kInsufficientSample, "order-" + std::to_string(k) +
                                                    " cumulant needs at least " +
                                                    std::to_string(k) + " rows");
  }
  IndexKey key = canonical_key(idx);
  if (auto it = cumulants_.find(key); it != cumulants_.end()) return it->second;

  const double n = static_cast<double>(n_rows);
  double value = 0.0;
  switch (k) {
    case 2:
      value = n / (n - 1.0) * central_moment(key);
      break;
    case 3:
      value = n * n / ((n - 1.0) * (n - 2.0)) * central_moment(key);
      break;
    case 4: {
      const auto m2 = [&](std::size_t a, std::size_t b) { return central_moment({key[a], key[b]}); };
      const double pairs = m2(0, 1) * m2(2, 3) + m2(0, 2) * m2(1, 3) + m2(0, 3) * m2(1, 2);
      value = n * n * ((n + 1.0) * central_moment(key) - (n - 1.0) * pairs) /
              ((n - 1.0) * (n - 2.0) * (n - 3.0));
      break;
    }
    default: {
      static constexpr double kSign[] = {1.0, -1.0, 2.0};  // (-1)^(L-1) (L-1)!, L = 1..3
      for (const SetPartition& part : partitions_without_singletons(k)) {
        double term = kSign[part.size() - 1];
        for (const auto& block : part) {
          IndexKey sub;
          sub.reserve(block.size());
          for (std::size_t pos : block) sub.push_back(key[pos]);
          std::sort(sub.begin(), sub.end());
          term *= central_moment(sub);
        }
        value += term;
      }
      break;
    }
  }
  cumulants_.emplace(std::move(key), value);
  return value;
}

// PopulationCumulants

PopulationCumulants::PopulationCumulants(Eigen::MatrixXd bprime, NoiseCumulants noise)
    : bprime_(std::move(bprime)), noise_(std::move(noise)) {
  if (static_cast<std::size_t>(bprime_.cols()) != noise_.size()) {
    throw Error(ErrorCode::kInput, "mixing matrix has " + std::to_string(bprime_.cols()) +
                                       " columns but " + std::to_string(noise_.size()) +
                                       " noise cumulant rows");
  }
  if (bprime_.rows() < 1) throw Error(ErrorCode::kInput, "mixing matrix has no rows");
}

std::shared_ptr<const CumulantSource> PopulationCumulants::clone() const {
  return std::make_shared<PopulationCumulants>(*this);
}

double PopulationCumulants::cumulant(std::span<const std::size_t> idx) const {
  check_query(idx);
  const int k = static_cast<int>(idx.size());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < bprime_.cols(); ++j) {
    double term = noise_.at(static_cast<std::size_t>(j), k);
    for (std::size_t i : idx) term *= bprime_(static_cast<Eigen::Index>(i), j);
    sum += term;
  }
  return sum;
}

std::shared_ptr<const CumulantSource> PopulationCumulants::linear_map(
    const Eigen::MatrixXd& w) const {
  if (w.cols() != bprime_.rows()) throw Error(ErrorCode::kInput, "linear map dimension mismatch");
  return std::make_shared<PopulationCumulants>(w * bprime_, noise_);
}

// TensorCumulants

TensorCumulants::TensorCumulants(std::vector<CumulantTensor> tensors) {
  if (tensors.empty()) throw Error(ErrorCode::kInput, "no tensors supplied");
  dim_ = tensors.front().dim();
  for (auto& t : tensors) {
    if (t.dim() != dim_) throw Error(ErrorCode::kInput, "tensor dimensions differ");
    max_order_ = std::max(max_order_, t.order());
    const int order = t.order();
    tensors_.insert_or_assign(order, std::move(t));
  }
}

std::shared_ptr<const CumulantSource> TensorCumulants::clone() const {
  return std::make_shared<TensorCumulants>(*this);
}

double TensorCumulants::cumulant(std::span<const std::size_t> idx) const {
  check_query(idx);
  const auto it = tensors_.find(static_cast<int>(idx.size()));
  if (it == tensors_.end()) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "no tensor of order " + std::to_string(idx.size()) + " supplied");
  }
  return it->second(idx);
}

// MappedCumulants

MappedCumulants::MappedCumulants(std::shared_ptr<const CumulantSource> base, Eigen::MatrixXd w)
    : base_(std::move(base)), w_(std::move(w)) {
  if (!base_) throw Error(ErrorCode::kInput, "null base source");
  if (static_cast<std::size_t>(w_.cols()) != base_->dim() || w_.rows() < 1) {
    throw Error(ErrorCode::kInput, "linear map dimension mismatch");
  }
  if (!w_.allFinite()) throw Error(ErrorCode::kInput, "non-finite linear map");
}

std::shared_ptr<const CumulantSource> MappedCumulants::clone() const {
  return std::make_shared<MappedCumulants>(*this);
}

std::shared_ptr<const CumulantSource> MappedCumulants::linear_map(const Eigen::MatrixXd& w) const {
  if (w.cols() != w_.rows()) throw Error(ErrorCode::kInput, "linear map dimension mismatch");
  return std::make_shared<MappedCumulants>(base_, w * w_);
}

namespace {

void expand(const Eigen::MatrixXd& w, const IndexKey& key, std::size_t pos, double coef,
            IndexKey& base_idx, std::map<IndexKey, double>& terms) {
  if (pos == key.size()) {
    terms[canonical_key(base_idx)] += coef;
    return;
  }
  const auto row = static_cast<Eigen::Index>(key[pos]);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double v = w(row, c);
    if (v == 0.0) continue;
    base_idx[pos] = static_cast<std::size_t>(c);
    expand(w, key, pos + 1, coef * v, base_idx, terms);
  }
}

}  // namespace

double MappedCumulants::cumulant(std::span<const std::size_t> idx) const {
  check_query(idx);
  IndexKey key = canonical_key(idx);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  std::map<IndexKey, double> terms;
  IndexKey base_idx(key.size());
  expand(w_, key, 0, 1.0, base_idx, terms);
  double value = 0.0;
  for (const auto& [base_key, coef] : terms) value += coef * base_->cumulant(base_key);
  memo_.emplace(std::move(key), value);
  return value;
}

// Free functions

double sample_cumulant(const Sample& s, std::span<const std::size_t> idx) {
  return SampleCumulants(s).cumulant(idx);
}

CumulantTensor cumulant_tensor(const CumulantSource& src, int order) {
  CumulantTensor t(order, src.dim());
  for (const IndexKey& key : multisets(src.dim(), static_cast<std::size_t>(order))) {
    t.set(key, src.cumulant(key));
  }
  return t;
}

CumulantTensor population_cumulant_tensor(const Eigen::MatrixXd& bprime,
                                          const NoiseCumulants& noise, int order) {
  return cumulant_tensor(PopulationCumulants(bprime, noise), order);
}

Eigen::VectorXd bivariate_cumulant_vector(const CumulantSource& src, std::size_t i, std::size_t j,
                                          int order) {
  if (i == j) throw Error(ErrorCode::kInput, "bivariate cumulants need two distinct columns");
  if (i >= src.dim() || j >= src.dim()) throw Error(ErrorCode::kInput, "column out of range");
  Eigen::VectorXd out(order);
  std::vector<std::size_t> idx(static_cast<std::size_t>(order));
  for (int m = 0; m < order; ++m) {
    std::fill(idx.begin(), idx.end(), i);
    std::fill(idx.end() - m, idx.end(), j);
    out(m) = src.cumulant(idx);
  }
  return out;
}

std::shared_ptr<const CumulantSource> make_sample_source(const Sample& s) {
  return std::make_shared<SampleCumulants>(s);
}

std::shared_ptr<const CumulantSource> make_population_source(const Eigen::MatrixXd& bprime,
                                                             const NoiseCumulants& noise) {
  return std::make_shared<PopulationCumulants>(bprime, noise);
}

}  // namespace lvlingam
