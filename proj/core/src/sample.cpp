#include "conetest/sample.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "conetest/errors.hpp"

namespace conetest {

SubsetPartition::SubsetPartition(int dim, std::uint32_t mask)
    : dim_(dim), mask_(mask) {
  if (dim < 0 || dim > 31) {
    throw InputError("subset dimension must lie in [0, 31]");
  }
  if (dim < 32 && (mask >> dim) != 0) {
    throw InputError("subset mask has bits beyond the dimension");
  }
}

SubsetPartition SubsetPartition::full(int dim) {
  return SubsetPartition(dim, dim == 0 ? 0u : (~0u >> (32 - dim)));
}

SubsetPartition SubsetPartition::empty(int dim) {
  return SubsetPartition(dim, 0u);
}

SubsetPartition SubsetPartition::from_indices(int dim,
                                              const std::vector<int>& indices) {
  std::uint32_t mask = 0;
  for (int i : indices) {
    if (i < 0 || i >= dim) throw InputError("subset index out of range");
    mask |= 1u << i;
  }
  return SubsetPartition(dim, mask);
}

int SubsetPartition::size() const noexcept { return std::popcount(mask_); }

std::vector<int> SubsetPartition::indices() const {
  std::vector<int> out;
  for (int i = 0; i < dim_; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

std::vector<int> SubsetPartition::complement() const {
  std::vector<int> out;
  for (int i = 0; i < dim_; ++i)
    if (!contains(i)) out.push_back(i);
  return out;
}

std::string SubsetPartition::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : indices()) {
    if (!first) os << ',';
    os << (i + 1);
    first = false;
  }
  os << '}';
  return os.str();
}

bool SampleSummary::positive_definite() const {
  if (p == 0 || cov.rows() != p) return false;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) return false;
  return llt.rcond() > 1.0 / kConditionCap;
}

SampleSummary summarize(const Matrix& data) {
  const auto n = static_cast<int>(data.rows());
  const auto p = static_cast<int>(data.cols());
  if (n < 2) {
    throw InsufficientDataError("at least two observations are required, got " +
                                std::to_string(n));
  }
  if (p < 1) throw InputError("data must have at least one column");
  if (!data.allFinite()) throw InputError("data contains non-finite entries");

  SampleSummary s;
  s.n = n;
  s.p = p;
  s.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  // Symmetrize away rounding in the product.
  s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  return s;
}

SampleSummary make_summary(int n, Vector mean, Matrix cov) {
  if (n < 2) throw InsufficientDataError("summary requires n >= 2");
  const auto p = static_cast<int>(mean.size());
  if (p < 1 || cov.rows() != p || cov.cols() != p) {
    throw InputError("mean and covariance dimensions disagree");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw InputError("summary contains non-finite entries");
  }
  return SampleSummary{n, p, std::move(mean), std::move(cov)};
}

namespace detail {

Eigen::LLT<Matrix> checked_llt(const Matrix& block, std::uint32_t mask) {
  Eigen::LLT<Matrix> llt(block);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1.0 / kConditionCap)) {
    throw ConditioningError("covariance block is singular or ill-conditioned",
                            mask);
  }
  return llt;
}

}  // namespace detail

namespace {

void check_shapes(const Vector& mean, const Matrix& cov,
                  const SubsetPartition& part) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size() ||
      part.dim() != mean.size()) {
    throw InputError("mean, covariance and subset dimensions disagree");
  }
}

}  // namespace

ConditionalBlock conditional_block(const Vector& mean, const Matrix& cov,
                                   const SubsetPartition& part) {
  check_shapes(mean, cov, part);
  const auto a = part.indices();
  const auto ac = part.complement();
  if (ac.empty()) return {mean, cov};
  if (a.empty()) return {Vector(0), Matrix(0, 0)};

  const std::uint32_t complement_mask =
      SubsetPartition::full(part.dim()).mask() & ~part.mask();
  const auto llt = detail::checked_llt(cov(ac, ac), complement_mask);
  const Matrix cross = cov(a, ac);
  ConditionalBlock out;
  out.mean_cond = mean(a) - cross * llt.solve(mean(ac));
  out.cov_cond = cov(a, a) - cross * llt.solve(cross.transpose());
  out.cov_cond = 0.5 * (out.cov_cond + out.cov_cond.transpose()).eval();
  return out;
}

ConditionalBlock conditional_block(const SampleSummary& s,
                                   const SubsetPartition& part) {
  return conditional_block(s.mean, s.cov, part);
}

bool satisfies_orthant_condition(const Vector& mean, const Matrix& cov,
                                 const SubsetPartition& part) {
  check_shapes(mean, cov, part);
  const auto a = part.indices();
  const auto ac = part.complement();
  if (ac.empty()) return (mean.array() > 0.0).all();

  const std::uint32_t complement_mask =
      SubsetPartition::full(part.dim()).mask() & ~part.mask();
  const auto llt = detail::checked_llt(cov(ac, ac), complement_mask);
  const Vector dual = llt.solve(mean(ac));
  if ((dual.array() > 0.0).any()) return false;
  if (a.empty()) return true;
  const Vector cond_mean = mean(a) - cov(a, ac) * dual;
  return (cond_mean.array() > 0.0).all();
}

std::vector<SubsetPartition> qualifying_subsets(const Vector& mean,
                                                const Matrix& cov) {
  const auto p = static_cast<int>(mean.size());
  if (p < 1 || p > kMaxExhaustiveDim) {
    throw InputError("exhaustive subset search supports 1 <= p <= " +
                     std::to_string(kMaxExhaustiveDim));
  }
  std::vector<SubsetPartition> out;
  const std::uint32_t count = 1u << p;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    SubsetPartition part(p, mask);
    if (satisfies_orthant_condition(mean, cov, part)) out.push_back(part);
  }
  return out;
}

SubsetPartition active_subset_orthant(const Vector& mean, const Matrix& cov) {
  const auto hits = qualifying_subsets(mean, cov);
  if (hits.size() != 1) {
    throw DegenerateBoundaryError(
        std::to_string(hits.size()) +
            " subsets satisfy the active-subset condition (expected exactly 1)",
        static_cast<int>(hits.size()));
  }
  return hits.front();
}

SubsetPartition active_subset_orthant(const SampleSummary& s) {
  return active_subset_orthant(s.mean, s.cov);
}

SubsetPartition active_branch_halfspace(const SampleSummary& s) {
  if (s.p < 1) throw InputError("empty summary");
  if (s.mean(s.p - 1) > 0.0) return SubsetPartition::full(s.p);
  return SubsetPartition(s.p, SubsetPartition::full(s.p).mask() &
                                  ~(1u << (s.p - 1)));
}


OrthantClassifier::OrthantClassifier(const Matrix& cov)
    : dim_(static_cast<int>(cov.rows())) {
  // One p x p map per subset; 2^12 of them is already several megabytes.
  constexpr int kMaxClassifierDim = 12;
  if (dim_ < 1 || dim_ > kMaxClassifierDim || cov.cols() != dim_) {
    throw InputError("classifier needs a square covariance with 1 <= p <= " +
                     std::to_string(kMaxClassifierDim));
  }
  const std::uint32_t count = 1u << dim_;
  maps_.resize(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    const SubsetPartition part(dim_, mask);
    const auto a = part.indices();
    const auto ac = part.complement();
    Matrix r = Matrix::Zero(dim_, dim_);
    Matrix inv_cc;
    if (!ac.empty()) {
      const auto llt = detail::checked_llt(cov(ac, ac), ~mask & (count - 1));
      inv_cc = llt.solve(Matrix::Identity(ac.size(), ac.size()));
      // rows a': cov_{a'a'}^{-1} z_{a'}
      for (std::size_t i = 0; i < ac.size(); ++i)
        for (std::size_t j = 0; j < ac.size(); ++j) r(ac[i], ac[j]) = inv_cc(i, j);
    }
    if (!a.empty()) {
      for (std::size_t i = 0; i < a.size(); ++i) r(a[i], a[i]) = 1.0;
      if (!ac.empty()) {
        const Matrix k = Matrix(cov(a, ac)) * inv_cc;
        for (std::size_t i = 0; i < a.size(); ++i)
          for (std::size_t j = 0; j < ac.size(); ++j) r(a[i], ac[j]) = -k(i, j);
      }
    }
    maps_[mask] = std::move(r);
  }
}

bool OrthantClassifier::qualifies(std::uint32_t mask, const Vector& z,
                                  Vector& work) const {
  work.noalias() = maps_[mask] * z;
  for (int i = 0; i < dim_; ++i) {
    const bool in_a = (mask >> i) & 1u;
    if (in_a ? !(work(i) > 0.0) : !(work(i) <= 0.0)) return false;
  }
  return true;
}

std::uint32_t OrthantClassifier::classify(const Vector& z) const {
  Vector work(dim_);
  for (std::uint32_t mask = 0; mask < maps_.size(); ++mask) {
    if (qualifies(mask, z, work)) return mask;
  }
  throw DegenerateBoundaryError("no subset satisfies the active-subset condition",
                                0);
}

int OrthantClassifier::qualifying_count(const Vector& z) const {
  Vector work(dim_);
  int count = 0;
  for (std::uint32_t mask = 0; mask < maps_.size(); ++mask) {
    if (qualifies(mask, z, work)) ++count;
  }
  return count;
}

}  // namespace conetest
