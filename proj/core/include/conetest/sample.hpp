#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace conetest {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest dimension accepted by routines that enumerate all 2^p subsets.
inline constexpr int kMaxExhaustiveDim = 20;

/// Blocks whose reciprocal condition estimate falls below 1/kConditionCap
/// are treated as singular.
inline constexpr double kConditionCap = 1e12;

/// An index set a of {0..p-1} together with its complement a'.
///
/// Stored as a bitmask; bit i set means coordinate i belongs to a. Iterating
/// masks 0, 1, ..., 2^p - 1 gives the lexicographic subset order used by the
/// exhaustive routines.
class SubsetPartition {
 public:
  SubsetPartition(int dim, std::uint32_t mask);

  static SubsetPartition full(int dim);
  static SubsetPartition empty(int dim);
  static SubsetPartition from_indices(int dim, const std::vector<int>& indices);

  int dim() const noexcept { return dim_; }
  std::uint32_t mask() const noexcept { return mask_; }
  int size() const noexcept;
  bool contains(int i) const noexcept { return (mask_ >> i) & 1u; }
  bool is_full() const noexcept { return size() == dim_; }
  bool is_empty() const noexcept { return mask_ == 0; }

  std::vector<int> indices() const;
  std::vector<int> complement() const;

  /// One-based, e.g. "{1,3}" or "{}".
  std::string to_string() const;

  friend bool operator==(const SubsetPartition&, const SubsetPartition&) = default;

 private:
  int dim_;
  std::uint32_t mask_;
};

/// Sufficient statistics of an n x p sample: mean and unbiased covariance
/// (divisor n - 1).
struct SampleSummary {
  int n = 0;
  int p = 0;
  Vector mean;
  Matrix cov;

  bool positive_definite() const;
};

/// Column means and the divisor-(n-1) covariance of `data` (rows are
/// observations). Throws InsufficientDataError for n < 2 and InputError for
/// non-finite entries.
SampleSummary summarize(const Matrix& data);

/// Builds a summary from already-computed statistics after shape checks.
SampleSummary make_summary(int n, Vector mean, Matrix cov);

/// Mean and covariance of block a after regressing out block a'.
struct ConditionalBlock {
  Vector mean_cond;
  Matrix cov_cond;
};

ConditionalBlock conditional_block(const Vector& mean, const Matrix& cov,
                                   const SubsetPartition& part);
ConditionalBlock conditional_block(const SampleSummary& s,
                                   const SubsetPartition& part);

/// Indicator of the active-subset condition for `part`:
/// conditional mean on a strictly positive and cov_{a'a'}^{-1} mean_{a'} <= 0.
bool satisfies_orthant_condition(const Vector& mean, const Matrix& cov,
                                 const SubsetPartition& part);

/// Every subset satisfying the condition, in lexicographic mask order.
std::vector<SubsetPartition> qualifying_subsets(const Vector& mean,
                                                const Matrix& cov);

/// The unique subset satisfying the condition, found by exhaustive search.
/// Throws DegenerateBoundaryError when zero or several subsets qualify.
SubsetPartition active_subset_orthant(const Vector& mean, const Matrix& cov);
SubsetPartition active_subset_orthant(const SampleSummary& s);

/// Branch of the halfspace {theta_p >= 0} decomposition: the full set when the
/// last mean coordinate is positive, otherwise P minus the last coordinate.
SubsetPartition active_branch_halfspace(const SampleSummary& s);

/// Active-subset classification of many points against one fixed covariance.
///
/// For every mask a precomputes the p x p map v = R_a z whose entries are the
/// conditional mean z_{a:a'} on a and cov_{a'a'}^{-1} z_{a'} on a', so each
/// subset test is one matrix-vector product and a sign check.
class OrthantClassifier {
 public:
  explicit OrthantClassifier(const Matrix& cov);

  int dim() const noexcept { return dim_; }

  /// First qualifying mask in lexicographic order; throws
  /// DegenerateBoundaryError if none qualifies.
  std::uint32_t classify(const Vector& z) const;

  /// Number of qualifying masks (1 away from boundaries).
  int qualifying_count(const Vector& z) const;

 private:
  bool qualifies(std::uint32_t mask, const Vector& z, Vector& work) const;

  int dim_;
  std::vector<Matrix> maps_;
};

namespace detail {

/// Cholesky factor of a symmetric block; throws ConditioningError (tagged with
/// `mask`) if the block is not positive definite or exceeds the condition cap.
Eigen::LLT<Matrix> checked_llt(const Matrix& block, std::uint32_t mask);

}  // namespace detail

}  // namespace conetest
