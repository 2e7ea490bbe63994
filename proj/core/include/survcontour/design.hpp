#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "survcontour/dataset.hpp"

namespace survcontour {

// How one covariate maps onto design-matrix columns. Categorical covariates get one dummy per
// non-reference level; the reference is the most frequent level.
struct EncodedTerm {
  std::string column;
  ColumnKind kind = ColumnKind::continuous;
  std::vector<std::string> levels;
  int reference = -1;
};

class DesignEncoding {
 public:
  DesignEncoding() = default;
  DesignEncoding(const SurvivalDataset& data, std::span<const std::string> covariates);

  std::size_t width() const noexcept { return names_.size(); }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  const std::vector<EncodedTerm>& terms() const noexcept { return terms_; }
  // Column means of the training design; the centering used by the fits.
  const Eigen::VectorXd& means() const noexcept { return means_; }
  const Eigen::VectorXd& scales() const noexcept { return scales_; }

  // Uncentered design for every row of data.
  Eigen::MatrixXd encode(const SurvivalDataset& data) const;
  // Uncentered design row for one covariate assignment; throws on a missing covariate or unknown level.
  Eigen::VectorXd encode(const CovariateValues& x) const;

 private:
  std::vector<EncodedTerm> terms_;
  std::vector<std::string> names_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
};

// Throws RankDeficiencyError naming the collinear columns when centered is not of full column rank.
void require_full_rank(const Eigen::MatrixXd& centered, const std::vector<std::string>& names);

// Covariate values of one dataset row.
CovariateValues row_values(const SurvivalDataset& data, std::size_t row, std::span<const std::string> covariates);

}  // namespace survcontour
