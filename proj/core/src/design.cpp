#include "survcontour/design.hpp"

#include <algorithm>
#include <cmath>

#include "survcontour/error.hpp"

namespace survcontour {

DesignEncoding::DesignEncoding(const SurvivalDataset& data, std::span<const std::string> covariates) {
  for (const auto& name : covariates) {
    const Column& c = data.column(name);
    EncodedTerm term;
    term.column = name;
    term.kind = c.kind();
    if (c.is_categorical()) {
      term.levels = c.levels();
      std::vector<std::size_t> counts(term.levels.size(), 0);
      for (int code : c.codes()) ++counts[static_cast<std::size_t>(code)];
      term.reference = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      for (std::size_t k = 0; k < term.levels.size(); ++k) {
        if (static_cast<int>(k) != term.reference) names_.push_back(name + "=" + term.levels[k]);
      }
    } else {
      names_.push_back(name);
    }
    terms_.push_back(std::move(term));
  }
  const Eigen::MatrixXd x = encode(data);
  const auto n = static_cast<double>(x.rows());
  means_ = x.colwise().mean().transpose();
  scales_.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - means_(j)).square().sum();
    scales_(j) = std::sqrt(ss / n);
  }
}

Eigen::MatrixXd DesignEncoding::encode(const SurvivalDataset& data) const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()),
                                            static_cast<Eigen::Index>(width()));
  Eigen::Index col = 0;
  for (const auto& term : terms_) {
    const Column& c = data.column(term.column);
    if (term.kind == ColumnKind::categorical) {
      if (!c.is_categorical()) throw ValidationError("column '" + term.column + "' changed kind");
      // Map the data's codes onto the encoding's levels by name.
      std::vector<Eigen::Index> target(c.levels().size(), -1);
      for (std::size_t k = 0; k < c.levels().size(); ++k) {
        auto it = std::find(term.levels.begin(), term.levels.end(), c.levels()[k]);
        if (it == term.levels.end()) {
          throw ValidationError("unknown level '" + c.levels()[k] + "' for '" + term.column + "'");
        }
        const auto level = static_cast<int>(it - term.levels.begin());
        if (level == term.reference) continue;
        target[k] = col + (level < term.reference ? level : level - 1);
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto t = target[static_cast<std::size_t>(c.codes()[i])];
        if (t >= 0) x(static_cast<Eigen::Index>(i), t) = 1.0;
      }
      col += static_cast<Eigen::Index>(term.levels.size()) - 1;
    } else {
      const auto& v = c.values();
      for (std::size_t i = 0; i < data.size(); ++i) x(static_cast<Eigen::Index>(i), col) = v[i];
      ++col;
    }
  }
  return x;
}

Eigen::VectorXd DesignEncoding::encode(const CovariateValues& x) const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width()));
  Eigen::Index col = 0;
  for (const auto& term : terms_) {
    auto it = x.find(term.column);
    if (it == x.end()) throw ValidationError("missing value for covariate '" + term.column + "'");
    if (term.kind == ColumnKind::categorical) {
      const auto* level = std::get_if<std::string>(&it->second);
      if (!level) throw ValidationError("covariate '" + term.column + "' is categorical; expected a level");
      auto lv = std::find(term.levels.begin(), term.levels.end(), *level);
      if (lv == term.levels.end()) {
        throw ValidationError("unknown level '" + *level + "' for '" + term.column + "'");
      }
      const auto k = static_cast<int>(lv - term.levels.begin());
      if (k != term.reference) row(col + (k < term.reference ? k : k - 1)) = 1.0;
      col += static_cast<Eigen::Index>(term.levels.size()) - 1;
    } else {
      const auto* value = std::get_if<double>(&it->second);
      if (!value) throw ValidationError("covariate '" + term.column + "' is continuous; expected a number");
      row(col++) = *value;
    }
  }
  return row;
}

void require_full_rank(const Eigen::MatrixXd& centered, const std::vector<std::string>& names) {
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < centered.cols(); ++j) {
    const Eigen::VectorXd col = centered.col(j);
    const double norm = col.norm();
    const double scale = std::max(1.0, centered.col(j).cwiseAbs().maxCoeff());
    if (norm <= 1e-10 * scale * std::sqrt(static_cast<double>(centered.rows()))) {
      throw RankDeficiencyError("rank deficiency: column '" + names[static_cast<std::size_t>(j)] +
                                    "' is constant",
                                {names[static_cast<std::size_t>(j)]});
    }
    if (!kept.empty()) {
      Eigen::MatrixXd basis(centered.rows(), static_cast<Eigen::Index>(kept.size()));
      for (std::size_t k = 0; k < kept.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = centered.col(kept[k]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
      const Eigen::VectorXd coef = qr.solve(col);
      const double resid = (col - basis * coef).norm();
      if (resid <= 1e-8 * norm) {
        std::vector<std::string> involved;
        for (std::size_t k = 0; k < kept.size(); ++k) {
          if (std::abs(coef(static_cast<Eigen::Index>(k))) > 1e-8) {
            involved.push_back(names[static_cast<std::size_t>(kept[k])]);
          }
        }
        involved.push_back(names[static_cast<std::size_t>(j)]);
        std::string msg = "rank deficiency: collinear columns";
        for (const auto& n : involved) msg += " '" + n + "'";
        throw RankDeficiencyError(msg, std::move(involved));
      }
    }
    kept.push_back(j);
  }
}

CovariateValues row_values(const SurvivalDataset& data, std::size_t row, std::span<const std::string> covariates) {
  CovariateValues out;
  for (const auto& name : covariates) {
    const Column& c = data.column(name);
    if (c.is_categorical()) out[name] = c.level_at(row);
    else out[name] = c.values()[row];
  }
  return out;
}

}  // namespace survcontour
