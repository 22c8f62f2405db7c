#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ppcate/dataset.hpp"

namespace ppcate {

// Column naming for CSV ingestion. Defaults follow the documented schema:
// header row with `y`, `z`, covariates `x1..xd` and an optional `tau_true`.
// x_cols overrides the x1..xd pattern with an explicit covariate list.
struct ColumnMap {
  std::string y = "y";
  std::string z = "z";
  std::string tau = "tau_true";
  std::vector<std::string> x_cols;
  bool ignore_extra = false;
};

// Throws ValidationError with row-level diagnostics on malformed input.
// Missing/empty cells are rejected outright; there is no imputation.
Dataset read_dataset_csv(const std::string& path, const ColumnMap& cols = {});

// Covariate-only ingestion for prediction inputs. Outcome/treatment/tau
// columns are tolerated and ignored.
Eigen::MatrixXd read_covariates_csv(const std::string& path,
                                    const ColumnMap& cols = {});

// Round-trip writer: header y,z,x1..xd[,tau_true], full double precision.
void write_dataset_csv(const std::string& path, const Dataset& ds);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace ppcate
