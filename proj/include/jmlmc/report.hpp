#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jmlmc/study.hpp"

namespace jmlmc {

/// study.csv columns: method,L,h_L,rep,estimate,reference,rel_error
void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);
/// Inverse of write_study_csv; IoError on a malformed table.
std::vector<StudyRow> read_study_csv(std::istream& is);

/// summary.csv columns: method,L,h_L,reps,rel_rmse,fitted_slope
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Two log-log panels: relative RMSE against h_L with order 1 and 2 guide
/// lines, and relative RMSE against mean wall time per estimator run.
std::string render_rmse_svg(const std::vector<SummaryRow>& rows);

}  // namespace jmlmc
