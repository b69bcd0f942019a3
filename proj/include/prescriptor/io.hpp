#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/experiments.hpp"

#include <string>
#include <vector>

namespace prescriptor {

// Shortest decimal text that parses back to the same double; "nan", "inf"
// and "-inf" for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& text);

// Header: method,n,replication,pollution_dims,censoring_rate,true_risk,full_info_risk,P
std::string report_to_csv(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> report_from_csv(const std::string& csv);

// Config echo, aggregates and timings.
std::string report_summary_json(const ExperimentReport& report);

// Header x1..x{dx},y1..y{dy}.
std::string dataset_to_csv(const Matrix& X, const Matrix& Y);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

// Python/matplotlib script plotting mean true risk (or P) against N per
// method from a report CSV.
std::string plot_script(const std::string& command, const std::string& csv_name);

}  // namespace prescriptor
