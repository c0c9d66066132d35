#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ssopt/core.hpp"

namespace ssopt::io {

/// 17 significant digits ("%.17g"), which round-trips every finite double.
/// Non-finite values are written as nan, inf, -inf.
std::string format_double(double value);
/// Throws std::invalid_argument unless the whole field parses.
double parse_double(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

// FlowState as a CSV row: r, theta_1..theta_p, x_1_1..x_1_n, ..., x_m_n.
std::string flow_state_csv_header(Eigen::Index n_theta, Eigen::Index n_x, std::size_t n_blocks);
std::string flow_state_to_csv_row(const FlowState& state);
FlowState flow_state_from_csv_row(std::string_view row, Eigen::Index n_theta, Eigen::Index n_x,
                                  std::size_t n_blocks);

// FlowState as JSON: {"r": .., "theta": [..], "states": [[..], ..]}.
std::string flow_state_to_json(const FlowState& state);
FlowState flow_state_from_json(std::string_view text);

/// One header line and one row per state.
std::string trajectory_to_csv(const std::vector<FlowState>& trajectory);

}  // namespace ssopt::io
