#include "ssopt/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ssopt::io {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text) {
  const std::string s(text);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument("parse_double: '" + s + "' is not a number");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (ch != '\r' && ch != '\n') {
      current.push_back(ch);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string flow_state_csv_header(Eigen::Index n_theta, Eigen::Index n_x, std::size_t n_blocks) {
  std::string header = "r";
  for (Eigen::Index k = 0; k < n_theta; ++k) header += ",theta_" + std::to_string(k + 1);
  for (std::size_t i = 0; i < n_blocks; ++i) {
    for (Eigen::Index j = 0; j < n_x; ++j) {
      header += ",x_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
    }
  }
  return header;
}

std::string flow_state_to_csv_row(const FlowState& state) {
  std::string row = format_double(state.r);
  for (Eigen::Index k = 0; k < state.theta.size(); ++k) row += "," + format_double(state.theta(k));
  for (const auto& block : state.states) {
    for (Eigen::Index j = 0; j < block.size(); ++j) row += "," + format_double(block(j));
  }
  return row;
}

FlowState flow_state_from_csv_row(std::string_view row, Eigen::Index n_theta, Eigen::Index n_x,
                                  std::size_t n_blocks) {
  const auto fields = split_csv_line(row);
  const auto expected = 1 + n_theta + n_x * static_cast<Eigen::Index>(n_blocks);
  if (static_cast<Eigen::Index>(fields.size()) != expected) {
    throw std::invalid_argument("flow_state_from_csv_row: expected " + std::to_string(expected) +
                                " fields, got " + std::to_string(fields.size()));
  }
  Vector flat(expected - 1);
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    flat(k) = parse_double(fields[static_cast<std::size_t>(k + 1)]);
  }
  return FlowState::unflatten(flat, n_theta, n_x, n_blocks, parse_double(fields[0]));
}

namespace {

nlohmann::json vector_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector json_vector(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

}  // namespace

std::string flow_state_to_json(const FlowState& state) {
  nlohmann::json j;
  j["r"] = state.r;
  j["theta"] = vector_json(state.theta);
  j["states"] = nlohmann::json::array();
  for (const auto& block : state.states) j["states"].push_back(vector_json(block));
  return j.dump();
}

FlowState flow_state_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  FlowState state;
  state.r = j.at("r").get<double>();
  state.theta = json_vector(j.at("theta"));
  for (const auto& block : j.at("states")) state.states.push_back(json_vector(block));
  return state;
}

std::string trajectory_to_csv(const std::vector<FlowState>& trajectory) {
  if (trajectory.empty()) return "r\n";
  const auto& first = trajectory.front();
  std::ostringstream out;
  out << flow_state_csv_header(first.theta.size(),
                               first.states.empty() ? 0 : first.states.front().size(),
                               first.states.size())
      << '\n';
  for (const auto& s : trajectory) out << flow_state_to_csv_row(s) << '\n';
  return out.str();
}

}  // namespace ssopt::io
