#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class ParamRole { weight, bias, norm };

inline const char* role_name(ParamRole r) {
  switch (r) {
    case ParamRole::weight: return "weight";
    case ParamRole::bias: return "bias";
    case ParamRole::norm: return "norm";
  }
  return "?";
}

// Named collection of real-valued arrays. Shapes are fixed after
// construction; insertion order is preserved and defines all iteration
// and tie-break orders downstream.
class ParamStore {
 public:
  Mat& add(const std::string& name, Eigen::Index rows, Eigen::Index cols,
           ParamRole role) {
    if (values_.count(name))
      throw std::invalid_argument("duplicate parameter name: " + name);
    order_.push_back(name);
    roles_[name] = role;
    return values_[name] = Mat::Zero(rows, cols);
  }

  Mat& at(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end())
      throw std::out_of_range("no such parameter: " + name);
    return it->second;
  }
  const Mat& at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end())
      throw std::out_of_range("no such parameter: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return values_.count(name) > 0; }

  ParamRole role(const std::string& name) const { return roles_.at(name); }
  bool prunable(const std::string& name) const {
    return roles_.at(name) == ParamRole::weight;
  }

  const std::vector<std::string>& names() const { return order_; }

  std::vector<std::string> prunable_names() const {
    std::vector<std::string> out;
    for (const auto& n : order_)
      if (prunable(n)) out.push_back(n);
    return out;
  }

  std::size_t size() const { return order_.size(); }

  // total element count, optionally restricted to prunable arrays
  std::int64_t count_params(bool prunable_only = false) const {
    std::int64_t total = 0;
    for (const auto& n : order_) {
      if (prunable_only && !prunable(n)) continue;
      total += values_.at(n).size();
    }
    return total;
  }

  bool same_layout(const ParamStore& o) const {
    if (order_ != o.order_) return false;
    for (const auto& n : order_) {
      const Mat& a = values_.at(n);
      const Mat& b = o.values_.at(n);
      if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
      if (roles_.at(n) != o.roles_.at(n)) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, Mat> values_;
  std::map<std::string, ParamRole> roles_;
};

// Gradients / optimizer moments keyed identically to a ParamStore.
using GradStore = std::map<std::string, Mat>;

inline GradStore zeros_like(const ParamStore& p) {
  GradStore g;
  for (const auto& n : p.names())
    g[n] = Mat::Zero(p.at(n).rows(), p.at(n).cols());
  return g;
}

}  // namespace tg
