#pragma once

#include <initializer_list>

#include <Eigen/Core>

#include "dcfw/point.hpp"

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline dcfw::Point pvec(std::initializer_list<double> v) { return dcfw::Point(vec(v)); }

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd out(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

inline Eigen::VectorXd unit(Eigen::Index n, Eigen::Index i) { return Eigen::VectorXd::Unit(n, i); }

}  // namespace testing
