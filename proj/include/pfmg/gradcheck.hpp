// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference checks of the tape gradients, in double
// precision. Each suite draws random inputs and parameters at several
// points and compares every analytic partial derivative with
// (f(x + eps) - f(x - eps)) / (2 eps) evaluated without the tape.

#ifndef PFMG_GRADCHECK_HPP
#define PFMG_GRADCHECK_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfmg/tensor.hpp"

namespace pfmg {

struct GradCheckOptions {
  std::size_t points = 10;
  double epsilon = 1e-5;
  double tolerance = 1e-4;  // relative, used where max(|analytic|, |numeric|) > floor
  double floor = 1e-8;      // below it the absolute error must stay under floor
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  std::string name;
  std::size_t points = 0;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  double max_absolute_error_small = 0.0;  // over coordinates below the floor
  bool passed = true;
};

/// Scalar-valued function of the inputs. It must only combine them through
/// tensor operations so the same code runs tracked and untracked.
using ScalarFn = std::function<Tensor<double>(std::span<const Tensor<double>>)>;

/// Compares tape and finite-difference gradients at one input point and
/// folds the errors into `result`. A positive `deep_floor` replaces the
/// relative/absolute split with diff / max(|analytic|, |numeric|, deep_floor).
void check_point(const ScalarFn& fn, const std::vector<Tensor<double>>& inputs,
                 const GradCheckOptions& options, GradCheckResult& result,
                 double deep_floor = 0.0);

/// Names accepted by run_gradcheck: tensor, pfme, mgaa, agva, cmra,
/// interaction, losses, model.
const std::vector<std::string>& gradcheck_modules();

/// Runs every suite of `module`, or all suites when it is empty.
/// Throws ConfigError for an unknown module.
std::vector<GradCheckResult> run_gradcheck(std::string_view module = {},
                                           const GradCheckOptions& options = {});

}  // namespace pfmg

#endif  // PFMG_GRADCHECK_HPP
