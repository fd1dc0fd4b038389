#pragma once

// Driving data for chordal Loewner evolution: driving functions xi_k(t),
// relative weights mu_k(t), and the half-plane capacity schedule hcap(t) = -A^0(t).

#include "bl/error.hpp"

#include "json.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bl {

// A scalar function of time with its derivative. Built-in kinds serialize to
// JSON; custom ones exist only in code.
class TimeFunction {
 public:
  TimeFunction()
      : kind_("const"),
        params_({{"kind", "const"}, {"value", 0.0}}),
        f_([](double) { return 0.0; }),
        df_([](double) { return 0.0; }) {}

  static TimeFunction constant(double value);
  static TimeFunction linear(double value, double rate);
  // Piecewise-linear interpolation of (t, v); constant beyond the ends.
  static TimeFunction samples(std::vector<double> t, std::vector<double> v);
  // offset + amplitude * sin(omega t + phase)
  static TimeFunction sine(double offset, double amplitude, double omega, double phase = 0.0);
  static TimeFunction custom(std::function<double(double)> f, std::function<double(double)> df,
                             std::vector<double> breakpoints = {});

  double operator()(double t) const { return f_(t); }
  double derivative(double t) const { return df_(t); }
  // Points where the derivative may jump; integrators restart there.
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::string& kind() const { return kind_; }

  nlohmann::json to_json() const;
  static TimeFunction from_json(const nlohmann::json& j, const std::string& where);

 private:
  std::string kind_;
  nlohmann::json params_;
  std::function<double(double)> f_;
  std::function<double(double)> df_;
  std::vector<double> breaks_;
};

struct Branch {
  TimeFunction xi;
  TimeFunction weight = TimeFunction::constant(1.0);
};

struct DrivingSpec {
  std::vector<Branch> branches;
  TimeFunction hcap = TimeFunction::linear(0.0, 2.0);
  double t_end = 1.0;

  static DrivingSpec single(TimeFunction xi, TimeFunction hcap = TimeFunction::linear(0.0, 2.0), double t_end = 1.0);

  // dA^0/dt = -hcap'(t) <= 0.
  double capacity_rate(double t) const { return -hcap.derivative(t); }
  std::size_t size() const { return branches.size(); }
  std::vector<double> breakpoints(double t0, double t1) const;

  // Checks sum of weights == 1, weights >= 0, hcap(0) == 0 and hcap
  // nondecreasing on a sample of [0, t_end]. Throws PreconditionError.
  void validate(int samples = 64) const;

  nlohmann::json to_json() const;
  static DrivingSpec from_json(const nlohmann::json& j);
};

// Strict-key helper shared by the JSON readers: throws ConfigError naming the
// first key of `j` not in `allowed`.
void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed, const std::string& where);

}  // namespace bl
