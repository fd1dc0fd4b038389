#include "bl/driving.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bl {

using nlohmann::json;

void require_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

namespace {

double get_number(const json& j, const std::string& key, const std::string& where, double fallback, bool required) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(where + ": missing key \"" + key + "\"");
    return fallback;
  }
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

}  // namespace

TimeFunction TimeFunction::constant(double value) {
  TimeFunction f = custom([value](double) { return value; }, [](double) { return 0.0; });
  f.kind_ = "const";
  f.params_ = {{"kind", "const"}, {"value", value}};
  return f;
}

TimeFunction TimeFunction::linear(double value, double rate) {
  TimeFunction f = custom([value, rate](double t) { return value + rate * t; }, [rate](double) { return rate; });
  f.kind_ = "linear";
  f.params_ = {{"kind", "linear"}, {"value", value}, {"rate", rate}};
  return f;
}

TimeFunction TimeFunction::samples(std::vector<double> t, std::vector<double> v) {
  if (t.size() != v.size() || t.empty()) throw PreconditionError("samples: t and v must be non-empty and equal length");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw PreconditionError("samples: times must be strictly increasing");
  auto locate = [t](double x) -> std::size_t {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return 0;
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - t.begin() - 1, static_cast<std::ptrdiff_t>(t.size()) - 2));
  };
  auto value = [t, v, locate](double x) {
    if (t.size() == 1) return v[0];
    if (x <= t.front()) return v.front();
    if (x >= t.back()) return v.back();
    const std::size_t i = locate(x);
    const double a = (x - t[i]) / (t[i + 1] - t[i]);
    return (1.0 - a) * v[i] + a * v[i + 1];
  };
  auto slope = [t, v, locate](double x) {
    if (t.size() == 1 || x < t.front() || x >= t.back()) return 0.0;
    const std::size_t i = locate(x);
    return (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
  };
  TimeFunction f = custom(value, slope, t);
  f.kind_ = "samples";
  f.params_ = {{"kind", "samples"}, {"t", t}, {"v", v}};
  return f;
}

TimeFunction TimeFunction::sine(double offset, double amplitude, double omega, double phase) {
  TimeFunction f = custom([=](double t) { return offset + amplitude * std::sin(omega * t + phase); },
                          [=](double t) { return amplitude * omega * std::cos(omega * t + phase); });
  f.kind_ = "sine";
  f.params_ = {{"kind", "sine"}, {"offset", offset}, {"amplitude", amplitude}, {"omega", omega}, {"phase", phase}};
  return f;
}

TimeFunction TimeFunction::custom(std::function<double(double)> f, std::function<double(double)> df,
                                  std::vector<double> breakpoints) {
  TimeFunction out;
  out.kind_ = "custom";
  out.f_ = std::move(f);
  out.df_ = std::move(df);
  out.breaks_ = std::move(breakpoints);
  return out;
}

json TimeFunction::to_json() const {
  if (kind_ == "custom") throw ConfigError("custom time functions cannot be serialized");
  return params_;
}

TimeFunction TimeFunction::from_json(const json& j, const std::string& where) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + ": expected a number or an object with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const") {
    require_keys(j, {"kind", "value"}, where);
    return constant(get_number(j, "value", where, 0.0, true));
  }
  if (kind == "linear") {
    require_keys(j, {"kind", "value", "rate"}, where);
    return linear(get_number(j, "value", where, 0.0, false), get_number(j, "rate", where, 0.0, true));
  }
  if (kind == "samples") {
    require_keys(j, {"kind", "t", "v"}, where);
    if (!j.contains("t") || !j.contains("v")) throw ConfigError(where + ": samples need \"t\" and \"v\"");
    return samples(j.at("t").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
  }
  if (kind == "sine") {
    require_keys(j, {"kind", "offset", "amplitude", "omega", "phase"}, where);
    return sine(get_number(j, "offset", where, 0.0, false), get_number(j, "amplitude", where, 0.0, true),
                get_number(j, "omega", where, 1.0, true), get_number(j, "phase", where, 0.0, false));
  }
  throw ConfigError(where + ": unknown kind \"" + kind + "\"");
}

DrivingSpec DrivingSpec::single(TimeFunction xi, TimeFunction hcap, double t_end) {
  DrivingSpec s;
  s.branches.push_back({std::move(xi), TimeFunction::constant(1.0)});
  s.hcap = std::move(hcap);
  s.t_end = t_end;
  return s;
}

std::vector<double> DrivingSpec::breakpoints(double t0, double t1) const {
  const double lo = std::min(t0, t1);
  const double hi = std::max(t0, t1);
  std::set<double> pts{t0, t1};
  auto add = [&](const TimeFunction& f) {
    for (double b : f.breakpoints())
      if (b > lo && b < hi) pts.insert(b);
  };
  add(hcap);
  for (const auto& br : branches) {
    add(br.xi);
    add(br.weight);
  }
  std::vector<double> out(pts.begin(), pts.end());
  if (t1 < t0) std::reverse(out.begin(), out.end());
  return out;
}

void DrivingSpec::validate(int samples) const {
  if (branches.empty()) throw PreconditionError("driving spec needs at least one branch");
  if (!(t_end >= 0.0)) throw PreconditionError("t_end must be nonnegative");
  if (std::abs(hcap(0.0)) > 1e-12) throw PreconditionError("hcap(0) must be 0");
  for (int i = 0; i <= samples; ++i) {
    const double t = t_end * i / samples;
    double sum = 0.0;
    for (const auto& br : branches) {
      const double w = br.weight(t);
      if (w < 0.0) throw PreconditionError("branch weight negative at t=" + std::to_string(t));
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw PreconditionError("branch weights must sum to 1 (t=" + std::to_string(t) + ")");
    if (hcap.derivative(t) < 0.0) throw PreconditionError("hcap must be nondecreasing (t=" + std::to_string(t) + ")");
  }
}

json DrivingSpec::to_json() const {
  json br = json::array();
  for (const auto& b : branches) br.push_back({{"xi", b.xi.to_json()}, {"weight", b.weight.to_json()}});
  return {{"branches", br}, {"hcap", hcap.to_json()}, {"t_end", t_end}};
}

DrivingSpec DrivingSpec::from_json(const json& j) {
  require_keys(j, {"branches", "hcap", "t_end"}, "driving");
  DrivingSpec s;
  if (!j.contains("branches") || !j.at("branches").is_array() || j.at("branches").empty())
    throw ConfigError("driving.branches: expected a non-empty array");
  const auto& arr = j.at("branches");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "driving.branches[" + std::to_string(i) + "]";
    require_keys(arr[i], {"xi", "weight"}, where);
    if (!arr[i].contains("xi")) throw ConfigError(where + ": missing \"xi\"");
    Branch b;
    b.xi = TimeFunction::from_json(arr[i].at("xi"), where + ".xi");
    b.weight = arr[i].contains("weight") ? TimeFunction::from_json(arr[i].at("weight"), where + ".weight")
                                         : TimeFunction::constant(1.0 / static_cast<double>(arr.size()));
    s.branches.push_back(std::move(b));
  }
  if (j.contains("hcap")) s.hcap = TimeFunction::from_json(j.at("hcap"), "driving.hcap");
  if (j.contains("t_end")) s.t_end = get_number(j, "t_end", "driving", 1.0, true);
  s.validate();
  return s;
}

}  // namespace bl
