#include "bl/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bl::report {

using nlohmann::json;

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json series_json(const AsymptoticSeries<double>& s) { return {{"order", s.order}, {"coeffs", s.coeffs}}; }

json series_json(const AsymptoticSeries<Rational>& s) {
  json c = json::array();
  for (const auto& v : s.coeffs) c.push_back(to_string(v));
  return {{"order", s.order}, {"coeffs", c}};
}

AsymptoticSeries<Rational> series_from_json(const json& j) {
  if (j.is_array()) {
    std::vector<Rational> c;
    for (const auto& v : j) c.push_back(v.is_string() ? parse_rational(v.get<std::string>()) : parse_rational(v.dump()));
    return AsymptoticSeries<Rational>(c);
  }
  require_keys(j, {"order", "coeffs"}, "series");
  auto s = series_from_json(j.at("coeffs"));
  if (j.contains("order") && j.at("order").get<int>() != s.order) throw ConfigError("series: order does not match coeffs");
  return s;
}

json faber_json(const FaberPolynomial<double>& p) { return {{"n", p.index}, {"coeffs", p.coeffs}}; }

json faber_json(const FaberPolynomial<Rational>& p) {
  json c = json::array();
  for (const auto& v : p.coeffs) c.push_back(to_string(v));
  return {{"n", p.index}, {"coeffs", c}};
}

json residual_json(const std::string& op, double max, double l2, const json& grid) {
  return {{"op", op}, {"max", max}, {"l2", l2}, {"grid", grid}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << number(r[i]);
    os << "\n";
  }
  write_text(path, os.str());
}

void write_complex_series(const fs::path& path, const std::vector<double>& t, const std::vector<cplx>& z) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < t.size(); ++i) rows.push_back({t[i], z[i].real(), z[i].imag()});
  write_csv(path, {"t", "re", "im"}, rows);
}

void write_time_split(const fs::path& path, const TimeSplitField& f) {
  std::vector<std::vector<double>> rows;
  for (std::size_t is = 0; is < f.s_grid.size(); ++is)
    for (std::size_t ix = 0; ix < f.x_grid.size(); ++ix) rows.push_back({f.x_grid[ix], f.s_grid[is], f.t_values[is][ix]});
  write_csv(path, {"x", "s", "t"}, rows);
}

void write_moment_history(const fs::path& path, const std::vector<MomentField>& history, const json& meta) {
  std::vector<std::vector<double>> rows;
  for (const auto& f : history)
    for (int ix = 0; ix < f.grid.n; ++ix)
      for (std::size_t n = 0; n < f.A.size(); ++n) rows.push_back({f.s, f.grid.x(ix), static_cast<double>(n), f.A[n][static_cast<std::size_t>(ix)]});
  write_csv(path, {"s", "x", "n", "value"}, rows);
  json m = meta;
  if (!history.empty()) m["grid"] = {{"n", history[0].grid.n}, {"length", history[0].grid.length}, {"N", history[0].N}};
  m["slices"] = history.size();
  write_json(fs::path(path.string() + ".meta.json"), m);
}

void write_checkpoint(const fs::path& path, const KineticState& state) {
  std::ostringstream os;
  os << "# nw," << state.nw() << "\n# nx," << state.nx() << "\n# length," << number(state.x.length) << "\n# s,"
     << number(state.s) << "\n# w";
  for (double w : state.w_grid) os << "," << number(w);
  os << "\n";
  for (int iw = 0; iw < state.nw(); ++iw) {
    for (int ix = 0; ix < state.nx(); ++ix) os << (ix ? "," : "") << number(state.at(iw, ix));
    os << "\n";
  }
  write_text(path, os.str());
}

KineticState read_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  KineticState st;
  int nw = -1, nx = -1;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) { throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + what); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (line.rfind("# ", 0) == 0) {
      const std::string key = cells[0].substr(2);
      if (cells.size() < 2) fail("header without values");
      if (key == "nw") nw = std::stoi(cells[1]);
      else if (key == "nx") nx = std::stoi(cells[1]);
      else if (key == "length") st.x.length = std::stod(cells[1]);
      else if (key == "s") st.s = std::stod(cells[1]);
      else if (key == "w") for (std::size_t i = 1; i < cells.size(); ++i) st.w_grid.push_back(std::stod(cells[i]));
      else fail("unknown header key " + key);
      continue;
    }
    if (nx < 0) fail("matrix before header");
    if (static_cast<int>(cells.size()) != nx) fail("expected " + std::to_string(nx) + " values");
    for (const auto& c : cells) st.phi.push_back(std::stod(c));
  }
  st.x.n = nx;
  if (nw < 0 || static_cast<int>(st.w_grid.size()) != nw || st.phi.size() != static_cast<std::size_t>(nw) * static_cast<std::size_t>(nx))
    throw ConfigError(path.string() + ": checkpoint shape mismatch");
  return st;
}

}  // namespace bl::report
