#pragma once

// Serialization of results: JSON for series, polynomials and residual reports,
// CSV for trajectories and fields. Numbers are printed with %.17g so equal
// inputs give byte-identical files.

#include "bl/exact.hpp"
#include "bl/faber.hpp"
#include "bl/kinetic.hpp"
#include "bl/loewner.hpp"
#include "bl/series.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bl::report {

namespace fs = std::filesystem;

std::string number(double v);

nlohmann::json series_json(const AsymptoticSeries<double>& s);
nlohmann::json series_json(const AsymptoticSeries<Rational>& s);  // "p/q" strings
AsymptoticSeries<Rational> series_from_json(const nlohmann::json& j);

nlohmann::json faber_json(const FaberPolynomial<double>& p);
nlohmann::json faber_json(const FaberPolynomial<Rational>& p);

nlohmann::json residual_json(const std::string& op, double max, double l2, const nlohmann::json& grid);

void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const nlohmann::json& j);
void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// t,re,im
void write_complex_series(const fs::path& path, const std::vector<double>& t, const std::vector<cplx>& z);
// x,s,t
void write_time_split(const fs::path& path, const TimeSplitField& f);
// s,x,n,value plus <path>.meta.json
void write_moment_history(const fs::path& path, const std::vector<MomentField>& history, const nlohmann::json& meta);

// Header block "# key,values..." followed by the dense phi matrix, one w row per line.
void write_checkpoint(const fs::path& path, const KineticState& state);
KineticState read_checkpoint(const fs::path& path);

}  // namespace bl::report
