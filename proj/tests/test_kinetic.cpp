#include "bl/kinetic.hpp"
#include "bl/report.hpp"
#include "bl/spectral.hpp"

#include "doctest.h"

#include <filesystem>
#include <numbers>

using namespace bl;

namespace {

constexpr double kPi = std::numbers::pi;

KineticState bump(int nx, int nw, double half_width = 8.0) {
  return init_from_function(uniform_window(half_width, nw), PeriodicGrid(nx, 2 * kPi), [](double w, double x) {
    const double c = w - 0.3 * std::sin(x);
    return (1 + 0.2 * std::cos(x)) * std::exp(-c * c);
  });
}

double benney_max(int nx, double ds, double s_end) {
  auto st = bump(nx, nx + 1);
  std::vector<MomentField> hist{moments(st, 3)};
  const int steps = static_cast<int>(std::lround(s_end / ds));
  for (int k = 0; k < steps; ++k) {
    st = step(st, ds);
    hist.push_back(moments(st, 3));
  }
  return benney_residual(hist).max;
}

}  // namespace

TEST_CASE("spectral derivative and shift") {
  const PeriodicGrid g(32, 2 * kPi);
  std::vector<double> f, nyq;
  for (double x : g.points()) {
    f.push_back(std::sin(3 * x));
    nyq.push_back(std::cos(16 * x));
  }
  const auto d = spectral_dx(f, g.length);
  for (int i = 0; i < g.n; ++i) CHECK(d[static_cast<std::size_t>(i)] == doctest::Approx(3 * std::cos(3 * g.x(i))).epsilon(1e-12));
  for (double v : spectral_dx(nyq, g.length)) CHECK(std::abs(v) < 1e-12);
  const auto s = fourier_shift(f, g.length, 0.4);
  for (int i = 0; i < g.n; ++i) CHECK(s[static_cast<std::size_t>(i)] == doctest::Approx(std::sin(3 * (g.x(i) - 0.4))).epsilon(1e-12));
  CHECK(periodic_integral(f, g.length) == doctest::Approx(0.0));
}

TEST_CASE("gaussian moments") {
  const auto st = init_from_function(uniform_window(9.0, 401), PeriodicGrid(8, 2 * kPi),
                                     [](double w, double) { return std::exp(-w * w); });
  const auto m = moments(st, 4);
  const double rp = std::sqrt(kPi);
  CHECK(m.A[0][3] == doctest::Approx(rp).epsilon(1e-10));
  CHECK(std::abs(m.A[1][3]) < 1e-12);
  CHECK(m.A[2][3] == doctest::Approx(rp / 2).epsilon(1e-10));
  CHECK(m.A[4][3] == doctest::Approx(3 * rp / 4).epsilon(1e-10));
  // H^2 = A^2 + (A^0)^2 pointwise.
  CHECK(m.h_rows()[2][0] == doctest::Approx(rp / 2 + kPi).epsilon(1e-10));
}

TEST_CASE("OpenMP kernels equal the serial references") {
  auto a = bump(64, 65), b = a;
  advect_x_serial(a, 0.013);
  advect_x_omp(b, 0.013);
  CHECK(a.phi == b.phi);
  std::vector<double> force(64);
  for (int i = 0; i < 64; ++i) force[static_cast<std::size_t>(i)] = 0.3 * std::sin(a.x.x(i));
  kick_w_serial(a, force, 0.02);
  kick_w_omp(b, force, 0.02);
  CHECK(a.phi == b.phi);
  const auto s1 = step(a, 0.01, {KernelMode::serial}), s2 = step(a, 0.01, {KernelMode::parallel});
  CHECK(s1.phi == s2.phi);
}

TEST_CASE("free streaming is an exact shift") {
  auto st = bump(64, 65);
  const auto before = st;
  advect_x_serial(st, 0.05);
  for (int iw = 0; iw < st.nw(); iw += 8) {
    const double a = st.w_grid[static_cast<std::size_t>(iw)] * 0.05;
    std::vector<double> row(before.phi.begin() + iw * 64, before.phi.begin() + (iw + 1) * 64);
    const auto shifted = fourier_shift(row, st.x.length, a);
    for (int ix = 0; ix < 64; ++ix) CHECK(st.at(iw, ix) == doctest::Approx(shifted[static_cast<std::size_t>(ix)]).epsilon(1e-12));
  }
}

TEST_CASE("mass is conserved and the Vlasov residual is small") {
  auto st = bump(64, 65);
  const double m0 = mass(st);
  const auto s0 = st;
  const auto s1 = step(s0, 0.01), s2 = step(s1, 0.01);
  CHECK(std::abs(mass(s2) - m0) < 1e-10 * m0);
  const std::vector<std::complex<double>> z{{0.0, 1.0}, {0.5, 2.0}};
  CHECK(vlasov_residual(s0, s1, s2, z) < 1e-2);
}

TEST_CASE("Benney residual of kinetic moments converges at second order") {
  const double coarse = benney_max(64, 0.02, 0.2), fine = benney_max(128, 0.01, 0.2);
  CHECK(std::log2(coarse / fine) > 1.8);
}

TEST_CASE("initial data validation") {
  const PeriodicGrid g(8, 2 * kPi);
  const auto w = uniform_window(2.0, 9);
  std::vector<std::complex<double>> f(9 * 8, {0.0, 0.0});
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {w[i / 8] * 0.1, 0.0};
  CHECK_THROWS_AS(init_from_map(f, w, g), DomainError);  // not decayed at the window edge
  for (auto& v : f) v = {v.real() * 30, 0.5};
  CHECK_THROWS_AS(init_from_map(f, w, g), DomainError);  // complex-valued phi
  CHECK(decay_window([](double q) { return std::exp(-q * q); }) > std::sqrt(std::log(1e12)));
}

TEST_CASE("checkpoint round trip") {
  const auto st = step(bump(16, 17), 0.01);
  const auto path = std::filesystem::temp_directory_path() / "bl_checkpoint_test.csv";
  report::write_checkpoint(path, st);
  const auto back = report::read_checkpoint(path);
  CHECK(back.phi == st.phi);
  CHECK(back.w_grid == st.w_grid);
  CHECK(back.s == st.s);
  std::filesystem::remove(path);
}
