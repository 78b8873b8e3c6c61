#include "cpr/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cpr/error.hpp"

namespace cpr {

int Rng::uniform_int(int n) {
  if (n <= 0) throw ConfigError("uniform_int requires n > 0");
  // rejection sampling, no modulo bias
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

double Rng::normal() {
  double u1 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::save_state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (is.fail()) throw StateError("malformed rng state string");
}

}  // namespace cpr
