#include "darwin/units.hpp"

#include <cmath>

#include "darwin/errors.hpp"

namespace darwin {

double UnitSystem::beta(double temperature) const {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw InvalidArgument("temperature must be positive and finite");
  return 1.0 / (kB_ * temperature);
}

UnitSystem make_units(double c, double hbar, double kB, std::string length_unit,
                      std::string mass_unit, std::string charge_unit) {
  if (!std::isfinite(c) || !std::isfinite(hbar) || !std::isfinite(kB))
    throw InvalidArgument("unit constants must be finite");
  if (c <= 0.0) throw InvalidArgument("speed of light must be positive");
  if (hbar < 0.0) throw InvalidArgument("hbar must be non-negative");
  if (kB <= 0.0) throw InvalidArgument("Boltzmann constant must be positive");
  UnitSystem u;
  u.c_ = c;
  u.hbar_ = hbar;
  u.kB_ = kB;
  u.length_unit_ = std::move(length_unit);
  u.mass_unit_ = std::move(mass_unit);
  u.charge_unit_ = std::move(charge_unit);
  return u;
}

}  // namespace darwin
