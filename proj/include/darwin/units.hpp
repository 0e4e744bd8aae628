#pragma once

#include <string>

namespace darwin {

/// Reduced Gaussian units. The speed of light is a runtime dial so that 1/c^2
/// orders can be probed directly; hbar = 0 selects the classical limits.
class UnitSystem {
 public:
  static constexpr double kDefaultC = 137.036;

  UnitSystem() = default;

  double c() const { return c_; }
  double hbar() const { return hbar_; }
  double kB() const { return kB_; }
  double inv_c2() const { return 1.0 / (c_ * c_); }
  bool classical() const { return hbar_ == 0.0; }

  /// beta = 1 / (kB T)
  double beta(double temperature) const;

  const std::string& length_unit() const { return length_unit_; }
  const std::string& mass_unit() const { return mass_unit_; }
  const std::string& charge_unit() const { return charge_unit_; }

  friend UnitSystem make_units(double c, double hbar, double kB, std::string length_unit,
                               std::string mass_unit, std::string charge_unit);

 private:
  double c_ = kDefaultC;
  double hbar_ = 1.0;
  double kB_ = 1.0;
  std::string length_unit_ = "bohr";
  std::string mass_unit_ = "electron mass";
  std::string charge_unit_ = "elementary charge";
};

/// Throws InvalidArgument for non-finite arguments, c <= 0, hbar < 0 or kB <= 0.
UnitSystem make_units(double c = UnitSystem::kDefaultC, double hbar = 1.0, double kB = 1.0,
                      std::string length_unit = "bohr", std::string mass_unit = "electron mass",
                      std::string charge_unit = "elementary charge");

}  // namespace darwin
