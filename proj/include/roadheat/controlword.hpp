#pragma once

#include <array>

namespace roadheat {

/// One time slot's discrete decision: heating-cable switch index
/// (0 = both off, 1 = grid-fed, 2 = battery-fed), PV routing
/// (true = distribution line, false = battery), and battery routing
/// (0 = hold, 1 = line, 2 = heating cable).
struct ControlWord {
  int switch_index = 0;
  bool pv_to_line = true;
  int battery_dest = 0;

  /// Switch 2 is battery-fed, so the cable-feed routings must agree.
  bool coupling_ok() const { return (switch_index == 2) == (battery_dest == 2); }

  std::array<int, 3> sigma() const {
    std::array<int, 3> s{0, 0, 0};
    s[static_cast<std::size_t>(switch_index)] = 1;
    return s;
  }

  std::array<int, 3> sigma_battery() const {
    std::array<int, 3> s{0, 0, 0};
    s[static_cast<std::size_t>(battery_dest)] = 1;
    return s;
  }

  friend bool operator==(const ControlWord&, const ControlWord&) = default;
};

}  // namespace roadheat
