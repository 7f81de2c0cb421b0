#pragma once

#include <array>

namespace kansa::app {

/// Published final-time profiles for the six-slice caffeine run.
struct ReferenceRow {
  double height;          // cm
  double reference_code;  // commercial finite-element solver
  double collocation;     // original collocation run
  double error_percent;   // as printed
};

inline constexpr std::array<ReferenceRow, 6> kHeadTable{{
    {0.0, 6118.39, 6118.29, 0.00016},
    {-0.2776, 5125.76, 5127.11, 0.0263},
    {-0.5552, 4133.13, 4135.92, 0.0675},
    {-0.8328, 3140.5, 3144.73, 0.13},
    {-1.1104, 2147.87, 2153.54, 0.26},
    {-1.388, 1155.24, 1162.36, 0.62},
}};

inline constexpr std::array<ReferenceRow, 6> kTemperatureTable{{
    {0.0, 88.0, 88.0, 0.0},
    {-0.2776, 87.933, 88.0, 0.0761},
    {-0.5552, 87.866, 88.0, 0.15},
    {-0.8328, 87.798, 88.0, 0.23},
    {-1.1104, 87.73, 88.0, 0.31},
    {-1.388, 87.66, 88.0, 0.39},
}};

inline constexpr double kSolidFinalCollocation = 4.3888e-3;    // Kg/L
inline constexpr double kSolidFinalReferenceCode = 4.32814e-3;  // Kg/L

}  // namespace kansa::app
