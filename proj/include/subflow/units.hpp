#pragma once

// Field-unit <-> SI conversions. Everything inside the library is SI; these
// are only used at config / export boundaries.

namespace subflow::units {

inline constexpr double kMilliDarcy = 9.869233e-16;    // m^2
inline constexpr double kBar = 1.0e5;                  // Pa
inline constexpr double kDay = 86400.0;                // s
inline constexpr double kMilliPascalSecond = 1.0e-3;   // Pa s

constexpr double md_to_m2(double md) { return md * kMilliDarcy; }
constexpr double m2_to_md(double m2) { return m2 / kMilliDarcy; }

constexpr double bar_to_pa(double bar) { return bar * kBar; }
constexpr double pa_to_bar(double pa) { return pa / kBar; }

constexpr double mpas_to_pas(double mpas) { return mpas * kMilliPascalSecond; }
constexpr double pas_to_mpas(double pas) { return pas / kMilliPascalSecond; }

constexpr double m3_per_day_to_si(double q) { return q / kDay; }
constexpr double si_to_m3_per_day(double q) { return q * kDay; }

constexpr double per_bar_to_per_pa(double c) { return c / kBar; }
constexpr double per_pa_to_per_bar(double c) { return c * kBar; }

constexpr double days_to_s(double d) { return d * kDay; }
constexpr double s_to_days(double s) { return s / kDay; }

}  // namespace subflow::units
