#pragma once

// Reference values computed at 50 significant digits by
// tests/oracles/golden_values.py (mpmath), independently of the library.
namespace golden {

inline constexpr double kNthAt0p2mK = 3.9194738787110027578;
inline constexpr double kNthAt0p1mK = 1.7380208490312969696;
inline constexpr double kHighTExpansionAt0p2mK = 3.9005531438425700965;
inline constexpr double kCouplingFig2 = 1207873.9763521479699;
inline constexpr double kPhasePrintedFig2 = 1.3474743925644245289;
inline constexpr double kPhaseFactor2Fig2 = 1.4577256342495429878;
inline constexpr double kGammaPrimeR1 = 2541146.5640622350332;
inline constexpr double kCrossNoiseR1 = 2449735.3727708932226;
inline constexpr double kSingleCouplingRate = 24.778677519152173236;
inline constexpr double kDriveAmplitude = 292011273214.44234618;

}  // namespace golden
