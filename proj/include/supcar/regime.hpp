#pragma once

#include <string>
#include <vector>

#include "supcar/model.hpp"

namespace supcar {

enum class Verdict { yes, no, undetermined };
enum class Dependence { SRD, LRD, infinite_variance, undetermined };
enum class LimitRegime { brownian, generalized_brownian, stable_integral, stable_levy, boundary, not_covered };

std::string to_string(Verdict v);
std::string to_string(Dependence v);
std::string to_string(LimitRegime v);

struct IntegralDiagnostic {
  std::string name;
  double value = 0.0;  // +inf when divergent, NaN when the quadrature failed
  bool divergent = false;
};

struct ExistenceReport {
  Verdict exists = Verdict::undetermined;
  std::string decided_by;
  Verdict direct = Verdict::undetermined;    // integral conditions
  Verdict shortcut = Verdict::undetermined;  // regular-variation thresholds
  std::vector<IntegralDiagnostic> diagnostics;
};

ExistenceReport check_existence(const CharacteristicQuadruple& q);

struct RajputRosinskiReport {
  double I0 = 0.0, I1 = 0.0, I_gauss = 0.0;
  bool finite() const;
};

RajputRosinskiReport check_rajput_rosinski(const CharacteristicQuadruple& q);

Dependence dependence_regime(const CharacteristicQuadruple& q);

// Threshold table on (gaussian part present, alpha, beta_BG, d).
LimitRegime classify_limit(bool gaussian, double alpha, double beta, int d);

struct RegimeReport {
  ExistenceReport existence;
  Dependence dependence = Dependence::undetermined;
  LimitRegime limit = LimitRegime::not_covered;
  double alpha = 0.0;
  double beta_bg = 0.0;
  double b = 0.0;
  int d = 1;
};

RegimeReport limit_regime(const CharacteristicQuadruple& q);

}  // namespace supcar
