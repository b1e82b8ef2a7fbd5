#pragma once

// Krein-type conditions
//   K0: int_{-inf}^{inf} log rho / (1 + w^2)
//   K1: int_0^inf log rho / ((1 + w) sqrt(w))
//   K2: int_0^inf log rho / (1 + w^2)
// and membership in R+ (all moments finite plus K2).

#include <string>
#include <vector>

#include "kreinlab/quad.hpp"
#include "kreinlab/weights.hpp"

namespace kreinlab {

enum class KreinVariant { K0, K1, K2 };

struct KreinReport {
  WeightSpec weight;
  ImproperClass k0, k1, k2;
  bool moments_finite = false;
  int max_moment_checked = 0;
  // log m_k for k = 0..max_moment_checked; +inf where the moment diverges.
  std::vector<double> log_moments;
  bool in_R_plus = false;
  std::vector<std::string> erratum_flags;
};

// K0 needs a full-line weight; K1 and K2 use the density on w >= 0.
ImproperClass krein_value(const WeightSpec& spec, KreinVariant variant, const LadderOptions& opt = {});

// Classifier hints for the variant's integrand derived from the singularity
// profile.
ClassifierHints krein_hints(const SingularityProfile& prof, KreinVariant variant);

// log of int_0^inf w^k rho(w) dw; +inf when the moment diverges.
double log_moment(const WeightSpec& spec, int k);

// Symbolic "all moments finite" test from the tail class.
bool all_moments_finite(const SingularityProfile& prof);

// Fills every Krein status; K0 is taken on the even extension of a
// half-line weight.
KreinReport classify_weight(const WeightSpec& spec, int max_moment = 20);

std::string to_string(KreinVariant v);
std::string krein_csv_header();
std::string krein_csv_row(const KreinReport& r);

}  // namespace kreinlab
