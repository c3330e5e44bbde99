// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include "chsteer/trig_poly.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chsteer {

/// The four-function induction gadget: with phi_1..phi_4 below and eta = 0,
/// the F-image is supported purely on frequency m+1 (all lower-frequency
/// byproducts cancel across the four functions):
///
///   phi_1 =  cos x + sin x
///   phi_2 = -cos x + sin x
///   phi_3 =  alpha cos(mx) + beta sin(mx) + cos x + sin x
///   phi_4 = -beta  cos(mx) + alpha sin(mx) + cos x - sin x
///
/// Requires m >= 2.
std::array<TrigPoly, 4> gadget(int m, const Rational& alpha, const Rational& beta);

/// Closed form of f_image(0, gadget(m, alpha, beta)):
///
///   (alpha-beta)(m+1){1 - (m-2)/(1+(m+1)^2)} sin((m+1)x)
///   - (alpha+beta)(m+1){1 + (2-m)/(1+(m+1)^2)} cos((m+1)x)
///
/// Valid for all m >= 1 (the planner relies on m = 1 staying in H0).
TrigPoly gadget_image(int m, const Rational& alpha, const Rational& beta);

/// Common bracket factor (m+1){1 + (2-m)/(1+(m+1)^2)} of the closed form;
/// strictly positive for every m >= 1 since the reduced numerator is
/// m^2 + m + 4.
Rational gadget_leading(int m);

/// One membership certificate: sin(mx) or cos(mx) lies in H_{m-1}, witnessed
/// by explicit phi's whose exact F-image has the recorded leading
/// coefficient. pass is the exact equality check of the expansion against
/// the closed form.
struct CertificateRow {
    int m;
    std::string mode;     // "sin", "cos", or "seed" for the trivial m = 1 row
    std::string witness;  // human-readable phi description
    Rational leading;
    bool pass;
};

/// Certifies sin(mx), cos(mx) in H_{m-1} for 1 <= m <= M. For m = 2 the
/// classical single-phi witnesses are recorded (coefficients -3/5 and -6/5); for
/// m >= 3 the gadget with (alpha, beta) = (1, -1) and (1, 1).
std::vector<CertificateRow> certify_basis(int M);

bool all_pass(const std::vector<CertificateRow>& rows);
std::string certificate_csv(const std::vector<CertificateRow>& rows);

struct MoveNode;

/// A plan-tree child: either an exact H0 element (degree <= 1, level 0) or a
/// nested move realizing a deeper target.
using MoveChild = std::variant<TrigPoly, std::unique_ptr<MoveNode>>;

/// One elementary steering move: realizes eta + sum_i drift(phi_i) where the
/// phi_i are the realized values of the children. level n means the realized
/// vector lies in H_n; every child has strictly smaller level.
struct MoveNode {
    TrigPoly eta;  // exact H0 element (degree <= 1)
    std::vector<MoveChild> phis;
    int level = 1;
};

/// Recursive steering plan for an exact trig-polynomial target. residual is
/// the exact difference target - realized(root); the planner only returns
/// plans with residual identically zero.
struct MovePlan {
    std::optional<MoveNode> root;  // empty for the zero target
    TrigPoly target;
    TrigPoly residual;
};

int child_level(const MoveChild& c);
/// Exact realized vector of a child (the leaf itself, or the nested node's
/// bottom-up f_image).
TrigPoly child_realized(const MoveChild& c);

/// Exact bottom-up re-evaluation of f_image over the tree.
TrigPoly realized_value(const MoveNode& node);

/// Compiles a target into a plan with residual exactly zero. Frequencies are
/// peeled from deg(target) down: an even frequency 2m is realized by pure
/// mode-m phi's via a difference-of-squares split of the exact drift
/// coefficients (the frequency-doubling identity), an odd frequency m+1
/// solves the gadget closed form's diagonal 2x2 system at m; constant and
/// frequency-1 residues are absorbed into eta.
MovePlan decompose(const TrigPoly& target);

struct PlanStats {
    int depth = 0;
    int move_count = 0;  // total phi children across all nodes
    double max_coeff_magnitude = 0.0;
};

PlanStats plan_stats(const MovePlan& plan);

nlohmann::json plan_to_json(const MovePlan& plan);
MovePlan plan_from_json(const nlohmann::json& j);

}  // namespace chsteer
