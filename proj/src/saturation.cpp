// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/saturation.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace chsteer {

std::array<TrigPoly, 4> gadget(int m, const Rational& alpha, const Rational& beta) {
    if (m < 2) throw std::invalid_argument("gadget: requires m >= 2");
    TrigPoly c1 = TrigPoly::cosine(1);
    TrigPoly s1 = TrigPoly::sine(1);
    TrigPoly cm = TrigPoly::cosine(m);
    TrigPoly sm = TrigPoly::sine(m);
    std::array<TrigPoly, 4> phis;
    phis[0] = c1 + s1;
    phis[1] = -c1 + s1;
    phis[2] = cm.scaled(alpha) + sm.scaled(beta) + c1 + s1;
    phis[3] = cm.scaled(-beta) + sm.scaled(alpha) + c1 - s1;
    return phis;
}

Rational gadget_leading(int m) {
    if (m < 1) throw std::invalid_argument("gadget_leading: requires m >= 1");
    Rational mp1(m + 1);
    Rational denom(1 + static_cast<long long>(m + 1) * (m + 1));
    return mp1 * (Rational(1) + Rational(2 - m) / denom);
}

TrigPoly gadget_image(int m, const Rational& alpha, const Rational& beta) {
    if (m < 1) throw std::invalid_argument("gadget_image: requires m >= 1");
    Rational mp1(m + 1);
    Rational denom(1 + static_cast<long long>(m + 1) * (m + 1));
    Rational sin_bracket = Rational(1) - Rational(m - 2) / denom;
    Rational cos_bracket = Rational(1) + Rational(2 - m) / denom;
    TrigPoly out;
    out.add_sin(m + 1, (alpha - beta) * mp1 * sin_bracket);
    out.add_cos(m + 1, -((alpha + beta) * mp1 * cos_bracket));
    return out;
}

std::vector<CertificateRow> certify_basis(int M) {
    if (M < 1) throw std::invalid_argument("certify_basis: requires M >= 1");
    std::vector<CertificateRow> rows;
    rows.push_back({1, "seed", "1, sin x, cos x span H_0", Rational(1), true});
    if (M >= 2) {
        // Paper witnesses for m = 2.
        TrigPoly sinx = TrigPoly::sine(1);
        TrigPoly mix = TrigPoly::sine(1) + TrigPoly::cosine(1);
        TrigPoly img_sin = f_image(TrigPoly(), std::span(&sinx, 1));
        TrigPoly img_cos = f_image(TrigPoly(), std::span(&mix, 1));
        rows.push_back({2, "sin", "phi = sin x", Rational(-3, 5),
                        img_sin == TrigPoly::sine(2, Rational(-3, 5))});
        rows.push_back({2, "cos", "phi = sin x + cos x", Rational(-6, 5),
                        img_cos == TrigPoly::cosine(2, Rational(-6, 5))});
    }
    for (int m = 3; m <= M; ++m) {
        const int g = m - 1;
        Rational lead = gadget_leading(g);
        // (alpha, beta) = (1, -1) isolates sin(mx); (1, 1) isolates cos(mx).
        auto phis_sin = gadget(g, Rational(1), Rational(-1));
        auto phis_cos = gadget(g, Rational(1), Rational(1));
        TrigPoly exp_sin = f_image(TrigPoly(), std::span<const TrigPoly>(phis_sin));
        TrigPoly exp_cos = f_image(TrigPoly(), std::span<const TrigPoly>(phis_cos));
        bool ok_sin = exp_sin == gadget_image(g, Rational(1), Rational(-1)) &&
                      exp_sin == TrigPoly::sine(m, Rational(2) * lead);
        bool ok_cos = exp_cos == gadget_image(g, Rational(1), Rational(1)) &&
                      exp_cos == TrigPoly::cosine(m, Rational(-2) * lead);
        rows.push_back({m, "sin", "gadget(" + std::to_string(g) + ", 1, -1)",
                        Rational(2) * lead, ok_sin});
        rows.push_back({m, "cos", "gadget(" + std::to_string(g) + ", 1, 1)",
                        Rational(-2) * lead, ok_cos});
    }
    return rows;
}

bool all_pass(const std::vector<CertificateRow>& rows) {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

std::string certificate_csv(const std::vector<CertificateRow>& rows) {
    std::string out = "m,mode,witness,leading_coefficient,pass\n";
    for (const auto& r : rows) {
        out += std::to_string(r.m) + "," + r.mode + ",\"" + r.witness + "\"," +
               r.leading.str() + "," + (r.pass ? "1" : "0") + "\n";
    }
    return out;
}

int child_level(const MoveChild& c) {
    if (std::holds_alternative<TrigPoly>(c)) return 0;
    return std::get<std::unique_ptr<MoveNode>>(c)->level;
}

TrigPoly child_realized(const MoveChild& c) {
    if (const auto* leaf = std::get_if<TrigPoly>(&c)) return *leaf;
    return realized_value(*std::get<std::unique_ptr<MoveNode>>(c));
}

TrigPoly realized_value(const MoveNode& node) {
    std::vector<TrigPoly> phis;
    phis.reserve(node.phis.size());
    for (const auto& c : node.phis) phis.push_back(child_realized(c));
    return f_image(node.eta, phis);
}

namespace {

MoveChild make_child(const TrigPoly& psi) {
    if (psi.degree() <= 1) return MoveChild(psi);
    MovePlan sub = decompose(psi);
    if (!sub.root)
        throw std::logic_error("decompose: nonzero child target produced an empty plan");
    return MoveChild(std::make_unique<MoveNode>(std::move(*sub.root)));
}

}  // namespace

MovePlan decompose(const TrigPoly& target) {
    MovePlan plan;
    plan.target = target;
    if (target.is_zero()) return plan;  // empty plan, residual 0

    MoveNode root;
    TrigPoly running = target;

    auto emit = [&](const TrigPoly& psi) {
        running -= drift(psi);
        root.phis.push_back(make_child(psi));
    };

    // Unit-scale rational near sqrt(|x|), so emitted amplitudes track the
    // size of the coefficient they realize (a microscopic target must not be
    // produced as the difference of two O(1) moves).
    auto scale_near_sqrt = [](double x) {
        Rational q = rationalize(std::sqrt(std::abs(x)), 1'000'000).value;
        if (q.sign() <= 0) q = Rational(1, 1'000'000);
        return q;
    };

    for (int mu = target.degree(); mu >= 2; --mu) {
        Rational a = running.cos_coeff(mu);
        Rational b = running.sin_coeff(mu);
        if (a.is_zero() && b.is_zero()) continue;

        if (mu % 2 == 0) {
            // Even frequency 2m from pure mode-m functions:
            //   drift(a cos(mx) + b sin(mx))
            //     = K_m [(a^2 - b^2) sin(2mx) - 2ab cos(2mx)],
            //   K_m = 3m(m^2+1) / (2(4m^2+1)) > 0,
            // with no byproduct at any other frequency. A difference of
            // squares x = ((x+q^2)/2q)^2 - ((x-q^2)/2q)^2 with q near
            // sqrt(|x|) keeps the amplitudes rational and of the right size.
            const int m = mu / 2;
            const long long mm = m;
            Rational K(3 * mm * (mm * mm + 1), 2 * (4 * mm * mm + 1));
            if (!b.is_zero()) {
                Rational x = b / K;
                Rational q = scale_near_sqrt(x.to_double());
                Rational half_q = (q * Rational(2)).reciprocal();
                Rational ca = ((x + q * q) * half_q).abs();  // cos(mx) amplitude
                Rational cb = ((x - q * q) * half_q).abs();  // sin(mx) amplitude
                if (!ca.is_zero()) emit(TrigPoly::cosine(m, ca));
                if (!cb.is_zero()) emit(TrigPoly::sine(m, cb));
            }
            if (!a.is_zero()) {
                Rational y = -(a / (K * Rational(2)));
                Rational q = scale_near_sqrt(y.to_double());
                Rational half_q = (q * Rational(2)).reciprocal();
                Rational cs = ((y + q * q) * half_q).abs();  // cos(mx)+sin(mx) amplitude
                Rational cu = ((y - q * q) * half_q).abs();  // cos(mx)-sin(mx) amplitude
                if (!cs.is_zero())
                    emit(TrigPoly::cosine(m, cs) + TrigPoly::sine(m, cs));
                if (!cu.is_zero())
                    emit(TrigPoly::cosine(m, cu) - TrigPoly::sine(m, cu));
            }
        } else {
            // Odd frequency m+1 through the four-phi gadget. The identity is
            // homogeneous, so a uniform scale lambda on the phis multiplies
            // the image by lambda^2; match it to the target amplitude and
            // solve the diagonal system with lambda^2 folded in.
            const int m = mu - 1;
            Rational lead = gadget_leading(m);  // never zero for m >= 1
            double mag = std::hypot(a.to_double(), b.to_double()) / lead.to_double();
            Rational lambda = scale_near_sqrt(mag);
            Rational eff = lambda * lambda * lead;
            Rational amb = b / eff;     // alpha - beta
            Rational apb = -(a / eff);  // alpha + beta
            Rational alpha = (amb + apb) * Rational(1, 2);
            Rational beta = (apb - amb) * Rational(1, 2);
            for (const TrigPoly& psi : gadget(m, alpha, beta)) emit(psi.scaled(lambda));
        }
    }

    if (running.degree() > 1)
        throw std::logic_error("decompose: peeling left content above frequency 1");
    root.eta = running;

    int max_child = 0;
    for (const auto& c : root.phis) max_child = std::max(max_child, child_level(c));
    root.level = 1 + max_child;

    plan.residual = target - realized_value(root);
    plan.root = std::move(root);
    if (!plan.residual.is_zero())
        throw std::logic_error("decompose: nonzero residual (algebra bug)");
    return plan;
}

namespace {

void stats_walk(const MoveNode& node, PlanStats& st) {
    st.max_coeff_magnitude = std::max(st.max_coeff_magnitude, node.eta.max_coeff_magnitude());
    for (const auto& c : node.phis) {
        ++st.move_count;
        if (const auto* leaf = std::get_if<TrigPoly>(&c)) {
            st.max_coeff_magnitude =
                std::max(st.max_coeff_magnitude, leaf->max_coeff_magnitude());
        } else {
            stats_walk(*std::get<std::unique_ptr<MoveNode>>(c), st);
        }
    }
}

nlohmann::json node_to_json(const MoveNode& node) {
    nlohmann::json j;
    j["level"] = node.level;
    j["eta"] = node.eta.to_json();
    j["phis"] = nlohmann::json::array();
    for (const auto& c : node.phis) {
        if (const auto* leaf = std::get_if<TrigPoly>(&c)) {
            j["phis"].push_back({{"leaf", leaf->to_json()}});
        } else {
            j["phis"].push_back({{"node", node_to_json(*std::get<std::unique_ptr<MoveNode>>(c))}});
        }
    }
    return j;
}

MoveNode node_from_json(const nlohmann::json& j) {
    MoveNode node;
    node.level = j.at("level").get<int>();
    node.eta = TrigPoly::from_json(j.at("eta"));
    for (const auto& cj : j.at("phis")) {
        if (cj.contains("leaf")) {
            node.phis.emplace_back(TrigPoly::from_json(cj.at("leaf")));
        } else {
            node.phis.emplace_back(
                std::make_unique<MoveNode>(node_from_json(cj.at("node"))));
        }
    }
    return node;
}

}  // namespace

PlanStats plan_stats(const MovePlan& plan) {
    PlanStats st;
    if (!plan.root) return st;
    st.depth = plan.root->level;
    stats_walk(*plan.root, st);
    return st;
}

nlohmann::json plan_to_json(const MovePlan& plan) {
    nlohmann::json j;
    j["target"] = plan.target.to_json();
    j["residual"] = plan.residual.to_json();
    j["root"] = plan.root ? node_to_json(*plan.root) : nlohmann::json(nullptr);
    return j;
}

MovePlan plan_from_json(const nlohmann::json& j) {
    MovePlan plan;
    plan.target = TrigPoly::from_json(j.at("target"));
    plan.residual = TrigPoly::from_json(j.at("residual"));
    if (!j.at("root").is_null()) plan.root = node_from_json(j.at("root"));
    return plan;
}

}  // namespace chsteer
