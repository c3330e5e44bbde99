// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/schedule.hpp"

#include <nlohmann/json.hpp>

namespace chsteer {

TrigPoly H0Value::to_poly() const {
    TrigPoly p(Rational::from_double_exact(c_const));
    p.add_cos(1, Rational::from_double_exact(c_cos));
    p.add_sin(1, Rational::from_double_exact(c_sin));
    return p;
}

H0Value H0Value::from_poly(const TrigPoly& p) {
    if (p.degree() > 1) throw std::invalid_argument("H0Value: polynomial is not in H0");
    H0Value v;
    v.c_const = p.const_term().to_double();
    v.c_cos = p.cos_coeff(1).to_double();
    v.c_sin = p.sin_coeff(1).to_double();
    return v;
}

void ControlSchedule::append(Rational duration, H0Value value) {
    if (duration.sign() <= 0) throw std::invalid_argument("ControlSchedule: duration must be positive");
    segments_.push_back({std::move(duration), value});
}

void ControlSchedule::append(const ControlSchedule& tail) {
    segments_.insert(segments_.end(), tail.segments_.begin(), tail.segments_.end());
}

Rational ControlSchedule::total_duration() const {
    Rational t;
    for (const auto& s : segments_) t += s.duration;
    return t;
}

nlohmann::json ControlSchedule::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : segments_) {
        j.push_back({{"dt", s.duration.to_double()},
                     {"c0", s.value.c_const},
                     {"ccos", s.value.c_cos},
                     {"csin", s.value.c_sin}});
    }
    return j;
}

ControlSchedule ControlSchedule::from_json(const nlohmann::json& j) {
    ControlSchedule sched;
    for (const auto& sj : j) {
        H0Value v;
        v.c_const = sj.at("c0").get<double>();
        v.c_cos = sj.at("ccos").get<double>();
        v.c_sin = sj.at("csin").get<double>();
        sched.append(Rational::from_double_exact(sj.at("dt").get<double>()), v);
    }
    return sched;
}

}  // namespace chsteer
