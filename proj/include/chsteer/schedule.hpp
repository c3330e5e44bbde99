// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include "chsteer/rational.hpp"
#include "chsteer/trig_poly.hpp"

#include <nlohmann/json_fwd.hpp>

#include <vector>

namespace chsteer {

/// Value in the control space H0 = span{1, sin x, cos x}.
struct H0Value {
    double c_const = 0.0;
    double c_cos = 0.0;
    double c_sin = 0.0;

    bool is_zero() const { return c_const == 0.0 && c_cos == 0.0 && c_sin == 0.0; }
    TrigPoly to_poly() const;
    /// Requires degree(p) <= 1.
    static H0Value from_poly(const TrigPoly& p);
};

/// Piecewise-constant H0-valued control. Durations are exact rationals so
/// schedule arithmetic (notably "durations sum exactly to T") is exact;
/// values are rendered to the solver as constants per segment.
class ControlSchedule {
  public:
    struct Segment {
        Rational duration;  // > 0
        H0Value value;
    };

    ControlSchedule() = default;

    void append(Rational duration, H0Value value);
    void append(const ControlSchedule& tail);

    const std::vector<Segment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }
    std::size_t size() const { return segments_.size(); }
    Rational total_duration() const;

    nlohmann::json to_json() const;
    static ControlSchedule from_json(const nlohmann::json& j);

  private:
    std::vector<Segment> segments_;
};

}  // namespace chsteer
