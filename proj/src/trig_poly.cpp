// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/trig_poly.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <sstream>

namespace chsteer {

TrigPoly TrigPoly::cosine(int k, Rational coeff) {
    TrigPoly p;
    if (k == 0) {
        p.const_term_ = std::move(coeff);
    } else {
        p.add_cos(k, coeff);
    }
    return p;
}

TrigPoly TrigPoly::sine(int k, Rational coeff) {
    TrigPoly p;
    if (k != 0) p.add_sin(k, coeff);
    return p;
}

Rational TrigPoly::cos_coeff(int k) const {
    if (k == 0) return const_term_;
    auto it = modes_.find(k);
    return it == modes_.end() ? Rational() : it->second.cos_coeff;
}

Rational TrigPoly::sin_coeff(int k) const {
    auto it = modes_.find(k);
    return it == modes_.end() ? Rational() : it->second.sin_coeff;
}

void TrigPoly::add_cos(int k, const Rational& c) {
    if (c.is_zero()) return;
    if (k < 0) {
        add_cos(-k, c);  // cos is even
        return;
    }
    if (k == 0) {
        const_term_ += c;
        return;
    }
    Mode& m = modes_[k];
    m.cos_coeff += c;
    if (m.cos_coeff.is_zero() && m.sin_coeff.is_zero()) modes_.erase(k);
}

void TrigPoly::add_sin(int k, const Rational& c) {
    if (c.is_zero() || k == 0) return;
    if (k < 0) {
        add_sin(-k, -c);  // sin is odd
        return;
    }
    Mode& m = modes_[k];
    m.sin_coeff += c;
    if (m.cos_coeff.is_zero() && m.sin_coeff.is_zero()) modes_.erase(k);
}

TrigPoly TrigPoly::operator-() const { return scaled(Rational(-1)); }

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
    const_term_ += o.const_term_;
    for (const auto& [k, m] : o.modes_) {
        add_cos(k, m.cos_coeff);
        add_sin(k, m.sin_coeff);
    }
    return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& o) {
    const_term_ -= o.const_term_;
    for (const auto& [k, m] : o.modes_) {
        add_cos(k, -m.cos_coeff);
        add_sin(k, -m.sin_coeff);
    }
    return *this;
}

TrigPoly TrigPoly::scaled(const Rational& c) const {
    TrigPoly out;
    if (c.is_zero()) return out;
    out.const_term_ = const_term_ * c;
    for (const auto& [k, m] : modes_) {
        out.add_cos(k, m.cos_coeff * c);
        out.add_sin(k, m.sin_coeff * c);
    }
    return out;
}

TrigPoly operator*(const TrigPoly& p, const TrigPoly& q) {
    // Expand term by term with the product-to-sum identities:
    //   cos a cos b = (cos(a-b) + cos(a+b)) / 2
    //   sin a sin b = (cos(a-b) - cos(a+b)) / 2
    //   sin a cos b = (sin(a+b) + sin(a-b)) / 2
    struct Term {
        int k;
        Rational c;  // cos coefficient
        Rational s;  // sin coefficient
    };
    auto terms_of = [](const TrigPoly& f) {
        std::vector<Term> t;
        if (!f.const_term().is_zero()) t.push_back({0, f.const_term(), Rational()});
        for (const auto& [k, m] : f.modes()) t.push_back({k, m.cos_coeff, m.sin_coeff});
        return t;
    };
    const Rational half(1, 2);
    TrigPoly out;
    for (const Term& a : terms_of(p)) {
        for (const Term& b : terms_of(q)) {
            int sum = a.k + b.k;
            int dif = a.k - b.k;
            // cos*cos
            Rational cc = a.c * b.c * half;
            out.add_cos(dif, cc);
            out.add_cos(sum, cc);
            // sin*sin
            Rational ss = a.s * b.s * half;
            out.add_cos(dif, ss);
            out.add_cos(sum, -ss);
            // sin(a)*cos(b)
            Rational sc = a.s * b.c * half;
            out.add_sin(sum, sc);
            out.add_sin(dif, sc);
            // cos(a)*sin(b)
            Rational cs = a.c * b.s * half;
            out.add_sin(sum, cs);
            out.add_sin(-dif, cs);
        }
    }
    return out;
}

bool operator==(const TrigPoly& a, const TrigPoly& b) {
    return a.const_term_ == b.const_term_ && a.modes_ == b.modes_;
}

TrigPoly TrigPoly::diff() const {
    TrigPoly out;
    for (const auto& [k, m] : modes_) {
        Rational kk(k);
        out.add_cos(k, m.sin_coeff * kk);
        out.add_sin(k, -(m.cos_coeff * kk));
    }
    return out;
}

TrigPoly TrigPoly::helmholtz() const {
    TrigPoly out;
    out.const_term_ = const_term_;
    for (const auto& [k, m] : modes_) {
        Rational mult(1 + static_cast<long long>(k) * k);
        out.add_cos(k, m.cos_coeff * mult);
        out.add_sin(k, m.sin_coeff * mult);
    }
    return out;
}

TrigPoly TrigPoly::helmholtz_inv() const {
    TrigPoly out;
    out.const_term_ = const_term_;
    for (const auto& [k, m] : modes_) {
        Rational mult(Rational(1) / Rational(1 + static_cast<long long>(k) * k));
        out.add_cos(k, m.cos_coeff * mult);
        out.add_sin(k, m.sin_coeff * mult);
    }
    return out;
}

TrigPoly TrigPoly::low_pass(int max_k) const {
    TrigPoly out;
    out.const_term_ = const_term_;
    for (const auto& [k, m] : modes_) {
        if (k > max_k) break;
        out.add_cos(k, m.cos_coeff);
        out.add_sin(k, m.sin_coeff);
    }
    return out;
}

TrigPoly TrigPoly::high_pass(int max_k) const { return *this - low_pass(max_k); }

double TrigPoly::hs_norm(double s) const {
    double a0 = const_term_.to_double();
    double sum = a0 * a0;
    for (const auto& [k, m] : modes_) {
        double ak = m.cos_coeff.to_double();
        double bk = m.sin_coeff.to_double();
        double w = std::pow(1.0 + static_cast<double>(k) * k, s);
        sum += 0.5 * w * (ak * ak + bk * bk);
    }
    return std::sqrt(sum);
}

Rational TrigPoly::hs_norm_sq_exact(int s) const {
    Rational sum = const_term_ * const_term_;
    const Rational half(1, 2);
    for (const auto& [k, m] : modes_) {
        Rational w = Rational(1 + static_cast<long long>(k) * k).pow(s);
        sum += half * w * (m.cos_coeff * m.cos_coeff + m.sin_coeff * m.sin_coeff);
    }
    return sum;
}

double TrigPoly::max_coeff_magnitude() const {
    double mx = std::abs(const_term_.to_double());
    for (const auto& [k, m] : modes_) {
        mx = std::max(mx, std::abs(m.cos_coeff.to_double()));
        mx = std::max(mx, std::abs(m.sin_coeff.to_double()));
    }
    return mx;
}

double TrigPoly::eval(double x) const {
    double v = const_term_.to_double();
    for (const auto& [k, m] : modes_) {
        v += m.cos_coeff.to_double() * std::cos(k * x);
        v += m.sin_coeff.to_double() * std::sin(k * x);
    }
    return v;
}

std::string TrigPoly::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const Rational& c, const std::string& basis) {
        if (c.is_zero()) return;
        if (!first) os << (c.sign() > 0 ? " + " : " - ");
        else if (c.sign() < 0) os << "-";
        first = false;
        Rational a = c.abs();
        if (basis.empty()) {
            os << a.str();
        } else if (a == Rational(1)) {
            os << basis;
        } else {
            os << a.str() << " " << basis;
        }
    };
    emit(const_term_, "");
    for (const auto& [k, m] : modes_) {
        std::string kx = k == 1 ? "x" : std::to_string(k) + "x";
        emit(m.cos_coeff, "cos " + kx);
        emit(m.sin_coeff, "sin " + kx);
    }
    return os.str();
}

nlohmann::json TrigPoly::to_json() const {
    nlohmann::json j;
    j["a0"] = const_term_.str();
    j["modes"] = nlohmann::json::array();
    for (const auto& [k, m] : modes_) {
        j["modes"].push_back({{"k", k}, {"cos", m.cos_coeff.str()}, {"sin", m.sin_coeff.str()}});
    }
    return j;
}

TrigPoly TrigPoly::from_json(const nlohmann::json& j) {
    TrigPoly p;
    p.const_term_ = Rational::parse(j.at("a0").get<std::string>());
    for (const auto& mj : j.at("modes")) {
        int k = mj.at("k").get<int>();
        if (k < 1) throw std::invalid_argument("TrigPoly: mode frequency must be >= 1");
        p.add_cos(k, Rational::parse(mj.at("cos").get<std::string>()));
        p.add_sin(k, Rational::parse(mj.at("sin").get<std::string>()));
    }
    return p;
}

TrigPoly TrigPoly::parse(std::string_view text) {
    // Grammar: term (('+'|'-') term)*, term = coeff? (('sin'|'cos') freq? 'x')?
    TrigPoly out;
    size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto fail = [&] {
        return std::invalid_argument("TrigPoly: cannot parse \"" + std::string(text) + "\"");
    };
    skip_ws();
    bool any = false;
    while (i < text.size()) {
        int sign = 1;
        if (text[i] == '+' || text[i] == '-') {
            if (text[i] == '-') sign = -1;
            ++i;
            skip_ws();
        } else if (any) {
            throw fail();
        }
        // optional coefficient
        Rational coeff(1);
        bool have_coeff = false;
        size_t start = i;
        while (i < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' || text[i] == '/')) {
            ++i;
        }
        if (i > start) {
            coeff = Rational::parse(text.substr(start, i - start));
            have_coeff = true;
        }
        skip_ws();
        if (i < text.size() && text[i] == '*') {
            ++i;
            skip_ws();
        }
        // optional basis function
        bool is_sin = false, is_cos = false;
        if (text.substr(i, 3) == "sin") {
            is_sin = true;
        } else if (text.substr(i, 3) == "cos") {
            is_cos = true;
        }
        if (is_sin || is_cos) {
            i += 3;
            skip_ws();
            bool paren = i < text.size() && text[i] == '(';
            if (paren) {
                ++i;
                skip_ws();
            }
            long long k = 1;
            size_t ks = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i > ks) k = std::stoll(std::string(text.substr(ks, i - ks)));
            skip_ws();
            if (i >= text.size() || text[i] != 'x') throw fail();
            ++i;
            skip_ws();
            if (paren) {
                if (i >= text.size() || text[i] != ')') throw fail();
                ++i;
            }
            if (k < 1) throw fail();
            Rational c = sign < 0 ? -coeff : coeff;
            if (is_sin) {
                out.add_sin(static_cast<int>(k), c);
            } else {
                out.add_cos(static_cast<int>(k), c);
            }
        } else {
            if (!have_coeff) throw fail();
            out.const_term_ += sign < 0 ? -coeff : coeff;
        }
        any = true;
        skip_ws();
    }
    if (!any) throw fail();
    return out;
}

TrigPoly drift(const TrigPoly& phi) {
    TrigPoly px = phi.diff();
    TrigPoly pxx = px.diff();
    TrigPoly ppx = phi * px;
    TrigPoly pxpxx = px * pxx;
    TrigPoly inner = ppx.scaled(Rational(2)) + pxpxx;
    return -ppx - inner.helmholtz_inv();
}

TrigPoly f_image(const TrigPoly& eta, std::span<const TrigPoly> phis) {
    TrigPoly out = eta;
    for (const TrigPoly& phi : phis) out += drift(phi);
    return out;
}

}  // namespace chsteer
