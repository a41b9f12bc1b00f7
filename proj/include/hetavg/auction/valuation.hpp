/*
   Copyright 2026 The hetavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetavg/core/errors.hpp"

namespace hetavg::auction {

/// Perturbation H of a valuation CDF. H(0) = H(1) = 0 keeps the perturbed
/// CDF pinned at both ends.
class Perturbation {
public:
    Perturbation(std::function<double(double)> value, std::function<double(double)> slope,
                 std::string label)
        : value_(std::move(value)), slope_(std::move(slope)), label_(std::move(label)) {
        if (std::abs(value_(0.0)) > 1e-14 || std::abs(value_(1.0)) > 1e-14) {
            throw DomainError("perturbation '" + label_ + "' must vanish at v = 0 and v = 1");
        }
    }

    /// c v (1 - v)
    static Perturbation bump(double c = 1.0) {
        return {[c](double v) { return c * v * (1.0 - v); }, [c](double v) { return c * (1.0 - 2.0 * v); },
                label("bump", c)};
    }

    /// c v^2 (1 - v)
    static Perturbation skewed_bump(double c = 1.0) {
        return {[c](double v) { return c * v * v * (1.0 - v); },
                [c](double v) { return c * (2.0 * v - 3.0 * v * v); }, label("skewed_bump", c)};
    }

    static Perturbation zero() {
        return {[](double) { return 0.0; }, [](double) { return 0.0; }, "zero"};
    }

    double operator()(double v) const { return value_(v); }
    double slope(double v) const { return slope_(v); }
    const std::string& name() const noexcept { return label_; }

private:
    static std::string label(const char* kind, double c) {
        std::ostringstream s;
        s << kind;
        if (c != 1.0) s << "*" << c;
        return s.str();
    }

    std::function<double(double)> value_;
    std::function<double(double)> slope_;
    std::string label_;
};

/// Valuation distribution on [0, 1], held as an exact linear combination of
/// power CDFs v^a and perturbations H, so densities are analytic.
class ValuationCDF {
public:
    enum class Family { uniform, power, perturbed, mixture };

    static ValuationCDF uniform() { return power_law(1.0); }

    /// F(v) = v^a, a > 0.
    static ValuationCDF power_law(double a) {
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("power family needs a > 0");
        ValuationCDF f;
        f.powers_.push_back({1.0, a});
        f.family_ = a == 1.0 ? Family::uniform : Family::power;
        return f;
    }

    /// base + eps H. Rejects eps where the density stops being positive.
    static ValuationCDF perturbed(const ValuationCDF& base, const Perturbation& h, double eps) {
        ValuationCDF f = base;
        if (eps != 0.0) {
            f.perturbations_.push_back({eps, h});
            f.family_ = Family::perturbed;
        }
        try {
            f.validate();
        } catch (const DomainError& e) {
            std::ostringstream msg;
            msg << "perturbed CDF invalid at epsilon = " << eps << " (" << h.name() << "): " << e.what();
            throw DomainError(msg.str());
        }
        return f;
    }

    /// Pointwise arithmetic mean (1/k) sum_i F_i.
    static ValuationCDF mean(std::span<const ValuationCDF> cdfs) {
        if (cdfs.empty()) throw DomainError("mean of no CDFs");
        ValuationCDF out;
        const double w = 1.0 / static_cast<double>(cdfs.size());
        for (const auto& f : cdfs) {
            for (const auto& p : f.powers_) out.add_power(w * p.weight, p.exponent);
            for (const auto& h : f.perturbations_) out.perturbations_.push_back({w * h.weight, h.h});
        }
        if (out.powers_.size() > 1) {
            out.family_ = Family::mixture;
        } else if (!out.perturbations_.empty()) {
            out.family_ = Family::perturbed;
        } else {
            out.family_ = out.powers_.front().exponent == 1.0 ? Family::uniform : Family::power;
        }
        return out;
    }

    double cdf(double v) const {
        if (v <= 0.0) return 0.0;
        if (v >= 1.0) return 1.0;
        double s = 0.0;
        for (const auto& p : powers_) s += p.weight * std::pow(v, p.exponent);
        for (const auto& h : perturbations_) s += h.weight * h.h(v);
        return s;
    }

    double density(double v) const {
        if (v < 0.0 || v > 1.0) return 0.0;
        double s = 0.0;
        for (const auto& p : powers_) s += p.weight * p.exponent * std::pow(v, p.exponent - 1.0);
        for (const auto& h : perturbations_) s += h.weight * h.h.slope(v);
        return s;
    }

    Family family() const noexcept { return family_; }

    std::string describe() const {
        std::ostringstream s;
        bool first = true;
        for (const auto& p : powers_) {
            s << (first ? "" : " + ") << p.weight << "*v^" << p.exponent;
            first = false;
        }
        for (const auto& h : perturbations_) s << " + " << h.weight << "*" << h.h.name();
        return s.str();
    }

    /// cdf(0) = 0, cdf(1) = 1, density positive on (0, 1] and consistent
    /// with a 1e-4 central difference of the cdf to 1e-3.
    void validate() const {
        double top = 0.0;
        for (const auto& p : powers_) top += p.weight;
        if (std::abs(top - 1.0) > 1e-12) throw DomainError("CDF does not reach 1 at v = 1");
        for (const auto& h : perturbations_) {
            if (std::abs(h.h(0.0)) > 1e-14 || std::abs(h.h(1.0)) > 1e-14) {
                throw DomainError("perturbation does not vanish at the endpoints");
            }
        }
        constexpr int n = 2000;
        constexpr double d = 1e-4;
        for (int j = 1; j <= n; ++j) {
            const double v = static_cast<double>(j) / n;
            const double f = density(v);
            if (!(f > 0.0) || !std::isfinite(f)) {
                std::ostringstream msg;
                msg << "density " << f << " is not positive at v = " << v;
                throw DomainError(msg.str());
            }
            if (v + d < 1.0 && v - d > 0.0) {
                const double fd = (cdf(v + d) - cdf(v - d)) / (2.0 * d);
                if (std::abs(fd - f) > 1e-3 * std::max(1.0, std::abs(f))) {
                    throw DomainError("density is inconsistent with the cdf");
                }
            }
        }
    }

private:
    struct PowerTerm {
        double weight;
        double exponent;
    };
    struct PerturbationTerm {
        double weight;
        Perturbation h;
    };

    void add_power(double weight, double exponent) {
        for (auto& p : powers_) {
            if (p.exponent == exponent) {
                p.weight += weight;
                return;
            }
        }
        powers_.push_back({weight, exponent});
    }

    std::vector<PowerTerm> powers_;
    std::vector<PerturbationTerm> perturbations_;
    Family family_ = Family::uniform;
};

}  // namespace hetavg::auction
