/*
 * Copyright 2026 The netsmc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace netsmc {

/// Exact rational over int64, always kept normalized with a positive
/// denominator. Used for edge probabilities and clock-rate arithmetic where
/// floating point would break bit-exact output.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}  // NOLINT: implicit by design
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) {
            throw std::invalid_argument("rational with zero denominator");
        }
        if (den < 0) {
            num = -num;
            den = -den;
        }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    bool isInteger() const { return den == 1; }
    double toDouble() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num * b.num, a.den * b.den);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) {
            throw std::invalid_argument("rational division by zero");
        }
        return Rational(a.num * b.den, a.den * b.num);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num * b.den < b.num * a.den;
    }

    std::string str() const {
        if (den == 1) {
            return std::to_string(num);
        }
        return std::to_string(num) + "/" + std::to_string(den);
    }

    /// gcd over rationals: gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d).
    static Rational gcd(const Rational& a, const Rational& b) {
        std::int64_t n = std::gcd(std::abs(a.num * b.den), std::abs(b.num * a.den));
        return Rational(n, a.den * b.den);
    }

    /// Parses "3", "-3", "1/2" or a plain decimal like "0.25".
    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) {
            return Rational(std::stoll(text));
        }
        std::string intPart = text.substr(0, dot);
        std::string fracPart = text.substr(dot + 1);
        if (fracPart.size() > 15) {
            throw std::invalid_argument("decimal literal too precise for exact rational: " + text);
        }
        bool neg = !intPart.empty() && intPart[0] == '-';
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < fracPart.size(); ++i) {
            scale *= 10;
        }
        std::int64_t whole = intPart.empty() || intPart == "-" ? 0 : std::stoll(intPart);
        std::int64_t frac = fracPart.empty() ? 0 : std::stoll(fracPart);
        std::int64_t n = (neg ? -1 : 1) * ((neg ? -whole : whole) * scale + frac);
        return Rational(n, scale);
    }
};

}  // namespace netsmc
