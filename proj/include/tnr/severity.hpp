#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tnr {

// Non-negative rational with an explicit infinity, used for severity values.
class Severity {
 public:
  constexpr Severity() = default;
  constexpr Severity(std::int64_t whole) : num_(whole), den_(1) {  // NOLINT
    if (whole < 0) throw std::invalid_argument("severity must be non-negative");
  }
  Severity(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den <= 0 || num < 0) throw std::invalid_argument("severity must be a non-negative rational");
    normalize();
  }

  static constexpr Severity infinity() {
    Severity s;
    s.infinite_ = true;
    return s;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr std::int64_t numerator() const { return num_; }
  constexpr std::int64_t denominator() const { return den_; }
  constexpr bool is_integer() const { return !infinite_ && den_ == 1; }

  Severity operator+(const Severity& o) const {
    if (infinite_ || o.infinite_) return infinity();
    return Severity(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  Severity operator*(std::int64_t count) const {
    if (count < 0) throw std::invalid_argument("negative multiplier");
    if (infinite_) return count == 0 ? Severity() : infinity();
    return Severity(num_ * count, den_);
  }

  friend bool operator==(const Severity& a, const Severity& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Severity& a, const Severity& b) {
    if (a.infinite_ || b.infinite_) {
      if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
      return a.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  // "inf", "7", or "3/2".
  std::string to_string() const {
    if (infinite_) return "inf";
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "inf", integers, "p/q" and finite decimals such as "0.25".
  static Severity parse(std::string_view text) {
    if (text == "inf" || text == "∞") return infinity();
    if (text.empty()) throw std::invalid_argument("empty severity");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return Severity(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
      auto frac = text.substr(dot + 1);
      if (frac.size() > 12) throw std::invalid_argument("too many decimal places: " + std::string(text));
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      std::int64_t whole = dot == 0 ? 0 : parse_int(text.substr(0, dot));
      std::int64_t part = frac.empty() ? 0 : parse_int(frac);
      return Severity(whole * den + part, den);
    }
    return Severity(parse_int(text));
  }

 private:
  static std::int64_t parse_int(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("bad number");
    std::int64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw std::invalid_argument("bad number: " + std::string(s));
      v = v * 10 + (c - '0');
    }
    return v;
  }
  void normalize() {
    auto g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  bool infinite_ = false;
};

// Weights for alerts, SLA violations and capacity losses. All strictly positive.
struct SeverityWeights {
  Severity alerts{1};
  Severity sla_violations{1};
  Severity capacity_losses{1};

  SeverityWeights() = default;
  SeverityWeights(Severity a, Severity v, Severity l) : alerts(a), sla_violations(v), capacity_losses(l) {
    for (const auto& w : {a, v, l}) {
      if (w.is_infinite() || w == Severity{0}) throw std::invalid_argument("weights must be finite and > 0");
    }
  }

  // "w1,w2,w3"
  static SeverityWeights parse(std::string_view text) {
    Severity parts[3];
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      auto comma = text.find(',', start);
      if ((i < 2) == (comma == std::string_view::npos)) throw std::invalid_argument("expected three comma-separated weights");
      parts[i] = Severity::parse(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      start = comma + 1;
    }
    return SeverityWeights(parts[0], parts[1], parts[2]);
  }

  std::string to_string() const {
    return alerts.to_string() + "," + sla_violations.to_string() + "," + capacity_losses.to_string();
  }

  friend bool operator==(const SeverityWeights&, const SeverityWeights&) = default;
};

}  // namespace tnr
