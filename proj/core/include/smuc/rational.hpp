#pragma once

#include <gmpxx.h>

#include <string>

namespace smuc {

// Exact extended rational: an arbitrary-precision rational or +infinity.
// Fixpoint detection is equality based, so no floating point is allowed
// anywhere in fixpoint state.
class Rat {
public:
  Rat() : q_(0) {}
  explicit Rat(long n, long d = 1);
  static Rat infinity();
  // Accepts "inf", integers ("42"), fractions ("3/4") and exact decimals ("0.7").
  static Rat parse(const std::string& text);

  bool is_inf() const { return inf_; }
  bool is_integer() const;
  long to_long() const;

  Rat operator+(const Rat& o) const;
  Rat operator*(const Rat& o) const;

  bool operator==(const Rat& o) const;
  bool operator!=(const Rat& o) const { return !(*this == o); }
  // Numeric order with +inf greatest.
  bool operator<(const Rat& o) const;
  bool operator<=(const Rat& o) const { return *this == o || *this < o; }

  bool negative() const { return !inf_ && q_ < 0; }

  // Canonical "n/d" form, or "inf".
  std::string str() const;

private:
  bool inf_ = false;
  mpq_class q_;
};

Rat rat_min(const Rat& a, const Rat& b);
Rat rat_max(const Rat& a, const Rat& b);

}  // namespace smuc
