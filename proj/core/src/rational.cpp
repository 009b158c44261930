#include "smuc/rational.hpp"

#include "smuc/errors.hpp"

namespace smuc {

Rat::Rat(long n, long d) : q_(n, d) {
  require(d != 0, ErrorKind::BadArgument, "rational with zero denominator");
  q_.canonicalize();
}

Rat Rat::infinity() {
  Rat r;
  r.inf_ = true;
  return r;
}

Rat Rat::parse(const std::string& text) {
  if (text == "inf" || text == "+inf") return infinity();
  require(!text.empty(), ErrorKind::Syntax, "empty number literal");
  auto dot = text.find('.');
  Rat r;
  try {
    if (dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      std::string denom = "1" + std::string(text.size() - dot - 1, '0');
      r.q_ = mpq_class(mpz_class(digits), mpz_class(denom));
    } else {
      r.q_ = mpq_class(text);
    }
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::Syntax, "bad number literal: " + text);
  }
  require(r.q_.get_den() != 0, ErrorKind::Syntax, "zero denominator in: " + text);
  r.q_.canonicalize();
  return r;
}

bool Rat::is_integer() const { return !inf_ && q_.get_den() == 1; }

long Rat::to_long() const {
  require(is_integer(), ErrorKind::BadArgument, "not an integer: " + str());
  require(q_.get_num().fits_slong_p(), ErrorKind::BadArgument, "integer too large: " + str());
  return q_.get_num().get_si();
}

Rat Rat::operator+(const Rat& o) const {
  if (inf_ || o.inf_) return infinity();
  Rat r;
  r.q_ = q_ + o.q_;
  return r;
}

Rat Rat::operator*(const Rat& o) const {
  if (inf_ || o.inf_) return infinity();
  Rat r;
  r.q_ = q_ * o.q_;
  return r;
}

bool Rat::operator==(const Rat& o) const {
  if (inf_ != o.inf_) return false;
  return inf_ || q_ == o.q_;
}

bool Rat::operator<(const Rat& o) const {
  if (inf_) return false;
  if (o.inf_) return true;
  return q_ < o.q_;
}

std::string Rat::str() const {
  if (inf_) return "inf";
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

}  // namespace smuc
