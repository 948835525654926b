/*
 * Copyright (C) 2026 The bmsauth Authors
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

#include "bmsauth/ec_group.hpp"

#include "bmsauth/error.hpp"

namespace bmsauth::ec {

namespace {

mpz_class mod(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

mpz_class inverse(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw Error(ErrorCode::InvalidParameter, "element not invertible");
  }
  return r;
}

std::size_t bit_length(const mpz_class& v) { return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2); }

mpz_class hex(const char* s) { return mpz_class(s, 16); }

}  // namespace

const mpz_class& Point::x() const {
  if (infinity_) throw Error(ErrorCode::InvalidParameter, "identity has no coordinates");
  return x_;
}

const mpz_class& Point::y() const {
  if (infinity_) throw Error(ErrorCode::InvalidParameter, "identity has no coordinates");
  return y_;
}

bool operator==(const Point& a, const Point& b) {
  if (a.curve_ != b.curve_) return false;
  if (a.infinity_ || b.infinity_) return a.infinity_ == b.infinity_;
  return a.x_ == b.x_ && a.y_ == b.y_;
}

Scalar::Scalar(const CurveParams& curve, const mpz_class& value) : curve_(&curve), value_(value) {
  if (value < 0 || value >= curve.group_order()) {
    throw Error(ErrorCode::InvalidScalar, "scalar out of range [0, n)");
  }
}

Scalar Scalar::reduce(const CurveParams& curve, const mpz_class& value) {
  return Scalar(&curve, mod(value, curve.group_order()));
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.curve_ != b.curve_) throw Error(ErrorCode::CurveMismatch, "scalars from different curves");
  return Scalar::reduce(*a.curve_, a.value_ + b.value_);
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.curve_ != b.curve_) throw Error(ErrorCode::CurveMismatch, "scalars from different curves");
  return Scalar::reduce(*a.curve_, a.value_ * b.value_);
}

bool operator==(const Scalar& a, const Scalar& b) { return a.curve_ == b.curve_ && a.value_ == b.value_; }

CurveParams::CurveParams(std::string name, AlgorithmId id, mpz_class field_prime, mpz_class coeff_a,
                         mpz_class coeff_b, mpz_class gx, mpz_class gy, mpz_class group_order,
                         mpz_class cofactor)
    : name_(std::move(name)),
      id_(id),
      p_(std::move(field_prime)),
      a_(std::move(coeff_a)),
      b_(std::move(coeff_b)),
      n_(std::move(group_order)),
      h_(std::move(cofactor)),
      key_bits_(static_cast<unsigned>(bit_length(n_))),
      element_bytes_((key_bits_ + 7) / 8),
      g_(this) {
  if (bit_length(p_) > 8 * element_bytes_) {
    throw Error(ErrorCode::InvalidParameter, "field elements wider than the scalar width");
  }
  mpz_class disc = mod(4 * a_ * a_ * a_ + 27 * b_ * b_, p_);
  if (disc == 0) throw Error(ErrorCode::InvalidParameter, "singular curve");
  g_ = point(gx, gy);
  if (!scalar_mul(n_, g_).is_identity() || n_ <= 1) {
    throw Error(ErrorCode::InvalidParameter, "generator order mismatch");
  }
}

bool CurveParams::contains(const mpz_class& x, const mpz_class& y) const {
  if (x < 0 || y < 0 || x >= p_ || y >= p_) return false;
  return mod(y * y - (x * x * x + a_ * x + b_), p_) == 0;
}

Point CurveParams::point(const mpz_class& x, const mpz_class& y) const {
  if (!contains(x, y)) throw Error(ErrorCode::OffCurvePoint, "point not on " + name_);
  return Point(this, x, y);
}

const CurveParams& p256() {
  static const CurveParams curve(
      "P-256", kP256Sha256, hex("FFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF"),
      hex("FFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC"),
      hex("5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B"),
      hex("6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296"),
      hex("4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5"),
      hex("FFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551"), 1);
  return curve;
}

const CurveParams& toy_curve() {
  static const CurveParams curve("toy-F17", kToyF17Sha256, 17, 2, 2, 5, 1, 19, 1);
  return curve;
}

bool is_registered(AlgorithmId id) { return id == kP256Sha256 || id == kToyF17Sha256; }

const CurveParams& curve_by_id(AlgorithmId id) {
  switch (id) {
    case kP256Sha256:
      return p256();
    case kToyF17Sha256:
      return toy_curve();
    default:
      throw Error(ErrorCode::UnknownAlgorithm, "unregistered algorithm id " + std::to_string(id));
  }
}

namespace {

Point double_point(const Point& p) {
  const CurveParams& c = p.curve();
  if (p.is_identity() || p.y() == 0) return Point::identity(c);
  const mpz_class& q = c.field_prime();
  mpz_class lambda = mod((3 * p.x() * p.x() + c.coeff_a()) * inverse(2 * p.y(), q), q);
  mpz_class x3 = mod(lambda * lambda - 2 * p.x(), q);
  mpz_class y3 = mod(lambda * (p.x() - x3) - p.y(), q);
  return c.point(x3, y3);
}

}  // namespace

Point point_add(const Point& p, const Point& q) {
  if (&p.curve() != &q.curve()) throw Error(ErrorCode::CurveMismatch, "points from different curves");
  if (p.is_identity()) return q;
  if (q.is_identity()) return p;
  const CurveParams& c = p.curve();
  const mpz_class& fp = c.field_prime();
  if (p.x() == q.x()) {
    if (mod(p.y() + q.y(), fp) == 0) return Point::identity(c);
    return double_point(p);
  }
  mpz_class lambda = mod((q.y() - p.y()) * inverse(mod(q.x() - p.x(), fp), fp), fp);
  mpz_class x3 = mod(lambda * lambda - p.x() - q.x(), fp);
  mpz_class y3 = mod(lambda * (p.x() - x3) - p.y(), fp);
  return c.point(x3, y3);
}

Point negate(const Point& p) {
  if (p.is_identity()) return p;
  const CurveParams& c = p.curve();
  return c.point(p.x(), mod(-p.y(), c.field_prime()));
}

Point scalar_mul(const mpz_class& k, const Point& p) {
  const CurveParams& c = p.curve();
  mpz_class e = mod(k, c.group_order());
  Point acc = Point::identity(c);
  if (e == 0 || p.is_identity()) return acc;
  for (long i = static_cast<long>(bit_length(e)) - 1; i >= 0; --i) {
    acc = double_point(acc);
    if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = point_add(acc, p);
  }
  return acc;
}

Point scalar_mul(const Scalar& k, const Point& p) {
  if (&k.curve() != &p.curve()) throw Error(ErrorCode::CurveMismatch, "scalar and point curves differ");
  return scalar_mul(k.value(), p);
}

Scalar random_scalar(const CurveParams& curve, EntropySource& rng) {
  const std::size_t width = curve.element_bytes();
  const unsigned excess = static_cast<unsigned>(8 * width - curve.key_bits());
  const auto top_mask = static_cast<std::uint8_t>(0xFF >> excess);
  Bytes buf(width);
  for (int attempt = 0; attempt < 1024; ++attempt) {
    rng.fill(buf);
    buf[0] &= top_mask;
    mpz_class v = mpz_from_bytes(buf);
    if (v >= 1 && v < curve.group_order()) {
      secure_wipe(buf.data(), buf.size());
      return Scalar(curve, v);
    }
  }
  throw Error(ErrorCode::EntropyFailure, "entropy source never produced an in-range scalar");
}

mpz_class mpz_from_bytes(ByteView in) {
  mpz_class r;
  if (!in.empty()) mpz_import(r.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
  return r;
}

Bytes mpz_to_bytes(const mpz_class& v, std::size_t width) {
  if (v < 0) throw Error(ErrorCode::InvalidParameter, "negative integer");
  std::size_t needed = (bit_length(v) + 7) / 8;
  if (needed > width) throw Error(ErrorCode::InvalidParameter, "integer wider than field");
  Bytes out(width, 0);
  if (v != 0) {
    std::size_t count = 0;
    mpz_export(out.data() + (width - needed), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

Bytes encode_scalar(const Scalar& s) { return mpz_to_bytes(s.value(), s.curve().element_bytes()); }

Scalar decode_scalar(const CurveParams& curve, ByteView in) {
  if (in.size() != curve.element_bytes()) {
    throw Error(ErrorCode::LengthMismatch, "scalar must be " + std::to_string(curve.element_bytes()) + " bytes");
  }
  mpz_class v = mpz_from_bytes(in);
  if (v >= curve.group_order()) throw Error(ErrorCode::InvalidScalar, "scalar >= group order");
  return Scalar(curve, v);
}

Bytes encode_point(const Point& p) {
  if (p.is_identity()) return Bytes{0x00};
  const std::size_t w = p.curve().element_bytes();
  Bytes out;
  out.reserve(1 + 2 * w);
  out.push_back(0x04);
  append(out, mpz_to_bytes(p.x(), w));
  append(out, mpz_to_bytes(p.y(), w));
  return out;
}

Point decode_point(const CurveParams& curve, ByteView in) {
  if (in.empty()) throw Error(ErrorCode::LengthMismatch, "empty point encoding", 0);
  if (in[0] == 0x00) {
    if (in.size() != 1) throw Error(ErrorCode::LengthMismatch, "identity encoding is one byte", 1);
    return Point::identity(curve);
  }
  if (in[0] != 0x04) throw Error(ErrorCode::InvalidPointEncoding, "unsupported point tag", 0);
  const std::size_t w = curve.element_bytes();
  if (in.size() != 1 + 2 * w) {
    throw Error(ErrorCode::LengthMismatch, "point must be " + std::to_string(1 + 2 * w) + " bytes", in.size());
  }
  mpz_class x = mpz_from_bytes(in.subspan(1, w));
  mpz_class y = mpz_from_bytes(in.subspan(1 + w, w));
  if (x >= curve.field_prime() || y >= curve.field_prime()) {
    throw Error(ErrorCode::InvalidPointEncoding, "coordinate not reduced", 1);
  }
  if (!curve.contains(x, y)) throw Error(ErrorCode::OffCurvePoint, "point not on " + curve.name(), 0);
  return curve.point(x, y);
}

}  // namespace bmsauth::ec
