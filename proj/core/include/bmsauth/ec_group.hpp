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

#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "bmsauth/bytes.hpp"
#include "bmsauth/entropy.hpp"

namespace bmsauth::ec {

/// Curve + hash suite identifier carried in configuration payloads and certificates.
using AlgorithmId = std::uint8_t;

/// NIST P-256 with SHA-256.
inline constexpr AlgorithmId kP256Sha256 = 0x01;
/// y^2 = x^3 + 2x + 2 over F_17, generator (5,1), order 19, with SHA-256.
/// Small enough to enumerate; never for deployment.
inline constexpr AlgorithmId kToyF17Sha256 = 0xF0;

class CurveParams;

/// Affine point or the point at infinity. Off-curve points cannot be constructed.
class Point {
 public:
  static Point identity(const CurveParams& curve) { return Point(&curve); }

  bool is_identity() const { return infinity_; }
  const mpz_class& x() const;
  const mpz_class& y() const;
  const CurveParams& curve() const { return *curve_; }

  friend bool operator==(const Point& a, const Point& b);

 private:
  friend class CurveParams;
  explicit Point(const CurveParams* curve) : curve_(curve) {}
  Point(const CurveParams* curve, mpz_class x, mpz_class y)
      : curve_(curve), infinity_(false), x_(std::move(x)), y_(std::move(y)) {}

  const CurveParams* curve_;
  bool infinity_ = true;
  mpz_class x_;
  mpz_class y_;
};

/// Integer in [0, group_order).
class Scalar {
 public:
  /// Throws Error(InvalidScalar) unless 0 <= value < group_order.
  Scalar(const CurveParams& curve, const mpz_class& value);
  /// value mod group_order, for any integer.
  static Scalar reduce(const CurveParams& curve, const mpz_class& value);

  const mpz_class& value() const { return value_; }
  const CurveParams& curve() const { return *curve_; }
  bool is_zero() const { return value_ == 0; }

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend bool operator==(const Scalar& a, const Scalar& b);

 private:
  Scalar(const CurveParams* curve, mpz_class value) : curve_(curve), value_(std::move(value)) {}
  const CurveParams* curve_;
  mpz_class value_;
};

/// Short Weierstrass curve y^2 = x^3 + a*x + b over F_p with a prime-order subgroup.
/// Instances live in the registry for the lifetime of the program; points and
/// scalars keep a pointer to their curve.
class CurveParams {
 public:
  CurveParams(std::string name, AlgorithmId id, mpz_class field_prime, mpz_class coeff_a,
              mpz_class coeff_b, mpz_class gx, mpz_class gy, mpz_class group_order,
              mpz_class cofactor);
  CurveParams(const CurveParams&) = delete;
  CurveParams& operator=(const CurveParams&) = delete;

  const std::string& name() const { return name_; }
  AlgorithmId algorithm_id() const { return id_; }
  const mpz_class& field_prime() const { return p_; }
  const mpz_class& coeff_a() const { return a_; }
  const mpz_class& coeff_b() const { return b_; }
  const mpz_class& group_order() const { return n_; }
  const mpz_class& cofactor() const { return h_; }
  const Point& generator() const { return g_; }
  /// Bit length of the group order.
  unsigned key_bits() const { return key_bits_; }
  /// Wire width of scalars and field elements: ceil(key_bits / 8).
  std::size_t element_bytes() const { return element_bytes_; }

  bool contains(const mpz_class& x, const mpz_class& y) const;
  /// Throws Error(OffCurvePoint) when (x, y) does not satisfy the curve equation.
  Point point(const mpz_class& x, const mpz_class& y) const;

 private:
  std::string name_;
  AlgorithmId id_;
  mpz_class p_, a_, b_, n_, h_;
  unsigned key_bits_;
  std::size_t element_bytes_;
  Point g_;
};

const CurveParams& p256();
const CurveParams& toy_curve();
bool is_registered(AlgorithmId id);
/// Throws Error(UnknownAlgorithm) for unregistered identifiers.
const CurveParams& curve_by_id(AlgorithmId id);

/// Group law. Throws Error(CurveMismatch) when p and q belong to different curves.
Point point_add(const Point& p, const Point& q);
Point negate(const Point& p);
Point scalar_mul(const Scalar& k, const Point& p);
Point scalar_mul(const mpz_class& k, const Point& p);

/// Uniform in [1, n-1] by rejection sampling.
Scalar random_scalar(const CurveParams& curve, EntropySource& rng);

/// Big-endian, exactly element_bytes() wide.
Bytes encode_scalar(const Scalar& s);
Scalar decode_scalar(const CurveParams& curve, ByteView in);
/// 0x04 || x || y, or the single byte 0x00 for the identity.
Bytes encode_point(const Point& p);
Point decode_point(const CurveParams& curve, ByteView in);
/// Encoded length of a non-identity point.
inline std::size_t point_wire_size(const CurveParams& curve) { return 1 + 2 * curve.element_bytes(); }

mpz_class mpz_from_bytes(ByteView in);
/// Big-endian, left-padded to `width`; throws Error(InvalidParameter) on overflow.
Bytes mpz_to_bytes(const mpz_class& v, std::size_t width);

}  // namespace bmsauth::ec
