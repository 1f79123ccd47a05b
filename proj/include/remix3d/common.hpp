// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace remix3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Rng = std::mt19937_64;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files (manifests, grids, checkpoints, configs).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation's precondition (bad sizes, out-of-range indices).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Optimization produced a non-finite loss.
class NumericalAbort : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// splitmix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent 64-bit stream seed from a parent seed and a label.
/// The label is hashed with FNV-1a and combined with the parent via two rounds
/// of splitmix64, so distinct labels never share a stream by accident.
inline uint64_t derive_seed(uint64_t seed, std::string_view label) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(mix64(seed) ^ h);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t index) { return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)); }

inline Rng make_rng(uint64_t seed, std::string_view label) { return Rng(derive_seed(seed, label)); }

} // namespace remix3d
