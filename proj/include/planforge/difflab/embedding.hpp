#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "planforge/error.hpp"
#include "planforge/prompt.hpp"

namespace planforge::difflab {

using Embedding = Eigen::VectorXd;

inline double cosine_sim(const Embedding& v, const Embedding& t) {
    if (v.size() != t.size())
        throw Error("DimensionMismatch", "embeddings differ in dimension");
    const double nv = v.norm(), nt = t.norm();
    if (nv == 0.0 || nt == 0.0) throw Error("ZeroVector", "cosine similarity of a zero vector");
    return std::clamp(v.dot(t) / (nv * nt), -1.0, 1.0);
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

// Area tokens fall into buckets of this many units so that nearby sizes share
// a token.
inline constexpr long long kAreaBucket = 5;

// Bag-of-tokens stand-in for a text encoder: every count, bucketed area and
// connection pair is hashed into one of `dim` slots, and the count vector is
// L2-normalized. An empty constraint set embeds to the zero vector.
inline Embedding embed_text(const ConstraintSet& cs, int dim = 64) {
    if (dim < 1) throw Error("InvalidParameter", "embedding dimension must be >= 1");
    Embedding e = Embedding::Zero(dim);
    auto add = [&](const std::string& token) { e[static_cast<Eigen::Index>(detail::fnv1a(token) % dim)] += 1.0; };
    if (cs.counts)
        for (const auto& [cls, k] : *cs.counts) add("count:" + class_token(cls) + ":" + std::to_string(k));
    if (cs.areas)
        for (const auto& a : *cs.areas)
            add("area:" + ref_token(a.ref) + ":" + std::to_string(a.area / kAreaBucket));
    if (cs.connections)
        for (const auto& c : *cs.connections) {
            const Connection n = c.normalized();
            add("connect:" + ref_token(n.a) + ":" + ref_token(n.b));
        }
    const double norm = e.norm();
    if (norm > 0.0) e /= norm;
    return e;
}

}  // namespace planforge::difflab
