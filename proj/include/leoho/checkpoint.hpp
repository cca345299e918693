#pragma once

#include <filesystem>

#include "leoho/env.hpp"
#include "leoho/network.hpp"

namespace leoho::drl {

inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint, one token group per line:
///   leoho-checkpoint <version>
///   obs_dim <n>
///   ues <J>
///   planes <K>
///   hidden <count> <w1> <w2> ...
///   params <count>
///   <one hexadecimal float per line, flat layout order>
/// Hexadecimal floats make the round trip bit-exact.
void save_checkpoint(const PolicyParameters& params, const std::filesystem::path& path);

/// Throws std::runtime_error on a missing file, version mismatch or
/// malformed content.
PolicyParameters load_checkpoint(const std::filesystem::path& path);

/// Throws std::runtime_error when the parameters cannot drive `scenario`.
void check_compatible(const PolicyParameters& params, const env::ScenarioConfig& scenario);

}  // namespace leoho::drl
