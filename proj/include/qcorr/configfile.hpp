#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcorr/config.hpp"

namespace qcorr {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// The full resolved run configuration, as read from a flat key = value
/// file with # comments. Keys mirror the ProtocolConfig/ChannelParams
/// fields; unknown keys are rejected (manifest_* keys are ignored so a
/// written manifest re-parses as a configuration).
struct ResolvedConfig {
  ProtocolConfig protocol;
  ChannelParams channel;

  void validate() const {
    protocol.validate();
    channel.validate();
  }
};

ResolvedConfig parse_config(std::istream& in);
ResolvedConfig load_config(const std::string& path);
/// Applies one "key=value" override to an already-parsed configuration.
void apply_override(ResolvedConfig& cfg, const std::string& assignment);
void write_config(const ResolvedConfig& cfg, std::ostream& out);

/// Reproducibility sidecar: resolved configuration snapshot plus run
/// metadata. Written beside each output when requested; the file is itself
/// a valid configuration.
struct RunManifest {
  ResolvedConfig config;
  std::string version = kArtifactVersion;
  std::string timestamp;  // ISO-8601 UTC, filled by make_manifest
  std::vector<std::uint64_t> seeds;
  std::string command;
};

RunManifest make_manifest(const ResolvedConfig& cfg, const std::string& command,
                          const std::vector<std::uint64_t>& seeds = {});
void write_manifest(const RunManifest& m, std::ostream& out);

}  // namespace qcorr
