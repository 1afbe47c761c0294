#pragma once

// Reproducibility record written alongside every CLI output: the command,
// the parameters that shape the output, and content digests of the inputs.

#include <map>
#include <string>
#include <vector>

namespace vqanoise {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> parameters;     // ordered for stable output
    std::map<std::string, std::string> input_digests;  // path -> sha256 hex
    std::string tool_version = kToolVersion;
};

std::string sha256_hex(const void* data, size_t len);
std::string sha256_file(const std::string& path);

std::string manifest_json(const RunManifest& manifest);

// Writes <output_path>.manifest.json.
void write_manifest(const std::string& output_path, const RunManifest& manifest);

}  // namespace vqanoise
