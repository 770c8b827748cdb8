#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stereodiff {

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, size_t size);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

uint64_t fnv1a(const std::string& s);

} // namespace stereodiff
