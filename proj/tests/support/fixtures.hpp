#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tutorforge::testkit {

std::filesystem::path test_data(const std::string& relative = {});
std::filesystem::path repo_data(const std::string& relative = {});
/// Path under tests/fixtures.
std::filesystem::path fixtures(const std::string& relative = {});

/// Sorted files in `dir` with the given extension.
std::vector<std::filesystem::path> files_with_extension(const std::filesystem::path& dir,
                                                        const std::string& extension);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace tutorforge::testkit
