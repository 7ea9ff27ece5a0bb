#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <unistd.h>

namespace tutorforge::testkit {

std::filesystem::path test_data(const std::string& relative) {
  return std::filesystem::path(TUTORFORGE_TEST_DATA) / relative;
}

std::filesystem::path repo_data(const std::string& relative) {
  return std::filesystem::path(TUTORFORGE_DATA_DIR) / relative;
}

std::filesystem::path fixtures(const std::string& relative) {
  return std::filesystem::path(TUTORFORGE_FIXTURES) / relative;
}

std::vector<std::filesystem::path> files_with_extension(const std::filesystem::path& dir,
                                                        const std::string& extension) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == extension) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("tutorforge-" + tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tutorforge::testkit
