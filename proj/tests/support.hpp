#pragma once

#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <unistd.h>

#include "eegalc.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("eegalc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline eegalc::Trial noise_trial(eegalc::Rng& rng, eegalc::Group g, const std::string& id) {
  eegalc::Trial t;
  t.subject_id = id;
  t.group = g;
  for (auto& v : t.data.data()) v = eegalc::normal(rng, 0.0, 10.0);
  return t;
}

template <typename Fn>
eegalc::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const eegalc::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected eegalc::Error";
  return eegalc::ErrorCode::InvalidArgument;
}

}  // namespace testing_support
