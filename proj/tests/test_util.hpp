#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "dse/corpus.hpp"

namespace dse::test {

/// Unique scratch directory, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path = base / ("dse-test-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline Document make_doc(std::string id, std::string title, std::string abstract,
                         std::vector<std::string> labels = {}) {
    Document d;
    d.id = std::move(id);
    d.title = std::move(title);
    d.abstract = std::move(abstract);
    d.title_tokens = tokenize(d.title);
    d.abstract_tokens = tokenize(d.abstract);
    d.labels = std::move(labels);
    return d;
}

} // namespace dse::test
