#pragma once

/// Output directory bookkeeping and the run manifest.

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::cli {

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

/// Files written under one output root. Paths are recorded relative to the
/// root with `/` separators, so manifests of two runs compare equal.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root) : root_{std::move(root)} {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec) {
            throw DataError("cannot create output directory '" + root_.string() + "': " + ec.message());
        }
    }

    const std::filesystem::path& root() const { return root_; }

    void write(const std::string& rel, std::string_view content) {
        const auto path = root_ / rel;
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            throw DataError("cannot write '" + path.string() + "'");
        }
        files_[rel] = {sha256_hex(content), content.size()};
    }

    void write(const std::string& rel, const std::function<void(std::ostream&)>& fill) {
        std::ostringstream s;
        fill(s);
        write(rel, s.str());
    }

    /// Writes `manifest.json`. An incomplete run records the error that stopped it.
    void finish(const std::string& command, bool complete, const std::string& error = {}) {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [rel, info] : files_) {
            files.push_back({{"path", rel}, {"sha256", info.sha256}, {"bytes", info.bytes}});
        }
        nlohmann::json m = {{"format", "bnsfuzzy-manifest"},
                            {"version", 1},
                            {"command", command},
                            {"status", complete ? "complete" : "incomplete"},
                            {"files", files}};
        if (!complete) {
            m["error"] = error;
        }
        const std::string text = m.dump(1) + "\n";
        std::ofstream out(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
        out << text;
    }

private:
    struct Info {
        std::string sha256;
        std::size_t bytes;
    };
    std::filesystem::path root_;
    std::map<std::string, Info> files_;
};

}  // namespace bnsfuzzy::cli
