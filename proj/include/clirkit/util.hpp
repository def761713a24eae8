#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <openssl/evp.h>

namespace clirkit {

/// Base error type for everything the library raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration and usage problems; the CLI maps these to exit code 2
/// (runtime failures exit 1).
struct ValidationError : Error {
    using Error::Error;
};

namespace detail {
inline void append_all(std::ostringstream&) {}
template <typename T, typename... Rest>
void append_all(std::ostringstream& os, T&& v, Rest&&... rest) {
    os << std::forward<T>(v);
    append_all(os, std::forward<Rest>(rest)...);
}
}  // namespace detail

template <typename... Ts>
std::string concat(Ts&&... parts) {
    std::ostringstream os;
    detail::append_all(os, std::forward<Ts>(parts)...);
    return os.str();
}

template <typename... Ts>
[[noreturn]] void fail(Ts&&... parts) {
    throw Error(concat(std::forward<Ts>(parts)...));
}

inline void log_info(const std::string& msg) { std::cerr << "[clirkit] " << msg << "\n"; }
inline void log_warn(const std::string& msg) { std::cerr << "[clirkit] warning: " << msg << "\n"; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: ", path.string());
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) fail("error reading file: ", path.string());
    return os.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open file for writing: ", path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail("error writing file: ", path.string());
}

/// Incremental SHA-256, hex output. Backed by OpenSSL's EVP interface.
class Sha256 {
  public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
            fail("sha256 init failed");
    }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    ~Sha256() { EVP_MD_CTX_free(ctx_); }

    void update(const void* data, size_t len) {
        if (EVP_DigestUpdate(ctx_, data, len) != 1) fail("sha256 update failed");
    }
    void update(std::string_view s) { update(s.data(), s.size()); }

    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1) fail("sha256 final failed");
        static const char* kHex = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(kHex[digest[i] >> 4]);
            out.push_back(kHex[digest[i] & 0xf]);
        }
        return out;
    }

  private:
    EVP_MD_CTX* ctx_;
};

inline std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data);
    return h.hex();
}

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("missing external input file: ", path.string());
    Sha256 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h.update(buf, static_cast<size_t>(in.gcount()));
    return h.hex();
}

}  // namespace clirkit
