#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mfsk/errors.hpp"

namespace mfsk::detail {

template <typename T>
T to_little_endian(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::little) {
        return value;
    } else {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
}

class ByteWriter {
public:
    template <typename T>
    void put(T value) {
        const T le = to_little_endian(value);
        const auto* p = reinterpret_cast<const char*>(&le);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void put_bytes(std::string_view bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

    // Writes to a sibling temp file first so a failed write never leaves a
    // half-written file at `path`.
    void commit(const std::filesystem::path& path) const {
        const auto tmp = std::filesystem::path(path.string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
            out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
            if (!out) throw IoError("write failed: " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }

private:
    std::vector<char> buf_;
};

class ByteReader {
public:
    static ByteReader from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path.string());
        ByteReader r;
        r.buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        if (in.bad()) throw IoError("read failed: " + path.string());
        return r;
    }

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return to_little_endian(v);
    }

    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw FormatError("file truncated");
    }

    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

}  // namespace mfsk::detail
