#include "rcdepth/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace rcdepth {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint16_t u16() {
        need(2, "header");
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_]) |
                          static_cast<std::uint16_t>(bytes_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        need(4, "header");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8, "payload");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
            bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }

    std::span<const std::uint8_t> raw(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(FormatError::Kind::truncated,
                              std::string("tensor file truncated in ") + what);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> write_tensor(const Tensor& t) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + 4 * t.rank() + 8 * t.size());
    out.insert(out.end(), kTensorMagic, kTensorMagic + 4);
    put_u16(out, kTensorFormatVersion);
    put_u16(out, static_cast<std::uint16_t>(t.rank()));
    for (std::size_t e : t.shape()) {
        put_u32(out, static_cast<std::uint32_t>(e));
    }
    for (double v : t.data()) put_f64(out, v);
    return out;
}

Tensor read_tensor(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.raw(4, "magic");
    if (std::memcmp(magic.data(), kTensorMagic, 4) != 0) {
        throw FormatError(FormatError::Kind::bad_magic,
                          "not a tensor file: bad magic");
    }
    const std::uint16_t version = r.u16();
    if (version != kTensorFormatVersion) {
        throw FormatError(FormatError::Kind::bad_version,
                          "unsupported tensor format version " +
                              std::to_string(version));
    }
    const std::uint16_t rank = r.u16();
    if (rank < 1 || rank > 4) {
        throw FormatError(FormatError::Kind::bad_header,
                          "tensor rank out of range: " + std::to_string(rank));
    }
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (std::uint16_t i = 0; i < rank; ++i) {
        const std::uint32_t d = r.u32();
        if (d == 0) {
            throw FormatError(FormatError::Kind::bad_header,
                              "tensor extent must be >= 1");
        }
        shape[i] = d;
        count *= d;
    }
    if (r.remaining() < 8 * count) {
        throw FormatError(FormatError::Kind::truncated,
                          "payload shorter than dims imply");
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = r.f64();
    if (r.remaining() != 0) {
        throw FormatError(FormatError::Kind::bad_header,
                          "trailing bytes after payload");
    }
    return Tensor(std::move(shape), std::move(data));
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t) {
    const auto bytes = write_tensor(t);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write failed: " + path.string());
}

Tensor read_tensor_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return read_tensor(bytes);
}

}  // namespace rcdepth
