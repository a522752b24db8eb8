#include "qnet/frame.hpp"

#include <zlib.h>

namespace qnet {

namespace {

constexpr std::size_t kHeaderCrcOffset = kHeaderSize - 4;

void put(std::uint8_t*& out, std::uint64_t value, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) *out++ = static_cast<std::uint8_t>(value >> (8 * i));
}

std::uint64_t get(const std::uint8_t*& in, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | *in++;
    return v;
}

} // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

FrameBytes encode_frame(const FrameHeader& h) {
    FrameBytes b{};
    std::uint8_t* p = b.data();
    put(p, h.version, 1);
    put(p, h.frame_id, 8);
    put(p, h.src, 4);
    put(p, h.dst, 4);
    put(p, h.qr_class, 1);
    put(p, h.op_flags, 1);
    put(p, h.hop_count, 1);
    put(p, h.ttl, 1);
    put(p, h.payload_qubits, 2);
    put(p, crc32_ieee({b.data(), kHeaderCrcOffset}), 4);
    for (auto m : kTrailerMagic) *p++ = m;
    put(p, crc32_ieee({b.data(), kHeaderSize + kTrailerMagic.size()}), 4);
    return b;
}

std::string_view to_string(FrameError e) {
    switch (e) {
    case FrameError::Truncated: return "Truncated";
    case FrameError::HeaderCrc: return "HeaderCrc";
    case FrameError::BadMagic: return "BadMagic";
    case FrameError::FrameCrc: return "FrameCrc";
    case FrameError::BadVersion: return "BadVersion";
    }
    return "?";
}

DecodedFrame decode_frame(std::span<const std::uint8_t> bytes) {
    DecodedFrame out;
    if (bytes.size() != kFrameSize) {
        out.error = FrameError::Truncated;
        return out;
    }
    const std::uint8_t* p = bytes.data() + kHeaderCrcOffset;
    if (get(p, 4) != crc32_ieee(bytes.first(kHeaderCrcOffset))) {
        out.error = FrameError::HeaderCrc;
        return out;
    }
    for (auto m : kTrailerMagic) {
        if (*p++ != m) {
            out.error = FrameError::BadMagic;
            return out;
        }
    }
    if (get(p, 4) != crc32_ieee(bytes.first(kHeaderSize + kTrailerMagic.size()))) {
        out.error = FrameError::FrameCrc;
        return out;
    }
    FrameHeader h;
    p = bytes.data();
    h.version = static_cast<std::uint8_t>(get(p, 1));
    h.frame_id = get(p, 8);
    h.src = static_cast<std::uint32_t>(get(p, 4));
    h.dst = static_cast<std::uint32_t>(get(p, 4));
    h.qr_class = static_cast<std::uint8_t>(get(p, 1));
    h.op_flags = static_cast<std::uint8_t>(get(p, 1));
    h.hop_count = static_cast<std::uint8_t>(get(p, 1));
    h.ttl = static_cast<std::uint8_t>(get(p, 1));
    h.payload_qubits = static_cast<std::uint16_t>(get(p, 2));
    if (h.version != 1) {
        out.error = FrameError::BadVersion;
        return out;
    }
    out.header = h;
    return out;
}

} // namespace qnet
