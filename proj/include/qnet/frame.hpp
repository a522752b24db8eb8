#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace qnet {

inline constexpr std::size_t kHeaderSize = 27;
inline constexpr std::size_t kTrailerSize = 8;
inline constexpr std::size_t kFrameSize = kHeaderSize + kTrailerSize;
inline constexpr std::array<std::uint8_t, 4> kTrailerMagic = {0x51, 0x46, 0x52, 0x54};

enum OpFlag : std::uint8_t {
    kOpPurify = 1u << 0,
    kOpEcc = 1u << 1,
    kOpPipelining = 1u << 2,
};

// Classical part of a quantum frame. The payload is a simulation handle and
// never serialized.
struct FrameHeader {
    std::uint8_t version = 1;
    std::uint64_t frame_id = 0;
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    std::uint8_t qr_class = 0;
    std::uint8_t op_flags = 0;
    std::uint8_t hop_count = 0;
    std::uint8_t ttl = 0;
    std::uint16_t payload_qubits = 1;

    bool operator==(const FrameHeader&) const = default;
};

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

// Big-endian header, header CRC over the first 23 bytes, then the trailer
// magic and a CRC over header plus magic.
FrameBytes encode_frame(const FrameHeader& h);

enum class FrameError { Truncated, HeaderCrc, BadMagic, FrameCrc, BadVersion };
std::string_view to_string(FrameError e);

struct DecodedFrame {
    std::optional<FrameHeader> header;
    std::optional<FrameError> error;
};

DecodedFrame decode_frame(std::span<const std::uint8_t> bytes);

} // namespace qnet
