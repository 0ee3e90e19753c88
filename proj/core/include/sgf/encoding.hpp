#pragma once

#include "sgf/query.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgf {

// Separators of the canonical key encoding; data values may not contain them.
inline constexpr char kArityMark = '\x1e';
inline constexpr char kValueSep = '\x1f';

/// Decimal arity, 0x1E, then the values joined by 0x1F.
std::string encode_key(std::span<const std::string> values);
Tuple decode_key(std::string_view key);

void put_varint(std::string& out, std::uint64_t v);
/// Throws MalformedMessage on truncated input.
std::uint64_t get_varint(std::string_view in, std::size_t& pos);
std::size_t varint_size(std::uint64_t v);

/// Reference to a tuple: (file ordinal, record ordinal) as two varints.
std::string encode_tuple_id(std::uint32_t file_id, std::uint64_t record);

struct RequestEntry {
    std::uint64_t equation = 0;
    std::string payload;

    bool operator==(const RequestEntry&) const = default;
};

/// Semi-join messages. Unpacked: 'R' eq payload | 'A' assert-id. Packed:
/// 'r' n (eq len payload)* | 'a' n (assert-id)*.
std::string encode_request(std::uint64_t equation, std::string_view payload);
std::string encode_assert(std::uint64_t assert_id);
std::string encode_requests(const std::vector<RequestEntry>& entries);
std::string encode_asserts(const std::vector<std::uint64_t>& ids);

struct DecodedMessages {
    std::vector<RequestEntry> requests;
    std::vector<std::uint64_t> asserts;
};

/// Appends the entries of one message; throws MalformedMessage.
void decode_message(std::string_view msg, DecodedMessages& out);

} // namespace sgf
