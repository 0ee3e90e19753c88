#include "sgf/encoding.hpp"

#include "sgf/error.hpp"

namespace sgf {

std::string encode_key(std::span<const std::string> values) {
    std::string out = std::to_string(values.size());
    out.push_back(kArityMark);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out.push_back(kValueSep);
        out += values[i];
    }
    return out;
}

Tuple decode_key(std::string_view key) {
    std::size_t mark = key.find(kArityMark);
    if (mark == std::string_view::npos || mark == 0)
        throw Error(ErrorCode::MalformedMessage, "key without arity prefix");
    std::size_t arity = 0;
    for (std::size_t i = 0; i < mark; ++i) {
        if (key[i] < '0' || key[i] > '9')
            throw Error(ErrorCode::MalformedMessage, "non-numeric key arity");
        arity = arity * 10 + static_cast<std::size_t>(key[i] - '0');
    }
    Tuple out;
    if (arity == 0)
        return out;
    std::string_view rest = key.substr(mark + 1);
    for (;;) {
        std::size_t sep = rest.find(kValueSep);
        out.emplace_back(rest.substr(0, sep));
        if (sep == std::string_view::npos)
            break;
        rest.remove_prefix(sep + 1);
    }
    if (out.size() != arity)
        throw Error(ErrorCode::MalformedMessage, "key arity does not match its values");
    return out;
}

void put_varint(std::string& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

std::uint64_t get_varint(std::string_view in, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= in.size())
            throw Error(ErrorCode::MalformedMessage, "truncated varint");
        auto b = static_cast<unsigned char>(in[pos++]);
        v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
        if (!(b & 0x80))
            return v;
    }
    throw Error(ErrorCode::MalformedMessage, "varint too long");
}

std::size_t varint_size(std::uint64_t v) {
    std::size_t n = 1;
    while (v >= 0x80) {
        v >>= 7;
        ++n;
    }
    return n;
}

std::string encode_tuple_id(std::uint32_t file_id, std::uint64_t record) {
    std::string out;
    put_varint(out, file_id);
    put_varint(out, record);
    return out;
}

std::string encode_request(std::uint64_t equation, std::string_view payload) {
    std::string out(1, 'R');
    put_varint(out, equation);
    out += payload;
    return out;
}

std::string encode_assert(std::uint64_t assert_id) {
    std::string out(1, 'A');
    put_varint(out, assert_id);
    return out;
}

std::string encode_requests(const std::vector<RequestEntry>& entries) {
    std::string out(1, 'r');
    put_varint(out, entries.size());
    for (const auto& e : entries) {
        put_varint(out, e.equation);
        put_varint(out, e.payload.size());
        out += e.payload;
    }
    return out;
}

std::string encode_asserts(const std::vector<std::uint64_t>& ids) {
    std::string out(1, 'a');
    put_varint(out, ids.size());
    for (auto id : ids)
        put_varint(out, id);
    return out;
}

void decode_message(std::string_view msg, DecodedMessages& out) {
    if (msg.empty())
        throw Error(ErrorCode::MalformedMessage, "empty message");
    std::size_t pos = 1;
    switch (msg[0]) {
    case 'R': {
        std::uint64_t eq = get_varint(msg, pos);
        out.requests.push_back({eq, std::string(msg.substr(pos))});
        return;
    }
    case 'A':
        out.asserts.push_back(get_varint(msg, pos));
        break;
    case 'r': {
        std::uint64_t n = get_varint(msg, pos);
        if (n == 0)
            throw Error(ErrorCode::MalformedMessage, "empty packed request");
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint64_t eq = get_varint(msg, pos);
            std::uint64_t len = get_varint(msg, pos);
            if (len > msg.size() - pos)
                throw Error(ErrorCode::MalformedMessage, "truncated packed request");
            out.requests.push_back({eq, std::string(msg.substr(pos, len))});
            pos += len;
        }
        break;
    }
    case 'a': {
        std::uint64_t n = get_varint(msg, pos);
        if (n == 0)
            throw Error(ErrorCode::MalformedMessage, "empty packed assert");
        for (std::uint64_t i = 0; i < n; ++i)
            out.asserts.push_back(get_varint(msg, pos));
        break;
    }
    default: throw Error(ErrorCode::MalformedMessage, "unknown message kind");
    }
    if (pos != msg.size())
        throw Error(ErrorCode::MalformedMessage, "trailing bytes in message");
}

} // namespace sgf
