#pragma once

#include <string>
#include <string_view>

namespace judgeval {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view data);

/// Digest over an ordered list of fields. Each field is length-prefixed so
/// that ("ab","c") and ("a","bc") never collide.
class FieldDigest {
public:
    FieldDigest& add(std::string_view field);
    std::string hex() const;

private:
    std::string buffer_;
};

}  // namespace judgeval
