#pragma once

#include <map>
#include <optional>
#include <string>

namespace judgeval {

/// One (source document, candidate summary, human score) triple.
struct EvalItem {
    std::string item_id;
    std::string source;
    std::string summary;
    std::optional<double> gold;
    std::map<std::string, std::string> meta;

    friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

}  // namespace judgeval
