#include "peerchain/contract/types.hpp"

#include <algorithm>

namespace peerchain::contract {

std::string_view role_name(Role r) { return r == Role::expert ? "expert" : "scholar"; }

std::string_view verdict_name(Verdict v) { return v == Verdict::favorable ? "favorable" : "unfavorable"; }

std::string_view interaction_kind_name(InteractionKind k) {
    return k == InteractionKind::annotation ? "annotation" : "comment";
}

std::size_t FileEntry::favorable_count() const {
    return static_cast<std::size_t>(std::count_if(endorsements.begin(), endorsements.end(),
                                                  [](const auto& e) { return e.second == Verdict::favorable; }));
}

std::optional<Digest> FileEntry::digest_for_version(std::uint32_t v) const {
    if (v == 1) return initial_digest;
    if (v >= 2 && v - 2 < modification_log.size()) return modification_log[v - 2].new_digest;
    return std::nullopt;
}

bool valid_identifier(std::string_view id) {
    if (id.empty() || id.size() > 64 || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
               c == '-';
    });
}

bool valid_display_name(std::string_view name) {
    std::size_t code_points = 0;
    for (std::size_t i = 0; i < name.size();) {
        const auto c = static_cast<unsigned char>(name[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
        if (len == 0 || i + len > name.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(name[i + k]) >> 6) != 0x2) return false;
        }
        if (len == 1 && c < 0x20) return false;
        i += len;
        ++code_points;
    }
    return code_points >= 1 && code_points <= 64;
}

}  // namespace peerchain::contract
