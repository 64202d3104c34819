#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace powerpanel {

// Canonical order; also the tie-break order for dominant-technology labels.
enum class Technology : std::size_t { solar, wind, biomass, hydro, nuclear, oil, gas, coal };

inline constexpr std::size_t kTechCount = 8;

using TechVector = std::array<double, kTechCount>;

inline constexpr std::array<Technology, kTechCount> kTechnologies = {
    Technology::solar, Technology::wind, Technology::biomass, Technology::hydro,
    Technology::nuclear, Technology::oil, Technology::gas, Technology::coal};

constexpr std::size_t index_of(Technology t) noexcept { return static_cast<std::size_t>(t); }

constexpr std::string_view name_of(Technology t) noexcept {
    constexpr std::array<std::string_view, kTechCount> names = {
        "solar", "wind", "biomass", "hydro", "nuclear", "oil", "gas", "coal"};
    return names[index_of(t)];
}

constexpr std::optional<Technology> parse_technology(std::string_view name) noexcept {
    for (auto t : kTechnologies) {
        if (name_of(t) == name) return t;
    }
    return std::nullopt;
}

constexpr bool is_renewable(Technology t) noexcept {
    return t == Technology::wind || t == Technology::solar;
}

constexpr bool is_fossil(Technology t) noexcept {
    return t == Technology::coal || t == Technology::gas || t == Technology::oil;
}

}  // namespace powerpanel
