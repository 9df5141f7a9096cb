#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rebound/optimizer.hpp"

namespace rebound {

// Append-only store of calibrated fits keyed by (config hash, t1, t2).
// Values round-trip at 17 significant digits, so a warm rerun reproduces
// downstream outputs byte for byte. Failed windows are recorded too and
// excluded downstream.
class FitCache {
  public:
    struct Key {
        std::uint64_t config_hash;
        Day t1;
        Day t2;
        auto operator<=>(const Key&) const = default;
    };

    struct Entry {
        std::optional<LpplFit> fit; // nullopt: the window failed to fit
    };

    static FitCache load(const std::string& path); // missing file -> empty cache

    bool contains(const Key& k) const { return entries_.count(k) > 0; }
    const Entry* find(const Key& k) const;
    std::size_t size() const { return entries_.size(); }

    // Records and appends to the backing file (created on first append).
    void append(const std::string& path, const Key& k, const Entry& e);

    static std::string header();
    static std::string format_line(const Key& k, const Entry& e);

    const std::map<Key, Entry>& entries() const { return entries_; }

  private:
    std::map<Key, Entry> entries_;
};

// FNV-1a over the canonical serialization of the knobs that change fits.
std::uint64_t fit_config_hash(const WindowRules& rules, const OptimizerConfig& cfg,
                              double tc_range_factor);

// Sorted ok-fits for a given config hash (window order: ascending t1, t2).
std::vector<LpplFit> collect_fits(const FitCache& cache, std::uint64_t config_hash);

} // namespace rebound
