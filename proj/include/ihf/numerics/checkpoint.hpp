#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ihf/numerics/mlp.hpp"

namespace ihf::num {

/// Versioned binary container of named entries (networks, flat real arrays,
/// strings). Layout, all integers little-endian:
///
///   "IHFCKPT\0"  u32 version  u32 entry_count
///   per entry:   u32 name_len  name  u8 kind  payload
///     kind 0 (network): u32 n_sizes  i32 sizes[]  u8 output_act  u64 n  f64 params[n]
///     kind 1 (reals):   u64 n  f64 values[n]
///     kind 2 (text):    u64 n  bytes[n]
///
/// Network parameters are flattened layer by layer as weights (column-major)
/// followed by biases.
class Checkpoint {
public:
    static constexpr std::uint32_t kVersion = 1;
    using Value = std::variant<Mlp, std::vector<double>, std::string>;

    void put(std::string name, Value value);
    bool contains(const std::string& name) const;
    const Mlp& network(const std::string& name) const;
    const std::vector<double>& reals(const std::string& name) const;
    double real(const std::string& name) const;
    const std::string& text(const std::string& name) const;

    void write(std::ostream& os) const;
    static Checkpoint read(std::istream& is);
    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

    const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

private:
    const Value& find(const std::string& name) const;
    std::vector<std::pair<std::string, Value>> entries_;
};

}  // namespace ihf::num
