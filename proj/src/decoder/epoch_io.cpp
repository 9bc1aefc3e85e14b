#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ihf/decoder.hpp"

namespace ihf::decoder {

namespace {

constexpr char kMagic[8] = {'I', 'H', 'F', 'E', 'P', 'O', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

// Host byte order is assumed little-endian, as in the checkpoint format.
template <typename T>
void put(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw std::runtime_error("epoch file: truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_epochs(std::ostream& os, const std::vector<Epoch>& epochs) {
    const std::uint32_t channels = epochs.empty() ? 0 : static_cast<std::uint32_t>(epochs.front().channels());
    const std::uint32_t samples = epochs.empty() ? 0 : static_cast<std::uint32_t>(epochs.front().length());
    const double fs = epochs.empty() ? 0.0 : epochs.front().fs;
    os.write(kMagic, sizeof(kMagic));
    put(os, kVersion);
    put(os, channels);
    put(os, fs);
    put(os, static_cast<std::uint32_t>(epochs.size()));
    put(os, samples);
    for (const auto& e : epochs) {
        if (static_cast<std::uint32_t>(e.channels()) != channels || static_cast<std::uint32_t>(e.length()) != samples ||
            e.fs != fs)
            throw std::invalid_argument("write_epochs: mixed epoch geometry");
        put(os, static_cast<std::uint8_t>(e.errp ? 1 : 0));
        for (Eigen::Index c = 0; c < e.samples.rows(); ++c)
            for (Eigen::Index i = 0; i < e.samples.cols(); ++i) put(os, e.samples(c, i));
    }
}

std::vector<Epoch> read_epochs(std::istream& is) {
    char magic[sizeof(kMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("epoch file: bad magic");
    if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("epoch file: unsupported version");
    const auto channels = get<std::uint32_t>(is);
    const auto fs = get<double>(is);
    const auto count = get<std::uint32_t>(is);
    const auto samples = get<std::uint32_t>(is);
    std::vector<Epoch> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        Epoch e;
        e.fs = fs;
        const auto label = get<std::uint8_t>(is);
        if (label > 1) throw std::runtime_error("epoch file: bad label byte");
        e.errp = label == 1;
        e.samples.resize(channels, samples);
        for (std::uint32_t c = 0; c < channels; ++c)
            for (std::uint32_t i = 0; i < samples; ++i) e.samples(c, i) = get<double>(is);
        out.push_back(std::move(e));
    }
    return out;
}

void save_epochs(const std::filesystem::path& path, const std::vector<Epoch>& epochs) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_epochs(os, epochs);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Epoch> load_epochs(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return read_epochs(is);
}

}  // namespace ihf::decoder
