#include "ihf/numerics/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ihf::num {

namespace {

constexpr char kMagic[8] = {'I', 'H', 'F', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put_raw(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
T get_raw(std::istream& is) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw std::runtime_error("checkpoint: truncated input");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void put_reals(std::ostream& os, const std::vector<double>& values) {
    put_raw<std::uint64_t>(os, values.size());
    for (double v : values) put_raw(os, v);
}

std::vector<double> get_reals(std::istream& is) {
    const auto n = get_raw<std::uint64_t>(is);
    if (n > (1ULL << 32)) throw std::runtime_error("checkpoint: implausible array length");
    std::vector<double> values(n);
    for (auto& v : values) v = get_raw<double>(is);
    return values;
}

}  // namespace

void Checkpoint::put(std::string name, Value value) {
    for (auto& [n, v] : entries_) {
        if (n == name) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(name), std::move(value));
}

bool Checkpoint::contains(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.first == name) return true;
    return false;
}

const Checkpoint::Value& Checkpoint::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.first == name) return e.second;
    throw std::out_of_range("checkpoint: no entry named '" + name + "'");
}

const Mlp& Checkpoint::network(const std::string& name) const {
    const auto* p = std::get_if<Mlp>(&find(name));
    if (!p) throw std::runtime_error("checkpoint: entry '" + name + "' is not a network");
    return *p;
}

const std::vector<double>& Checkpoint::reals(const std::string& name) const {
    const auto* p = std::get_if<std::vector<double>>(&find(name));
    if (!p) throw std::runtime_error("checkpoint: entry '" + name + "' is not a real array");
    return *p;
}

double Checkpoint::real(const std::string& name) const {
    const auto& r = reals(name);
    if (r.size() != 1) throw std::runtime_error("checkpoint: entry '" + name + "' is not a scalar");
    return r.front();
}

const std::string& Checkpoint::text(const std::string& name) const {
    const auto* p = std::get_if<std::string>(&find(name));
    if (!p) throw std::runtime_error("checkpoint: entry '" + name + "' is not text");
    return *p;
}

void Checkpoint::write(std::ostream& os) const {
    os.write(kMagic, sizeof(kMagic));
    put_raw<std::uint32_t>(os, kVersion);
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [name, value] : entries_) {
        put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        if (const auto* net = std::get_if<Mlp>(&value)) {
            put_raw<std::uint8_t>(os, 0);
            put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(net->sizes().size()));
            for (int s : net->sizes()) put_raw<std::int32_t>(os, s);
            put_raw<std::uint8_t>(os, net->output_activation() == Activation::Relu ? 1 : 0);
            put_reals(os, net->flat_parameters());
        } else if (const auto* r = std::get_if<std::vector<double>>(&value)) {
            put_raw<std::uint8_t>(os, 1);
            put_reals(os, *r);
        } else {
            const auto& s = std::get<std::string>(value);
            put_raw<std::uint8_t>(os, 2);
            put_raw<std::uint64_t>(os, s.size());
            os.write(s.data(), static_cast<std::streamsize>(s.size()));
        }
    }
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

Checkpoint Checkpoint::read(std::istream& is) {
    char magic[sizeof(kMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const auto version = get_raw<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ck;
    const auto count = get_raw<std::uint32_t>(is);
    for (std::uint32_t e = 0; e < count; ++e) {
        const auto name_len = get_raw<std::uint32_t>(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw std::runtime_error("checkpoint: truncated name");
        const auto kind = get_raw<std::uint8_t>(is);
        switch (kind) {
            case 0: {
                const auto n_sizes = get_raw<std::uint32_t>(is);
                std::vector<int> sizes(n_sizes);
                for (auto& s : sizes) s = get_raw<std::int32_t>(is);
                const auto act = get_raw<std::uint8_t>(is) == 1 ? Activation::Relu : Activation::Linear;
                Mlp net(sizes, act);
                net.set_flat_parameters(get_reals(is));
                ck.put(std::move(name), std::move(net));
                break;
            }
            case 1:
                ck.put(std::move(name), get_reals(is));
                break;
            case 2: {
                const auto n = get_raw<std::uint64_t>(is);
                std::string s(n, '\0');
                if (!is.read(s.data(), static_cast<std::streamsize>(n)))
                    throw std::runtime_error("checkpoint: truncated text");
                ck.put(std::move(name), std::move(s));
                break;
            }
            default:
                throw std::runtime_error("checkpoint: unknown entry kind");
        }
    }
    return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    write(os);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
    return read(is);
}

}  // namespace ihf::num
