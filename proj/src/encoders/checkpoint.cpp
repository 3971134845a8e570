#include "sleepssl/encoders/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace sleepssl {

namespace {
constexpr char kMagic[4] = {'S', 'S', 'L', 'W'};

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void save_weights(const std::string& path,
                  const std::vector<nn::NamedParam>& params) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + tmp);
        os.write(kMagic, 4);
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
        for (const auto& np : params) {
            write_pod<std::uint16_t>(os,
                                     static_cast<std::uint16_t>(np.name.size()));
            os.write(np.name.data(),
                     static_cast<std::streamsize>(np.name.size()));
            write_pod<std::uint8_t>(
                os, static_cast<std::uint8_t>(np.param->value.rank()));
            for (int d : np.param->value.shape)
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
            os.write(reinterpret_cast<const char*>(np.param->value.ptr()),
                     static_cast<std::streamsize>(np.param->value.size() *
                                                  sizeof(float)));
        }
        if (!os) throw std::runtime_error("write failure on " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

void load_weights(const std::string& path,
                  const std::vector<nn::NamedParam>& params) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read weight file " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad weight file magic in " + path);
    const auto count = read_pod<std::uint32_t>(is);

    std::map<std::string, nn::Param*> by_name;
    for (const auto& np : params) by_name[np.name] = np.param;
    std::size_t matched = 0;

    for (std::uint32_t i = 0; i < count; ++i) {
        const auto nlen = read_pod<std::uint16_t>(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        const auto rank = read_pod<std::uint8_t>(is);
        std::vector<int> shape(rank);
        for (auto& d : shape)
            d = static_cast<int>(read_pod<std::uint32_t>(is));
        const std::int64_t n = Tensor::count(shape);
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw std::runtime_error("weight file has unknown tensor " + name);
        if (it->second->value.shape != shape)
            throw std::runtime_error("shape mismatch loading " + name);
        is.read(reinterpret_cast<char*>(it->second->value.ptr()),
                static_cast<std::streamsize>(n * sizeof(float)));
        ++matched;
        if (!is) throw std::runtime_error("truncated weight file " + path);
    }
    if (matched != by_name.size())
        throw std::runtime_error("weight file " + path +
                                 " is missing tensors for this model");
}

std::uint64_t weights_digest(const std::vector<nn::NamedParam>& params) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& np : params) {
        mix(np.name.data(), np.name.size());
        mix(np.param->value.ptr(), np.param->value.data.size() * sizeof(float));
    }
    return h;
}

}  // namespace sleepssl
