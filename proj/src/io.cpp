#include "sscl/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sscl {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', 'L'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& f, T v) {
    // Host is little-endian on every supported target.
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("container: truncated file");
    return v;
}

std::uint32_t read_be32(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("idx: truncated file");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

void write_container(const std::string& path, const std::vector<Matrix>& arrays) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_container: cannot open " + path);
    f.write(kMagic, 4);
    write_le<std::uint16_t>(f, kVersion);
    write_le<std::uint32_t>(f, static_cast<std::uint32_t>(arrays.size()));
    for (const Matrix& m : arrays) {
        write_le<std::uint32_t>(f, static_cast<std::uint32_t>(m.rows));
        write_le<std::uint32_t>(f, static_cast<std::uint32_t>(m.cols));
        f.write(reinterpret_cast<const char*>(m.data.data()),
                static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    }
    if (!f) throw std::runtime_error("write_container: write failed for " + path);
}

std::vector<Matrix> read_container(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_container: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_container: bad magic in " + path);
    if (read_le<std::uint16_t>(f) != kVersion)
        throw std::runtime_error("read_container: unsupported version in " + path);
    const std::uint32_t n = read_le<std::uint32_t>(f);
    std::vector<Matrix> arrays;
    arrays.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t rows = read_le<std::uint32_t>(f);
        const std::uint32_t cols = read_le<std::uint32_t>(f);
        std::vector<double> data(static_cast<std::size_t>(rows) * cols);
        f.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!f) throw std::runtime_error("read_container: truncated file " + path);
        arrays.emplace_back(rows, cols, std::move(data));
    }
    return arrays;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::vector<Matrix> arrays;
    Matrix means(ds.class_means.size(), static_cast<std::size_t>(ds.dim));
    for (std::size_t c = 0; c < ds.class_means.size(); ++c)
        for (int j = 0; j < ds.dim; ++j) means(c, j) = ds.class_means[c](0, j);
    Matrix xs(ds.xs.size(), static_cast<std::size_t>(ds.dim));
    Matrix ys(ds.ys.size(), 1);
    for (std::size_t i = 0; i < ds.xs.size(); ++i) {
        for (int j = 0; j < ds.dim; ++j) xs(i, j) = ds.xs[i](0, j);
        ys(i, 0) = ds.ys[i];
    }
    arrays.push_back(std::move(means));
    arrays.push_back(std::move(xs));
    arrays.push_back(std::move(ys));
    write_container(path, arrays);

    nlohmann::json side = {{"kind", "dataset"},
                           {"num_classes", ds.num_classes},
                           {"dim", ds.dim},
                           {"mean_radius", ds.mean_radius},
                           {"seed", ds.seed}};
    std::ofstream sf(path + ".json", std::ios::binary);
    if (!sf) throw std::runtime_error("save_dataset: cannot open sidecar");
    sf << side.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
    const auto arrays = read_container(path);
    if (arrays.size() != 3) throw std::runtime_error("load_dataset: expected 3 arrays");
    std::ifstream sf(path + ".json");
    if (!sf) throw std::runtime_error("load_dataset: missing sidecar " + path + ".json");
    nlohmann::json side = nlohmann::json::parse(sf);
    Dataset ds;
    ds.num_classes = side.at("num_classes").get<int>();
    ds.dim = side.at("dim").get<int>();
    ds.mean_radius = side.at("mean_radius").get<double>();
    ds.seed = side.at("seed").get<std::uint64_t>();
    const Matrix& means = arrays[0];
    for (std::size_t c = 0; c < means.rows; ++c) {
        Matrix m(1, means.cols);
        for (std::size_t j = 0; j < means.cols; ++j) m(0, j) = means(c, j);
        ds.class_means.push_back(std::move(m));
    }
    const Matrix& xs = arrays[1];
    const Matrix& ys = arrays[2];
    for (std::size_t i = 0; i < xs.rows; ++i) {
        Matrix x(1, xs.cols);
        for (std::size_t j = 0; j < xs.cols; ++j) x(0, j) = xs(i, j);
        ds.xs.push_back(std::move(x));
        ds.ys.push_back(static_cast<int>(ys(i, 0)));
    }
    return ds;
}

void save_model(const MlpModel& m, const std::string& path) {
    std::vector<Matrix> arrays;
    for (std::size_t i = 0; i < m.num_layers(); ++i) {
        arrays.push_back(m.weights[i]);
        arrays.push_back(m.biases[i]);
    }
    write_container(path, arrays);
    nlohmann::json side = {{"kind", "model"},
                           {"dims", m.dims},
                           {"activation", m.activation == Activation::Relu ? "relu" : "identity"},
                           {"use_bias", m.use_bias}};
    std::ofstream sf(path + ".json", std::ios::binary);
    if (!sf) throw std::runtime_error("save_model: cannot open sidecar");
    sf << side.dump(2) << "\n";
}

MlpModel load_model(const std::string& path) {
    const auto arrays = read_container(path);
    std::ifstream sf(path + ".json");
    if (!sf) throw std::runtime_error("load_model: missing sidecar " + path + ".json");
    nlohmann::json side = nlohmann::json::parse(sf);
    MlpModel m;
    m.dims = side.at("dims").get<std::vector<std::size_t>>();
    m.activation =
        side.at("activation").get<std::string>() == "relu" ? Activation::Relu : Activation::Identity;
    m.use_bias = side.at("use_bias").get<bool>();
    if (arrays.size() != 2 * (m.dims.size() - 1))
        throw std::runtime_error("load_model: array count mismatch");
    for (std::size_t i = 0; i + 1 < m.dims.size(); ++i) {
        m.weights.push_back(arrays[2 * i]);
        m.biases.push_back(arrays[2 * i + 1]);
    }
    return m;
}

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw std::runtime_error("idx: cannot open " + images_path);
    if (read_be32(imgs) != 0x00000803) throw std::runtime_error("idx: bad image magic");
    const std::uint32_t n = read_be32(imgs);
    const std::uint32_t rows = read_be32(imgs);
    const std::uint32_t cols = read_be32(imgs);

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw std::runtime_error("idx: cannot open " + labels_path);
    if (read_be32(labels) != 0x00000801) throw std::runtime_error("idx: bad label magic");
    if (read_be32(labels) != n) throw std::runtime_error("idx: image/label count mismatch");

    Dataset ds;
    ds.dim = static_cast<int>(rows * cols);
    std::vector<unsigned char> buf(rows * cols);
    int max_label = -1;
    for (std::uint32_t i = 0; i < n; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!imgs) throw std::runtime_error("idx: truncated image data");
        Matrix x(1, buf.size());
        for (std::size_t j = 0; j < buf.size(); ++j) x.data[j] = buf[j] / 255.0;
        ds.xs.push_back(std::move(x));
        const int y = labels.get();
        if (y == EOF) throw std::runtime_error("idx: truncated label data");
        ds.ys.push_back(y);
        max_label = std::max(max_label, y);
    }
    ds.num_classes = max_label + 1;
    return ds;
}

}  // namespace sscl
