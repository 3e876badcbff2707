#include "mahler/grid.hpp"

#include <cstdio>
#include <cstring>

namespace mahler {

bool GridFunction::domain_contiguous() const {
    for (int a = 0; a < dim(); ++a) {
        const int n = axes_[static_cast<std::size_t>(a)].count;
        const std::size_t str = strides_[static_cast<std::size_t>(a)];
        const std::size_t lines = size() / static_cast<std::size_t>(n);
        // Enumerate line base offsets: all indices with axis-a index 0.
        for (std::size_t flat = 0; flat < size(); ++flat) {
            auto idx = multi_index(flat);
            if (idx[a] != 0) continue;
            int first = -1, last = -1;
            bool gap = false;
            for (int i = 0; i < n; ++i) {
                double v = values_[flat + static_cast<std::size_t>(i) * str];
                if (v < kInf) {
                    if (first < 0) first = i;
                    if (last >= 0 && i > last + 1) gap = true;
                    last = i;
                }
            }
            if (gap) return false;
        }
        (void)lines;
    }
    return true;
}

double GridFunction::interpolate(const Vec& x) const {
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int a = 0; a < dim(); ++a) {
        const AxisSpec& ax = axes_[static_cast<std::size_t>(a)];
        double t = x[a] / ax.step() + ax.mid();
        if (t < 0.0 || t > ax.count - 1) return kInf;
        int i = static_cast<int>(std::floor(t));
        if (i >= ax.count - 1) i = ax.count - 2;
        base[a] = i;
        frac[a] = t - i;
    }
    const int corners = 1 << dim();
    double acc = 0.0;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::array<int, 3> idx = base;
        for (int a = 0; a < dim(); ++a) {
            if ((c >> a) & 1) {
                idx[a] += 1;
                w *= frac[a];
            } else {
                w *= 1.0 - frac[a];
            }
        }
        double v = at(idx);
        if (v == kInf) {
            if (w > 0.0) return kInf;
            continue;  // zero-weight infinite corner does not poison the cell
        }
        acc += w * v;
    }
    return acc;
}

namespace {
constexpr char kMagic[4] = {'L', 'M', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    std::FILE* f;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};
}  // namespace

void GridFunction::save(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw GridError("cannot open for write: " + path);
    FileCloser closer{f};
    std::fwrite(kMagic, 1, 4, f);
    std::uint32_t ver = kVersion, d = static_cast<std::uint32_t>(dim());
    std::uint8_t even = even_flag_ ? 1 : 0;
    std::fwrite(&ver, sizeof ver, 1, f);
    std::fwrite(&d, sizeof d, 1, f);
    std::fwrite(&even, sizeof even, 1, f);
    for (const auto& ax : axes_) {
        double mn = -ax.max_abs, mx = ax.max_abs;
        std::uint64_t cnt = static_cast<std::uint64_t>(ax.count);
        std::fwrite(&mn, sizeof mn, 1, f);
        std::fwrite(&mx, sizeof mx, 1, f);
        std::fwrite(&cnt, sizeof cnt, 1, f);
    }
    if (std::fwrite(values_.data(), sizeof(double), values_.size(), f) != values_.size())
        throw GridError("short write: " + path);
}

GridFunction GridFunction::load(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw GridError("cannot open for read: " + path);
    FileCloser closer{f};
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw GridError("bad grid container magic: " + path);
    std::uint32_t ver = 0, d = 0;
    std::uint8_t even = 0;
    if (std::fread(&ver, sizeof ver, 1, f) != 1 || ver != kVersion)
        throw GridError("unsupported grid container version");
    if (std::fread(&d, sizeof d, 1, f) != 1 || d < 1 || d > 3)
        throw GridError("bad grid dim");
    if (std::fread(&even, sizeof even, 1, f) != 1) throw GridError("truncated header");
    std::vector<AxisSpec> axes;
    std::size_t total = 1;
    for (std::uint32_t a = 0; a < d; ++a) {
        double mn, mx;
        std::uint64_t cnt;
        if (std::fread(&mn, sizeof mn, 1, f) != 1 || std::fread(&mx, sizeof mx, 1, f) != 1 ||
            std::fread(&cnt, sizeof cnt, 1, f) != 1)
            throw GridError("truncated axis header");
        if (mn != -mx) throw GridError("grid axis not symmetric about 0");
        axes.emplace_back(mx, static_cast<int>(cnt));
        total *= static_cast<std::size_t>(cnt);
    }
    std::vector<double> vals(total);
    if (std::fread(vals.data(), sizeof(double), total, f) != total)
        throw GridError("truncated grid values");
    GridFunction g(std::move(axes), std::move(vals));
    (void)even;  // recomputed by the constructor
    return g;
}

}  // namespace mahler
