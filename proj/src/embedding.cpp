#include "vqanoise/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "embedding file I/O assumes a little-endian host");

namespace vqanoise {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr double kUnitTol = 1e-6;

double norm2(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(s);
}

}  // namespace

QueryVector unit_normalize(std::vector<double> raw) {
    double s = 0.0;
    for (double x : raw) {
        if (!std::isfinite(x)) throw std::runtime_error("unit_normalize: non-finite value");
        s += x * x;
    }
    if (s == 0.0) throw std::runtime_error("unit_normalize: zero vector has no direction");
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : raw) x *= inv;
    return QueryVector{std::move(raw)};
}

EmbeddingMatrix::EmbeddingMatrix(uint32_t dim, std::vector<float> data,
                                 std::vector<int64_t> ids)
    : dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
    if (dim_ == 0) throw std::runtime_error("embedding dimension must be positive");
    if (data_.size() != ids_.size() * static_cast<size_t>(dim_))
        throw std::runtime_error("embedding data size does not match ids * dim");
    normalize_columns();
    rebuild_index();
}

void EmbeddingMatrix::rebuild_index() {
    index_.clear();
    index_.reserve(ids_.size());
    for (size_t k = 0; k < ids_.size(); ++k) {
        auto [_, inserted] = index_.emplace(ids_[k], k);
        if (!inserted)
            throw std::runtime_error("duplicate question_id in embeddings: " +
                                     std::to_string(ids_[k]));
    }
}

void EmbeddingMatrix::normalize_columns() {
    for (size_t k = 0; k < ids_.size(); ++k) {
        float* column = data_.data() + k * dim_;
        for (uint32_t i = 0; i < dim_; ++i) {
            if (!std::isfinite(column[i]))
                throw std::runtime_error("non-finite value in embedding record " +
                                         std::to_string(k));
        }
        const double n = norm2({column, dim_});
        if (n == 0.0)
            throw std::runtime_error("zero embedding vector at record " + std::to_string(k));
        // Skip columns already unit-norm so reload after save is bit-exact.
        if (std::abs(n - 1.0) <= kUnitTol) continue;
        const double inv = 1.0 / n;
        for (uint32_t i = 0; i < dim_; ++i)
            column[i] = static_cast<float>(column[i] * inv);
    }
}

std::optional<size_t> EmbeddingMatrix::find(int64_t question_id) const {
    auto it = index_.find(question_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

QueryVector EmbeddingMatrix::column_as_query(size_t k) const {
    auto c = col(k);
    std::vector<double> v(c.begin(), c.end());
    return QueryVector{std::move(v)};
}

EmbeddingMatrix EmbeddingMatrix::select(const std::vector<int64_t>& wanted) const {
    std::vector<float> data;
    data.reserve(wanted.size() * static_cast<size_t>(dim_));
    for (int64_t id : wanted) {
        auto k = find(id);
        if (!k)
            throw std::runtime_error("no embedding for question_id " + std::to_string(id));
        auto c = col(*k);
        data.insert(data.end(), c.begin(), c.end());
    }
    return EmbeddingMatrix(dim_, std::move(data), wanted);
}

EmbeddingMatrix load_embeddings(const std::string& path,
                                const std::vector<int64_t>& expected_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);

    char magic[4];
    uint32_t n = 0, d = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": not an EMB1 file");
    if (d == 0) throw std::runtime_error(path + ": zero dimension");

    std::vector<float> data(static_cast<size_t>(n) * d);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    std::vector<int64_t> ids(n);
    in.read(reinterpret_cast<char*>(ids.data()),
            static_cast<std::streamsize>(ids.size() * sizeof(int64_t)));
    if (!in) throw std::runtime_error(path + ": truncated embedding file");

    if (!expected_ids.empty()) {
        if (expected_ids.size() != ids.size())
            throw std::runtime_error(path + ": has " + std::to_string(ids.size()) +
                                     " records, expected " +
                                     std::to_string(expected_ids.size()));
        for (size_t k = 0; k < ids.size(); ++k) {
            if (ids[k] != expected_ids[k])
                throw std::runtime_error(path + ": record " + std::to_string(k) +
                                         " has id " + std::to_string(ids[k]) +
                                         ", expected " + std::to_string(expected_ids[k]));
        }
    }
    return EmbeddingMatrix(d, std::move(data), std::move(ids));
}

void save_embeddings(const std::string& path, const EmbeddingMatrix& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const uint32_t n = static_cast<uint32_t>(matrix.num_cols());
    const uint32_t d = matrix.dim();
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(matrix.raw().data()),
              static_cast<std::streamsize>(matrix.raw().size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(matrix.ids().data()),
              static_cast<std::streamsize>(matrix.ids().size() * sizeof(int64_t)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

uint64_t stable_hash64(std::string_view s, uint64_t seed) {
    // FNV-1a over the bytes, then a splitmix64 finalizer mixing in the seed.
    uint64_t h = 14695981039346656037ull ^ (seed * 0x9e3779b97f4a7c15ull);
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

QueryVector hashed_ngram_embed(const std::vector<std::string>& tokens, size_t dim,
                               uint64_t seed) {
    if (dim < 2) throw std::runtime_error("hashed_ngram_embed: dim must be >= 2");
    if (tokens.empty()) throw std::runtime_error("hashed_ngram_embed: empty token list");

    std::vector<double> acc(dim, 0.0);
    auto add = [&](const std::string& key) {
        const uint64_t h = stable_hash64(key, seed);
        const size_t idx = static_cast<size_t>(h % dim);
        const double sign = (h >> 63) ? 1.0 : -1.0;
        acc[idx] += sign;
    };
    for (const std::string& t : tokens) add(t);
    for (size_t i = 0; i + 1 < tokens.size(); ++i) add(tokens[i] + '\x1f' + tokens[i + 1]);

    // Signed counts can cancel exactly; salt with a whole-sentence feature
    // so the accumulated vector is never zero.
    double s = 0.0;
    for (double x : acc) s += x * x;
    if (s == 0.0) {
        std::string all;
        for (const std::string& t : tokens) all += t, all += '\x1f';
        add("\x01" + all);
    }
    return unit_normalize(std::move(acc));
}

}  // namespace vqanoise
