#pragma once

// Unit-norm sentence vectors: the binary embedding store consumed by the
// sparse ranker, plus a deterministic hashed n-gram encoder used when no
// pretrained encoder output is available.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace vqanoise {

// Unit-norm query vector (the b of the sparse-combination problem).
struct QueryVector {
    std::vector<double> values;
    size_t dim() const { return values.size(); }
};

QueryVector unit_normalize(std::vector<double> raw);

// Column dictionary of unit-norm float32 vectors aligned with question ids.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(uint32_t dim, std::vector<float> data, std::vector<int64_t> ids);

    uint32_t dim() const { return dim_; }
    size_t num_cols() const { return ids_.size(); }
    const std::vector<int64_t>& ids() const { return ids_; }

    std::span<const float> col(size_t k) const {
        return {data_.data() + k * dim_, dim_};
    }
    std::optional<size_t> find(int64_t question_id) const;
    QueryVector column_as_query(size_t k) const;

    // Columns for `wanted` ids in that order; missing ids are an error.
    EmbeddingMatrix select(const std::vector<int64_t>& wanted) const;

    const std::vector<float>& raw() const { return data_; }

private:
    uint32_t dim_ = 0;
    std::vector<float> data_;  // column-contiguous, num_cols * dim
    std::vector<int64_t> ids_;
    std::unordered_map<int64_t, size_t> index_;
    void normalize_columns();
    void rebuild_index();
};

// File format "EMB1" (little-endian): magic, u32 record count n, u32
// dimension d, n*d float32 values, n*u64 question ids. Columns are
// renormalized on load unless already unit within 1e-6, so that a
// load/save cycle is bit-exact.
EmbeddingMatrix load_embeddings(const std::string& path,
                                const std::vector<int64_t>& expected_ids = {});
void save_embeddings(const std::string& path, const EmbeddingMatrix& matrix);

// Signed feature hashing of unigrams and bigrams; deterministic for fixed
// (tokens, dim, seed) across platforms.
QueryVector hashed_ngram_embed(const std::vector<std::string>& tokens, size_t dim,
                               uint64_t seed);

// Stable 64-bit string hash (FNV-1a folded with splitmix64); not std::hash,
// which may differ between standard libraries.
uint64_t stable_hash64(std::string_view s, uint64_t seed);

}  // namespace vqanoise
