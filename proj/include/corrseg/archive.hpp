#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrseg/common.hpp"

namespace corrseg {

// Tensor archive: a directory holding manifest.json plus binary blob files.
// The manifest lists {name, shape, dtype, file, byte_offset}; blobs are
// little-endian row-major. The format is deliberately trivial so any
// language can produce or consume fixtures.

struct TensorEntry {
    std::string name;
    std::vector<int64_t> shape;
    std::string dtype;  // "f32" or "u8"
    std::string file;
    int64_t byte_offset = 0;

    int64_t element_count() const;
    int64_t byte_size() const;
};

class ArchiveWriter {
public:
    /// Opens `dir` for writing. The directory is created if missing; an
    /// existing manifest is an error unless `overwrite` is set.
    explicit ArchiveWriter(const std::string& dir, bool overwrite = false);
    ~ArchiveWriter();

    ArchiveWriter(const ArchiveWriter&) = delete;
    ArchiveWriter& operator=(const ArchiveWriter&) = delete;

    bool has(const std::string& name) const;

    /// Tensor writers ignore duplicate names: recording the same provider
    /// request twice stores one copy.
    void put_f32(const std::string& name, const float* data, std::vector<int64_t> shape);
    void put_f32(const std::string& name, const MatF& m);
    void put_f32_scalar(const std::string& name, float v);
    void put_u8(const std::string& name, const uint8_t* data, std::vector<int64_t> shape);
    void put_u8(const std::string& name, const Mask2D& mask);

    void set_meta(const std::string& key, const std::string& value);
    void set_meta(const std::string& key, double value);

    /// Writes manifest.json. Called by the destructor if not done explicitly.
    void finalize();

private:
    void append_blob(const std::string& name, const void* data, size_t bytes,
                     std::vector<int64_t> shape, const char* dtype);

    std::string dir_;
    std::string blob_name_ = "tensors.bin";
    int64_t offset_ = 0;
    std::vector<TensorEntry> entries_;
    std::map<std::string, size_t> index_;
    std::map<std::string, std::string> meta_str_;
    std::map<std::string, double> meta_num_;
    bool finalized_ = false;
};

class ArchiveReader {
public:
    explicit ArchiveReader(const std::string& dir);

    bool has(const std::string& name) const;
    const TensorEntry& entry(const std::string& name) const;
    std::vector<std::string> names() const;

    /// Reads an f32 tensor of rank 1 or 2 as a matrix (rank-1 -> column count 1).
    MatF read_f32(const std::string& name) const;
    float read_f32_scalar(const std::string& name) const;
    std::vector<uint8_t> read_u8(const std::string& name) const;
    Mask2D read_mask(const std::string& name) const;

    std::optional<std::string> meta_str(const std::string& key) const;
    std::optional<double> meta_num(const std::string& key) const;

    const std::string& dir() const { return dir_; }

private:
    std::vector<char> read_raw(const TensorEntry& e) const;

    std::string dir_;
    std::vector<TensorEntry> entries_;
    std::map<std::string, size_t> index_;
    std::map<std::string, std::string> meta_str_;
    std::map<std::string, double> meta_num_;
};

/// Structural validation of an archive directory against the manifest schema.
/// Returns a list of problems; empty means the archive is well formed.
std::vector<std::string> validate_archive(const std::string& dir);

}  // namespace corrseg
