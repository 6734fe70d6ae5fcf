#include "corrseg/archive.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "archive blobs are little-endian; big-endian hosts are unsupported");

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace corrseg {

int64_t TensorEntry::element_count() const {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
}

int64_t TensorEntry::byte_size() const {
    return element_count() * (dtype == "f32" ? 4 : 1);
}

// ---------------------------------------------------------------------------
// writer
// ---------------------------------------------------------------------------

ArchiveWriter::ArchiveWriter(const std::string& dir, bool overwrite) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const fs::path manifest = fs::path(dir_) / "manifest.json";
    if (fs::exists(manifest) && !overwrite)
        throw std::runtime_error("archive already exists at " + dir_ +
                                 " (pass overwrite to replace it)");
    // truncate any previous blob
    std::ofstream f(fs::path(dir_) / blob_name_, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + dir_ + "/" + blob_name_ + " for writing");
}

ArchiveWriter::~ArchiveWriter() {
    try {
        if (!finalized_) finalize();
    } catch (...) {
        // destructor must not throw; an incomplete manifest is detected on read
    }
}

bool ArchiveWriter::has(const std::string& name) const { return index_.count(name) > 0; }

void ArchiveWriter::append_blob(const std::string& name, const void* data, size_t bytes,
                                std::vector<int64_t> shape, const char* dtype) {
    if (has(name)) return;
    std::ofstream f(fs::path(dir_) / blob_name_, std::ios::binary | std::ios::app);
    if (!f) throw std::runtime_error("cannot append to archive blob in " + dir_);
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!f) throw std::runtime_error("short write to archive blob in " + dir_);

    TensorEntry e;
    e.name = name;
    e.shape = std::move(shape);
    e.dtype = dtype;
    e.file = blob_name_;
    e.byte_offset = offset_;
    index_[name] = entries_.size();
    entries_.push_back(std::move(e));
    offset_ += static_cast<int64_t>(bytes);
}

void ArchiveWriter::put_f32(const std::string& name, const float* data,
                            std::vector<int64_t> shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    append_blob(name, data, static_cast<size_t>(n) * 4, std::move(shape), "f32");
}

void ArchiveWriter::put_f32(const std::string& name, const MatF& m) {
    put_f32(name, m.data(), {m.rows(), m.cols()});
}

void ArchiveWriter::put_f32_scalar(const std::string& name, float v) {
    put_f32(name, &v, {1});
}

void ArchiveWriter::put_u8(const std::string& name, const uint8_t* data,
                           std::vector<int64_t> shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    append_blob(name, data, static_cast<size_t>(n), std::move(shape), "u8");
}

void ArchiveWriter::put_u8(const std::string& name, const Mask2D& mask) {
    put_u8(name, mask.data.data(), {mask.h, mask.w});
}

void ArchiveWriter::set_meta(const std::string& key, const std::string& value) {
    meta_str_[key] = value;
}

void ArchiveWriter::set_meta(const std::string& key, double value) { meta_num_[key] = value; }

void ArchiveWriter::finalize() {
    json tensors = json::array();
    for (const auto& e : entries_) {
        tensors.push_back({{"name", e.name},
                           {"shape", e.shape},
                           {"dtype", e.dtype},
                           {"file", e.file},
                           {"byte_offset", e.byte_offset}});
    }
    json meta = json::object();
    for (const auto& [k, v] : meta_str_) meta[k] = v;
    for (const auto& [k, v] : meta_num_) meta[k] = v;
    json manifest = {{"version", 1}, {"meta", meta}, {"tensors", tensors}};

    std::ofstream f(fs::path(dir_) / "manifest.json", std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write manifest.json in " + dir_);
    f << manifest.dump(2) << "\n";
    finalized_ = true;
}

// ---------------------------------------------------------------------------
// reader
// ---------------------------------------------------------------------------

ArchiveReader::ArchiveReader(const std::string& dir) : dir_(dir) {
    const fs::path manifest_path = fs::path(dir_) / "manifest.json";
    std::ifstream f(manifest_path);
    if (!f) throw std::runtime_error("fixture archive not found: " + manifest_path.string());
    json manifest;
    try {
        f >> manifest;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed manifest.json in " + dir_ + ": " + e.what());
    }
    for (const auto& t : manifest.at("tensors")) {
        TensorEntry e;
        e.name = t.at("name").get<std::string>();
        e.shape = t.at("shape").get<std::vector<int64_t>>();
        e.dtype = t.at("dtype").get<std::string>();
        e.file = t.at("file").get<std::string>();
        e.byte_offset = t.at("byte_offset").get<int64_t>();
        index_[e.name] = entries_.size();
        entries_.push_back(std::move(e));
    }
    if (manifest.contains("meta")) {
        for (const auto& [k, v] : manifest["meta"].items()) {
            if (v.is_string())
                meta_str_[k] = v.get<std::string>();
            else if (v.is_number())
                meta_num_[k] = v.get<double>();
        }
    }
}

bool ArchiveReader::has(const std::string& name) const { return index_.count(name) > 0; }

const TensorEntry& ArchiveReader::entry(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw std::runtime_error("tensor '" + name + "' not present in archive " + dir_);
    return entries_[it->second];
}

std::vector<std::string> ArchiveReader::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

std::vector<char> ArchiveReader::read_raw(const TensorEntry& e) const {
    std::ifstream f(fs::path(dir_) / e.file, std::ios::binary);
    if (!f) throw std::runtime_error("archive blob missing: " + dir_ + "/" + e.file);
    f.seekg(e.byte_offset);
    std::vector<char> buf(static_cast<size_t>(e.byte_size()));
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() != static_cast<std::streamsize>(buf.size()))
        throw std::runtime_error("archive blob truncated for tensor '" + e.name + "'");
    return buf;
}

MatF ArchiveReader::read_f32(const std::string& name) const {
    const TensorEntry& e = entry(name);
    if (e.dtype != "f32")
        throw std::runtime_error("tensor '" + name + "' is not f32");
    if (e.shape.size() > 2)
        throw std::runtime_error("tensor '" + name + "' has rank > 2");
    const auto buf = read_raw(e);
    const int64_t rows = e.shape.empty() ? 1 : e.shape[0];
    const int64_t cols = e.shape.size() == 2 ? e.shape[1] : 1;
    MatF m(rows, cols);
    std::memcpy(m.data(), buf.data(), buf.size());
    return m;
}

float ArchiveReader::read_f32_scalar(const std::string& name) const {
    MatF m = read_f32(name);
    if (m.size() != 1)
        throw std::runtime_error("tensor '" + name + "' is not a scalar");
    return m(0, 0);
}

std::vector<uint8_t> ArchiveReader::read_u8(const std::string& name) const {
    const TensorEntry& e = entry(name);
    if (e.dtype != "u8")
        throw std::runtime_error("tensor '" + name + "' is not u8");
    const auto buf = read_raw(e);
    return std::vector<uint8_t>(buf.begin(), buf.end());
}

Mask2D ArchiveReader::read_mask(const std::string& name) const {
    const TensorEntry& e = entry(name);
    if (e.shape.size() != 2)
        throw std::runtime_error("tensor '" + name + "' is not a 2-D mask");
    Mask2D m(static_cast<int>(e.shape[0]), static_cast<int>(e.shape[1]));
    m.data = read_u8(name);
    return m;
}

std::optional<std::string> ArchiveReader::meta_str(const std::string& key) const {
    auto it = meta_str_.find(key);
    if (it == meta_str_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> ArchiveReader::meta_num(const std::string& key) const {
    auto it = meta_num_.find(key);
    if (it == meta_num_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------

std::vector<std::string> validate_archive(const std::string& dir) {
    std::vector<std::string> problems;
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream f(manifest_path);
    if (!f) {
        problems.push_back("manifest.json missing");
        return problems;
    }
    json manifest;
    try {
        f >> manifest;
    } catch (const json::exception& e) {
        problems.push_back(std::string("manifest.json is not valid JSON: ") + e.what());
        return problems;
    }
    if (!manifest.contains("version") || !manifest["version"].is_number_integer())
        problems.push_back("missing integer field 'version'");
    if (!manifest.contains("tensors") || !manifest["tensors"].is_array()) {
        problems.push_back("missing array field 'tensors'");
        return problems;
    }

    std::map<std::string, int64_t> file_sizes;
    std::map<std::string, bool> seen;
    size_t idx = 0;
    for (const auto& t : manifest["tensors"]) {
        const std::string where = "tensors[" + std::to_string(idx++) + "]";
        if (!t.is_object()) {
            problems.push_back(where + " is not an object");
            continue;
        }
        for (const char* field : {"name", "dtype", "file"})
            if (!t.contains(field) || !t[field].is_string())
                problems.push_back(where + " missing string field '" + field + "'");
        if (!t.contains("shape") || !t["shape"].is_array())
            problems.push_back(where + " missing array field 'shape'");
        if (!t.contains("byte_offset") || !t["byte_offset"].is_number_integer())
            problems.push_back(where + " missing integer field 'byte_offset'");
        if (!problems.empty() && problems.back().rfind(where, 0) == 0) continue;

        TensorEntry e;
        e.name = t["name"].get<std::string>();
        e.shape = t["shape"].get<std::vector<int64_t>>();
        e.dtype = t["dtype"].get<std::string>();
        e.file = t["file"].get<std::string>();
        e.byte_offset = t["byte_offset"].get<int64_t>();

        if (seen[e.name]) problems.push_back("duplicate tensor name '" + e.name + "'");
        seen[e.name] = true;
        if (e.dtype != "f32" && e.dtype != "u8")
            problems.push_back(where + " has unknown dtype '" + e.dtype + "'");
        for (int64_t d : e.shape)
            if (d <= 0) problems.push_back(where + " has non-positive shape dimension");

        if (!file_sizes.count(e.file)) {
            std::error_code ec;
            const auto sz = fs::file_size(fs::path(dir) / e.file, ec);
            file_sizes[e.file] = ec ? -1 : static_cast<int64_t>(sz);
        }
        const int64_t fsize = file_sizes[e.file];
        if (fsize < 0)
            problems.push_back(where + " references missing blob file '" + e.file + "'");
        else if (e.byte_offset < 0 || e.byte_offset + e.byte_size() > fsize)
            problems.push_back(where + " range exceeds blob file '" + e.file + "'");
    }
    return problems;
}

}  // namespace corrseg
