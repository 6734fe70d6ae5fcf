#include "corrseg.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "corrseg/evaluation.hpp"
#include "corrseg/image_io.hpp"
#include "corrseg/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct corrseg_context {
    corrseg::PipelineConfig cfg;
    std::optional<corrseg::PipelineContext> pipeline;  // built on first segment/extract
    std::string last_error;

    corrseg::PipelineContext& ensure_pipeline() {
        if (!pipeline) pipeline = corrseg::PipelineContext::create(cfg);
        return *pipeline;
    }
};

namespace {

corrseg_status classify_exception(const std::exception& e, std::string& msg) {
    msg = e.what();
    if (dynamic_cast<const std::invalid_argument*>(&e)) return CORRSEG_ERR_INVALID_ARGUMENT;
    if (msg.find("provider") != std::string::npos) return CORRSEG_ERR_PROVIDER;
    if (msg.find("cannot ") != std::string::npos || msg.find("not found") != std::string::npos)
        return CORRSEG_ERR_IO;
    return CORRSEG_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json segment_report(const corrseg_context& ctx, const corrseg::PipelineContext::Output& out,
                    const std::string& image_path) {
    const auto& names = ctx.pipeline->expansion().original_names;
    std::vector<int64_t> counts(names.size(), 0);
    for (int32_t v : out.map.labels) ++counts[v];
    const double total = static_cast<double>(out.map.labels.size());

    json share = json::object();
    for (size_t i = 0; i < names.size(); ++i)
        share[names[i]] = static_cast<double>(counts[i]) / total;

    json j;
    j["image"] = image_path;
    j["height"] = out.map.h;
    j["width"] = out.map.w;
    j["pixel_share"] = share;
    j["config"] = json::parse(ctx.cfg.to_json());
    return j;
}

}  // namespace

extern "C" {

const char* corrseg_version(void) { return "0.1.0"; }

const char* corrseg_status_name(corrseg_status status) {
    switch (status) {
        case CORRSEG_OK: return "ok";
        case CORRSEG_ERR_INVALID_ARGUMENT: return "invalid argument";
        case CORRSEG_ERR_CONFIG: return "configuration error";
        case CORRSEG_ERR_IO: return "i/o error";
        case CORRSEG_ERR_PROVIDER: return "provider error";
        case CORRSEG_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

corrseg_context* corrseg_context_create(const char* config_json, char* err, size_t err_len) {
    std::string message;
    try {
        if (config_json == nullptr) throw std::invalid_argument("config_json is NULL");
        auto* ctx = new corrseg_context();
        ctx->cfg = corrseg::PipelineConfig::from_json_text(config_json);
        return ctx;
    } catch (const std::exception& e) {
        message = e.what();
    } catch (...) {
        message = "unknown error";
    }
    if (err != nullptr && err_len > 0) {
        std::strncpy(err, message.c_str(), err_len - 1);
        err[err_len - 1] = '\0';
    }
    return nullptr;
}

void corrseg_context_destroy(corrseg_context* ctx) { delete ctx; }

const char* corrseg_last_error(const corrseg_context* ctx) {
    return ctx == nullptr ? "" : ctx->last_error.c_str();
}

corrseg_status corrseg_effective_config(corrseg_context* ctx, char** json_out) {
    if (ctx == nullptr || json_out == nullptr) return CORRSEG_ERR_INVALID_ARGUMENT;
    try {
        *json_out = dup_string(ctx->cfg.to_json());
        return CORRSEG_OK;
    } catch (const std::exception& e) {
        return classify_exception(e, ctx->last_error);
    }
}

corrseg_status corrseg_segment(corrseg_context* ctx, const char* image_path,
                               const char* out_prefix, char** report_json_out) {
    if (ctx == nullptr) return CORRSEG_ERR_INVALID_ARGUMENT;
    if (image_path == nullptr || out_prefix == nullptr) {
        ctx->last_error = "image_path and out_prefix are required";
        return CORRSEG_ERR_INVALID_ARGUMENT;
    }
    try {
        auto& pipeline = ctx->ensure_pipeline();
        const corrseg::ImageU8 image = corrseg::load_image(image_path);
        const auto out = pipeline.segment(image);

        // render everything before touching the filesystem
        const corrseg::LabelImage labels = out.map.to_label_image();
        const corrseg::ImageU8 overlay = corrseg::render_overlay(out.resized, labels);
        corrseg::save_label_png(std::string(out_prefix) + ".labels.png", labels);
        corrseg::save_rgb_png(std::string(out_prefix) + ".overlay.png", overlay);

        if (report_json_out != nullptr)
            *report_json_out = dup_string(segment_report(*ctx, out, image_path).dump(2));
        return CORRSEG_OK;
    } catch (const std::exception& e) {
        return classify_exception(e, ctx->last_error);
    }
}

corrseg_status corrseg_evaluate(corrseg_context* ctx, const char* dataset_config_path,
                                int sample_limit, const char* ablate_csv, const char* out_prefix,
                                char** report_json_out) {
    if (ctx == nullptr) return CORRSEG_ERR_INVALID_ARGUMENT;
    if (dataset_config_path == nullptr) {
        ctx->last_error = "dataset_config_path is required";
        return CORRSEG_ERR_INVALID_ARGUMENT;
    }
    try {
        const auto dataset = corrseg::DatasetConfig::from_json_file(dataset_config_path);

        std::vector<corrseg::BenchmarkReport> rows;
        if (ablate_csv != nullptr && ablate_csv[0] != '\0') {
            std::vector<std::string> components;
            std::string item;
            for (const char* p = ablate_csv;; ++p) {
                if (*p == ',' || *p == '\0') {
                    if (!item.empty()) components.push_back(item);
                    item.clear();
                    if (*p == '\0') break;
                } else {
                    item += *p;
                }
            }
            rows = corrseg::run_ablation(dataset, ctx->cfg, components, sample_limit);
        } else {
            rows.push_back(corrseg::run_benchmark(dataset, ctx->cfg, sample_limit));
        }

        json doc;
        std::string text;
        if (rows.size() == 1) {
            doc = json::parse(rows[0].to_json());
            text = rows[0].to_text_table();
        } else {
            doc["rows"] = json::array();
            for (size_t i = 0; i < rows.size(); ++i) {
                doc["rows"].push_back(json::parse(rows[i].to_json()));
                text += "row " + std::to_string(i) + ":\n" + rows[i].to_text_table() + "\n";
            }
        }

        if (out_prefix != nullptr) {
            std::ofstream jf(std::string(out_prefix) + ".report.json");
            std::ofstream tf(std::string(out_prefix) + ".report.txt");
            if (!jf || !tf)
                throw std::runtime_error("cannot write report files at prefix " +
                                         std::string(out_prefix));
            jf << doc.dump(2) << "\n";
            tf << text;
        }
        if (report_json_out != nullptr) *report_json_out = dup_string(doc.dump(2));
        return CORRSEG_OK;
    } catch (const std::exception& e) {
        return classify_exception(e, ctx->last_error);
    }
}

corrseg_status corrseg_extract(corrseg_context* ctx, const char* image_path, const char* out_dir,
                               int force) {
    if (ctx == nullptr) return CORRSEG_ERR_INVALID_ARGUMENT;
    if (image_path == nullptr || out_dir == nullptr) {
        ctx->last_error = "image_path and out_dir are required";
        return CORRSEG_ERR_INVALID_ARGUMENT;
    }
    try {
        if (fs::exists(out_dir) && !fs::is_empty(out_dir) && force == 0)
            throw std::invalid_argument("output directory " + std::string(out_dir) +
                                        " is not empty (use force to overwrite)");

        const corrseg::ImageU8 image = corrseg::load_image(image_path);

        // run the whole pipeline behind recording wrappers so every provider
        // response needed for replay lands in the archive
        auto& base = ctx->ensure_pipeline();
        auto writer = std::make_shared<corrseg::ArchiveWriter>(out_dir, /*overwrite=*/true);
        writer->set_meta("config", ctx->cfg.to_json());
        const auto recording = corrseg::make_recording_providers(base.providers(), writer);
        const auto rec_ctx = corrseg::PipelineContext::create_with_providers(ctx->cfg, recording);
        rec_ctx.segment(image);
        writer->finalize();
        return CORRSEG_OK;
    } catch (const std::exception& e) {
        return classify_exception(e, ctx->last_error);
    }
}

void corrseg_string_free(char* s) { std::free(s); }

}  // extern "C"
