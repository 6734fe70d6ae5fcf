#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "corrseg.h"
#include "testutil.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Ctx {
    corrseg_context* p = nullptr;
    ~Ctx() { corrseg_context_destroy(p); }
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

// small perfect scene + fixture + config for driving the C API
struct CapiFixture {
    std::string image_path;
    json config;
};

CapiFixture make_capi_fixture(const std::string& tag) {
    corrseg::PipelineConfig cfg;
    cfg.patch_size = 16;
    cfg.resize_short = 0;
    cfg.window = 64;
    cfg.stride = 64;
    cfg.points = 8;
    cfg.nc = false;
    cfg.templates = {"a photo of a {}."};

    testutil::SceneSpec spec;
    spec.grid_rows = 4;
    spec.grid_cols = 4;
    spec.num_classes = 2;
    spec.feat_dim = 4;
    spec.dino_dim = 4;
    spec.gt_patch = testutil::band_layout(4, 4, 2);
    for (int b = 0; b < 2; ++b) {
        std::vector<uint8_t> pm(16, 0);
        for (int p = 0; p < 16; ++p)
            if (spec.gt_patch[p] == b) pm[p] = 1;
        spec.proposals.push_back({pm, 0.9f, 0.9f});
    }
    auto ds = testutil::build_dataset(tag, {spec}, cfg, {"fern", "moss"});

    CapiFixture out;
    out.image_path = ds.root + "/images/scene0.png";
    out.config = {{"provider", "fixture:" + ds.archive_dir},
                  {"patch_size", 16},
                  {"resize_short", 0},
                  {"window", 64},
                  {"stride", 64},
                  {"points", 8},
                  {"nc", false},
                  {"templates", json::array({"a photo of a {}."})},
                  {"classes", json::array({"fern", "moss"})}};
    return out;
}

}  // namespace

TEST_CASE("capi: version and status names") {
    CHECK(std::strcmp(corrseg_version(), "0.1.0") == 0);
    CHECK(std::strcmp(corrseg_status_name(CORRSEG_OK), "ok") == 0);
    CHECK(std::strcmp(corrseg_status_name(CORRSEG_ERR_PROVIDER), "provider error") == 0);
}

TEST_CASE("capi: context creation validates the config") {
    char err[256] = {0};
    CHECK(corrseg_context_create("not json", err, sizeof(err)) == nullptr);
    CHECK(std::strlen(err) > 0);

    err[0] = '\0';
    CHECK(corrseg_context_create(R"({"bogus_key": 1})", err, sizeof(err)) == nullptr);
    CHECK(std::string(err).find("bogus_key") != std::string::npos);

    Ctx ctx;
    ctx.p = corrseg_context_create(R"({"provider": "fixture:/tmp/x"})", err, sizeof(err));
    REQUIRE(ctx.p != nullptr);

    char* echo = nullptr;
    REQUIRE(corrseg_effective_config(ctx.p, &echo) == CORRSEG_OK);
    const json parsed = json::parse(echo);
    corrseg_string_free(echo);
    CHECK(parsed["window"] == 336);
    CHECK(parsed["stride"] == 112);
    CHECK(parsed["tau"] == doctest::Approx(0.25));
    CHECK(parsed["pred_iou_thresh"] == doctest::Approx(0.7));
    CHECK(parsed["points"] == 32);
    CHECK(parsed["eps"] == doctest::Approx(0.2));
    CHECK(parsed["samples"] == 1);
    CHECK(parsed["similarity"] == "dino_qk");
    CHECK(parsed["templates"].size() == 80);

    // patch size follows the backbone choice unless overridden
    Ctx l14;
    l14.p = corrseg_context_create(R"({"clip": "l14", "provider": "fixture:/x"})", err,
                                   sizeof(err));
    REQUIRE(l14.p != nullptr);
    char* echo2 = nullptr;
    REQUIRE(corrseg_effective_config(l14.p, &echo2) == CORRSEG_OK);
    CHECK(json::parse(echo2)["patch_size"] == 14);
    corrseg_string_free(echo2);

    CHECK(corrseg_context_create(R"({"clip": "g18"})", err, sizeof(err)) == nullptr);
    CHECK(corrseg_context_create(R"({"window": 100, "stride": 200})", err, sizeof(err)) ==
          nullptr);
    CHECK(corrseg_context_create(R"({"heads": 2})", err, sizeof(err)) == nullptr);
}

TEST_CASE("capi: segment writes label and overlay files plus a report") {
    const auto fix = make_capi_fixture("capi_segment");
    Ctx ctx;
    ctx.p = corrseg_context_create(fix.config.dump().c_str(), nullptr, 0);
    REQUIRE(ctx.p != nullptr);

    const std::string prefix = testutil::fresh_dir("capi_out") + "/result";
    char* report = nullptr;
    const auto rc = corrseg_segment(ctx.p, fix.image_path.c_str(), prefix.c_str(), &report);
    INFO(corrseg_last_error(ctx.p));
    REQUIRE(rc == CORRSEG_OK);

    CHECK(fs::exists(prefix + ".labels.png"));
    CHECK(fs::exists(prefix + ".overlay.png"));

    const json r = json::parse(report);
    corrseg_string_free(report);
    CHECK(r["height"] == 64);
    CHECK(r["width"] == 64);
    double total = 0.0;
    for (const auto& [name, share] : r["pixel_share"].items()) total += share.get<double>();
    CHECK(total == doctest::Approx(1.0));
    CHECK(r["pixel_share"]["fern"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("capi: unreadable image fails without writing files") {
    const auto fix = make_capi_fixture("capi_noimg");
    Ctx ctx;
    ctx.p = corrseg_context_create(fix.config.dump().c_str(), nullptr, 0);
    REQUIRE(ctx.p != nullptr);

    const std::string prefix = testutil::fresh_dir("capi_noimg_out") + "/result";
    const auto rc = corrseg_segment(ctx.p, "/nonexistent/image.png", prefix.c_str(), nullptr);
    CHECK(rc != CORRSEG_OK);
    CHECK(std::strlen(corrseg_last_error(ctx.p)) > 0);
    CHECK_FALSE(fs::exists(prefix + ".labels.png"));
    CHECK_FALSE(fs::exists(prefix + ".overlay.png"));
}

TEST_CASE("capi: live provider is rejected with guidance") {
    Ctx ctx;
    ctx.p = corrseg_context_create(R"({"classes": ["a"]})", nullptr, 0);
    REQUIRE(ctx.p != nullptr);  // config itself is valid, provider defaults to live
    const std::string prefix = testutil::fresh_dir("capi_live") + "/x";
    const auto rc = corrseg_segment(ctx.p, "/any.png", prefix.c_str(), nullptr);
    CHECK(rc == CORRSEG_ERR_PROVIDER);
    CHECK(std::string(corrseg_last_error(ctx.p)).find("provider") != std::string::npos);
}

TEST_CASE("capi: extract refuses a non-empty directory and replays byte-identically") {
    const auto fix = make_capi_fixture("capi_extract");
    Ctx ctx;
    ctx.p = corrseg_context_create(fix.config.dump().c_str(), nullptr, 0);
    REQUIRE(ctx.p != nullptr);

    const std::string base = testutil::fresh_dir("capi_extract_out");
    const std::string prefix1 = base + "/run1";
    REQUIRE(corrseg_segment(ctx.p, fix.image_path.c_str(), prefix1.c_str(), nullptr) ==
            CORRSEG_OK);

    // refuse an existing non-empty directory without force
    const std::string blocked = base + "/blocked";
    fs::create_directories(blocked);
    std::ofstream(blocked + "/placeholder") << "x";
    CHECK(corrseg_extract(ctx.p, fix.image_path.c_str(), blocked.c_str(), 0) ==
          CORRSEG_ERR_INVALID_ARGUMENT);

    // record a fresh archive, replay through it, compare label map bytes
    const std::string recorded = base + "/recorded";
    REQUIRE(corrseg_extract(ctx.p, fix.image_path.c_str(), recorded.c_str(), 0) == CORRSEG_OK);

    json cfg2 = fix.config;
    cfg2["provider"] = "fixture:" + recorded;
    Ctx ctx2;
    ctx2.p = corrseg_context_create(cfg2.dump().c_str(), nullptr, 0);
    REQUIRE(ctx2.p != nullptr);
    const std::string prefix2 = base + "/run2";
    const auto rc = corrseg_segment(ctx2.p, fix.image_path.c_str(), prefix2.c_str(), nullptr);
    INFO(corrseg_last_error(ctx2.p));
    REQUIRE(rc == CORRSEG_OK);

    CHECK(read_file(prefix1 + ".labels.png") == read_file(prefix2 + ".labels.png"));
}

TEST_CASE("capi: evaluate emits report files") {
    corrseg::PipelineConfig cfg;
    cfg.patch_size = 16;
    cfg.resize_short = 0;
    cfg.window = 64;
    cfg.stride = 64;
    cfg.points = 8;
    cfg.nc = false;
    cfg.templates = {"a photo of a {}."};

    testutil::SceneSpec spec;
    spec.grid_rows = 4;
    spec.grid_cols = 4;
    spec.num_classes = 2;
    spec.feat_dim = 4;
    spec.dino_dim = 4;
    spec.gt_patch = testutil::band_layout(4, 4, 2);
    for (int b = 0; b < 2; ++b) {
        std::vector<uint8_t> pm(16, 0);
        for (int p = 0; p < 16; ++p)
            if (spec.gt_patch[p] == b) pm[p] = 1;
        spec.proposals.push_back({pm, 0.9f, 0.9f});
    }
    auto ds = testutil::build_dataset("capi_eval", {spec}, cfg, {"fern", "moss"});

    json jcfg = {{"provider", "fixture:" + ds.archive_dir}, {"patch_size", 16},
                 {"resize_short", 0},  {"window", 64},
                 {"stride", 64},       {"points", 8},
                 {"nc", false},        {"templates", json::array({"a photo of a {}."})}};
    Ctx ctx;
    ctx.p = corrseg_context_create(jcfg.dump().c_str(), nullptr, 0);
    REQUIRE(ctx.p != nullptr);

    const std::string prefix = testutil::fresh_dir("capi_eval_out") + "/bench";
    char* report = nullptr;
    const auto rc =
        corrseg_evaluate(ctx.p, ds.config_path.c_str(), -1, nullptr, prefix.c_str(), &report);
    INFO(corrseg_last_error(ctx.p));
    REQUIRE(rc == CORRSEG_OK);
    const json r = json::parse(report);
    corrseg_string_free(report);
    CHECK(r["miou"].get<double>() == doctest::Approx(1.0));
    CHECK(fs::exists(prefix + ".report.json"));
    CHECK(fs::exists(prefix + ".report.txt"));

    // missing dataset config path surfaces as an i/o error with the path
    const auto bad = corrseg_evaluate(ctx.p, "/no/dataset.json", -1, nullptr, nullptr, nullptr);
    CHECK(bad != CORRSEG_OK);
    CHECK(std::string(corrseg_last_error(ctx.p)).find("/no/dataset.json") != std::string::npos);
}
