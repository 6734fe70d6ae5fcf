#include <doctest.h>

#include <cstring>
#include <fstream>

#include "corrseg/archive.hpp"
#include "testutil.hpp"

using namespace corrseg;

TEST_CASE("archive: write/read round trip is bit identical") {
    const std::string dir = testutil::fresh_dir("archive_rt");
    MatF m(3, 4);
    for (int i = 0; i < 12; ++i) m(i / 4, i % 4) = 0.137f * i - 1.0f;
    Mask2D mask(5, 7, 0);
    mask.set(2, 3, 1);
    mask.set(4, 6, 1);

    {
        ArchiveWriter w(dir);
        w.put_f32("a/m", m);
        w.put_u8("a/mask", mask);
        w.put_f32_scalar("a/s", 42.5f);
        w.set_meta("patch_size", 16.0);
        w.set_meta("note", "round trip");
        w.finalize();
    }

    ArchiveReader r(dir);
    MatF m2 = r.read_f32("a/m");
    REQUIRE(m2.rows() == 3);
    REQUIRE(m2.cols() == 4);
    CHECK(std::memcmp(m.data(), m2.data(), sizeof(float) * 12) == 0);

    Mask2D mask2 = r.read_mask("a/mask");
    CHECK(mask2.h == 5);
    CHECK(mask2.w == 7);
    CHECK(mask2.data == mask.data);

    CHECK(r.read_f32_scalar("a/s") == 42.5f);
    CHECK(*r.meta_num("patch_size") == 16.0);
    CHECK(*r.meta_str("note") == "round trip");
}

TEST_CASE("archive: manifest validates against the schema") {
    const std::string dir = testutil::fresh_dir("archive_schema");
    {
        ArchiveWriter w(dir);
        MatF m = MatF::Ones(2, 2);
        w.put_f32("x", m);
        w.put_u8("y", Mask2D(2, 2, 1));
        w.finalize();
    }
    CHECK(validate_archive(dir).empty());
}

TEST_CASE("archive: validation flags broken manifests") {
    const std::string dir = testutil::fresh_dir("archive_bad");

    SUBCASE("missing manifest") {
        const auto problems = validate_archive(dir);
        REQUIRE(problems.size() == 1);
        CHECK(problems[0].find("manifest.json missing") != std::string::npos);
    }

    SUBCASE("offset past the blob end") {
        std::ofstream blob(dir + "/tensors.bin", std::ios::binary);
        blob << "1234";
        blob.close();
        std::ofstream mf(dir + "/manifest.json");
        mf << R"({"version":1,"tensors":[{"name":"t","shape":[100],"dtype":"f32",)"
           << R"("file":"tensors.bin","byte_offset":0}]})";
        mf.close();
        const auto problems = validate_archive(dir);
        REQUIRE_FALSE(problems.empty());
        CHECK(problems[0].find("range exceeds") != std::string::npos);
    }

    SUBCASE("unknown dtype and duplicate names") {
        std::ofstream blob(dir + "/tensors.bin", std::ios::binary);
        blob << "12345678";
        blob.close();
        std::ofstream mf(dir + "/manifest.json");
        mf << R"({"version":1,"tensors":[)"
           << R"({"name":"t","shape":[2],"dtype":"f64","file":"tensors.bin","byte_offset":0},)"
           << R"({"name":"t","shape":[8],"dtype":"u8","file":"tensors.bin","byte_offset":0}]})";
        mf.close();
        const auto problems = validate_archive(dir);
        bool saw_dtype = false, saw_dup = false;
        for (const auto& p : problems) {
            saw_dtype |= p.find("unknown dtype") != std::string::npos;
            saw_dup |= p.find("duplicate tensor name") != std::string::npos;
        }
        CHECK(saw_dtype);
        CHECK(saw_dup);
    }
}

TEST_CASE("archive: duplicate puts store one copy") {
    const std::string dir = testutil::fresh_dir("archive_dup");
    {
        ArchiveWriter w(dir);
        MatF a = MatF::Constant(2, 2, 1.0f);
        w.put_f32("t", a);
        w.put_f32("t", a);  // recording the same request twice
        w.finalize();
    }
    ArchiveReader r(dir);
    CHECK(r.names().size() == 1);
}

TEST_CASE("archive: missing tensors and wrong kinds are rejected") {
    const std::string dir = testutil::fresh_dir("archive_missing");
    {
        ArchiveWriter w(dir);
        w.put_u8("only_u8", Mask2D(2, 2, 1));
        w.finalize();
    }
    ArchiveReader r(dir);
    CHECK_THROWS_WITH_AS(r.read_f32("nope"), doctest::Contains("not present"), std::runtime_error);
    CHECK_THROWS_AS(r.read_f32("only_u8"), std::runtime_error);
}

TEST_CASE("archive: existing archive is not overwritten by default") {
    const std::string dir = testutil::fresh_dir("archive_exists");
    {
        ArchiveWriter w(dir);
        w.finalize();
    }
    CHECK_THROWS_AS(ArchiveWriter{dir}, std::runtime_error);
    CHECK_NOTHROW(ArchiveWriter(dir, /*overwrite=*/true).finalize());
}
