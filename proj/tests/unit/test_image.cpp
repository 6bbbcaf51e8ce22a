#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dforge/image.hpp"
#include "dforge/png_io.hpp"
#include "../fixtures_png.hpp"
#include "../testutil.hpp"

using namespace dforge;
namespace fs = std::filesystem;

namespace {

std::string write_bytes(const char* name, const unsigned char* data, std::size_t n) {
    const auto path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
    return path.string();
}

}  // namespace

TEST_CASE("u8/float conversion round trip is lossless") {
    ImageU8 img(1, 256, 1);
    for (int c = 0; c < 256; ++c) img.at(0, c, 0) = static_cast<std::uint8_t>(c);
    const ImageU8 back = to_u8(to_float(img));
    CHECK(back.data == img.data);
    CHECK(to_float(img).at(0, 255, 0) == doctest::Approx(1.0).epsilon(0));
}

TEST_CASE("to_u8 rounds half away from zero and clamps") {
    ImageF img(1, 3, 1);
    img.at(0, 0, 0) = 0.5;   // 127.5 -> 128
    img.at(0, 1, 0) = 1.7;   // clamped
    img.at(0, 2, 0) = -0.3;  // clamped
    const ImageU8 u = to_u8(img);
    CHECK(u.at(0, 0, 0) == 128);
    CHECK(u.at(0, 1, 0) == 255);
    CHECK(u.at(0, 2, 0) == 0);
}

TEST_CASE("to_u8 rejects non-finite samples") {
    ImageF img(1, 1, 1);
    img.data[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(to_u8(img), DataError);
}

TEST_CASE("hflip of a 1x2 image swaps the pixels") {
    ImageF img(1, 2, 1);
    img.at(0, 0, 0) = 0.25;  // a
    img.at(0, 1, 0) = 0.75;  // b
    const ImageF flipped = apply_transform(img, GeomTransform::HFlip);
    CHECK(flipped.at(0, 0, 0) == 0.75);
    CHECK(flipped.at(0, 1, 0) == 0.25);
}

TEST_CASE("every transform composes with its inverse to the identity") {
    const ImageF img = testutil::make_random(5, 8, 3, 11);
    for (GeomTransform g : kAllTransforms) {
        const ImageF round = apply_transform(apply_transform(img, g), inverse(g));
        REQUIRE(round.same_shape(img));
        CHECK(round.data == img.data);  // permutation, bit-exact
    }
}

TEST_CASE("identity transform is bit-exact and odd rotations swap dims") {
    const ImageF img = testutil::make_random(4, 7, 1, 3);
    CHECK(apply_transform(img, GeomTransform::Identity).data == img.data);
    const ImageF rotated = apply_transform(img, GeomTransform::Rot90);
    CHECK(rotated.height == 7);
    CHECK(rotated.width == 4);
}

TEST_CASE("combined members equal their compositions") {
    const ImageF img = testutil::make_random(6, 9, 3, 5);
    const ImageF a = apply_transform(apply_transform(img, GeomTransform::Rot90),
                                     GeomTransform::HFlip);
    CHECK(a.data == apply_transform(img, GeomTransform::HFlipRot90).data);
    const ImageF b = apply_transform(apply_transform(img, GeomTransform::Rot270),
                                     GeomTransform::HFlip);
    CHECK(b.data == apply_transform(img, GeomTransform::HFlipRot270).data);
    const ImageF c = apply_transform(apply_transform(img, GeomTransform::Rot180),
                                     GeomTransform::HFlip);
    CHECK(c.data == apply_transform(img, GeomTransform::VFlip).data);
}

TEST_CASE("pixel multiset is invariant under every transform") {
    const ImageF img = testutil::make_random(5, 6, 3, 17);
    auto sorted = [](ImageF x) {
        std::sort(x.data.begin(), x.data.end());
        return x.data;
    };
    const auto reference = sorted(img);
    for (GeomTransform g : kAllTransforms)
        CHECK(sorted(apply_transform(img, g)) == reference);
}

TEST_CASE("decodes a reference-encoded 2x2 RGB PNG") {
    const auto path = write_bytes("dforge_ref_rgb.png", fixtures::kRgb2x2Png,
                                  sizeof(fixtures::kRgb2x2Png));
    const ImageU8 img = load_png(path);
    REQUIRE(img.height == 2);
    REQUIRE(img.width == 2);
    REQUIRE(img.channels == 3);
    const std::vector<std::uint8_t> expected = {10, 20,  30,  40,  50,  60,
                                                70, 80,  90,  200, 210, 220};
    CHECK(img.data == expected);
    std::remove(path.c_str());
}

TEST_CASE("png encode/decode round trip preserves bytes") {
    for (int channels : {1, 3}) {
        const ImageU8 img = testutil::make_random_u8(13, 9, channels, 100 + channels);
        const auto path =
            (fs::temp_directory_path() / ("dforge_rt" + std::to_string(channels) + ".png"))
                .string();
        save_png(path, img);
        const ImageU8 back = load_png(path);
        CHECK(back.same_shape(img));
        CHECK(back.data == img.data);
        std::remove(path.c_str());
    }
}

TEST_CASE("png loader rejects unsupported inputs") {
    SUBCASE("16-bit depth") {
        const auto path = write_bytes("dforge_16bit.png", fixtures::kGray16Png,
                                      sizeof(fixtures::kGray16Png));
        CHECK_THROWS_WITH_AS(load_png(path), doctest::Contains("bit depth"), DataError);
        std::remove(path.c_str());
    }
    SUBCASE("alpha channel") {
        const auto path = write_bytes("dforge_rgba.png", fixtures::kRgbaPng,
                                      sizeof(fixtures::kRgbaPng));
        CHECK_THROWS_WITH_AS(load_png(path), doctest::Contains("alpha"), DataError);
        std::remove(path.c_str());
    }
    SUBCASE("palette color type") {
        const auto path = write_bytes("dforge_pal.png", fixtures::kPalettePng,
                                      sizeof(fixtures::kPalettePng));
        CHECK_THROWS_WITH_AS(load_png(path), doctest::Contains("color type"), DataError);
        std::remove(path.c_str());
    }
    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(load_png("/nonexistent/nowhere.png"),
                             doctest::Contains("not found"), DataError);
    }
    SUBCASE("truncated stream") {
        const auto path = write_bytes("dforge_trunc.png", fixtures::kRgb2x2Png, 40);
        CHECK_THROWS_AS(load_png(path), DataError);
        std::remove(path.c_str());
    }
}
