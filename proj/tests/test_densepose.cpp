#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "posegen/densepose.hpp"

using namespace posegen;

namespace {

ByteImage make_raster(int h, int w) {
    ByteImage img;
    img.height = h;
    img.width = w;
    img.pixels.assign(size_t(h) * w * 3, 0);
    return img;
}

} // namespace

TEST_CASE("decode reads part index literally and scales uv by 255") {
    ByteImage img = make_raster(2, 3);
    img.at(0, 1, 0) = 7;
    img.at(0, 1, 1) = 255; // u = 1
    img.at(0, 1, 2) = 51;  // v = 0.2
    img.at(1, 2, 0) = 24;
    img.at(1, 2, 1) = 0;
    img.at(1, 2, 2) = 128;

    DenseBodyMap m = decode_iuv(img);
    CHECK(m.height() == 2);
    CHECK(m.width() == 3);
    CHECK(m.part(0, 1) == 7);
    CHECK(m.u(0, 1) == doctest::Approx(1.0));
    CHECK(m.v(0, 1) == doctest::Approx(51.0 / 255.0));
    CHECK(m.part(1, 2) == 24);
    CHECK(m.v(1, 2) == doctest::Approx(128.0 / 255.0));
    CHECK(m.part(0, 0) == 0);
    CHECK(m.u(0, 0) == 0.0);
}

TEST_CASE("background uv is forced to zero even when channels are dirty") {
    ByteImage img = make_raster(1, 1);
    img.at(0, 0, 0) = 0;
    img.at(0, 0, 1) = 200;
    img.at(0, 0, 2) = 13;
    DenseBodyMap m = decode_iuv(img);
    CHECK(m.u(0, 0) == 0.0);
    CHECK(m.v(0, 0) == 0.0);
}

TEST_CASE("part index above the configured count is rejected") {
    ByteImage img = make_raster(1, 2);
    img.at(0, 1, 0) = 7;
    CHECK_THROWS_AS(decode_iuv(img, 6), Error);
    try {
        decode_iuv(img, 6);
    } catch (const Error& e) {
        CHECK(e.cls() == ErrorClass::data);
    }
}

TEST_CASE("encode then decode round-trips bit-exactly") {
    ByteImage img = make_raster(4, 5);
    Rng rng(11);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) {
            img.at(y, x, 0) = std::uint8_t(rng.uniform_int(25)); // 0..24
            if (img.at(y, x, 0) != 0) {
                img.at(y, x, 1) = std::uint8_t(rng.uniform_int(256));
                img.at(y, x, 2) = std::uint8_t(rng.uniform_int(256));
            }
        }
    DenseBodyMap m = decode_iuv(img);
    ByteImage back = encode_iuv(m);
    REQUIRE(back.pixels.size() == img.pixels.size());
    for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == img.pixels[i]);
}

TEST_CASE("validate_map rejects out-of-range uv and part") {
    GridI part = GridI::Zero(2, 2);
    part(0, 0) = 1;
    DenseBodyMap m = testutil::map_from_parts(part, 6);
    validate_map(m); // fine

    DenseBodyMap bad_u = m;
    bad_u.u(0, 0) = 1.5;
    CHECK_THROWS_AS(validate_map(bad_u), Error);

    DenseBodyMap bad_bg = m;
    bad_bg.u(1, 1) = 0.2; // background pixel with nonzero u
    CHECK_THROWS_AS(validate_map(bad_bg), Error);

    DenseBodyMap bad_part = m;
    bad_part.part(0, 1) = 9; // above parts=6
    CHECK_THROWS_AS(validate_map(bad_part), Error);
}

TEST_CASE("part_mask selects exactly the requested regions") {
    GridI part(2, 4);
    part << 0, 1, 2, 3, 3, 2, 1, 0;
    DenseBodyMap m = testutil::map_from_parts(part, 3);

    BinaryMask head = part_mask(m, {1});
    CHECK(head.count() == 2);
    CHECK(head.bits(0, 1));
    CHECK(head.bits(1, 2));

    BinaryMask pair = part_mask(m, {2, 3});
    CHECK(pair.count() == 4);
    CHECK_FALSE(pair.bits(0, 0));
    CHECK(pair.bits(0, 2));

    BinaryMask fg = foreground_mask(m);
    CHECK(fg.count() == 6);

    CHECK_THROWS_AS(part_mask(m, {0}), Error);
    CHECK_THROWS_AS(part_mask(m, {4}), Error);
    try {
        part_mask(m, {4});
    } catch (const Error& e) {
        CHECK(e.cls() == ErrorClass::invalid_part_group);
    }
}
