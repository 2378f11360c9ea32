#include "mcseg/io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include "test_util.hpp"

using namespace mcseg;

namespace {

template <typename T>
void put(std::vector<unsigned char>& buf, std::size_t offset, T value) {
    std::memcpy(buf.data() + offset, &value, sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& buf, std::size_t offset) {
    T value;
    std::memcpy(&value, buf.data() + offset, sizeof(T));
    return value;
}

// Header laid out by byte offset per the NIfTI-1 standard, independent of the
// library's writer: sizeof_hdr@0, dim@40, datatype@70, bitpix@72, pixdim@76,
// vox_offset@108, scl_slope@112, scl_inter@116, magic@344.
std::vector<unsigned char> handmade_header(std::int16_t nx, std::int16_t ny, std::int16_t nz,
                                           std::int16_t datatype, std::int16_t bitpix,
                                           float slope, float inter, float vox_offset) {
    std::vector<unsigned char> h(static_cast<std::size_t>(vox_offset), 0);
    put<std::int32_t>(h, 0, 348);
    put<std::int16_t>(h, 40, 3);
    put<std::int16_t>(h, 42, nx);
    put<std::int16_t>(h, 44, ny);
    put<std::int16_t>(h, 46, nz);
    put<std::int16_t>(h, 70, datatype);
    put<std::int16_t>(h, 72, bitpix);
    put<float>(h, 76, 1.0f);
    put<float>(h, 80, 1.0f);
    put<float>(h, 84, 2.0f);
    put<float>(h, 88, 3.0f);
    put<float>(h, 108, vox_offset);
    put<float>(h, 112, slope);
    put<float>(h, 116, inter);
    std::memcpy(h.data() + 344, "n+1\0", 4);
    return h;
}

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    ASSERT_TRUE(out.good());
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(NiftiRoundTrip, Float32AcrossExtensions) {
    testutil::TempDir tmp;
    std::mt19937_64 rng(42);
    for (const char* name : {"v.nii", "v.nii.gz", "v.raw"}) {
        const VoxelGrid grid =
            testutil::random_intensity_grid(rng, Dims3{7, 5, 3}, -1000.0f, 1000.0f,
                                            Spacing3{0.5, 1.25, 2.0});
        const auto path = tmp / name;
        write_volume(grid, path);
        const VoxelGrid back = read_volume(path);
        EXPECT_EQ(back.dims(), grid.dims()) << name;
        EXPECT_EQ(back.spacing().sx, 0.5) << name;
        ASSERT_EQ(back.size(), grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            ASSERT_EQ(back.data()[i], grid.data()[i]) << name << " voxel " << i;
    }
}

TEST(NiftiRoundTrip, Uint8AndInt16Exact) {
    testutil::TempDir tmp;
    std::mt19937_64 rng(43);
    const BinaryMask mask = testutil::random_mask(rng, Dims3{6, 6, 6});
    write_mask(mask, tmp / "m.nii.gz");
    const BinaryMask mask_back = read_mask(tmp / "m.nii.gz");
    EXPECT_EQ(testutil::to_plain(mask_back), testutil::to_plain(mask));

    std::uniform_int_distribution<int> hu(-1024, 3071);
    std::vector<float> values(5 * 5 * 5);
    for (float& v : values) v = static_cast<float>(hu(rng));
    const VoxelGrid ct(Dims3{5, 5, 5}, Spacing3{}, values);
    write_volume(ct, tmp / "ct.nii", VolumeDatatype::int16);
    const VoxelGrid ct_back = read_volume(tmp / "ct.nii");
    for (std::size_t i = 0; i < ct.size(); ++i) ASSERT_EQ(ct_back.data()[i], ct.data()[i]);
}

TEST(NiftiRoundTrip, RandomizedSweep) {
    testutil::TempDir tmp;
    std::mt19937_64 rng(44);
    const char* extensions[] = {"s.nii", "s.nii.gz", "s.raw"};
    for (int trial = 0; trial < 15; ++trial) {
        std::uniform_int_distribution<index_t> dim(1, 9);
        const Dims3 dims{dim(rng), dim(rng), dim(rng)};
        const VoxelGrid grid = testutil::random_probability_grid(rng, dims);
        const auto path = tmp / extensions[trial % 3];
        write_volume(grid, path);
        const VoxelGrid back = read_volume(path);
        ASSERT_EQ(back.dims(), dims);
        for (std::size_t i = 0; i < grid.size(); ++i)
            ASSERT_EQ(back.data()[i], grid.data()[i]);
    }
}

TEST(NiftiRead, SlopeInterceptWorkedExample) {
    // stored int16 value 5 with slope 2 and intercept -10 decodes to 0.0
    testutil::TempDir tmp;
    auto file = handmade_header(2, 1, 1, 4, 16, 2.0f, -10.0f, 352.0f);
    file.resize(352 + 4);
    put<std::int16_t>(file, 352, 5);
    put<std::int16_t>(file, 354, 7);
    write_bytes(tmp / "scaled.nii", file);

    const VolumeHeader header = read_volume_header(tmp / "scaled.nii");
    EXPECT_EQ(header.slope, 2.0);
    EXPECT_EQ(header.intercept, -10.0);
    EXPECT_EQ(header.datatype, VolumeDatatype::int16);

    const VoxelGrid grid = read_volume(tmp / "scaled.nii");
    EXPECT_EQ(grid.at(0, 0, 0), 0.0f);
    EXPECT_EQ(grid.at(1, 0, 0), 4.0f);
    EXPECT_EQ(grid.spacing(), (Spacing3{1.0, 2.0, 3.0}));
}

TEST(NiftiRead, ZeroSlopeMeansUnset) {
    testutil::TempDir tmp;
    auto file = handmade_header(1, 1, 1, 4, 16, 0.0f, 0.0f, 352.0f);
    file.resize(352 + 2);
    put<std::int16_t>(file, 352, -7);
    write_bytes(tmp / "raw_slope.nii", file);
    EXPECT_EQ(read_volume(tmp / "raw_slope.nii").at(0, 0, 0), -7.0f);
}

TEST(NiftiRead, ByteSwappedFile) {
    testutil::TempDir tmp;
    auto file = handmade_header(3, 2, 1, 4, 16, 1.0f, 0.0f, 352.0f);
    file.resize(352 + 12);
    for (int i = 0; i < 6; ++i) put<std::int16_t>(file, 352 + 2 * i, static_cast<std::int16_t>(100 + i));

    auto swap16 = [&](std::vector<unsigned char>& b, std::size_t o) { std::swap(b[o], b[o + 1]); };
    auto swap32 = [&](std::vector<unsigned char>& b, std::size_t o) {
        std::swap(b[o], b[o + 3]);
        std::swap(b[o + 1], b[o + 2]);
    };
    std::vector<unsigned char> be = file;
    swap32(be, 0);
    for (std::size_t i = 0; i < 8; ++i) swap16(be, 40 + 2 * i);
    swap16(be, 70);
    swap16(be, 72);
    for (std::size_t i = 0; i < 8; ++i) swap32(be, 76 + 4 * i);
    swap32(be, 108);
    swap32(be, 112);
    swap32(be, 116);
    for (int i = 0; i < 6; ++i) swap16(be, 352 + 2 * i);
    write_bytes(tmp / "be.nii", be);

    const VoxelGrid grid = read_volume(tmp / "be.nii");
    ASSERT_EQ(grid.dims(), (Dims3{3, 2, 1}));
    for (int i = 0; i < 6; ++i) EXPECT_EQ(grid.data()[i], static_cast<float>(100 + i));
}

TEST(NiftiRead, HonorsVoxOffset) {
    testutil::TempDir tmp;
    auto file = handmade_header(1, 1, 1, 16, 32, 1.0f, 0.0f, 368.0f);
    file.resize(368 + 4);
    put<float>(file, 368, 6.25f);
    write_bytes(tmp / "offset.nii", file);
    EXPECT_EQ(read_volume(tmp / "offset.nii").at(0, 0, 0), 6.25f);
}

TEST(NiftiRead, ErrorCases) {
    testutil::TempDir tmp;

    auto bad_magic = handmade_header(1, 1, 1, 16, 32, 1.0f, 0.0f, 352.0f);
    bad_magic.resize(356);
    std::memcpy(bad_magic.data() + 344, "xxx\0", 4);
    write_bytes(tmp / "bad_magic.nii", bad_magic);
    EXPECT_THROW(read_volume(tmp / "bad_magic.nii"), BadMagicError);

    auto two_file = handmade_header(1, 1, 1, 16, 32, 1.0f, 0.0f, 352.0f);
    two_file.resize(356);
    std::memcpy(two_file.data() + 344, "ni1\0", 4);
    write_bytes(tmp / "pair.nii", two_file);
    EXPECT_THROW(read_volume(tmp / "pair.nii"), BadMagicError);

    auto nifti2 = handmade_header(1, 1, 1, 16, 32, 1.0f, 0.0f, 352.0f);
    nifti2.resize(356);
    put<std::int32_t>(nifti2, 0, 540);
    write_bytes(tmp / "v2.nii", nifti2);
    EXPECT_THROW(read_volume(tmp / "v2.nii"), BadMagicError);

    auto odd_type = handmade_header(1, 1, 1, 64, 64, 1.0f, 0.0f, 352.0f);
    odd_type.resize(360);
    write_bytes(tmp / "f64.nii", odd_type);
    EXPECT_THROW(read_volume(tmp / "f64.nii"), UnsupportedDatatypeError);

    auto truncated = handmade_header(4, 4, 4, 16, 32, 1.0f, 0.0f, 352.0f);
    truncated.resize(352 + 16);  // 64 voxels need 256 bytes
    write_bytes(tmp / "short.nii", truncated);
    EXPECT_THROW(read_volume(tmp / "short.nii"), TruncatedPayloadError);

    write_bytes(tmp / "tiny.nii", std::vector<unsigned char>(100, 0));
    EXPECT_THROW(read_volume(tmp / "tiny.nii"), TruncatedPayloadError);

    EXPECT_THROW(read_volume(tmp / "missing.nii"), IoError);
    EXPECT_THROW(read_volume(tmp / "volume.txt"), IoError);
}

TEST(NiftiWrite, DatatypeRangeChecks) {
    testutil::TempDir tmp;
    VoxelGrid fractional(Dims3{1, 1, 1}, Spacing3{}, {0.5f});
    EXPECT_THROW(write_volume(fractional, tmp / "a.nii", VolumeDatatype::uint8),
                 DatatypeRangeError);
    EXPECT_THROW(write_volume(fractional, tmp / "a.nii", VolumeDatatype::int16),
                 DatatypeRangeError);
    VoxelGrid wide(Dims3{1, 1, 1}, Spacing3{}, {40000.0f});
    EXPECT_THROW(write_volume(wide, tmp / "a.nii", VolumeDatatype::int16), DatatypeRangeError);
    VoxelGrid two(Dims3{1, 1, 1}, Spacing3{}, {2.0f});
    EXPECT_THROW(write_volume(two, tmp / "a.nii", VolumeDatatype::uint8), DatatypeRangeError);
}

TEST(NiftiWrite, GzipOutputsAreDeterministic) {
    testutil::TempDir tmp;
    std::mt19937_64 rng(7);
    const VoxelGrid grid = testutil::random_probability_grid(rng, Dims3{9, 9, 9});
    write_volume(grid, tmp / "a.nii.gz");
    write_volume(grid, tmp / "b.nii.gz");
    EXPECT_EQ(read_bytes(tmp / "a.nii.gz"), read_bytes(tmp / "b.nii.gz"));
}

TEST(NiftiWrite, CarriesOrientationBytesThrough) {
    testutil::TempDir tmp;
    auto file = handmade_header(2, 2, 2, 16, 32, 1.0f, 0.0f, 352.0f);
    file.resize(352 + 32);
    std::memcpy(file.data() + 148, "hello scanner", 13);  // descrip
    put<float>(file, 268, 5.5f);                          // qoffset_x
    for (std::size_t i = 0; i < 8; ++i) put<float>(file, 352 + 4 * i, static_cast<float>(i));
    write_bytes(tmp / "src.nii", file);

    NiftiHeaderBytes header;
    const VoxelGrid grid = read_volume(tmp / "src.nii", &header);
    write_volume(grid, tmp / "dst.nii", VolumeDatatype::float32, &header);

    const auto out = read_bytes(tmp / "dst.nii");
    ASSERT_GE(out.size(), 352u);
    EXPECT_EQ(std::memcmp(out.data() + 148, "hello scanner", 13), 0);
    EXPECT_EQ(get<float>(out, 268), 5.5f);
    const VoxelGrid back = read_volume(tmp / "dst.nii");
    EXPECT_EQ(back.dims(), grid.dims());
}

TEST(RawFormat, SidecarContract) {
    testutil::TempDir tmp;
    std::mt19937_64 rng(13);
    const VoxelGrid grid = testutil::random_probability_grid(rng, Dims3{4, 3, 2},
                                                             Spacing3{0.75, 1.0, 1.5});
    write_volume(grid, tmp / "v.raw");
    ASSERT_TRUE(std::filesystem::exists(tmp / "v.raw.meta"));

    const VolumeHeader header = read_volume_header(tmp / "v.raw");
    EXPECT_EQ(header.dims, grid.dims());
    EXPECT_EQ(header.spacing.sx, 0.75);

    std::ofstream(tmp / "bad.raw.meta") << "mcseg-raw 1\ndims 1 1 1\n";
    write_bytes(tmp / "bad.raw", std::vector<unsigned char>(4, 0));
    EXPECT_THROW(read_volume(tmp / "bad.raw"), IoError);

    std::ofstream(tmp / "order.raw.meta")
        << "mcseg-raw 1\ndims 1 1 1\nspacing 1 1 1\ndatatype float32\norder z-fastest\n";
    write_bytes(tmp / "order.raw", std::vector<unsigned char>(4, 0));
    EXPECT_THROW(read_volume(tmp / "order.raw"), IoError);

    std::ofstream(tmp / "v2.raw.meta") << "not a sidecar\n";
    write_bytes(tmp / "v2.raw", std::vector<unsigned char>(4, 0));
    EXPECT_THROW(read_volume(tmp / "v2.raw"), BadMagicError);
}

TEST(ReadMask, RejectsNonBinaryVolumes) {
    testutil::TempDir tmp;
    VoxelGrid grid(Dims3{2, 1, 1}, Spacing3{}, {0.0f, 0.25f});
    write_volume(grid, tmp / "soft.nii");
    EXPECT_THROW(read_mask(tmp / "soft.nii"), IoError);
}

TEST(GzipRead, PlainAndCompressedAgree) {
    testutil::TempDir tmp;
    std::mt19937_64 rng(21);
    const VoxelGrid grid = testutil::random_probability_grid(rng, Dims3{8, 8, 8});
    write_volume(grid, tmp / "p.nii");
    write_volume(grid, tmp / "c.nii.gz");
    const VoxelGrid plain = read_volume(tmp / "p.nii");
    const VoxelGrid unzipped = read_volume(tmp / "c.nii.gz");
    for (std::size_t i = 0; i < grid.size(); ++i)
        ASSERT_EQ(plain.data()[i], unzipped.data()[i]);
}

}  // namespace
