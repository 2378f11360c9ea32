#pragma once

// Volume file I/O: NIfTI-1 single-file volumes (.nii, .nii.gz) and a raw
// little-endian blob with a text sidecar (.raw + .raw.meta) for tests and
// synthetic data. Only uint8, int16 and float32 payloads are supported.
//
// Geometry is taken from dim[1..3] and pixdim[1..3] only; orientation and
// affine fields are carried through as opaque bytes and never interpreted.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "mcseg/format.hpp"
#include "mcseg/volume.hpp"

namespace mcseg {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// File does not carry the expected NIfTI-1 "n+1\0" signature.
struct BadMagicError : IoError {
    using IoError::IoError;
};
/// Datatype code outside the supported {uint8, int16, float32} set.
struct UnsupportedDatatypeError : IoError {
    using IoError::IoError;
};
/// Payload shorter than nx*ny*nz elements.
struct TruncatedPayloadError : IoError {
    using IoError::IoError;
};
/// Values not representable in the requested on-disk datatype.
struct DatatypeRangeError : IoError {
    using IoError::IoError;
};

enum class VolumeDatatype { uint8, int16, float32 };

inline std::string to_string(VolumeDatatype dt) {
    switch (dt) {
        case VolumeDatatype::uint8: return "uint8";
        case VolumeDatatype::int16: return "int16";
        case VolumeDatatype::float32: return "float32";
    }
    return "?";
}

inline VolumeDatatype datatype_from_string(const std::string& s) {
    if (s == "uint8") return VolumeDatatype::uint8;
    if (s == "int16") return VolumeDatatype::int16;
    if (s == "float32") return VolumeDatatype::float32;
    throw UnsupportedDatatypeError("unsupported datatype '" + s + "'");
}

/// Parsed file metadata (geometry plus value scaling).
struct VolumeHeader {
    Dims3 dims;
    Spacing3 spacing;
    VolumeDatatype datatype = VolumeDatatype::float32;
    double slope = 1.0;
    double intercept = 0.0;
};

/// The 348 header bytes of a NIfTI-1 file, kept opaque so orientation and
/// affine information survives a read-modify-write round trip.
struct NiftiHeaderBytes {
    std::array<unsigned char, 348> bytes{};
};

namespace detail {

// ---------------------------------------------------------------- files --

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return buf;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("short write to " + path.string());
}

inline bool looks_gzip(std::span<const unsigned char> buf) {
    return buf.size() >= 2 && buf[0] == 0x1f && buf[1] == 0x8b;
}

inline std::vector<unsigned char> gzip_inflate(std::span<const unsigned char> src) {
    z_stream strm{};
    if (inflateInit2(&strm, 15 + 32) != Z_OK) throw IoError("zlib inflateInit failed");
    std::vector<unsigned char> out;
    out.resize(std::max<std::size_t>(src.size() * 4, 1 << 16));
    strm.next_in = const_cast<Bytef*>(src.data());
    strm.avail_in = static_cast<uInt>(src.size());
    std::size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        strm.next_out = out.data() + written;
        strm.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&strm, Z_NO_FLUSH);
        written = out.size() - strm.avail_out;
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw IoError("gzip decompression failed (zlib rc " + std::to_string(rc) + ")");
        }
    }
    inflateEnd(&strm);
    out.resize(written);
    return out;
}

inline std::vector<unsigned char> gzip_deflate(std::span<const unsigned char> src) {
    z_stream strm{};
    // windowBits 15+16 selects gzip framing; the default header carries
    // mtime 0, keeping outputs byte-identical across runs.
    if (deflateInit2(&strm, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("zlib deflateInit failed");
    std::vector<unsigned char> out(deflateBound(&strm, static_cast<uLong>(src.size())));
    strm.next_in = const_cast<Bytef*>(src.data());
    strm.avail_in = static_cast<uInt>(src.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&strm, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&strm);
        throw IoError("gzip compression failed (zlib rc " + std::to_string(rc) + ")");
    }
    out.resize(out.size() - strm.avail_out);
    deflateEnd(&strm);
    return out;
}

// --------------------------------------------------------------- nifti --

// NIfTI-1 header, naturally aligned, 348 bytes.
struct Nifti1Header {
    std::int32_t sizeof_hdr;    //   0: must be 348
    char data_type[10];         //   4
    char db_name[18];           //  14
    std::int32_t extents;       //  32
    std::int16_t session_error; //  36
    char regular;               //  38
    char dim_info;              //  39
    std::int16_t dim[8];        //  40
    float intent_p1;            //  56
    float intent_p2;            //  60
    float intent_p3;            //  64
    std::int16_t intent_code;   //  68
    std::int16_t datatype;      //  70
    std::int16_t bitpix;        //  72
    std::int16_t slice_start;   //  74
    float pixdim[8];            //  76
    float vox_offset;           // 108
    float scl_slope;            // 112
    float scl_inter;            // 116
    std::int16_t slice_end;     // 120
    char slice_code;            // 122
    char xyzt_units;            // 123
    float cal_max;              // 124
    float cal_min;              // 128
    float slice_duration;       // 132
    float toffset;              // 136
    std::int32_t glmax;         // 140
    std::int32_t glmin;         // 144
    char descrip[80];           // 148
    char aux_file[24];          // 228
    std::int16_t qform_code;    // 252
    std::int16_t sform_code;    // 254
    float quatern_b;            // 256
    float quatern_c;            // 260
    float quatern_d;            // 264
    float qoffset_x;            // 268
    float qoffset_y;            // 272
    float qoffset_z;            // 276
    float srow_x[4];            // 280
    float srow_y[4];            // 296
    float srow_z[4];            // 312
    char intent_name[16];       // 328
    char magic[4];              // 344: "n+1\0"
};
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must pack to 348 bytes");

constexpr std::int16_t kNiftiUint8 = 2;
constexpr std::int16_t kNiftiInt16 = 4;
constexpr std::int16_t kNiftiFloat32 = 16;

inline void bswap(std::int16_t& v) {
    auto u = static_cast<std::uint16_t>(v);
    v = static_cast<std::int16_t>(static_cast<std::uint16_t>((u << 8) | (u >> 8)));
}
inline void bswap(std::int32_t& v) {
    auto u = static_cast<std::uint32_t>(v);
    u = ((u & 0x000000FFu) << 24) | ((u & 0x0000FF00u) << 8) | ((u & 0x00FF0000u) >> 8) |
        ((u & 0xFF000000u) >> 24);
    v = static_cast<std::int32_t>(u);
}
inline void bswap(float& v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u = ((u & 0x000000FFu) << 24) | ((u & 0x0000FF00u) << 8) | ((u & 0x00FF0000u) >> 8) |
        ((u & 0xFF000000u) >> 24);
    std::memcpy(&v, &u, 4);
}

struct ParsedNifti {
    VolumeHeader header;
    NiftiHeaderBytes raw;
    std::size_t payload_offset = 0;
    bool swapped = false;
};

inline ParsedNifti parse_nifti_header(std::span<const unsigned char> buf,
                                      const std::string& origin) {
    if (buf.size() < sizeof(Nifti1Header))
        throw TruncatedPayloadError(origin + ": file shorter than a NIfTI-1 header");
    Nifti1Header hdr;
    std::memcpy(&hdr, buf.data(), sizeof(hdr));

    bool swapped = false;
    if (hdr.sizeof_hdr != 348) {
        std::int32_t sw = hdr.sizeof_hdr;
        bswap(sw);
        if (sw == 540 || hdr.sizeof_hdr == 540)
            throw BadMagicError(origin + ": NIfTI-2 files are not supported");
        if (sw != 348)
            throw BadMagicError(origin + ": not a NIfTI-1 file (sizeof_hdr != 348)");
        swapped = true;
    }
    if (std::memcmp(hdr.magic, "ni1", 4) == 0)
        throw BadMagicError(origin + ": two-file NIfTI (.hdr/.img) is not supported");
    if (std::memcmp(hdr.magic, "n+1", 4) != 0)
        throw BadMagicError(origin + ": bad NIfTI magic (expected \"n+1\\0\")");

    if (swapped) {
        for (auto& d : hdr.dim) bswap(d);
        bswap(hdr.datatype);
        bswap(hdr.bitpix);
        for (auto& p : hdr.pixdim) bswap(p);
        bswap(hdr.vox_offset);
        bswap(hdr.scl_slope);
        bswap(hdr.scl_inter);
    }

    if (hdr.dim[0] < 1 || hdr.dim[0] > 7)
        throw IoError(origin + ": invalid dim[0] = " + std::to_string(hdr.dim[0]));
    for (int i = 4; i <= hdr.dim[0]; ++i)
        if (hdr.dim[i] > 1)
            throw IoError(origin + ": volumes with a non-trivial dimension " + std::to_string(i) +
                          " are not supported");

    ParsedNifti parsed;
    parsed.swapped = swapped;
    std::memcpy(parsed.raw.bytes.data(), buf.data(), 348);

    auto spatial = [&](int i) -> index_t {
        return hdr.dim[0] >= i ? std::max<index_t>(1, hdr.dim[i]) : 1;
    };
    parsed.header.dims = {spatial(1), spatial(2), spatial(3)};

    auto pix = [&](int i) -> double {
        const double p = hdr.dim[0] >= i ? static_cast<double>(hdr.pixdim[i]) : 1.0;
        return p;
    };
    parsed.header.spacing = {pix(1), pix(2), pix(3)};
    if (!(parsed.header.spacing.sx > 0) || !(parsed.header.spacing.sy > 0) ||
        !(parsed.header.spacing.sz > 0) || !std::isfinite(parsed.header.spacing.sx) ||
        !std::isfinite(parsed.header.spacing.sy) || !std::isfinite(parsed.header.spacing.sz))
        throw IoError(origin + ": non-positive pixdim");

    switch (hdr.datatype) {
        case kNiftiUint8: parsed.header.datatype = VolumeDatatype::uint8; break;
        case kNiftiInt16: parsed.header.datatype = VolumeDatatype::int16; break;
        case kNiftiFloat32: parsed.header.datatype = VolumeDatatype::float32; break;
        default:
            throw UnsupportedDatatypeError(origin + ": unsupported NIfTI datatype code " +
                                           std::to_string(hdr.datatype));
    }
    const int expected_bitpix = hdr.datatype == kNiftiUint8 ? 8 : hdr.datatype == kNiftiInt16 ? 16 : 32;
    if (hdr.bitpix != expected_bitpix)
        throw IoError(origin + ": bitpix " + std::to_string(hdr.bitpix) +
                      " does not match datatype");

    const double slope = static_cast<double>(hdr.scl_slope);
    const double inter = static_cast<double>(hdr.scl_inter);
    if (!std::isfinite(slope) || !std::isfinite(inter))
        throw IoError(origin + ": non-finite scl_slope/scl_inter");
    parsed.header.slope = slope == 0.0 ? 1.0 : slope;  // 0 means "unset" in NIfTI
    parsed.header.intercept = inter;

    const double off = static_cast<double>(hdr.vox_offset);
    if (!(off >= 348.0) || off > static_cast<double>(buf.size()))
        throw TruncatedPayloadError(origin + ": vox_offset " + std::to_string(off) +
                                    " outside the file");
    parsed.payload_offset = static_cast<std::size_t>(off);
    return parsed;
}

inline std::size_t element_size(VolumeDatatype dt) {
    switch (dt) {
        case VolumeDatatype::uint8: return 1;
        case VolumeDatatype::int16: return 2;
        case VolumeDatatype::float32: return 4;
    }
    return 0;
}

// Decode the payload into scaled float voxel values.
inline std::vector<float> decode_payload(std::span<const unsigned char> payload,
                                         const VolumeHeader& h, bool swapped,
                                         const std::string& origin) {
    const std::size_t count = h.dims.voxel_count();
    const std::size_t need = count * element_size(h.datatype);
    if (payload.size() < need)
        throw TruncatedPayloadError(origin + ": payload holds " + std::to_string(payload.size()) +
                                    " bytes, need " + std::to_string(need));
    std::vector<float> out(count);
    const bool identity = h.slope == 1.0 && h.intercept == 0.0;
    switch (h.datatype) {
        case VolumeDatatype::uint8:
            for (std::size_t i = 0; i < count; ++i) {
                const double v = static_cast<double>(payload[i]);
                out[i] = static_cast<float>(identity ? v : h.slope * v + h.intercept);
            }
            break;
        case VolumeDatatype::int16:
            for (std::size_t i = 0; i < count; ++i) {
                std::int16_t s;
                std::memcpy(&s, payload.data() + 2 * i, 2);
                if (swapped) bswap(s);
                const double v = static_cast<double>(s);
                out[i] = static_cast<float>(identity ? v : h.slope * v + h.intercept);
            }
            break;
        case VolumeDatatype::float32:
            for (std::size_t i = 0; i < count; ++i) {
                float f;
                std::memcpy(&f, payload.data() + 4 * i, 4);
                if (swapped) bswap(f);
                out[i] = identity ? f : static_cast<float>(h.slope * static_cast<double>(f) +
                                                           h.intercept);
            }
            break;
    }
    return out;
}

inline bool is_nifti_path(const std::filesystem::path& p) {
    const std::string name = p.filename().string();
    return name.ends_with(".nii") || name.ends_with(".nii.gz");
}

inline bool is_raw_path(const std::filesystem::path& p) {
    return p.filename().string().ends_with(".raw");
}

inline std::filesystem::path raw_meta_path(const std::filesystem::path& p) {
    std::filesystem::path m = p;
    m += ".meta";
    return m;
}

// ------------------------------------------------------------ raw format --

struct RawMeta {
    VolumeHeader header;  // slope/intercept always 1/0
};

inline RawMeta parse_raw_meta(const std::filesystem::path& meta_path) {
    std::ifstream in(meta_path);
    if (!in) throw IoError("cannot open sidecar: " + meta_path.string());
    std::string line;
    if (!std::getline(in, line) || line != "mcseg-raw 1")
        throw BadMagicError(meta_path.string() + ": sidecar must start with 'mcseg-raw 1'");
    RawMeta meta;
    bool have_dims = false, have_spacing = false, have_dt = false, have_order = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dims") {
            if (!(ls >> meta.header.dims.nx >> meta.header.dims.ny >> meta.header.dims.nz))
                throw IoError(meta_path.string() + ": malformed dims line");
            have_dims = true;
        } else if (key == "spacing") {
            if (!(ls >> meta.header.spacing.sx >> meta.header.spacing.sy >> meta.header.spacing.sz))
                throw IoError(meta_path.string() + ": malformed spacing line");
            have_spacing = true;
        } else if (key == "datatype") {
            std::string dt;
            ls >> dt;
            meta.header.datatype = datatype_from_string(dt);
            have_dt = true;
        } else if (key == "order") {
            std::string order;
            ls >> order;
            if (order != "x-fastest")
                throw IoError(meta_path.string() + ": unsupported axis order '" + order + "'");
            have_order = true;
        } else {
            throw IoError(meta_path.string() + ": unknown sidecar key '" + key + "'");
        }
    }
    if (!have_dims || !have_spacing || !have_dt || !have_order)
        throw IoError(meta_path.string() + ": sidecar is missing required keys");
    return meta;
}

inline std::vector<unsigned char> encode_payload(std::span<const float> values,
                                                 VolumeDatatype dt) {
    std::vector<unsigned char> out(values.size() * element_size(dt));
    switch (dt) {
        case VolumeDatatype::uint8:
            for (std::size_t i = 0; i < values.size(); ++i) {
                const float v = values[i];
                if (v != 0.0f && v != 1.0f)
                    throw DatatypeRangeError("uint8 output requires {0,1} values, found " +
                                             std::to_string(v));
                out[i] = v == 1.0f ? 1 : 0;
            }
            break;
        case VolumeDatatype::int16:
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double v = static_cast<double>(values[i]);
                if (v != std::nearbyint(v) || v < -32768.0 || v > 32767.0)
                    throw DatatypeRangeError("int16 output requires integral values in "
                                             "[-32768,32767], found " +
                                             std::to_string(v));
                const std::int16_t s = static_cast<std::int16_t>(v);
                std::memcpy(out.data() + 2 * i, &s, 2);
            }
            break;
        case VolumeDatatype::float32:
            std::memcpy(out.data(), values.data(), out.size());
            break;
    }
    return out;
}

inline std::vector<unsigned char> build_nifti_file(const VoxelGrid& grid, VolumeDatatype dt,
                                                   const NiftiHeaderBytes* orientation) {
    Nifti1Header hdr{};
    if (orientation) std::memcpy(&hdr, orientation->bytes.data(), 348);
    hdr.sizeof_hdr = 348;
    for (auto& d : hdr.dim) d = 1;
    hdr.dim[0] = 3;
    hdr.dim[1] = static_cast<std::int16_t>(grid.dims().nx);
    hdr.dim[2] = static_cast<std::int16_t>(grid.dims().ny);
    hdr.dim[3] = static_cast<std::int16_t>(grid.dims().nz);
    if (grid.dims().nx > 32767 || grid.dims().ny > 32767 || grid.dims().nz > 32767)
        throw IoError("dims too large for a NIfTI-1 header");
    hdr.datatype = dt == VolumeDatatype::uint8    ? kNiftiUint8
                   : dt == VolumeDatatype::int16 ? kNiftiInt16
                                                 : kNiftiFloat32;
    hdr.bitpix = static_cast<std::int16_t>(8 * element_size(dt));
    if (hdr.pixdim[0] == 0.0f) hdr.pixdim[0] = 1.0f;
    hdr.pixdim[1] = static_cast<float>(grid.spacing().sx);
    hdr.pixdim[2] = static_cast<float>(grid.spacing().sy);
    hdr.pixdim[3] = static_cast<float>(grid.spacing().sz);
    for (int i = 4; i < 8; ++i) hdr.pixdim[i] = 0.0f;
    hdr.vox_offset = 352.0f;
    hdr.scl_slope = 1.0f;
    hdr.scl_inter = 0.0f;
    hdr.xyzt_units = 2;  // millimeters
    std::memcpy(hdr.magic, "n+1", 4);

    const auto payload = encode_payload(grid.data(), dt);
    std::vector<unsigned char> file(352 + payload.size());
    std::memcpy(file.data(), &hdr, 348);
    // bytes 348..352 stay zero: no header extensions
    std::memcpy(file.data() + 352, payload.data(), payload.size());
    return file;
}

}  // namespace detail

// ----------------------------------------------------------- public API --

/// Peek at a volume's metadata without decoding the payload.
inline VolumeHeader read_volume_header(const std::filesystem::path& path) {
    if (detail::is_raw_path(path)) return detail::parse_raw_meta(detail::raw_meta_path(path)).header;
    auto bytes = detail::read_file_bytes(path);
    if (detail::looks_gzip(bytes)) bytes = detail::gzip_inflate(bytes);
    return detail::parse_nifti_header(bytes, path.string()).header;
}

/// Read a volume as a scalar grid; stored values are mapped through
/// slope*v + intercept (NIfTI only; the raw format stores values verbatim).
inline VoxelGrid read_volume(const std::filesystem::path& path,
                             NiftiHeaderBytes* keep_header = nullptr) {
    if (detail::is_raw_path(path)) {
        const auto meta = detail::parse_raw_meta(detail::raw_meta_path(path));
        const auto blob = detail::read_file_bytes(path);
        auto values = detail::decode_payload(blob, meta.header, false, path.string());
        return VoxelGrid(meta.header.dims, meta.header.spacing, std::move(values));
    }
    if (!detail::is_nifti_path(path))
        throw IoError("unsupported volume extension: " + path.string() +
                      " (expected .nii, .nii.gz or .raw)");
    auto bytes = detail::read_file_bytes(path);
    if (detail::looks_gzip(bytes)) bytes = detail::gzip_inflate(bytes);
    const auto parsed = detail::parse_nifti_header(bytes, path.string());
    if (keep_header) *keep_header = parsed.raw;
    auto values = detail::decode_payload(
        std::span<const unsigned char>(bytes).subspan(parsed.payload_offset), parsed.header,
        parsed.swapped, path.string());
    return VoxelGrid(parsed.header.dims, parsed.header.spacing, std::move(values));
}

/// Read a label volume whose (scaled) values are exactly {0,1}.
inline BinaryMask read_mask(const std::filesystem::path& path) {
    const VoxelGrid grid = read_volume(path);
    std::vector<std::uint8_t> bits(grid.size());
    std::span<const float> v = grid.data();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (v[i] != 0.0f && v[i] != 1.0f)
            throw IoError(path.string() + ": label volume contains a value other than 0/1 (" +
                          std::to_string(v[i]) + ")");
        bits[i] = v[i] == 1.0f ? 1 : 0;
    }
    return BinaryMask(grid.dims(), grid.spacing(), std::move(bits));
}

/// Write a grid to .nii, .nii.gz or .raw(+.raw.meta). Writes slope 1 and
/// intercept 0; uint8 demands {0,1} values, int16 integral in-range values.
/// `orientation` carries the opaque header bytes of a previously read NIfTI.
inline void write_volume(const VoxelGrid& grid, const std::filesystem::path& path,
                         VolumeDatatype datatype = VolumeDatatype::float32,
                         const NiftiHeaderBytes* orientation = nullptr) {
    if (detail::is_raw_path(path)) {
        const auto payload = detail::encode_payload(grid.data(), datatype);
        detail::write_file_bytes(path, payload);
        std::ostringstream meta;
        meta << "mcseg-raw 1\n";
        meta << "dims " << grid.dims().nx << ' ' << grid.dims().ny << ' ' << grid.dims().nz << '\n';
        meta << "spacing " << detail::format_double(grid.spacing().sx) << ' '
             << detail::format_double(grid.spacing().sy) << ' '
             << detail::format_double(grid.spacing().sz) << '\n';
        meta << "datatype " << to_string(datatype) << '\n';
        meta << "order x-fastest\n";
        const std::string m = meta.str();
        detail::write_file_bytes(detail::raw_meta_path(path),
                                 std::span<const unsigned char>(
                                     reinterpret_cast<const unsigned char*>(m.data()), m.size()));
        return;
    }
    if (!detail::is_nifti_path(path))
        throw IoError("unsupported volume extension: " + path.string() +
                      " (expected .nii, .nii.gz or .raw)");
    auto file = detail::build_nifti_file(grid, datatype, orientation);
    if (path.filename().string().ends_with(".gz")) file = detail::gzip_deflate(file);
    detail::write_file_bytes(path, file);
}

/// Double-precision analysis grids narrow to float32 on disk.
inline void write_volume(const BasicVoxelGrid<double>& grid, const std::filesystem::path& path,
                         VolumeDatatype datatype = VolumeDatatype::float32,
                         const NiftiHeaderBytes* orientation = nullptr) {
    write_volume(grid.cast<float>(), path, datatype, orientation);
}

inline void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    write_volume(mask.as_grid(), path, VolumeDatatype::uint8);
}

}  // namespace mcseg
