#include "posegen/latent.hpp"

#include <cmath>
#include <fstream>

namespace posegen {

namespace {

void check_params(const GaussianParams& params) {
    require(params.mu.rows() >= 1 && params.mu.cols() >= 1, ErrorClass::data,
            "empty Gaussian params");
    require(params.mu.rows() == params.log_var.rows() &&
                params.mu.cols() == params.log_var.cols(),
            ErrorClass::data, "mu/log_var shapes differ");
    require(params.mu.allFinite() && params.log_var.allFinite(), ErrorClass::numeric,
            "non-finite Gaussian params");
}

} // namespace

PartLatent standard_normal_latent(int parts, int dims, Rng& rng) {
    PartLatent z;
    z.values.resize(parts, dims);
    for (int r = 0; r < parts; ++r)
        for (int c = 0; c < dims; ++c) z.values(r, c) = rng.normal();
    return z;
}

PartLatent sample_reparam(const GaussianParams& params, Rng& rng) {
    check_params(params);
    PartLatent z;
    z.values.resize(params.mu.rows(), params.mu.cols());
    for (int r = 0; r < z.values.rows(); ++r)
        for (int c = 0; c < z.values.cols(); ++c) {
            const Scalar sigma = std::exp(Scalar(0.5) * params.log_var(r, c));
            z.values(r, c) = params.mu(r, c) + sigma * rng.normal();
        }
    return z;
}

Scalar kl_to_standard_normal(const GaussianParams& params) {
    check_params(params);
    const auto mu = params.mu.array();
    const auto lv = params.log_var.array();
    return Scalar(0.5) * (mu.square() + lv.exp() - lv - Scalar(1)).sum();
}

WarpedNoiseImage warp_broadcast(const PartLatent& z, const DenseBodyMap& map) {
    require(map.part.maxCoeff() <= z.part_count(), ErrorClass::data,
            "map references part index beyond latent rows");
    const int n = z.dims_per_part();
    WarpedNoiseImage out;
    out.values = Tensor({n, map.height(), map.width()});
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const int k = map.part(y, x);
            if (k == 0) continue;
            for (int c = 0; c < n; ++c) out.values.at3(c, y, x) = z.values(k - 1, c);
        }
    return out;
}

WarpedNoiseImage warp_broadcast_noparts(const VectorX& z_flat, const DenseBodyMap& map) {
    require(z_flat.size() >= 1, ErrorClass::data, "empty latent vector");
    const int n = int(z_flat.size());
    WarpedNoiseImage out;
    out.values = Tensor({n, map.height(), map.width()});
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            if (map.part(y, x) == 0) continue;
            for (int c = 0; c < n; ++c) out.values.at3(c, y, x) = z_flat[c];
        }
    return out;
}

PartLatent resample_parts(const PartLatent& z, const std::set<int>& parts, Rng& rng) {
    for (int k : parts)
        require(k >= 1 && k <= z.part_count(), ErrorClass::invalid_part_group,
                "part index " + std::to_string(k) + " outside 1.." +
                    std::to_string(z.part_count()));
    PartLatent out = z;
    for (int k : parts) // std::set iterates ascending
        for (int c = 0; c < z.dims_per_part(); ++c) out.values(k - 1, c) = rng.normal();
    return out;
}

PartLatent merge_latents(const PartLatent& z_body, const PartLatent& z_garment,
                         const std::set<int>& garment_parts) {
    require(z_body.values.rows() == z_garment.values.rows() &&
                z_body.values.cols() == z_garment.values.cols(),
            ErrorClass::data, "latent shapes differ");
    for (int k : garment_parts)
        require(k >= 1 && k <= z_body.part_count(), ErrorClass::invalid_part_group,
                "garment part index out of range");
    PartLatent out = z_body;
    for (int k : garment_parts) out.values.row(k - 1) = z_garment.values.row(k - 1);
    return out;
}

PartLatent interpolate(const PartLatent& z1, const PartLatent& z2, Scalar t) {
    require(z1.values.rows() == z2.values.rows() && z1.values.cols() == z2.values.cols(),
            ErrorClass::data, "latent shapes differ");
    require(t >= 0 && t <= 1, ErrorClass::data, "interpolation t outside [0,1]");
    PartLatent out;
    out.values = z1.values * t + z2.values * (Scalar(1) - t);
    return out;
}

void save_latent(const PartLatent& z, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), ErrorClass::io, "cannot write " + path);
    const char magic[8] = {'P', 'G', 'L', 'A', 'T', '1', '\n', 0};
    os.write(magic, 8);
    const std::int32_t m = std::int32_t(z.values.rows());
    const std::int32_t n = std::int32_t(z.values.cols());
    os.write(reinterpret_cast<const char*>(&m), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) {
            const double v = z.values(r, c);
            os.write(reinterpret_cast<const char*>(&v), 8);
        }
    require(os.good(), ErrorClass::io, "write failed: " + path);
}

PartLatent load_latent(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), ErrorClass::io, "cannot read " + path);
    char magic[8] = {};
    is.read(magic, 8);
    require(std::string(magic, 6) == "PGLAT1", ErrorClass::data, "not a latent file: " + path);
    std::int32_t m = 0, n = 0;
    is.read(reinterpret_cast<char*>(&m), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    require(is.good() && m >= 1 && n >= 1 && m <= 1024 && n <= 65536, ErrorClass::data,
            "corrupt latent header");
    PartLatent z;
    z.values.resize(m, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) {
            double v = 0;
            is.read(reinterpret_cast<char*>(&v), 8);
            z.values(r, c) = v;
        }
    require(is.good(), ErrorClass::data, "truncated latent file");
    return z;
}

} // namespace posegen
