#include "gsvq/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gsvq/codec.hpp"
#include "gsvq/renderer.hpp"

namespace gsvq {

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("psnr: image dimensions differ");
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

std::array<double, 4> attribute_mse(const SplatCloud& cloud, const QuantizedCloud& qcloud) {
    if (cloud.size() != qcloud.size()) {
        throw std::invalid_argument("attribute_mse: splat counts differ");
    }
    return quantization_mse(cloud, qcloud);
}

EvalReport evaluate(const SplatCloud& original, const QuantizedCloud& qcloud,
                    const std::vector<Camera>& cams, const std::array<double, 3>& background) {
    EvalReport rep;
    if (original.size() == qcloud.size()) {
        rep.attr_mse = attribute_mse(original, qcloud);
    }

    const SizeReport sizes = size_report(qcloud);
    rep.compressed_bytes = sizes.total_bytes;
    rep.uncompressed_bytes = sizes.uncompressed_bytes;
    rep.ratio = sizes.ratio;

    for (int g = 0; g < 4; ++g) {
        const Codebook& cb = qcloud.codebook(static_cast<AttrGroup>(g));
        const auto& idx = qcloud.indices(static_cast<AttrGroup>(g));
        std::vector<char> used(cb.entries, 0);
        for (const std::uint32_t k : idx) used[k] = 1;
        std::size_t n_used = 0;
        for (const char u : used) n_used += u;
        rep.codebook_active_fraction[g] =
            cb.entries == 0 ? 0.0 : static_cast<double>(n_used) / cb.entries;
    }

    if (!cams.empty()) {
        const SplatCloud decoded = dequantize(qcloud);
        double sum_db = 0.0;
        std::size_t finite = 0, infinite = 0;
        for (const Camera& cam : cams) {
            const Image ref = render(original, cam, background);
            const Image test = render(decoded, cam, background);
            const double db = psnr(ref, test);
            if (std::isinf(db)) {
                ++infinite;
            } else {
                sum_db += db;
                ++finite;
            }
        }
        rep.has_psnr = true;
        if (finite == 0) {
            rep.psnr_infinite = true;
            rep.psnr_db = std::numeric_limits<double>::infinity();
        } else {
            // Identical views are excluded from the mean; flagged infinite
            // only when every view matched exactly.
            rep.psnr_db = sum_db / static_cast<double>(finite);
        }
    }
    return rep;
}

} // namespace gsvq
