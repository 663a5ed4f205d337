#include "rcdepth/metrics.hpp"

#include <cmath>

namespace rcdepth {

EvalReport evaluate(const Tensor& pred, const Tensor& gt, double cap) {
    require_same_shape(pred, gt, "evaluate");
    if (!(cap > 0.0)) throw ArgumentError("cap must be > 0");

    double abs_acc = 0.0, sq_acc = 0.0, rel_acc = 0.0;
    double log10_acc = 0.0, sqlog_acc = 0.0;
    std::size_t d1 = 0, d2 = 0, d3 = 0, n = 0;

    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double g = gt[i];
        if (!(g > 0.0) || g > cap) continue;
        const double p = pred[i];
        if (!(p > 0.0)) {
            throw ArgumentError("evaluate: nonpositive prediction at a valid pixel");
        }
        ++n;
        const double d = std::fabs(p - g);
        abs_acc += d;
        sq_acc += d * d;
        rel_acc += d / g;
        log10_acc += std::fabs(std::log10(p) - std::log10(g));
        const double dl = std::log(p) - std::log(g);
        sqlog_acc += dl * dl;
        const double ratio = p > g ? p / g : g / p;
        if (ratio < 1.25) ++d1;
        if (ratio < 1.25 * 1.25) ++d2;
        if (ratio < 1.25 * 1.25 * 1.25) ++d3;
    }
    if (n == 0) throw EmptyValidSetError("evaluate: empty valid set");

    const double inv = 1.0 / static_cast<double>(n);
    EvalReport r;
    r.mae = abs_acc * inv;
    r.rmse = std::sqrt(sq_acc * inv);
    r.absrel = rel_acc * inv;
    r.log10 = log10_acc * inv;
    r.rmselog = std::sqrt(sqlog_acc * inv);
    r.delta1 = static_cast<double>(d1) * inv;
    r.delta2 = static_cast<double>(d2) * inv;
    r.delta3 = static_cast<double>(d3) * inv;
    r.n_valid = n;
    r.cap = cap;
    return r;
}

EvalReport aggregate(std::span<const EvalReport> reports) {
    if (reports.empty()) throw ArgumentError("aggregate: no reports");
    const double cap = reports.front().cap;
    std::size_t n = 0;
    double mae = 0.0, msq = 0.0, rel = 0.0, l10 = 0.0, msqlog = 0.0;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
    for (const EvalReport& r : reports) {
        if (r.cap != cap) throw ArgumentError("aggregate: mixed caps");
        if (r.n_valid == 0) continue;
        const double w = static_cast<double>(r.n_valid);
        n += r.n_valid;
        mae += w * r.mae;
        msq += w * r.rmse * r.rmse;  // pool second moments, not roots
        rel += w * r.absrel;
        l10 += w * r.log10;
        msqlog += w * r.rmselog * r.rmselog;
        d1 += w * r.delta1;
        d2 += w * r.delta2;
        d3 += w * r.delta3;
    }
    if (n == 0) throw EmptyValidSetError("aggregate: no valid pixels");

    const double inv = 1.0 / static_cast<double>(n);
    EvalReport out;
    out.mae = mae * inv;
    out.rmse = std::sqrt(msq * inv);
    out.absrel = rel * inv;
    out.log10 = l10 * inv;
    out.rmselog = std::sqrt(msqlog * inv);
    out.delta1 = d1 * inv;
    out.delta2 = d2 * inv;
    out.delta3 = d3 * inv;
    out.n_valid = n;
    out.cap = cap;
    return out;
}

}  // namespace rcdepth
