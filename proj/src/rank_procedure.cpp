#include "covrank/rank_procedure.hpp"

#include "covrank/error.hpp"
#include "covrank/objective.hpp"

namespace covrank {

DChoice choose_d(Index L, std::optional<int> override_d) {
    if (L < 3) throw DataError("choose_d: the grid needs at least 3 nodes");
    const int limit = static_cast<int>((L - 1) / 2);
    DChoice out{limit, std::nullopt};
    if (override_d) {
        if (*override_d < 1) throw DataError("d must be at least 1");
        if (*override_d <= limit) {
            out.d = *override_d;
        } else {
            out.warning = "requested d = " + std::to_string(*override_d) + " exceeds floor((L-1)/2) = " +
                          std::to_string(limit) + "; clamped";
        }
    }
    return out;
}

RankReport sequential_rank_test(const SampleMatrix& W, double alpha, const BootstrapConfig& cfg) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
    cfg.validate();

    RankReport report;
    report.alpha = alpha;
    report.d = cfg.d;
    report.config = cfg;
    report.warnings = cfg.warnings(W.cols());

    const BootstrapContext ctx = prepare_bootstrap(W, cfg);
    report.scree = scree_from_fits(ctx.K_hat, ctx.fits);
    for (int q = 1; q <= cfg.d; ++q)
        report.per_q.push_back({q, ctx.fits[static_cast<std::size_t>(q - 1)].statistic, 1.0, false, 0});

    for (int q = 1; q <= cfg.d; ++q) {
        auto& rec = report.per_q[static_cast<std::size_t>(q - 1)];
        const auto& theta = ctx.fits[static_cast<std::size_t>(q - 1)].theta;
        if (!assumption_E_check(theta, q).ok)
            report.warnings.push_back("leading eigenvectors of the rank-" + std::to_string(q) +
                                      " fit have (near-)zero entries; the Hessian condition may fail");
        BootstrapResult res = bootstrap_pvalue(ctx, q, cfg);
        rec.tested = true;
        rec.p_value = res.p_value;
        rec.M_used = res.noise.M_used;
        if (res.p_value > alpha) {
            report.r_hat = q;
            break;
        }
    }
    report.global_null_rejected = !report.r_hat.has_value();
    return report;
}

}  // namespace covrank
