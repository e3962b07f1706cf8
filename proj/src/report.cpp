#include "spseg/report.hpp"

namespace spseg {

using nlohmann::json;

json to_json(const PipelineConfig& c) {
    return json{
        {"superpixels", c.slic.superpixels},
        {"compactness", c.slic.compactness},
        {"slic_iters", c.slic.max_iters},
        {"min_region_frac", c.slic.min_region_frac},
        {"gamma", c.svm.gamma},
        {"c", c.svm.c},
        {"mrf_alpha", c.mrf.alpha},
        {"mrf_tol", c.mrf.tol},
        {"mrf_max_sweeps", c.mrf.max_sweeps},
        {"max_iters", c.max_outer_iters},
        {"texture_t1", c.texture.t1},
        {"texture_t2", c.texture.t2},
    };
}

json to_json(const Diagnostics& diag, const PipelineConfig& config, bool with_timing) {
    json iterations = json::array();
    int index = 0;
    for (const auto& rec : diag.iterations) {
        json it{
            {"iteration", ++index},
            {"labels_before", rec.info.labels_before},
            {"labels_after", rec.info.labels_after},
            {"reassigned", rec.info.reassigned},
            {"mrf_sweeps", rec.info.mrf_sweeps},
            {"mrf_converged", rec.info.mrf_converged},
            {"energy", rec.info.energy},
            {"unregularized_energy", rec.info.unregularized_energy},
        };
        if (with_timing) it["seconds"] = rec.seconds;
        iterations.push_back(std::move(it));
    }
    json out{
        {"schema", kDiagnosticsSchemaId},
        {"width", diag.width},
        {"height", diag.height},
        {"superpixels", diag.superpixels},
        {"final_labels", diag.final_labels},
        {"termination", to_string(diag.termination)},
        {"iterations", std::move(iterations)},
        {"config", to_json(config)},
    };
    if (with_timing) out["total_seconds"] = diag.total_seconds;
    return out;
}

json to_json(const EvalReport& report) {
    json annotators = json::array();
    for (const auto& a : report.annotators) {
        annotators.push_back(json{
            {"f_single", a.f_single},
            {"f_multi", a.f_multi},
            {"f_frag", a.f_frag},
            {"best_subset", a.best_subset},
            {"method", a.exact ? "exact" : "greedy"},
        });
    }
    return json{
        {"annotators", std::move(annotators)},
        {"mean", json{{"f_single", report.mean_f_single},
                      {"f_multi", report.mean_f_multi},
                      {"f_frag", report.mean_f_frag}}},
    };
}

}  // namespace spseg
