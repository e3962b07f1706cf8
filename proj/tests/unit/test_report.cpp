#include "doctest.h"
#include "spseg/report.hpp"

TEST_CASE("diagnostics carry config and iterations without timing by default") {
    spseg::PipelineConfig config;
    spseg::Diagnostics diag;
    diag.width = 8;
    diag.height = 4;
    diag.superpixels = 6;
    diag.final_labels = 2;
    diag.termination = spseg::Termination::Cycle;
    spseg::IterationRecord rec;
    rec.info.labels_before = 6;
    rec.info.labels_after = 2;
    rec.seconds = 0.25;
    diag.iterations.push_back(rec);
    diag.total_seconds = 0.3;

    const auto j = spseg::to_json(diag, config);
    CHECK(j["schema"] == spseg::kDiagnosticsSchemaId);
    CHECK(j["termination"] == "cycle");
    CHECK(j["iterations"].size() == 1);
    CHECK(j["iterations"][0]["iteration"] == 1);
    CHECK(j["iterations"][0]["labels_after"] == 2);
    CHECK_FALSE(j.contains("total_seconds"));
    CHECK_FALSE(j["iterations"][0].contains("seconds"));
    CHECK(j["config"]["superpixels"] == 400);
    CHECK(j["config"]["gamma"] == 0.001);

    const auto timed = spseg::to_json(diag, config, true);
    CHECK(timed["total_seconds"] == 0.3);
    CHECK(timed["iterations"][0]["seconds"] == 0.25);
}

TEST_CASE("evaluation report layout") {
    spseg::EvalReport r;
    spseg::AnnotatorScore a;
    a.f_single = 0.5;
    a.f_multi = 0.75;
    a.f_frag = 1;
    a.best_subset = {0, 2};
    a.exact = false;
    r.annotators = {a};
    r.mean_f_single = 0.5;
    r.mean_f_multi = 0.75;
    r.mean_f_frag = 1.0;
    const auto j = spseg::to_json(r);
    CHECK(j["annotators"][0]["method"] == "greedy");
    CHECK(j["annotators"][0]["best_subset"] == nlohmann::json::array({0, 2}));
    CHECK(j["mean"]["f_multi"] == 0.75);
}
