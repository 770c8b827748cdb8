#include "core/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/util.hpp"

namespace stereodiff {

double feature_pd(const Grid& a, const Grid& b, const ToyDenoiser& den) {
    const Grid fa = den.mid_features(a);
    const Grid fb = den.mid_features(b);
    return mean_sq_diff(fa, fb);
}

namespace {

bool known_method(const std::string& m) {
    return m == "ours" || m == "ours_no_spsmd" || m == "ours_no_attn" || m == "leave_blank" ||
           m == "stretch" || m == "copy_gt";
}

bool higher_better(const std::string& metric) { return metric != "pd"; }

double eval_metric(const std::string& metric, const Grid& gen, const Grid& gt,
                   const ToyDenoiser& den) {
    if (metric == "psnr") return psnr(gen, gt);
    if (metric == "ssim") return ssim(gen, gt);
    return feature_pd(gen, gt, den);
}

Grid method_right(const std::string& method, const SceneRecord& scene, ToyDenoiser& den,
                  const BenchmarkConfig& cfg) {
    if (method == "copy_gt") return scene.right;
    if (method == "leave_blank" || method == "stretch")
        return baseline_warp(scene.left, scene.disparity, scene.s_image,
                             method == "stretch" ? FillMode::stretch : FillMode::leave_blank);
    StereoRunConfig rc;
    rc.mode = RunMode::i2si;
    rc.steps = cfg.steps;
    rc.s = scene.s_image / double(den.codec().factor);
    rc.spsmd = cfg.spsmd && method != "ours_no_spsmd";
    rc.spsmd_interval = cfg.spsmd_interval;
    rc.plan = method == "ours_no_attn" ? AttentionPlan::none : cfg.plan;
    rc.seed = cfg.seed ^ fnv1a(scene.id);
    rc.condition_token = scene.class_token;
    StereoInputs in;
    in.disparity = scene.disparity;
    in.image = scene.left;
    return generate_stereo(rc, in, den).right;
}

struct SceneOutcome {
    std::string id;
    bool ok = false;
    std::string warning;
    std::vector<BenchmarkRow> rows;
};

} // namespace

BenchmarkResult run_benchmark(const Corpus& corpus, ToyDenoiser& den,
                              const BenchmarkConfig& cfg) {
    check(!corpus.entries.empty(), "benchmark corpus is empty");
    check(!cfg.methods.empty(), "benchmark needs at least one method");
    check(!cfg.metrics.empty(), "benchmark needs at least one metric");
    for (const auto& m : cfg.methods) check(known_method(m), "unknown benchmark method: " + m);
    for (const auto& m : cfg.metrics)
        check(m == "psnr" || m == "ssim" || m == "pd", "unknown benchmark metric: " + m);
    for (const auto& m : cfg.metrics)
        if (m == "pd") check(den.is_trained(), "the pd metric requires a trained denoiser");
    check(cfg.jobs >= 1, "benchmark job count must be positive");

    const auto dims = den.latent_dims();
    const int working = cfg.working_size > 0 ? cfg.working_size : dims[1] * den.codec().factor;

    const size_t n = corpus.entries.size();
    std::vector<SceneOutcome> outcomes(n);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= n) break;
            SceneOutcome& o = outcomes[i];
            o.id = corpus.entries[i].id;
            try {
                const SceneRecord scene = load_scene(corpus, corpus.entries[i], working);
                check(!scene.right.v.empty(), "scene has no ground-truth right image");
                for (const auto& method : cfg.methods) {
                    const Grid gen = method_right(method, scene, den, cfg);
                    for (const auto& metric : cfg.metrics)
                        o.rows.push_back(
                            {o.id, method, metric, eval_metric(metric, gen, scene.right, den)});
                }
                o.ok = true;
            } catch (const error& e) {
                o.warning = "skipping scene " + o.id + ": " + e.what();
            }
        }
    };
    const size_t jobs = std::min(size_t(cfg.jobs), n);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::sort(outcomes.begin(), outcomes.end(),
              [](const SceneOutcome& a, const SceneOutcome& b) { return a.id < b.id; });

    BenchmarkResult res;
    size_t usable = 0;
    for (auto& o : outcomes) {
        if (!o.ok) {
            res.warnings.push_back(o.warning);
            continue;
        }
        ++usable;
        for (auto& r : o.rows) res.rows.push_back(std::move(r));
    }
    check(usable > 0, "benchmark corpus yielded no usable scenes");

    for (const auto& method : cfg.methods)
        for (const auto& metric : cfg.metrics) {
            MethodMetricSummary s;
            s.method = method;
            s.metric = metric;
            bool first = true;
            for (const auto& r : res.rows) {
                if (r.method != method || r.metric != metric) continue;
                s.mean += r.value;
                if (first) {
                    s.best = s.worst = r.value;
                    first = false;
                } else if (higher_better(metric) ? r.value > s.best : r.value < s.best) {
                    s.best = r.value;
                } else if (higher_better(metric) ? r.value < s.worst : r.value > s.worst) {
                    s.worst = r.value;
                }
                ++s.count;
            }
            s.mean /= double(s.count);
            res.summary.push_back(s);
        }
    return res;
}

std::string BenchmarkResult::csv() const {
    std::string out = "scene,method,metric,value\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f", r.value);
        out += r.scene + "," + r.method + "," + r.metric + "," + buf + "\n";
    }
    return out;
}

std::string BenchmarkResult::table() const {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "%-16s %-6s %12s %12s %12s\n", "method", "metric", "mean",
                  "best", "worst");
    out += line;
    for (const auto& s : summary) {
        bool is_best = true;
        for (const auto& o : summary)
            if (o.metric == s.metric &&
                (higher_better(s.metric) ? o.mean > s.mean : o.mean < s.mean))
                is_best = false;
        std::snprintf(line, sizeof line, "%-16s %-6s %12.4f %12.4f %12.4f%s\n", s.method.c_str(),
                      s.metric.c_str(), s.mean, s.best, s.worst, is_best ? " *" : "");
        out += line;
    }
    return out;
}

} // namespace stereodiff
