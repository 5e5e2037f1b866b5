// Acceptance checks for the tracking library. Each check prints a single
// PASS/FAIL line with the measured quantities and the limits it was held to;
// the process exits nonzero if any executed check fails.
//
//   acceptance [--only NAME] [--cli PATH]
//
// --cli is required by the reproducibility check, which shells out to the
// command-line tool.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <slf/bench.hpp>

using namespace slf;

namespace {

struct CheckResult {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(4) << v;
    return ss.str();
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// ---------------------------------------------------------------------------
// A1: the rotation map and its inverse compose to the identity.

CheckResult check_rotation_round_trip() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uv(-1e4, 1e4);
    std::uniform_real_distribution<double> ua(-10.0, 10.0);
    const int n = 100000;
    double max_err = 0.0, max_norm_drift = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) {
        const Vec2 v{uv(rng), uv(rng)};
        const double a = ua(rng);
        const Vec2 u = preprocess::rotate_vec(v, a);
        const Vec2 w = preprocess::inverse_rotate_vec(u, a);
        max_err = std::max({max_err, std::abs(w.x - v.x), std::abs(w.y - v.y)});
        max_norm_drift = std::max(
            max_norm_drift, std::abs(std::hypot(u.x, u.y) - std::hypot(v.x, v.y)));
    }
    const double secs = seconds_since(t0);
    const bool pass = max_err < 1e-9 && max_norm_drift < 1e-9 && secs < 1.0;
    return {pass, std::to_string(n) + " pairs: max round-trip err " + num(max_err) +
                      ", max norm drift " + num(max_norm_drift) + ", " + num(secs) +
                      " s (limits 1e-9, 1e-9, 1 s)"};
}

// ---------------------------------------------------------------------------
// A2: rotating an entire track about its first measurement must leave the
// training features and targets unchanged.

simkit::TrackPair rotate_track_about_first_meas(const simkit::TrackPair& tp,
                                                double beta) {
    const Vec2 c = tp.meas.front().position();
    simkit::TrackPair out = tp;
    for (auto& s : out.truth) {
        const Vec2 p = preprocess::rotate_vec(Vec2{s.px, s.py} - c, beta) + c;
        const Vec2 v = preprocess::rotate_vec({s.vx, s.vy}, beta);
        s.px = p.x;
        s.py = p.y;
        s.vx = v.x;
        s.vy = v.y;
    }
    for (auto& z : out.meas) {
        const Vec2 p = preprocess::rotate_vec(z.position() - c, beta) + c;
        z.zx = p.x;
        z.zy = p.y;
    }
    return out;
}

CheckResult check_feature_invariance() {
    simkit::ScenarioConfig cfg;
    cfg.T = 30;
    cfg.n_tracks = 100;
    cfg.seed = 101;
    const auto tracks = simkit::simulate_tracks(cfg);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ub(-std::numbers::pi, std::numbers::pi);
    const int tau = 10;
    double max_diff = 0.0;
    for (const auto& tp : tracks) {
        const auto spun = rotate_track_about_first_meas(tp, ub(rng));
        const auto a = preprocess::build_dataset({tp}, tau);
        const auto b = preprocess::build_dataset({spun}, tau);
        if (a.samples.size() != b.samples.size())
            return {false, "sample count changed under rotation"};
        for (std::size_t s = 0; s < a.samples.size(); ++s) {
            const auto& sa = a.samples[s];
            const auto& sb = b.samples[s];
            for (std::size_t i = 0; i < sa.features.size(); ++i) {
                if (is_missing(sa.features[i]) != is_missing(sb.features[i]))
                    return {false, "missing pattern changed under rotation"};
                if (!is_missing(sa.features[i]))
                    max_diff = std::max(max_diff,
                                        std::abs(sa.features[i] - sb.features[i]));
            }
            max_diff = std::max({max_diff, std::abs(sa.target.x - sb.target.x),
                                 std::abs(sa.target.y - sb.target.y)});
        }
    }
    return {max_diff < 1e-6, "100 tracks: max |feature/target change| " +
                                 num(max_diff) + " (limit 1e-6)"};
}

// ---------------------------------------------------------------------------
// A3: the split finder must match an exhaustive search over every feature,
// every adjacent-midpoint threshold, and both missing-value directions.

struct SplitData {
    gbt::FeatureMatrix x;
    std::vector<gbt::GradHess> gh;
};

SplitData random_split_data(std::mt19937_64& rng, bool unit_h) {
    std::uniform_int_distribution<int> un(2, 64), ud(1, 3);
    std::uniform_real_distribution<double> uv(-5.0, 5.0), uh(0.5, 2.0);
    std::uniform_int_distribution<int> mode(0, 2), digit(0, 9);
    std::bernoulli_distribution miss(0.25);

    SplitData d;
    const int n = un(rng), cols = ud(rng);
    const int value_mode = mode(rng);
    d.x = gbt::FeatureMatrix(static_cast<std::size_t>(n),
                             static_cast<std::size_t>(cols));
    d.gh.resize(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (miss(rng)) continue;
            const bool discrete = value_mode == 1 || (value_mode == 2 && r % 2 == 0);
            d.x(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                discrete ? static_cast<double>(digit(rng)) : uv(rng);
        }
        d.gh[static_cast<std::size_t>(r)] = {uv(rng), unit_h ? 1.0 : uh(rng)};
    }
    return d;
}

double leaf_objective(double g, double h, double lambda) {
    return -0.5 * g * g / (h + lambda);
}

std::optional<double> exhaustive_best_gain(const SplitData& d,
                                           const gbt::TrainParams& p) {
    const auto n = static_cast<std::int64_t>(d.x.rows);
    double gt = 0.0, ht = 0.0;
    for (const auto& gh : d.gh) {
        gt += gh.g;
        ht += gh.h;
    }
    std::optional<double> best;
    for (int f = 0; f < static_cast<int>(d.x.cols); ++f) {
        std::vector<double> vals;
        for (std::int64_t r = 0; r < n; ++r) {
            const double v =
                d.x(static_cast<std::size_t>(r), static_cast<std::size_t>(f));
            if (!is_missing(v)) vals.push_back(v);
        }
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            double thr = 0.5 * (vals[i] + vals[i + 1]);
            if (!(thr > vals[i])) thr = vals[i + 1];
            for (bool dleft : {true, false}) {
                double gl = 0.0, hl = 0.0;
                std::int64_t cl = 0;
                for (std::int64_t r = 0; r < n; ++r) {
                    const double v = d.x(static_cast<std::size_t>(r),
                                         static_cast<std::size_t>(f));
                    if (is_missing(v) ? dleft : v < thr) {
                        gl += d.gh[static_cast<std::size_t>(r)].g;
                        hl += d.gh[static_cast<std::size_t>(r)].h;
                        ++cl;
                    }
                }
                if (cl < p.min_samples_leaf || n - cl < p.min_samples_leaf) continue;
                const double gain = leaf_objective(gt, ht, p.lambda) -
                                    leaf_objective(gl, hl, p.lambda) -
                                    leaf_objective(gt - gl, ht - hl, p.lambda) -
                                    p.gamma;
                if (!best || gain > *best) best = gain;
            }
        }
    }
    return best;
}

CheckResult check_split_optimality() {
    std::mt19937_64 rng(5);
    const double tol = 1e-9;
    double max_diff = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const SplitData d = random_split_data(rng, trial % 2 == 0);
        gbt::TrainParams p;
        p.lambda = trial % 3 == 0 ? 0.0 : (trial % 3 == 1 ? 1.0 : 2.5);
        p.gamma = trial % 4 == 0 ? 0.3 : 0.0;

        std::vector<std::int32_t> members(d.x.rows);
        for (std::size_t i = 0; i < d.x.rows; ++i)
            members[i] = static_cast<std::int32_t>(i);
        const auto got = gbt::find_best_split(d.x, d.gh, members, p);
        const auto oracle = exhaustive_best_gain(d, p);

        if (oracle && *oracle > tol) {
            if (!got)
                return {false, "trial " + std::to_string(trial) +
                                   ": missed a split with gain " + num(*oracle)};
            max_diff = std::max(max_diff, std::abs(got->gain - *oracle));
        } else if (!oracle || *oracle < -tol) {
            if (got)
                return {false, "trial " + std::to_string(trial) +
                                   ": invented a split with gain " + num(got->gain)};
        } else if (got) {
            // boundary case: zero-gain optimum, either outcome is acceptable
            max_diff = std::max(max_diff, std::abs(got->gain - *oracle));
        }
        if (max_diff > tol)
            return {false, "trial " + std::to_string(trial) + ": gain off by " +
                               num(max_diff)};
    }
    return {true, "500 datasets vs exhaustive enumeration: max |gain diff| " +
                      num(max_diff) + " (limit 1e-9)"};
}

// ---------------------------------------------------------------------------
// A4: with gamma = 0 every boosting round must lower (or hold) the training
// loss, for both a small and a full step size.

CheckResult check_monotone_training() {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> un(2, 64), ud(1, 3);
    std::uniform_real_distribution<double> uv(-5.0, 5.0);
    std::bernoulli_distribution miss(0.25);

    double max_increase = -std::numeric_limits<double>::infinity();
    int violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = un(rng), cols = ud(rng);
        gbt::FeatureMatrix x(static_cast<std::size_t>(n),
                             static_cast<std::size_t>(cols));
        std::vector<double> targets(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < cols; ++c)
                if (!miss(rng))
                    x(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                        uv(rng);
            targets[static_cast<std::size_t>(r)] = uv(rng);
        }
        gbt::TrainParams p;
        p.nrounds = 50;
        p.max_depth = 3;
        p.eta = trial % 2 == 0 ? 0.1 : 1.0;
        p.gamma = 0.0;
        const gbt::BoostedModel m = gbt::train(x, targets, p);

        std::vector<double> pred(x.rows, p.base_score);
        double prev = std::numeric_limits<double>::infinity();
        for (const gbt::Tree& t : m.trees) {
            double loss = 0.0;
            for (std::size_t r = 0; r < x.rows; ++r) {
                pred[r] += p.eta * t.eval(x.row_ptr(r));
                const double e = pred[r] - targets[r];
                loss += 0.5 * e * e;
            }
            if (prev < std::numeric_limits<double>::infinity()) {
                max_increase = std::max(max_increase, loss - prev);
                if (loss > prev + 1e-9) ++violations;
            }
            prev = loss;
        }
    }
    return {violations == 0, "100 runs x 50 rounds, eta in {0.1, 1}: max per-round "
                             "loss change " +
                                 num(max_increase) + " (limit 1e-9)"};
}

// ---------------------------------------------------------------------------
// A5: on matched data the filter's Monte Carlo error must agree with the
// steady-state error its own covariance predicts.

CheckResult check_kf_consistency() {
    const auto model = kalman::KfModel::cv(1.0, 1.0, 30.0, 20.0);
    const Eigen::Matrix4d pinf = kalman::steady_state_cov(model);
    const double predicted = std::sqrt(pinf(0, 0) + pinf(2, 2));

    simkit::ScenarioConfig cfg;
    cfg.T = 30;
    cfg.n_tracks = 1000;
    cfg.seed = 55;
    const auto tracks = simkit::simulate_tracks(cfg);
    double acc = 0.0;
    for (const auto& tp : tracks) {
        const auto est = kalman::kf_run(tp.meas, model, 1.0);
        acc += (est.back() - tp.truth.back().position()).squared_norm();
    }
    const double rmse = std::sqrt(acc / static_cast<double>(tracks.size()));
    const double rel = std::abs(rmse / predicted - 1.0);
    return {rel <= 0.15, "1000 tracks at k=30: rmse " + num(rmse) +
                             " vs steady-state prediction " + num(predicted) +
                             " (rel diff " + num(rel) + ", limit 0.15)"};
}

// ---------------------------------------------------------------------------
// A6: the headline benchmark. The learned filter must beat the raw
// measurements outright and stay within 35% of the matched filter.

void collect_means(const bench::ExperimentResult& res, double* meas, double* kf,
                   double* slf, double* slf_norot = nullptr) {
    for (const auto& [label, mean] : res.means) {
        if (label == "rmse_meas" && meas) *meas = mean;
        if (label == "rmse_kf" && kf) *kf = mean;
        if (label == "rmse_slf" && slf) *slf = mean;
        if (label == "rmse_slf_norot" && slf_norot) *slf_norot = mean;
    }
}

CheckResult check_general_benchmark() {
    const auto spec =
        bench::make_spec("general", bench::profile_by_name("desk"), 42, "");
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = bench::compute_experiment(spec);
    const double secs = seconds_since(t0);

    double meas = 0.0, kf = 0.0, slf = 0.0;
    collect_means(res, &meas, &kf, &slf);
    const double meas_bound = std::sqrt(50.0);
    const bool pass = slf < meas_bound && slf <= 1.35 * kf;
    return {pass, "mean rmse over k in [20,50]: slf " + num(slf) + " (limit " +
                      num(meas_bound) + "), kf " + num(kf) + " (ratio " +
                      num(slf / kf) + ", limit 1.35), meas " + num(meas) +
                      "; runtime " + num(secs) +
                      " s (informational target 300 s)"};
}

// ---------------------------------------------------------------------------
// A7: under each non-Gaussian scenario the learned filter must beat the
// filter that still assumes plain Gaussian noise, on every seed.

CheckResult check_special_cases() {
    const auto desk = bench::profile_by_name("desk");
    double tightest = std::numeric_limits<double>::infinity();
    std::string tight_label;
    int wins = 0, runs = 0;
    for (const std::string& preset : {"special1", "special2", "special3"}) {
        for (const std::uint64_t seed : {11ull, 12ull, 13ull}) {
            auto spec = bench::make_spec(preset, desk, seed, "");
            spec.summary_k_lo = 10;
            spec.summary_k_hi = 30;
            const auto res = bench::compute_experiment(spec);
            double kf = 0.0, slf = 0.0;
            collect_means(res, nullptr, &kf, &slf);
            ++runs;
            if (slf < kf) ++wins;
            if (kf - slf < tightest) {
                tightest = kf - slf;
                tight_label = preset + " seed " + std::to_string(seed);
            }
        }
    }
    return {wins == runs, std::to_string(wins) + "/" + std::to_string(runs) +
                              " runs with slf below the mismatched filter over "
                              "k in [10,30]; tightest margin " +
                              num(tightest) + " (" + tight_label + ")"};
}

// ---------------------------------------------------------------------------
// A8: trained on one quadrant and tested on the opposite one, the rotation
// front end must carry the model across; disabling it must cost accuracy.

CheckResult check_rotation_ablation() {
    const auto desk = bench::profile_by_name("desk");
    double tightest = std::numeric_limits<double>::infinity();
    std::uint64_t tight_seed = 0;
    int wins = 0, runs = 0;
    for (const std::uint64_t seed : {21ull, 22ull, 23ull}) {
        auto spec = bench::make_spec("ablation", desk, seed, "");
        spec.summary_k_lo = 10;
        spec.summary_k_hi = 30;
        const auto res = bench::compute_experiment(spec);
        double rot = 0.0, norot = 0.0;
        collect_means(res, nullptr, nullptr, &rot, &norot);
        ++runs;
        if (rot < norot) ++wins;
        if (norot - rot < tightest) {
            tightest = norot - rot;
            tight_seed = seed;
        }
    }
    return {wins == runs, std::to_string(wins) + "/" + std::to_string(runs) +
                              " seeds with rotation ahead on the mirrored test "
                              "box; tightest margin " +
                              num(tightest) + " (seed " +
                              std::to_string(tight_seed) + ")"};
}

// ---------------------------------------------------------------------------
// A9: across matched-noise grids the learned filter's error must grow with
// the process noise and with the measurement noise.

CheckResult check_noise_grid_trends() {
    const bench::Profile prof{"custom", 1000, 300, 100};
    const auto base = bench::make_spec("qr-grid", prof, 77, "");
    const auto grid = bench::run_qr_grid(base, "");

    std::string qs_list, r_list;
    bool mono_q = true, mono_r = true;
    for (std::size_t i = 0; i < grid.qs_rows.size(); ++i) {
        qs_list += (i ? ", " : "") + num(grid.qs_rows[i].mean_slf);
        if (i && grid.qs_rows[i].mean_slf < grid.qs_rows[i - 1].mean_slf)
            mono_q = false;
    }
    for (std::size_t i = 0; i < grid.r_rows.size(); ++i) {
        r_list += (i ? ", " : "") + num(grid.r_rows[i].second.mean_slf);
        if (i && grid.r_rows[i].second.mean_slf < grid.r_rows[i - 1].second.mean_slf)
            mono_r = false;
    }
    return {mono_q && mono_r, "slf mean rmse vs process noise {" + qs_list +
                                  "} and vs measurement noise {" + r_list +
                                  "}; both must be non-decreasing"};
}

// ---------------------------------------------------------------------------
// A10: two identical CLI invocations must produce byte-identical artifacts,
// and a saved model bundle must reload to the exact same predictor.

CheckResult check_cli_reproducibility(const std::string& cli) {
    if (cli.empty()) return {false, "needs --cli PATH"};
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "slf_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path a = root / "run_a", b = root / "run_b";
    for (const fs::path* dir : {&a, &b}) {
        const std::string cmd = "\"" + cli +
                                "\" reproduce general --seed 42 --profile smoke "
                                "--out \"" +
                                dir->string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        if (rc != 0)
            return {false, "cli run exited with status " + std::to_string(rc)};
    }
    for (const char* name : {"results.csv", "summary.csv", "config.json",
                             "rmse.svg", "model/model_x.json",
                             "model/model_y.json", "model/manifest.json"}) {
        if (io::read_text_file(a / name) != io::read_text_file(b / name))
            return {false, std::string("repeated runs differ in ") + name};
    }

    const auto model = io::load_model_bundle(a / "model");
    const fs::path c = root / "resaved";
    io::save_model_bundle(c, model, 0);
    const auto back = io::load_model_bundle(c);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-500.0, 500.0);
    std::bernoulli_distribution miss(0.3);
    std::vector<double> probe(static_cast<std::size_t>(model.model_x.n_features));
    for (int i = 0; i < 10000; ++i) {
        for (auto& v : probe) v = miss(rng) ? kMissing : u(rng);
        if (back.model_x.predict(probe) != model.model_x.predict(probe) ||
            back.model_y.predict(probe) != model.model_y.predict(probe))
            return {false, "resaved bundle changed a prediction"};
    }
    fs::remove_all(root);
    return {true, "two runs byte-identical across 7 artifacts; resaved bundle "
                  "exact on 10000 probes"};
}

}  // namespace

int main(int argc, char** argv) {
    std::string only, cli;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else if (arg == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else {
            std::fprintf(stderr, "usage: acceptance [--only NAME] [--cli PATH]\n");
            return 2;
        }
    }

    struct Check {
        const char* name;
        std::function<CheckResult()> fn;
    };
    const std::vector<Check> checks = {
        {"A1", check_rotation_round_trip},
        {"A2", check_feature_invariance},
        {"A3", check_split_optimality},
        {"A4", check_monotone_training},
        {"A5", check_kf_consistency},
        {"A6", check_general_benchmark},
        {"A7", check_special_cases},
        {"A8", check_rotation_ablation},
        {"A9", check_noise_grid_trends},
        {"A10", [&cli] { return check_cli_reproducibility(cli); }},
    };

    bool ran_any = false, all_pass = true;
    for (const auto& c : checks) {
        if (!only.empty() && only != c.name) continue;
        ran_any = true;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c.fn();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s (%.1f s) %s\n", c.name, r.pass ? "PASS" : "FAIL",
                    seconds_since(t0), r.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && r.pass;
    }
    if (!ran_any) {
        std::fprintf(stderr, "no such check: %s\n", only.c_str());
        return 2;
    }
    return all_pass ? 0 : 1;
}
