// Copyright 2026 The qfair Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qfair/qfair.hpp"

namespace qfair::cli {

enum ExitCode : int { kOk = 0, kUnfair = 1, kMalformed = 2, kSolverFailure = 3 };

struct ModelFlags {
    std::string model_path;
    std::string build;
    int qubits = 0;
    std::uint64_t seed = 0;
    std::string noise = "none";
    int rotation_blocks = 3;
    int entangling_blocks = 2;
    std::optional<double> append_depolarizing;
    std::string emit_model;
};

struct SolverFlags {
    std::string backend = "dense";
    std::optional<double> tolerance;
    std::optional<long> max_iters;
    std::optional<std::uint64_t> solver_seed;
    double timeout = 0.0;
    int threads = 1;
};

struct OutputFlags {
    bool json = false;
    std::string out;
    bool full_kernel = false;
};

inline void add_model_flags(CLI::App* app, ModelFlags& f) {
    app->add_option("--model", f.model_path, "Model spec JSON file");
    app->add_option("--build", f.build, "Builder instead of a model file")->check(CLI::IsMember({"qcnn", "rotation"}));
    app->add_option("--qubits", f.qubits, "Qubit count for --build");
    app->add_option("--seed", f.seed, "Parameter seed for --build");
    app->add_option("--noise", f.noise, "none or <name>:<p> for --build");
    app->add_option("--rotation-blocks", f.rotation_blocks, "Rotation blocks (rotation builder)");
    app->add_option("--entangling-blocks", f.entangling_blocks, "Entangling blocks (rotation builder)");
    app->add_option("--append-depolarizing", f.append_depolarizing, "Append global depolarizing noise with this p");
    app->add_option("--emit-model", f.emit_model, "Write the resolved model spec to this path");
}

inline void add_solver_flags(CLI::App* app, SolverFlags& f, const std::string& default_backend) {
    f.backend = default_backend;
    app->add_option("--backend", f.backend, "dense or tn")->check(CLI::IsMember({"dense", "tn"}));
    app->add_option("--tolerance", f.tolerance, "Power-iteration tolerance");
    app->add_option("--max-iters", f.max_iters, "Power-iteration iteration cap");
    app->add_option("--solver-seed", f.solver_seed, "Power-iteration start-vector seed");
    app->add_option("--timeout", f.timeout, "Wall-clock limit in seconds (tn backend; 0 = none)");
    app->add_option("--threads", f.threads, "Worker threads (bench)")->check(CLI::PositiveNumber);
}

inline void add_output_flags(CLI::App* app, OutputFlags& f) {
    app->add_flag("--json", f.json, "Print the report as JSON");
    app->add_option("--out", f.out, "Also write the JSON result to this path");
    app->add_flag("--full-kernel", f.full_kernel, "Serialize every kernel amplitude");
}

inline DecisionModel resolve_model(const ModelFlags& f, PowerIterationConfig& cfg) {
    if (f.model_path.empty() == f.build.empty()) {
        throw ValidationError("give exactly one of --model or --build");
    }
    std::optional<DecisionModel> model;
    if (!f.model_path.empty()) {
        const json j = read_json_file(f.model_path);
        model.emplace(model_from_json(j));
        apply_solver_block(j, cfg);
    } else {
        const NoiseSpec noise = NoiseSpec::parse(f.noise);
        if (f.build == "qcnn") {
            model.emplace(build_qcnn({f.qubits, std::nullopt, f.seed, noise}));
        } else {
            model.emplace(build_rotation_entangling(
                {f.qubits, f.rotation_blocks, f.entangling_blocks, std::nullopt, f.seed, noise}));
        }
    }
    if (f.append_depolarizing) append_global_depolarizing(*model, *f.append_depolarizing);
    if (!f.emit_model.empty()) save_model(*model, f.emit_model);
    return std::move(*model);
}

inline void apply_solver_flags(const SolverFlags& f, PowerIterationConfig& cfg) {
    if (f.tolerance) cfg.tolerance = *f.tolerance;
    if (f.max_iters) cfg.max_iters = *f.max_iters;
    if (f.solver_seed) cfg.seed = *f.solver_seed;
    if (f.timeout < 0.0) throw ValidationError("--timeout must be non-negative");
    if (f.timeout > 0.0) {
        cfg.deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(f.timeout));
    }
    cfg.validate();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
}

inline void print_summary(std::ostream& os, const VerificationReport& r) {
    os << std::setprecision(12);
    os << "backend:        " << r.backend << '\n';
    os << "k_star:         " << r.k_star << '\n';
    os << "optimal_subset: " << subset_key(r.optimal_subset) << '\n';
    os << "lambda_max/min: " << r.lambda_max << " / " << r.lambda_min << '\n';
    if (r.degenerate) os << "degenerate:     yes\n";
    if (r.backend == "tensor-network") {
        os << "solver:         " << (r.solver.converged ? "converged" : "NOT converged") << " (iterations "
           << r.solver.iterations_max << "/" << r.solver.iterations_min << ", residuals " << r.solver.residual_max
           << "/" << r.solver.residual_min << ")\n";
    }
    if (r.verdict) {
        os << "verdict:        " << (r.verdict->fair ? "fair" : "unfair") << " (epsilon " << r.verdict->epsilon
           << ", delta " << r.verdict->delta << ", margin K*eps-delta " << r.verdict->witness_margin << ")\n";
    }
    os << "wall_time_s:    " << r.wall_time_seconds << '\n';
}

inline void emit_report(std::ostream& out, const VerificationReport& r, const OutputFlags& o) {
    const std::string text = report_to_json(r).dump(2) + "\n";
    if (!o.out.empty()) write_text(o.out, text);
    if (o.json) {
        out << text;
    } else {
        print_summary(out, r);
    }
}

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

inline std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Parameter seed for a bench cell. Noise type and probability are left out
/// so every noise setting of one (qubits, repeat) cell sees the same circuit.
inline std::uint64_t bench_model_seed(std::uint64_t master, int qubits, int repeat) {
    return hash_combine(hash_combine(mix64(master), static_cast<std::uint64_t>(qubits)),
                        static_cast<std::uint64_t>(repeat));
}

inline std::uint64_t bench_solver_seed(std::uint64_t model_seed, const std::string& noise, double prob) {
    return hash_combine(hash_combine(model_seed, hash_string(noise)), std::bit_cast<std::uint64_t>(prob));
}

struct BenchCell {
    int qubits;
    std::string noise;
    double prob;
    int repeat;
    std::uint64_t model_seed = 0;
    std::string k_star;
    std::string time;
    std::string status;
};

inline std::string format_double(double v, int precision) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

inline void run_bench_cell(BenchCell& cell, const std::string& build, Backend backend, const PowerIterationConfig& base,
                           double timeout) {
    cell.model_seed = bench_model_seed(base.seed, cell.qubits, cell.repeat);
    const NoiseSpec noise = cell.noise == "none" ? NoiseSpec{} : NoiseSpec{cell.noise, cell.prob};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const DecisionModel m =
            build == "qcnn" ? build_qcnn({cell.qubits, std::nullopt, cell.model_seed, noise})
                            : build_rotation_entangling({cell.qubits, 3, 2, std::nullopt, cell.model_seed, noise});
        PowerIterationConfig cfg = base;
        cfg.seed = bench_solver_seed(cell.model_seed, cell.noise, cell.prob);
        if (timeout > 0.0) {
            cfg.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(timeout));
        }
        const LipschitzReport r = compute_lipschitz(m, backend, cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (timeout > 0.0 && secs > timeout) {
            cell.k_star = cell.time = "TO";
            cell.status = "timeout";
            return;
        }
        cell.k_star = format_double(r.k_star, 10);
        cell.time = format_double(secs, 4);
        cell.status = r.solver.converged ? "ok" : "nonconverged";
    } catch (const TimeoutError&) {
        cell.k_star = cell.time = "TO";
        cell.status = "timeout";
    } catch (const std::exception& e) {
        cell.k_star = cell.time = "NA";
        cell.status = std::string("error: ") + e.what();
    }
}

template <typename T>
std::vector<T> split_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if constexpr (std::is_same_v<T, std::string>) {
            out.push_back(item);
        } else {
            std::istringstream is(item);
            T v{};
            if (!(is >> v) || !is.eof()) throw ValidationError(std::string("bad value '") + item + "' in " + what);
            out.push_back(v);
        }
    }
    if (out.empty()) throw ValidationError(std::string("empty list for ") + what);
    return out;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

/// Runs one invocation; argv[0] is the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Verifies (epsilon, delta)-fairness of noisy quantum decision models", "qfair"};
    app.require_subcommand(1);

    ModelFlags lip_model, ver_model;
    SolverFlags lip_solver, ver_solver, bench_solver;
    OutputFlags lip_out, ver_out;

    CLI::App* lip = app.add_subcommand("lipschitz", "Compute the Lipschitz constant K* and the bias kernel");
    add_model_flags(lip, lip_model);
    add_solver_flags(lip, lip_solver, "dense");
    add_output_flags(lip, lip_out);

    double epsilon = 0.0, delta = 0.0;
    CLI::App* ver = app.add_subcommand("verify", "Decide (epsilon, delta)-fairness; exit 0 fair, 1 unfair");
    add_model_flags(ver, ver_model);
    add_solver_flags(ver, ver_solver, "dense");
    add_output_flags(ver, ver_out);
    ver->add_option("--epsilon", epsilon, "Input trace-distance bound")->required();
    ver->add_option("--delta", delta, "Output total-variation bound")->required();

    std::string report_path, sigma = "maximally-mixed", pairs_out;
    double pair_eps = 0.0;
    std::optional<double> pair_delta;
    int count = 1;
    bool with_states = false;
    CLI::App* bp = app.add_subcommand("bias-pairs", "Generate bias pairs from a report's kernel");
    bp->add_option("--report", report_path, "Report JSON with a kernel")->required();
    bp->add_option("--sigma", sigma, "maximally-mixed, mixed[:seed] or pure[:seed]");
    bp->add_option("--epsilon", pair_eps, "Mixing weight of the kernel")->required();
    bp->add_option("--delta", pair_delta, "Threshold for the bias-pair check (default: the report's)");
    bp->add_option("--count", count, "Number of pairs")->check(CLI::PositiveNumber);
    bp->add_flag("--with-states", with_states, "Include the density matrices");
    bp->add_option("--out", pairs_out, "Also write the JSON list to this path");

    std::string qubit_list = "4,8", noise_list = "none,bit-flip,phase-flip,depolarizing",
                prob_list = "0.0001,0.001,0.01", bench_build = "qcnn", bench_out;
    int repeats = 3;
    std::uint64_t master_seed = 0;
    CLI::App* bench = app.add_subcommand("bench", "Sweep K* over sizes, noise types and probabilities (CSV)");
    bench->add_option("--qubits", qubit_list, "Comma-separated qubit counts");
    bench->add_option("--noise", noise_list, "Comma-separated noise names (none allowed)");
    bench->add_option("--probs", prob_list, "Comma-separated noise probabilities");
    bench->add_option("--repeats", repeats, "Models per configuration")->check(CLI::PositiveNumber);
    bench->add_option("--seed", master_seed, "Master seed");
    bench->add_option("--build", bench_build, "Builder")->check(CLI::IsMember({"qcnn", "rotation"}));
    add_solver_flags(bench, bench_solver, "tn");
    bench_solver.timeout = 3600.0;
    bench->add_option("--out", bench_out, "Also write the CSV to this path");

    std::string csv_path, label_column, feature_list, map_path, sidecar_out, encoded_out;
    bool amplitudes = false;
    CLI::App* enc = app.add_subcommand("encode", "Normalize a CSV and encode rows as product states");
    enc->add_option("--csv", csv_path, "Input CSV with a header row")->required();
    enc->add_option("--label-column", label_column, "Binary label column");
    enc->add_option("--features", feature_list, "Comma-separated feature columns in qubit order");
    enc->add_option("--categorical-map", map_path, "Sidecar JSON with categorical codes and column maxima");
    enc->add_option("--sidecar-out", sidecar_out, "Write the sidecar for this encoding");
    enc->add_option("--out", encoded_out, "Write the encoded rows here instead of stdout");
    enc->add_flag("--amplitudes", amplitudes, "Include full state vectors (up to 16 features)");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kMalformed;
    }

    try {
        if (*lip || *ver) {
            const bool verifying = ver->parsed();
            ModelFlags& mf = verifying ? ver_model : lip_model;
            SolverFlags& sf = verifying ? ver_solver : lip_solver;
            OutputFlags& of = verifying ? ver_out : lip_out;
            PowerIterationConfig cfg;
            const DecisionModel model = resolve_model(mf, cfg);
            apply_solver_flags(sf, cfg);
            const Backend backend = parse_backend(sf.backend);
            std::optional<FairnessVerdict> verdict;
            if (verifying) check_thresholds(epsilon, delta);
            const LipschitzReport lr = compute_lipschitz(model, backend, cfg);
            if (verifying) verdict = decide(lr, epsilon, delta);
            emit_report(out, make_report(model, lr, verdict, of.full_kernel), of);
            if (!lr.solver.converged) {
                err << "warning: power iteration did not converge; residuals are in the report\n";
                return kSolverFailure;
            }
            return verdict && !verdict->fair ? kUnfair : kOk;
        }

        if (*bp) {
            const VerificationReport rep = load_report(report_path);
            if (!rep.kernel_psi || !rep.kernel_phi) {
                throw ValidationError("report has no kernel (the model was judged fair)");
            }
            if (rep.kernel_psi->truncated || rep.kernel_phi->truncated) {
                throw ValidationError("report kernel is truncated; regenerate it with --full-kernel");
            }
            const DecisionModel model = model_from_json(rep.model);
            if (model.num_qubits() > 12) throw CapacityError("bias pairs are formed densely; limit is 12 qubits");
            const SigmaSource source = SigmaSource::parse(sigma);
            const auto kernel = std::make_pair(rep.kernel_psi->to_state(), rep.kernel_phi->to_state());
            const bool has_thr = pair_delta.has_value() || rep.verdict.has_value();
            const double thr = pair_delta ? *pair_delta : rep.verdict ? rep.verdict->delta : 0.0;
            json list = json::array();
            for (int k = 0; k < count; ++k) {
                const DensityMatrix s = source.draw(model.num_qubits(), static_cast<std::uint64_t>(k));
                const BiasPair pair = bias_pair_for(model, kernel, s, pair_eps);
                json item = {{"index", k},
                             {"sigma", sigma},
                             {"sigma_draw", k},
                             {"epsilon", pair_eps},
                             {"input_distance", pair.input_distance},
                             {"output_distance", pair.output_distance},
                             {"expected_output_distance", pair_eps * rep.k_star}};
                if (has_thr) {
                    item["delta"] = thr;
                    item["is_bias_pair"] = check_pair(model, pair.rho_psi, pair.rho_phi, pair_eps, thr);
                }
                if (with_states) {
                    item["rho_psi"] = io::matrix_to_json(pair.rho_psi.matrix());
                    item["rho_phi"] = io::matrix_to_json(pair.rho_phi.matrix());
                }
                list.push_back(std::move(item));
            }
            const std::string text = list.dump(2) + "\n";
            if (!pairs_out.empty()) write_text(pairs_out, text);
            out << text;
            return kOk;
        }

        if (*bench) {
            const auto qubits = split_list<int>(qubit_list, "--qubits");
            const auto noises = split_list<std::string>(noise_list, "--noise");
            const auto probs = split_list<double>(prob_list, "--probs");
            for (const auto& nz : noises) {
                if (nz != "none") noise_weights(nz, 0.0);
            }
            for (double p : probs) noise_weights("depolarizing", p);
            PowerIterationConfig cfg;
            cfg.seed = master_seed;
            if (bench_solver.tolerance) cfg.tolerance = *bench_solver.tolerance;
            if (bench_solver.max_iters) cfg.max_iters = *bench_solver.max_iters;
            cfg.validate();
            if (bench_solver.timeout < 0.0) throw ValidationError("--timeout must be non-negative");
            const Backend backend = parse_backend(bench_solver.backend);

            std::vector<BenchCell> cells;
            for (int q : qubits) {
                for (const auto& nz : noises) {
                    const std::vector<double> ps = nz == "none" ? std::vector<double>{0.0} : probs;
                    for (double p : ps) {
                        for (int r = 0; r < repeats; ++r) cells.push_back({q, nz, p, r, 0, "", "", ""});
                    }
                }
            }
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) {
                    run_bench_cell(cells[i], bench_build, backend, cfg, bench_solver.timeout);
                }
            };
            std::vector<std::thread> pool;
            for (int t = 1; t < bench_solver.threads; ++t) pool.emplace_back(worker);
            worker();
            for (auto& t : pool) t.join();

            std::ostringstream csv;
            csv << "qubits,noise,prob,repeat,model_seed,k_star,time_s,status\n";
            for (const auto& c : cells) {
                std::ostringstream p;
                p << c.prob;
                csv << c.qubits << ',' << c.noise << ',' << p.str() << ',' << c.repeat << ',' << c.model_seed << ','
                    << c.k_star << ',' << c.time << ',' << csv_quote(c.status) << '\n';
            }
            if (!bench_out.empty()) write_text(bench_out, csv.str());
            out << csv.str();
            return kOk;
        }

        if (*enc) {
            LoadOptions opt;
            if (!label_column.empty()) opt.label_column = label_column;
            if (!feature_list.empty()) opt.feature_columns = split_list<std::string>(feature_list, "--features");
            if (!map_path.empty()) {
                const Sidecar sc = read_sidecar(map_path);
                opt.categorical_map = sc.categorical_map;
                opt.column_max = sc.column_max;
            }
            const Dataset ds = load_csv(csv_path, opt);
            if (amplitudes && ds.columns.size() > 16) {
                throw CapacityError("--amplitudes is limited to 16 features");
            }
            json rows = json::array();
            for (std::size_t r = 0; r < ds.rows.size(); ++r) {
                json qs = json::array();
                for (double t : ds.rows[r].values) {
                    const auto [a0, a1] = feature_qubit(t);
                    qs.push_back(json::array({io::complex_to_json(a0), io::complex_to_json(a1)}));
                }
                json row = {{"features", ds.rows[r].values}, {"qubit_states", qs}};
                if (!ds.labels.empty()) row["label"] = ds.labels[r];
                if (amplitudes) row["amplitudes"] = io::vector_to_json(feature_map(ds.rows[r]).amplitudes());
                rows.push_back(std::move(row));
            }
            json doc = sidecar_json(ds);
            doc["columns"] = ds.columns;
            doc["num_qubits"] = ds.columns.size();
            if (!ds.label_codes.empty()) doc["label_codes"] = ds.label_codes;
            doc["rows"] = std::move(rows);
            if (!sidecar_out.empty()) write_sidecar(ds, sidecar_out);
            const std::string text = doc.dump(2) + "\n";
            if (!encoded_out.empty()) {
                write_text(encoded_out, text);
            } else {
                out << text;
            }
            return kOk;
        }
    } catch (const TimeoutError& e) {
        err << "error: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformed;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformed;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformed;
    } catch (const CapacityError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kMalformed;
    }
    return kMalformed;
}

}  // namespace qfair::cli
