#pragma once

// Command front ends shared by the binary and the tests: CSV ingestion with
// column-role mapping, chain execution with summary emission, dataset
// simulation, and the replication study. Exit codes: 0 success, 2 malformed
// input or environment, 3 numerical-degeneracy abort. Summary files print 6
// significant digits, trace and dataset files 17.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <armadillo>
#include <json.hpp>

#include "ivbma/csv.hpp"
#include "ivbma/data.hpp"
#include "ivbma/replicate.hpp"
#include "ivbma/sampler.hpp"
#include "ivbma/simulate.hpp"
#include "ivbma/summary.hpp"

namespace ivbma {

struct RunManifest {
    std::string data_path;
    std::string response;
    std::string endogenous;
    std::vector<std::string> instruments;
    std::vector<std::string> covariates;
    bool add_intercept = false;
    bool center = false;
    bool scale = false;
    SamplerConfig sampler;
    bool write_trace = false;
    std::string out_dir;
};

// Dataset plus the column names each design matrix was built from, in the
// same order the coefficient vectors use.
struct NamedDataset {
    Dataset data;
    std::string endogenous;
    std::vector<std::string> covariates;   // includes "Intercept" when added
    std::vector<std::string> instruments;
};

namespace detail {

inline double round_sig(double x, int significant) {
    const std::string s = format_double(x, significant);
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

inline nlohmann::json json_vec(const arma::vec& v, int significant) {
    nlohmann::json arr = nlohmann::json::array();
    for (arma::uword i = 0; i < v.n_elem; ++i)
        arr.push_back(round_sig(v(i), significant));
    return arr;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::invalid_argument("write failed: " + path.string());
}

inline void check_unique_roles(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (names[i] == names[j])
                throw std::invalid_argument("column '" + names[i] +
                                            "' assigned to more than one role");
}

inline arma::vec named_column(const CsvTable& table, const std::string& name,
                              const std::string& role) {
    if (!table.has_column(name))
        throw std::invalid_argument(role + " column '" + name +
                                    "' not found in data file");
    return table.values.col(table.column_index(name));
}

inline void center_scale(arma::vec& col, const std::string& name, bool center,
                         bool scale) {
    if (center) col -= arma::mean(col);
    if (scale) {
        const double sd = col.n_elem > 1 ? arma::stddev(col) : 0.0;
        if (sd <= 0.0)
            throw std::invalid_argument("cannot scale constant column '" + name + "'");
        col /= sd;
    }
}

}  // namespace detail

inline NamedDataset load_dataset(const RunManifest& manifest) {
    if (manifest.response.empty())
        throw std::invalid_argument("a response column is required");
    if (manifest.endogenous.empty())
        throw std::invalid_argument("an endogenous column is required");
    if (manifest.instruments.empty())
        throw std::invalid_argument("at least one instrument column is required");

    std::vector<std::string> roles{manifest.response, manifest.endogenous};
    roles.insert(roles.end(), manifest.instruments.begin(), manifest.instruments.end());
    roles.insert(roles.end(), manifest.covariates.begin(), manifest.covariates.end());
    detail::check_unique_roles(roles);

    const CsvTable table = read_csv(manifest.data_path);

    NamedDataset named;
    named.endogenous = manifest.endogenous;
    named.covariates = manifest.covariates;
    named.instruments = manifest.instruments;

    Dataset& data = named.data;
    data.Y = detail::named_column(table, manifest.response, "response");
    data.X = detail::named_column(table, manifest.endogenous, "endogenous");
    const arma::uword n = data.Y.n_elem;
    data.W.set_size(n, manifest.covariates.size());
    for (std::size_t j = 0; j < manifest.covariates.size(); ++j)
        data.W.col(j) = detail::named_column(table, manifest.covariates[j], "covariate");
    data.Z.set_size(n, manifest.instruments.size());
    for (std::size_t j = 0; j < manifest.instruments.size(); ++j)
        data.Z.col(j) =
            detail::named_column(table, manifest.instruments[j], "instrument");

    if (manifest.center || manifest.scale) {
        arma::vec col = data.Y;
        detail::center_scale(col, manifest.response, manifest.center, manifest.scale);
        data.Y = col;
        col = data.X;
        detail::center_scale(col, manifest.endogenous, manifest.center, manifest.scale);
        data.X = col;
        for (std::size_t j = 0; j < manifest.covariates.size(); ++j) {
            col = data.W.col(j);
            detail::center_scale(col, manifest.covariates[j], manifest.center,
                                 manifest.scale);
            data.W.col(j) = col;
        }
        for (std::size_t j = 0; j < manifest.instruments.size(); ++j) {
            col = data.Z.col(j);
            detail::center_scale(col, manifest.instruments[j], manifest.center,
                                 manifest.scale);
            data.Z.col(j) = col;
        }
    }

    if (manifest.add_intercept) {
        for (const std::string& name : named.covariates)
            if (name == "Intercept")
                throw std::invalid_argument(
                    "covariate named 'Intercept' conflicts with --add-intercept");
        data.W.insert_cols(data.W.n_cols, arma::ones(n));
        named.covariates.push_back("Intercept");
    }

    data.validate();
    return named;
}

namespace detail {

inline std::string summary_csv(const NamedDataset& named,
                               const PosteriorSummary& summary) {
    std::ostringstream os;
    os << "stage,name,prob,mean,sd,q025,q50,q975\n";
    auto row = [&os](const char* stage, const std::string& name,
                     const CoefficientSummary& c) {
        os << stage << ',' << name << ',' << format_double(c.inclusion_prob, 6) << ','
           << format_double(c.mean, 6) << ',' << format_double(c.sd, 6) << ','
           << format_double(c.q025, 6) << ',' << format_double(c.q50, 6) << ','
           << format_double(c.q975, 6) << '\n';
    };
    std::size_t k = 0;
    for (const std::string& name : named.instruments)
        row("first", name, summary.first_stage[k++]);
    for (const std::string& name : named.covariates)
        row("first", name, summary.first_stage[k++]);
    k = 0;
    row("second", named.endogenous, summary.second_stage[k++]);
    for (const std::string& name : named.covariates)
        row("second", name, summary.second_stage[k++]);
    return os.str();
}

inline std::string diagnostics_json(const SamplerConfig& config,
                                    const ChainTrace& trace,
                                    const PosteriorSummary& summary) {
    const SizeTrajectory trajectory =
        std::move(model_size_trajectory({trace}).front());
    nlohmann::json j;
    j["mode"] = config.mode == SamplerMode::IVBMA ? "ivbma" : "iv";
    j["iterations"] = config.iterations;
    j["burn_in"] = config.burn_in;
    j["thin"] = config.thin;
    j["seed"] = config.seed;
    j["kept"] = trace.kept();
    j["step1_proposals"] = trace.counters.step1_proposals;
    j["step1_accepts"] = trace.counters.step1_accepts;
    j["step1_accept_rate"] = round_sig(summary.step1_accept_rate, 6);
    j["step3_proposals"] = trace.counters.step3_proposals;
    j["step3_accepts"] = trace.counters.step3_accepts;
    j["step3_accept_rate"] = round_sig(summary.step3_accept_rate, 6);
    j["psi_failures"] = trace.counters.psi_failures;
    j["avg_second_size"] = round_sig(summary.avg_second_size, 6);
    j["avg_first_size"] = round_sig(summary.avg_first_size, 6);
    j["model_size_trajectory"] = {
        {"second_stage", json_vec(trajectory.second_stage, 6)},
        {"first_stage", json_vec(trajectory.first_stage, 6)}};
    return j.dump(2) + "\n";
}

inline std::string trace_csv(const NamedDataset& named, const ChainTrace& trace) {
    std::ostringstream os;
    os << "iter";
    os << ",rho." << named.endogenous;
    for (const std::string& name : named.covariates) os << ",rho." << name;
    for (const std::string& name : named.instruments) os << ",lambda." << name;
    for (const std::string& name : named.covariates) os << ",lambda." << name;
    os << ",sigma11,sigma21,sigma22";
    os << ",L." << named.endogenous;
    for (const std::string& name : named.covariates) os << ",L." << name;
    for (const std::string& name : named.instruments) os << ",M." << name;
    for (const std::string& name : named.covariates) os << ",M." << name;
    os << '\n';
    const std::uint64_t burn = trace.config.burn_in;
    const std::uint64_t thin = trace.config.thin;
    for (arma::uword r = 0; r < trace.kept(); ++r) {
        os << burn + (std::uint64_t(r) + 1) * thin;
        for (arma::uword j = 0; j < trace.rho.n_cols; ++j)
            os << ',' << format_double(trace.rho(r, j), 17);
        for (arma::uword j = 0; j < trace.lambda.n_cols; ++j)
            os << ',' << format_double(trace.lambda(r, j), 17);
        for (arma::uword j = 0; j < 3; ++j)
            os << ',' << format_double(trace.sigma(r, j), 17);
        for (arma::uword j = 0; j < trace.L.n_cols; ++j)
            os << ',' << int(trace.L(r, j));
        for (arma::uword j = 0; j < trace.M.n_cols; ++j)
            os << ',' << int(trace.M(r, j));
        os << '\n';
    }
    return os.str();
}

}  // namespace detail

inline int cmd_run(const RunManifest& manifest, std::ostream& err = std::cerr) {
    try {
        manifest.sampler.validate();
        const NamedDataset named = load_dataset(manifest);
        const std::filesystem::path out_dir(manifest.out_dir);
        std::filesystem::create_directories(out_dir);

        const ChainTrace trace = run_chain(named.data, manifest.sampler);
        const PosteriorSummary summary = summarize(trace);

        detail::write_text_file(out_dir / "summary.csv",
                                detail::summary_csv(named, summary));
        detail::write_text_file(
            out_dir / "diagnostics.json",
            detail::diagnostics_json(manifest.sampler, trace, summary));
        if (manifest.write_trace)
            detail::write_text_file(out_dir / "trace.csv",
                                    detail::trace_csv(named, trace));
        return 0;
    } catch (const DegeneracyError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const CholeskyError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

namespace detail {

inline std::string dataset_csv(const Dataset& data) {
    std::ostringstream os;
    os << "Y,X";
    for (arma::uword j = 1; j <= data.p(); ++j) os << ",W" << j;
    for (arma::uword j = 1; j <= data.q(); ++j) os << ",Z" << j;
    os << '\n';
    for (arma::uword i = 0; i < data.n(); ++i) {
        os << format_double(data.Y(i), 17) << ',' << format_double(data.X(i), 17);
        for (arma::uword j = 0; j < data.p(); ++j)
            os << ',' << format_double(data.W(i, j), 17);
        for (arma::uword j = 0; j < data.q(); ++j)
            os << ',' << format_double(data.Z(i, j), 17);
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json truth_json(const SimSpec& spec, const TruthRecord& truth) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["p"] = spec.p;
    j["q"] = spec.q;
    j["seed"] = spec.seed;
    j["rho"] = json_vec(truth.rho, 17);
    j["lambda"] = json_vec(truth.lambda, 17);
    j["sigma"] = {{round_sig(truth.Sigma(0, 0), 17), round_sig(truth.Sigma(0, 1), 17)},
                  {round_sig(truth.Sigma(1, 0), 17), round_sig(truth.Sigma(1, 1), 17)}};
    return j;
}

}  // namespace detail

inline int cmd_simulate(const SimSpec& spec, const std::string& out_dir,
                        std::ostream& err = std::cerr) {
    try {
        spec.validate();
        const std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);
        const auto [data, truth] = generate(spec);
        detail::write_text_file(out / "dataset.csv", detail::dataset_csv(data));
        detail::write_text_file(out / "truth.json",
                                detail::truth_json(spec, truth).dump(2) + "\n");
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

namespace detail {

inline nlohmann::json aggregate_json(const MethodAggregate& agg) {
    nlohmann::json j;
    j["median_mean_second"] = json_vec(agg.median_mean_second, 6);
    j["median_mean_first"] = json_vec(agg.median_mean_first, 6);
    j["median_incl_second"] = json_vec(agg.median_incl_second, 6);
    j["median_incl_first"] = json_vec(agg.median_incl_first, 6);
    j["incl_q25_second"] = json_vec(agg.incl_q25_second, 6);
    j["incl_q75_second"] = json_vec(agg.incl_q75_second, 6);
    j["incl_q25_first"] = json_vec(agg.incl_q25_first, 6);
    j["incl_q75_first"] = json_vec(agg.incl_q75_first, 6);
    j["mse"] = {{"second_stage", round_sig(agg.mse.second_stage, 6)},
                {"first_stage", round_sig(agg.mse.first_stage, 6)},
                {"total", round_sig(agg.mse.total, 6)}};
    return j;
}

inline nlohmann::json replicate_method_json(const PosteriorSummary& s) {
    auto means = [](const std::vector<CoefficientSummary>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const CoefficientSummary& c : v) arr.push_back(round_sig(c.mean, 6));
        return arr;
    };
    auto incl = [](const std::vector<CoefficientSummary>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const CoefficientSummary& c : v)
            arr.push_back(round_sig(c.inclusion_prob, 6));
        return arr;
    };
    nlohmann::json j;
    j["mean_second"] = means(s.second_stage);
    j["mean_first"] = means(s.first_stage);
    j["incl_second"] = incl(s.second_stage);
    j["incl_first"] = incl(s.first_stage);
    return j;
}

inline std::string study_report_json(const StudyConfig& config,
                                     const StudyReport& report) {
    const TruthRecord truth{config.spec.rho_true, config.spec.lambda_true,
                            config.spec.Sigma_true};
    nlohmann::json j;
    j["design"] = {{"n", config.spec.n},
                   {"p", config.spec.p},
                   {"q", config.spec.q},
                   {"reps", report.reps},
                   {"iterations", report.iterations},
                   {"burn_in", report.burn_in},
                   {"thin", config.thin},
                   {"seed", config.seed},
                   {"truth", truth_json(config.spec, truth)}};
    j["baseline_included"] = report.baseline_included;
    j["ivbma"] = aggregate_json(report.ivbma);
    if (report.baseline_included) j["iv"] = aggregate_json(report.iv);
    nlohmann::json reps = nlohmann::json::array();
    for (const ReplicateResult& r : report.replicates) {
        nlohmann::json entry;
        entry["ivbma"] = replicate_method_json(r.ivbma);
        if (report.baseline_included) entry["iv"] = replicate_method_json(r.iv);
        reps.push_back(std::move(entry));
    }
    j["replicates"] = std::move(reps);
    return j.dump(2) + "\n";
}

}  // namespace detail

inline int cmd_replicate(const StudyConfig& config, const std::string& out_dir,
                         std::ostream& err = std::cerr) {
    try {
        config.validate();
        const std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);
        const StudyReport report = run_study(config);
        detail::write_text_file(out / "study_report.json",
                                detail::study_report_json(config, report));
        return 0;
    } catch (const DegeneracyError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const CholeskyError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace ivbma
