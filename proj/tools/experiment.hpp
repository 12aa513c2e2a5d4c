#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "pslab/disorder.hpp"
#include "pslab/models.hpp"
#include "pslab/polymer.hpp"
#include "pslab/stability.hpp"
#include "pslab/symmetry.hpp"

namespace pslab::cli {

enum ExitCode { exit_ok = 0, exit_assertion = 1, exit_config = 2, exit_budget = 3, exit_internal = 4 };

struct DisorderBlock {
    bool kind_set = false;
    DistKind kind = DistKind::gaussian;
    std::vector<double> epsilons{0.1};
    double support_bound = 1.0;
    BoundedLaw law = BoundedLaw::two_point;
};

struct GeometryBlock {
    int d = 2;
    int L = 6;
    int n_max = 25;
    int ell_min = 0, ell_max = 4;
};

struct SamplerBlock {
    std::vector<double> temperatures{1.0};
    std::size_t sweeps = 10'000, burn_in = 1'000, draws = 20, snapshot_every = 10;
    std::vector<int> labels;  // empty: every ground state
};

struct StabilityBlock {
    StabilityEvent event = StabilityEvent::all;
    std::size_t trials = 1000;
};

struct TailBlock {
    Statistic statistic = Statistic::sum;
    TailBound bound = TailBound::mcdiarmid;
    std::size_t n = 100;
    std::vector<double> lambdas{1.0, 2.0, 3.0};
    std::size_t trials = 10'000;
};

struct SymmetryBlock {
    TransformKind kind = TransformKind::flip;
    int shift = 1, axis = 0, sign = 1, k1 = 0;
    std::size_t trials = 200;
};

struct AuditBlock {
    std::size_t instances = 200;
    int min_size = 4, max_size = 120;
    int covering_n = 0;  // 0 skips the covering table
};

struct CountBlock {
    bool anchored = false;
    int label = -1;
};

struct ExperimentConfig {
    std::string subcommand;
    bool has_model = false;
    ModelParams model;
    DisorderBlock disorder;
    GeometryBlock geometry;
    SamplerBlock sampler;
    StabilityBlock stability;
    TailBlock tail;
    SymmetryBlock symmetry;
    AuditBlock audit;
    CountBlock count;
    std::uint64_t seed = 0;
    std::string output = "results";
    int threads = 1;
    std::size_t budget = kStateBudget;

    // Every field that can change results; output, threads and budget are excluded.
    nlohmann::ordered_json echo() const;
};

const std::vector<std::string>& subcommands();

// Throws ConfigError naming the offending key path.
ExperimentConfig parse_config(const YAML::Node& root);
ExperimentConfig load_config(const std::string& path);

// First 16 hex digits of SHA-256 over echo() without the seed.
std::string config_hash(const ExperimentConfig& cfg);
// FNV-1a of the label mixed into the root seed.
std::uint64_t labeled_seed(std::uint64_t root, std::string_view label);

ModelPtr build_model(const ExperimentConfig& cfg);
DistributionSpec law_at(const ExperimentConfig& cfg, const Model* m, double epsilon);

struct RunResult {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, bool>> assertions;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    nlohmann::ordered_json overlays = nlohmann::ordered_json::object();
};

RunResult run_subcommand(const ExperimentConfig& cfg);

std::string csv_text(const RunResult& r);
// Writes <out>/<subcommand>.csv and .json through a temporary file and rename.
void write_outputs(const ExperimentConfig& cfg, const RunResult& r, double wall_seconds);

int main(int argc, char** argv);
// Same as main, for in-process tests.
int run(const std::vector<std::string>& args);

}  // namespace pslab::cli
