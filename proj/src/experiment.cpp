#include "evodyn/experiment.hpp"

#include "evodyn/diagnostics.hpp"
#include "evodyn/io.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace evodyn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* child(const std::string& key) {
    used_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ValidationError(key_path(key) + ": expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ValidationError(key_path(key) + ": must be finite");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) {
      used_.insert(key);
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  Index count(const std::string& key, Index fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ValidationError(key_path(key) + ": expected an integer");
    return v->get<Index>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError(key_path(key) + ": expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!used_.count(it.key())) throw ValidationError(key_path(it.key()) + ": unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(path + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ValidationError(key + ": " + message);
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

KernelKind kernel_kind(const std::string& name) {
  if (name == "war_of_attrition") return KernelKind::war_of_attrition;
  if (name == "continuous_war") return KernelKind::continuous_war;
  if (name == "cosine") return KernelKind::cosine;
  if (name == "table") return KernelKind::table;
  throw ValidationError("game.type: unknown game '" + name +
                        "' (expected war_of_attrition, continuous_war, cosine or table)");
}

template <typename F>
auto with_context(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(key + ": " + e.what());
  }
}

void parse_game(Section& root, ExperimentConfig& c, const fs::path& base) {
  const json* node = root.child("game");
  require(node != nullptr, "game", "missing section");
  Section s(*node, "game");
  c.game.kind = kernel_kind(s.text("type", ""));
  c.game.V = s.number("V", 1.0);
  c.game.T = s.optional_number("T");
  if (c.game.kind == KernelKind::war_of_attrition || c.game.kind == KernelKind::continuous_war)
    require(c.game.V > 0.0, "game.V", "must be > 0");
  if (const json* theta = s.child("theta")) {
    Section t(*theta, "game.theta");
    c.game.theta_type = t.text("type", "logistic");
    c.game.alpha = t.number("alpha", 100.0);
    c.game.x0 = t.number("x0", 0.1);
    t.finish();
    require(c.game.theta_type == "logistic" || c.game.theta_type == "piecewise_linear",
            "game.theta.type", "expected logistic or piecewise_linear");
    require(c.game.alpha > 0.0, "game.theta.alpha", "must be > 0");
    require(c.game.x0 > 0.0, "game.theta.x0", "must be > 0");
  }
  if (const json* file = s.child("file")) {
    require(file->is_string(), "game.file", "expected a path");
    c.game.table_file = resolve_path(base, file->get<std::string>());
  }
  if (const json* m = s.child("matrix")) {
    require(m->is_array() && !m->empty(), "game.matrix", "expected an array of rows");
    const Index n = static_cast<Index>(m->size());
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i) {
      const auto row = number_list((*m)[static_cast<std::size_t>(i)], "game.matrix");
      require(static_cast<Index>(row.size()) == n, "game.matrix", "must be square");
      for (Index j = 0; j < n; ++j) a(i, j) = row[static_cast<std::size_t>(j)];
    }
    c.game.table = std::move(a);
  }
  if (c.game.kind == KernelKind::table)
    require(c.game.table.has_value() != !c.game.table_file.empty(), "game",
            "table games need exactly one of 'file' or 'matrix'");
  s.finish();
}

void parse_protocol(Section& root, ExperimentConfig& c) {
  const json* node = root.child("protocol");
  if (!node) return;
  Section s(*node, "protocol");
  c.protocol.type = s.text("type", "bnn");
  require(c.protocol.type == "bnn" || c.protocol.type == "smith" || c.protocol.type == "power",
          "protocol.type", "expected bnn, smith or power");
  c.protocol.k = s.number("k", 1.0);
  require(c.protocol.k > 0.0, "protocol.k", "must be > 0");
  if (const json* rate = s.child("rate")) {
    if (rate->is_string()) {
      require(rate->get<std::string>() == "per_strategy", "protocol.rate",
              "expected a number or \"per_strategy\"");
      c.protocol.per_strategy = true;
    } else {
      require(rate->is_number(), "protocol.rate", "expected a number or \"per_strategy\"");
      c.protocol.rate = rate->get<double>();
      require(c.protocol.rate > 0.0 && std::isfinite(c.protocol.rate), "protocol.rate", "must be > 0");
    }
  }
  s.finish();
}

void parse_grid(Section& root, ExperimentConfig& c) {
  bool upper_given = false;
  if (const json* node = root.child("grid")) {
    Section s(*node, "grid");
    c.grid.n = s.count("n", c.grid.n);
    c.grid.lower = s.number("lower", c.grid.lower);
    upper_given = s.has("upper");
    c.grid.upper = s.number("upper", c.grid.upper);
    s.finish();
  }
  if (c.game.T) {
    if (!upper_given)
      c.grid.upper = *c.game.T;
    else
      require(*c.game.T == c.grid.upper, "game.T", "must equal grid.upper when both are given");
  }
  require(c.grid.n >= 2, "grid.n", "must be >= 2");
  require(c.grid.lower < c.grid.upper, "grid.lower", "must be < grid.upper");
}

void parse_reference(Section& root, ExperimentConfig& c) {
  const json* node = root.child("reference");
  if (!node) return;
  Section s(*node, "reference");
  c.reference.type = s.text("type", "uniform");
  require(c.reference.type == "uniform" || c.reference.type == "weights", "reference.type",
          "expected uniform or weights");
  if (const json* w = s.child("weights")) c.reference.weights = number_list(*w, "reference.weights");
  if (c.reference.type == "weights")
    require(static_cast<Index>(c.reference.weights.size()) == c.grid.n, "reference.weights",
            "needs one weight per grid point");
  s.finish();
}

void parse_initial(Section& root, ExperimentConfig& c, const fs::path& base) {
  const json* node = root.child("initial");
  if (!node) return;
  Section s(*node, "initial");
  c.initial.type = s.text("type", "uniform");
  const std::set<std::string> known{"uniform", "gaussian", "dirac", "file", "random", "war_nash"};
  require(known.count(c.initial.type) > 0, "initial.type",
          "expected uniform, gaussian, dirac, file, random or war_nash");
  c.initial.mean = s.number("mean", c.initial.mean);
  c.initial.variance = s.number("variance", c.initial.variance);
  c.initial.s = s.number("s", c.initial.s);
  const std::string path = s.text("path", "");
  if (!path.empty()) c.initial.path = resolve_path(base, path);
  if (c.initial.type == "gaussian") require(c.initial.variance > 0.0, "initial.variance", "must be > 0");
  if (c.initial.type == "file") require(!path.empty(), "initial.path", "required for file initial states");
  s.finish();
}

void parse_feedback(Section& root, ExperimentConfig& c, const fs::path& base) {
  const json* node = root.child("feedback");
  if (!node) return;
  Section s(*node, "feedback");
  c.feedback.type = s.text("type", "static");
  require(c.feedback.type == "static" || c.feedback.type == "smoothing", "feedback.type",
          "expected static or smoothing");
  c.feedback.lambda_s = s.number("lambda_s", 1.0);
  require(c.feedback.lambda_s > 0.0, "feedback.lambda_s", "must be > 0");
  if (const json* rho0 = s.child("rho0")) {
    if (rho0->is_string()) {
      c.feedback.rho0 = rho0->get<std::string>();
      require(c.feedback.rho0 == "from_game" || c.feedback.rho0 == "quadratic", "feedback.rho0",
              "expected \"from_game\", \"quadratic\" or {\"file\": path}");
    } else {
      require(rho0->is_object(), "feedback.rho0", "expected \"from_game\", \"quadratic\" or {\"file\": path}");
      Section r(*rho0, "feedback.rho0");
      const std::string path = r.text("file", "");
      r.finish();
      require(!path.empty(), "feedback.rho0.file", "required");
      c.feedback.rho0 = "file";
      c.feedback.rho0_path = resolve_path(base, path);
    }
  }
  s.finish();
}

void parse_time(Section& root, ExperimentConfig& c) {
  const json* node = root.child("time");
  if (!node) return;
  Section s(*node, "time");
  c.time.t_end = s.number("t_end", c.time.t_end);
  c.time.dt = s.number("dt", c.time.dt);
  c.time.sample_every = s.count("sample_every", c.time.sample_every);
  const std::string method = s.text("method", "rk4");
  s.finish();
  require(c.time.t_end > 0.0, "time.t_end", "must be > 0");
  require(c.time.dt > 0.0, "time.dt", "must be > 0");
  require(c.time.sample_every >= 1, "time.sample_every", "must be >= 1");
  c.time.method = with_context("time.method", [&] { return integrator_from_string(method); });
}

void parse_verify(Section& root, ExperimentConfig& c) {
  const json* node = root.child("verify");
  if (!node) return;
  Section s(*node, "verify");
  if (const json* props = s.child("properties")) {
    require(props->is_array(), "verify.properties", "expected an array of names");
    const std::set<std::string> known{"monotonicity", "sign_preservation", "nash", "rest_point",
                                      "storage_trace"};
    c.verify.properties.clear();
    for (const auto& p : *props) {
      require(p.is_string() && known.count(p.get<std::string>()), "verify.properties",
              "unknown property (expected monotonicity, sign_preservation, nash, rest_point, storage_trace)");
      c.verify.properties.push_back(p.get<std::string>());
    }
  }
  c.verify.trials = s.count("trials", c.verify.trials);
  c.verify.nash_tol = s.number("nash_tol", c.verify.nash_tol);
  c.verify.rest_tol = s.number("rest_tol", c.verify.rest_tol);
  c.verify.storage_slack = s.number("storage_slack", c.verify.storage_slack);
  s.finish();
  require(c.verify.trials >= 1, "verify.trials", "must be >= 1");
  require(c.verify.nash_tol >= 0.0, "verify.nash_tol", "must be >= 0");
  require(c.verify.rest_tol >= 0.0, "verify.rest_tol", "must be >= 0");
}

void parse_refine(Section& root, ExperimentConfig& c) {
  const json* node = root.child("refine");
  if (!node) return;
  Section s(*node, "refine");
  if (const json* ns = s.child("ns")) {
    require(ns->is_array(), "refine.ns", "expected an array of grid sizes");
    for (const auto& n : *ns) {
      require(n.is_number_integer() && n.get<Index>() >= 2, "refine.ns", "grid sizes must be integers >= 2");
      c.refine.ns.push_back(n.get<Index>());
    }
  }
  s.finish();
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  ExperimentConfig c;
  Section root(doc, "");
  parse_game(root, c, base_dir);
  parse_protocol(root, c);
  parse_grid(root, c);
  parse_reference(root, c);
  parse_initial(root, c, base_dir);
  parse_feedback(root, c, base_dir);
  parse_time(root, c);
  if (const json* seed = root.child("seed")) {
    require(seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0),
            "seed", "expected a non-negative integer");
    c.seed = seed->get<std::uint64_t>();
  }
  if (const json* out = root.child("output")) {
    Section s(*out, "output");
    c.output_dir = resolve_path(base_dir, s.text("dir", "out"));
    s.finish();
  }
  parse_verify(root, c);
  parse_refine(root, c);
  root.finish();
  // Parameters checked here so errors name the key rather than the builder.
  if (c.game.kind == KernelKind::war_of_attrition)
    require(c.grid.upper > c.game.V / 2.0, "game.T", "war of attrition needs T > V/2");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json ExperimentConfig::resolved() const {
  json game_json{{"type", to_string(game.kind)}, {"V", game.V}};
  if (game.kind == KernelKind::continuous_war) {
    game_json["theta"] = game.theta_type == "logistic"
                             ? json{{"type", "logistic"}, {"alpha", game.alpha}}
                             : json{{"type", "piecewise_linear"}, {"x0", game.x0}};
  }
  if (game.kind == KernelKind::table) {
    if (game.table) {
      json rows = json::array();
      for (Index i = 0; i < game.table->rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < game.table->cols(); ++j) row.push_back((*game.table)(i, j));
        rows.push_back(row);
      }
      game_json["matrix"] = rows;
    } else {
      game_json["file"] = game.table_file.string();
    }
  }
  json protocol_json{{"type", protocol.type}};
  if (protocol.type == "power") protocol_json["k"] = protocol.k;
  protocol_json["rate"] = protocol.per_strategy ? json("per_strategy") : json(protocol.rate);
  json reference_json{{"type", reference.type}};
  if (reference.type == "weights") reference_json["weights"] = reference.weights;
  json initial_json{{"type", initial.type}};
  if (initial.type == "gaussian") {
    initial_json["mean"] = initial.mean;
    initial_json["variance"] = initial.variance;
  } else if (initial.type == "dirac") {
    initial_json["s"] = initial.s;
  } else if (initial.type == "file") {
    initial_json["path"] = initial.path.string();
  }
  json feedback_json{{"type", feedback.type}};
  if (feedback.type == "smoothing") {
    feedback_json["lambda_s"] = feedback.lambda_s;
    feedback_json["rho0"] = feedback.rho0 == "file" ? json{{"file", feedback.rho0_path.string()}}
                                                     : json(feedback.rho0);
  }
  return json{{"game", game_json},
              {"protocol", protocol_json},
              {"grid", {{"n", grid.n}, {"lower", grid.lower}, {"upper", grid.upper}}},
              {"reference", reference_json},
              {"initial", initial_json},
              {"feedback", feedback_json},
              {"time",
               {{"t_end", time.t_end},
                {"dt", time.dt},
                {"sample_every", time.sample_every},
                {"method", to_string(time.method)}}},
              {"seed", seed},
              {"output", {{"dir", output_dir.string()}}},
              {"verify",
               {{"properties", verify.properties},
                {"trials", verify.trials},
                {"nash_tol", verify.nash_tol},
                {"rest_tol", verify.rest_tol},
                {"storage_slack", verify.storage_slack}}},
              {"refine", {{"ns", refine.ns}}}};
}

StrategyGrid build_grid(const ExperimentConfig& config) {
  return with_context("grid", [&] { return make_uniform_grid(config.grid.n, config.grid.lower, config.grid.upper); });
}

PayoffKernel build_kernel(const ExperimentConfig& config, const StrategyGrid& grid) {
  const GameSpec& g = config.game;
  return with_context("game", [&] {
    switch (g.kind) {
      case KernelKind::war_of_attrition: return kernel_war_of_attrition(g.V, grid);
      case KernelKind::continuous_war: {
        const ThetaSpec theta = g.theta_type == "logistic" ? ThetaSpec::logistic(g.alpha)
                                                           : ThetaSpec::piecewise_linear(g.x0);
        return kernel_continuous_war(g.V, theta, grid);
      }
      case KernelKind::cosine: return kernel_cosine(grid);
      case KernelKind::table:
        if (g.table) return kernel_table(grid, *g.table);
        return io::load_table_kernel_csv(g.table_file, grid);
    }
    throw ValidationError("unsupported game");
  });
}

RevisionProtocol build_protocol(const ExperimentConfig& config, const StrategyGrid& grid) {
  const ProtocolSpec& p = config.protocol;
  const double rate = p.per_strategy ? static_cast<double>(grid.size()) : p.rate;
  if (p.type == "bnn") return RevisionProtocol::bnn(rate);
  if (p.type == "smith") return RevisionProtocol::smith(rate);
  return RevisionProtocol::power(p.k, rate);
}

ReferenceMeasure build_reference(const ExperimentConfig& config, const StrategyGrid& grid) {
  if (config.reference.type == "uniform") return make_uniform_reference(grid);
  const auto& w = config.reference.weights;
  return with_context("reference.weights", [&] {
    return make_reference(grid, Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size())));
  });
}

DiscreteMeasure build_initial(const ExperimentConfig& config, const StrategyGrid& grid) {
  const InitialSpec& i = config.initial;
  return with_context("initial", [&]() -> DiscreteMeasure {
    if (i.type == "uniform") return uniform_measure(grid);
    if (i.type == "gaussian") return gaussian_on_grid(grid, i.mean, i.variance);
    if (i.type == "random") return random_measure(grid, config.seed);
    if (i.type == "war_nash") {
      if (config.game.kind != KernelKind::war_of_attrition && config.game.kind != KernelKind::continuous_war)
        throw ValidationError("war_nash needs a war-of-attrition game");
      return war_nash_equilibrium(config.game.V, grid);
    }
    if (i.type == "dirac") {
      const auto idx = grid.find(i.s, 1e-9);
      if (!idx) throw ValidationError("s = " + io::format_double(i.s) + " is not a grid point");
      return dirac(grid, *idx);
    }
    Vector w = io::read_vector_csv(i.path);
    if (w.size() != grid.size())
      throw ValidationError(i.path.string() + " has " + std::to_string(w.size()) + " weights, grid has " +
                            std::to_string(grid.size()));
    return DiscreteMeasure::probability(grid, std::move(w));
  });
}

PayoffVector build_rho0(const ExperimentConfig& config, const PayoffKernel& kernel,
                        const DiscreteMeasure& x0) {
  const StrategyGrid& grid = kernel.grid();
  if (config.feedback.rho0 == "from_game") return evaluate_payoffs(kernel, x0);
  if (config.feedback.rho0 == "quadratic")
    return PayoffVector(grid, (-grid.points().array().square()).matrix());
  return with_context("feedback.rho0.file", [&] {
    Vector v = io::read_vector_csv(config.feedback.rho0_path);
    if (v.size() != grid.size()) throw ValidationError("needs one payoff per grid point");
    return PayoffVector(grid, std::move(v));
  });
}

Trajectory run_trajectory(const ExperimentConfig& config) {
  const StrategyGrid grid = build_grid(config);
  const PayoffKernel kernel = build_kernel(config, grid);
  const RevisionProtocol protocol = build_protocol(config, grid);
  const ReferenceMeasure lambda = build_reference(config, grid);
  const DiscreteMeasure x0 = build_initial(config, grid);
  if (config.feedback.type == "static") return simulate_edm(kernel, protocol, lambda, x0, config.time);
  const PayoffVector rho0 = build_rho0(config, kernel, x0);
  return simulate_dpedm(kernel, protocol, lambda, SmoothingConfig{config.feedback.lambda_s}, x0, rho0,
                        config.time);
}

namespace {

json stats_json(const RunStats& s) {
  return json{{"max_tangency_residual", s.max_tangency_residual},
              {"min_raw_weight", s.min_raw_weight},
              {"max_mass_error", s.max_mass_error},
              {"renormalizations", s.renormalizations},
              {"clamps", s.clamps},
              {"field_evaluations", s.field_evaluations},
              {"steps", s.steps}};
}

json metadata_json(const ExperimentConfig& config) {
  return json{{"artifact", "evodyn"},
              {"version", kArtifactVersion},
              {"config", config.resolved()},
              {"conventions",
               {{"war_nash_binning", "right-endpoint: grid point s_i receives mass of (s_{i-1}, s_i]; s_0 receives [lower, s_0]; the atom at T sits on the last point"},
                {"reference_measure", config.reference.type},
                {"trajectory_columns", "t followed by CDF values at each grid point"}}}};
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

}  // namespace

SimulateResult run_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  SimulateResult result;
  result.trajectory = run_trajectory(config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const Trajectory& traj = result.trajectory;
  fs::create_directories(out_dir);
  {
    std::ostringstream os;
    io::write_trajectory_csv(os, traj);
    io::write_text(out_dir / "trajectory_cdf.csv", os.str());
  }
  {
    std::ostringstream os;
    io::write_diagnostics_csv(os, traj);
    io::write_text(out_dir / "diagnostics.csv", os.str());
  }
  double max_mass_error = 0.0;
  for (const auto& d : traj.diagnostics) max_mass_error = std::max(max_mass_error, d.mass_error);
  const SampleDiagnostics& last = traj.diagnostics.back();
  result.summary = json{{"final_time", traj.times.back()},
                        {"final_nash_gap", last.nash_gap},
                        {"initial_nash_gap", traj.diagnostics.front().nash_gap},
                        {"final_storage", last.storage},
                        {"max_mass_error", max_mass_error},
                        {"samples", traj.size()},
                        {"run_stats", stats_json(traj.stats)},
                        {"wall_time_s", wall}};
  if (!std::isfinite(last.storage)) result.summary["final_storage"] = nullptr;
  write_json(out_dir / "summary.json", result.summary);
  write_json(out_dir / "metadata.json", metadata_json(config));
  return result;
}

namespace {

json measure_json(const DiscreteMeasure& mu) {
  return json(std::vector<double>(mu.weights().data(), mu.weights().data() + mu.size()));
}

PropertyVerdict verify_monotonicity(const ExperimentConfig& config, const PayoffKernel& kernel) {
  const MonotonicityReport r = monotonicity_test(kernel, config.verify.trials, config.seed);
  PropertyVerdict v{"monotonicity", r.monotone ? "PASS" : "FAIL", "", {}};
  v.detail = "max <F(mu)-F(nu), mu-nu> = " + io::format_double(r.max_value) + " over " +
             std::to_string(r.trials) + " pairs";
  v.data = json{{"max_value", r.max_value}, {"trials", r.trials}, {"tolerance", r.tolerance}};
  if (r.violating_pair) {
    v.data["witness"] = {{"mu", measure_json(r.violating_pair->first)},
                         {"nu", measure_json(r.violating_pair->second)}};
    v.detail += " (witness pair in verify.json)";
  }
  return v;
}

PropertyVerdict verify_sign(const ExperimentConfig& config, const RevisionProtocol& protocol) {
  if (!protocol.is_pairwise())
    return {"sign_preservation", "SKIP", "bnn is not a pairwise protocol", json::object()};
  const bool ok = sign_preservation_check(protocol, config.verify.trials, config.seed);
  return {"sign_preservation", ok ? "PASS" : "FAIL",
          std::to_string(config.verify.trials) + " sampled payoff pairs", json{{"holds", ok}}};
}

PropertyVerdict verify_nash(const ExperimentConfig& config, const PayoffKernel& kernel,
                            const DiscreteMeasure& x0) {
  const PayoffVector f = evaluate_payoffs(kernel, x0);
  const double gap = nash_gap(x0, f);
  const NashCheck check = nash_check(x0, f, config.verify.nash_tol);
  PropertyVerdict v{"nash", check.is_nash ? "PASS" : "FAIL", "", {}};
  v.detail = "initial state '" + config.initial.type + "': nash gap " + io::format_double(gap);
  v.data = json{{"nash_gap", gap}, {"tolerance", config.verify.nash_tol}};
  if (check.worst) {
    const StrategyGrid& g = kernel.grid();
    v.data["worst_violation"] = {{"s", g[check.worst->s]},
                                 {"s_prime", g[check.worst->s_prime]},
                                 {"amount", check.worst->amount}};
    v.detail += ", worst support violation " + io::format_double(check.worst->amount);
  }
  return v;
}

PropertyVerdict verify_rest(const ExperimentConfig& config, const PayoffKernel& kernel,
                            const RevisionProtocol& protocol, const ReferenceMeasure& lambda,
                            const DiscreteMeasure& x0) {
  const RestPointCheck r = rest_point_check(x0, kernel, protocol, lambda, config.verify.rest_tol);
  PropertyVerdict v{"rest_point", r.is_rest_point ? "PASS" : "FAIL", "", {}};
  v.detail = "||v||_TV = " + io::format_double(r.field_tv) + ", nash check " + (r.nash ? "agrees" : "fails");
  v.data = json{{"field_tv", r.field_tv}, {"nash", r.nash}, {"nash_gap", r.gap}, {"tolerance", config.verify.rest_tol}};
  return v;
}

PropertyVerdict verify_storage(const ExperimentConfig& config, const PayoffKernel& kernel,
                               const RevisionProtocol& protocol, const ReferenceMeasure& lambda,
                               const DiscreteMeasure& x0) {
  if (protocol.is_pairwise() && !protocol.has_tau())
    return {"storage_trace", "SKIP", "protocol has no storage function", json::object()};
  const Trajectory traj = simulate_edm(kernel, protocol, lambda, x0, config.time);
  try {
    const StorageTraceReport r = storage_trace_check(traj, protocol, kernel, lambda);
    const bool ok = r.max_increase <= config.verify.storage_slack;
    return {"storage_trace", ok ? "PASS" : "FAIL",
            "max storage increase " + io::format_double(r.max_increase) + ", energy balance residual " +
                io::format_double(r.energy_balance_residual),
            json{{"max_increase", r.max_increase},
                 {"energy_balance_residual", r.energy_balance_residual},
                 {"slack", config.verify.storage_slack}}};
  } catch (const ValidationError& e) {
    return {"storage_trace", "FAIL", e.what(), json::object()};
  }
}

}  // namespace

std::vector<PropertyVerdict> run_verify(const ExperimentConfig& config, const fs::path& out_dir,
                                        std::ostream& log) {
  const StrategyGrid grid = build_grid(config);
  const PayoffKernel kernel = build_kernel(config, grid);
  const RevisionProtocol protocol = build_protocol(config, grid);
  const ReferenceMeasure lambda = build_reference(config, grid);
  const DiscreteMeasure x0 = build_initial(config, grid);
  std::vector<PropertyVerdict> verdicts;
  for (const std::string& p : config.verify.properties) {
    if (p == "monotonicity") verdicts.push_back(verify_monotonicity(config, kernel));
    else if (p == "sign_preservation") verdicts.push_back(verify_sign(config, protocol));
    else if (p == "nash") verdicts.push_back(verify_nash(config, kernel, x0));
    else if (p == "rest_point") verdicts.push_back(verify_rest(config, kernel, protocol, lambda, x0));
    else if (p == "storage_trace") verdicts.push_back(verify_storage(config, kernel, protocol, lambda, x0));
    const PropertyVerdict& v = verdicts.back();
    log << v.verdict << "  " << v.property << ": " << v.detail << '\n';
  }
  json report = json::array();
  for (const auto& v : verdicts)
    report.push_back({{"property", v.property}, {"verdict", v.verdict}, {"detail", v.detail}, {"data", v.data}});
  fs::create_directories(out_dir);
  write_json(out_dir / "verify.json", json{{"results", report}, {"metadata", metadata_json(config)}});
  return verdicts;
}

RefineReport run_refine(const ExperimentConfig& config, const fs::path& out_dir, unsigned jobs) {
  if (config.refine.ns.size() < 2) throw ValidationError("refine.ns: needs at least two grid sizes");
  if (config.reference.type != "uniform")
    throw ValidationError("reference.type: refinement supports only uniform reference measures");
  if (config.initial.type == "file")
    throw ValidationError("initial.type: file initial states cannot be refined");
  if (config.game.kind == KernelKind::table)
    throw ValidationError("game.type: table games cannot be refined");
  if (config.feedback.type != "static")
    throw ValidationError("feedback.type: refinement runs static feedback only");
  for (std::size_t k = 1; k < config.refine.ns.size(); ++k)
    if (config.refine.ns[k] < config.refine.ns[k - 1])
      throw ValidationError("refine.ns: grid sizes must be nondecreasing");

  RefineFamily family;
  family.grid = [&](Index n) {
    ExperimentConfig c = config;
    c.grid.n = n;
    return build_grid(c);
  };
  family.kernel = [&](const StrategyGrid& g) { return build_kernel(config, g); };
  family.initial = [&](const StrategyGrid& g) { return build_initial(config, g); };
  family.per_strategy_rate = config.protocol.per_strategy;
  const StrategyGrid probe = build_grid(config);
  const RevisionProtocol protocol = build_protocol(config, probe);
  RefineReport report = refine_study(family, protocol, config.refine.ns, config.time, jobs);
  fs::create_directories(out_dir);
  std::ostringstream os;
  io::write_refine_csv(os, report);
  io::write_text(out_dir / "refine.csv", os.str());
  write_json(out_dir / "metadata.json", metadata_json(config));
  return report;
}

}  // namespace evodyn
