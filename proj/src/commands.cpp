#include "rdiqsdc/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdiqsdc/parallel.hpp"
#include "rdiqsdc/transcript.hpp"

namespace rdiqsdc {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string num_or_empty(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

class Table {
 public:
  explicit Table(char sep) : sep_(sep) {}

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ << sep_;
      text_ << cells[i];
    }
    text_ << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  char sep_;
  std::ostringstream text_;
};

std::string extension(const RunConfig& c) { return c.output.separator == '\t' ? ".tsv" : ".csv"; }

fs::path output_dir(const RunConfig& c) {
  fs::path dir(c.output.dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Eta: return "eta";
    case SweepAxis::Distance: return "L";
    case SweepAxis::DeltaTheta: return "delta_theta";
  }
  return "eta";
}

std::vector<double> noise_values(const RunConfig& c) {
  if (!c.analysis.delta_theta_values.empty()) return c.analysis.delta_theta_values;
  return {0.0, std::numbers::pi / 400.0, std::numbers::pi / 40.0};
}

/// P1 the configured basis policy realizes.
double realized_p1(const ProtocolParams& p) {
  return OffsetDistribution::from_policy(p.policy, p.basis).expected_p0(p.basis.theta());
}

std::string gnuplot_script(const std::string& data_file, const std::string& axis, char sep) {
  std::ostringstream s;
  s << "# gnuplot -p " << fs::path(data_file).stem().string() << ".gp\n";
  s << "set datafile separator " << (sep == '\t' ? "\"\\t\"" : "\",\"") << "\n";
  s << "set key autotitle columnhead\n";
  s << "set xlabel \"" << axis << "\"\nset ylabel \"C_S\"\nset grid\n";
  s << "plot \"" << fs::path(data_file).filename().string() << "\" using 1:11 with lines title \"C_S\"\n";
  return s.str();
}

}  // namespace

std::vector<double> default_grid(SweepAxis axis) {
  std::vector<double> g;
  switch (axis) {
    case SweepAxis::Eta:
      for (int i = 1; i <= 200; ++i) g.push_back(i / 200.0);
      break;
    case SweepAxis::Distance:
      for (int i = 0; i <= 200; ++i) g.push_back(i * 0.5);
      break;
    case SweepAxis::DeltaTheta:
      for (int i = 0; i <= 200; ++i) g.push_back(std::numbers::pi * i / 200.0);
      break;
  }
  return g;
}

std::string sweep_table(const RunConfig& c) {
  const auto& a = c.analysis;
  const std::vector<double> grid = a.grid.empty() ? default_grid(a.axis) : a.grid;
  const std::vector<double> noises =
      a.axis == SweepAxis::DeltaTheta ? std::vector<double>{0.0} : noise_values(c);
  Table t(c.output.separator);
  t.row({"axis_value", "P1", "delta_theta", "eta", "Q_AB", "Q_ABA", "E_AB", "E_ABA", "I_AB", "I_BE", "C_S", "E_s"});
  for (double p1 : a.p1_values) {
    for (double dtheta : noises) {
      SweepFixed fixed;
      fixed.p1 = p1;
      fixed.theta = c.protocol.basis.theta();
      fixed.delta_theta = dtheta;
      fixed.eta = c.bare_eta.value_or(1.0);
      fixed.link = c.protocol.physics.link;
      fixed.efficiency = a.efficiency;
      for (const SweepRow& row : sweep(a.axis, grid, fixed, c.protocol.workers)) {
        const CapacityPoint& pt = row.point;
        t.row({num(row.axis_value), num(p1), num(pt.params.delta_theta), num(row.eta), num(pt.params.gains.q_ab),
               num(pt.params.gains.q_aba), num(pt.errors.total_ab()), num(pt.errors.total_aba()), num(pt.i_ab),
               num(pt.i_be_bound), num(pt.c_s), num(pt.e_s.value_or(0.0))});
      }
    }
  }
  return t.str();
}

std::string threshold_table(const RunConfig& c) {
  Table t(c.output.separator);
  t.row({"P1", "delta_theta", "eta_star", "L_max_km"});
  for (double p1 : c.analysis.p1_values) {
    for (double dtheta : noise_values(c)) {
      const auto eta = eta_threshold(p1, dtheta, c.analysis.solver);
      const auto distance = eta ? max_distance(*eta, c.protocol.physics.link) : std::nullopt;
      t.row({num(p1), num(dtheta), num_or_empty(eta), num_or_empty(distance)});
    }
  }
  return t.str();
}

std::string noise_threshold_table(const RunConfig& c) {
  Table t(c.output.separator);
  t.row({"P1", "delta_theta_star", "F_single_trip", "F_round_trip", "min_C_S_on_0_pi"});
  for (double p1 : c.analysis.p1_values) {
    const auto d = delta_theta_threshold(p1, c.analysis.solver);
    std::optional<double> single, round;
    if (d) {
      const FidelityThreshold f = fidelity_threshold(*d);
      single = f.single_trip;
      round = f.round_trip;
    }
    t.row({num(p1), num_or_empty(d), num_or_empty(single), num_or_empty(round),
           num(min_capacity_over_noise(p1, std::numbers::pi, 2001))});
  }
  return t.str();
}

std::string attack_scan_table(const RunConfig& c) {
  const ProtocolParams base = c.resolved_protocol();
  const double p1_theory = realized_p1(base);
  Table t(c.output.separator);
  t.row({"p1", "p2", "P1_theory", "predicted", "literal", "empirical", "m", "tolerance", "abort_probability",
         "empirical_abort_rate"});
  std::size_t index = 0;
  for (double a : c.attack_scan.p1_grid) {
    for (double b : c.attack_scan.p2_grid) {
      ProtocolParams p = base;
      p.attack.enabled = true;
      p.attack.p1 = a;
      p.attack.p2 = b;
      p.abort_on_check_failure = false;
      p.seed = derive_seed(base.seed, "attack-scan", index);
      const ProtocolTranscript tr = run_full_protocol(p);
      const std::size_t m = tr.summary.round1.m;
      const double tolerance = p.tolerance(m);
      std::string rate;
      if (c.attack_scan.trials > 0) {
        std::size_t aborts = 0;
        ProtocolParams q = p;
        q.abort_on_check_failure = true;
        for (std::size_t k = 0; k < c.attack_scan.trials; ++k) {
          q.seed = derive_seed(derive_seed(base.seed, "attack-trials", index), "trial", k);
          aborts += run_full_protocol(q).summary.aborted_round ? 1 : 0;
        }
        rate = num(static_cast<double>(aborts) / static_cast<double>(c.attack_scan.trials));
      }
      t.row({num(a), num(b), num(p1_theory), num(predict_attacked_distribution(p1_theory, p.attack)),
             num(literal_attacked_expression(p1_theory, p.attack)), num(tr.summary.round1.empirical_p0),
             std::to_string(m), num(tolerance), num(detection_power(p1_theory, p.attack, m, tolerance)), rate});
      ++index;
    }
  }
  return t.str();
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const ProtocolTranscript t = run_full_protocol(c.resolved_protocol());
  const fs::path dir = output_dir(c);
  if (c.output.transcript) {
    std::ofstream f(dir / "transcript.jsonl", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "transcript.jsonl").string());
    write_transcript_jsonl(f, t);
  }
  write_file(dir / "summary.json", nlohmann::json::parse(summary_json(t)).dump(2) + "\n");

  const auto& s = t.summary;
  out << "r = " << t.params.r << ", seed = " << t.params.seed << '\n';
  auto report = [&](const SecurityCheckReport& rep) {
    out << "round " << rep.round << ": m = " << rep.m << ", P(g=0) theory " << num(rep.theoretical_p0)
        << ", observed " << num(rep.empirical_p0) << ", deviation " << num(rep.deviation) << " (tolerance "
        << num(rep.tolerance) << ") -> " << (rep.verdict == Verdict::Pass ? "pass" : "abort") << '\n';
  };
  report(s.round1);
  if (s.round2) report(*s.round2);
  out << "Q_AB " << num(s.q_ab()) << ", Q_ABA " << num(s.q_aba()) << ", E_AB " << num(s.total_e_ab())
      << ", E_ABA " << num(s.total_e_aba()) << '\n';
  if (s.completed) {
    out << "message: " << s.frame.count(BitStatus::Ok) << " ok, " << s.frame.count(BitStatus::Flipped)
        << " flipped, " << s.frame.count(BitStatus::Lost) << " lost\n";
  } else {
    out << "run stopped after a failed check in round " << s.aborted_round.value_or(0) << '\n';
  }
  out << "wrote " << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const fs::path dir = output_dir(c);
  const std::string name = "sweep_" + axis_name(c.analysis.axis);
  const fs::path data = dir / (name + extension(c));
  write_file(data, sweep_table(c));
  out << "wrote " << data.string() << '\n';
  if (c.output.gnuplot) {
    const fs::path script = dir / (name + ".gp");
    write_file(script, gnuplot_script(data.string(), axis_name(c.analysis.axis), c.output.separator));
    out << "wrote " << script.string() << '\n';
  }
  return kExitOk;
}

int cmd_threshold(const RunConfig& c, std::ostream& out) {
  const fs::path dir = output_dir(c);
  write_file(dir / ("threshold" + extension(c)), threshold_table(c));
  write_file(dir / ("noise_threshold" + extension(c)), noise_threshold_table(c));

  nlohmann::json doc;
  doc["eta_thresholds"] = nlohmann::json::array();
  out << std::left << std::setw(10) << "P1" << std::setw(18) << "delta_theta" << std::setw(18) << "eta*"
      << "L_max [km]\n";
  for (double p1 : c.analysis.p1_values) {
    for (double dtheta : noise_values(c)) {
      const auto eta = eta_threshold(p1, dtheta, c.analysis.solver);
      const auto distance = eta ? max_distance(*eta, c.protocol.physics.link) : std::nullopt;
      nlohmann::json entry{{"P1", p1}, {"delta_theta", dtheta}, {"eta_star", nullptr}, {"L_max_km", nullptr}};
      if (eta) entry["eta_star"] = *eta;
      if (distance) entry["L_max_km"] = distance.value();
      doc["eta_thresholds"].push_back(entry);
      out << std::setw(10) << num(p1) << std::setw(18) << num(dtheta) << std::setw(18)
          << (eta ? num(*eta) : "-") << (distance ? num(*distance) : "-") << '\n';
    }
  }
  doc["noise_thresholds"] = nlohmann::json::array();
  out << '\n' << std::setw(10) << "P1" << std::setw(18) << "delta_theta*" << std::setw(18) << "F one-way"
      << "F round trip\n";
  for (double p1 : c.analysis.p1_values) {
    const auto d = delta_theta_threshold(p1, c.analysis.solver);
    nlohmann::json entry{{"P1", p1}, {"delta_theta_star", nullptr}};
    if (d) {
      const FidelityThreshold f = fidelity_threshold(*d);
      entry = {{"P1", p1}, {"delta_theta_star", *d}, {"F_single_trip", f.single_trip}, {"F_round_trip", f.round_trip}};
      out << std::setw(10) << num(p1) << std::setw(18) << num(*d) << std::setw(18) << num(f.single_trip)
          << num(f.round_trip) << '\n';
    } else {
      out << std::setw(10) << num(p1) << "no threshold on (0, 0.3 pi)\n";
    }
    doc["noise_thresholds"].push_back(entry);
  }
  out << std::right;
  write_file(dir / "threshold.json", doc.dump(2) + "\n");
  out << "wrote " << (dir / "threshold.json").string() << '\n';
  return kExitOk;
}

int cmd_attack_scan(const RunConfig& c, std::ostream& out) {
  const fs::path dir = output_dir(c);
  const fs::path data = dir / ("attack_scan" + extension(c));
  write_file(data, attack_scan_table(c));
  out << "wrote " << data.string() << '\n';
  return kExitOk;
}

int cmd_verify(const AcceptanceOptions& options, std::ostream& out) {
  int failed = 0;
  run_acceptance(options, [&](const CriterionReport& rep) {
    print_report(out, rep);
    out.flush();
    if (!rep.pass()) ++failed;
  });
  out << (failed == 0 ? std::string("verification passed") : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? kExitOk : kExitVerificationFailure;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and analysis of receiver-device-independent quantum secure direct communication"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  std::optional<std::string> format;
  std::vector<std::string> sets;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, std::string("config file (default: $") + kConfigEnv + ")");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads (0: machine parallelism)")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "tsv"}));
    sub->add_option("--set", sets, "override a config key: key=value (repeatable)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run the protocol once and write a transcript");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "secrecy capacity along one axis");
  CLI::App* threshold = app.add_subcommand("threshold", "efficiency, distance and noise thresholds");
  CLI::App* attack = app.add_subcommand("attack-scan", "blinding attack over a (p1, p2) grid");
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance battery");
  for (CLI::App* sub : {simulate, sweep_cmd, threshold, attack, verify}) add_common(sub);

  std::vector<int> only;
  bool quick = false;
  verify->add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, kCriterionCount));
  verify->add_flag("--quick", quick, "smaller Monte Carlo samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (config_path.empty()) {
    if (const char* env = std::getenv(kConfigEnv)) config_path = env;
  }

  std::map<std::string, std::string> overrides;
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      err << "error: --set expects key=value, got '" << item << "'\n";
      return kExitConfigError;
    }
    overrides[item.substr(0, eq)] = item.substr(eq + 1);
  }
  if (seed) overrides["protocol.seed"] = std::to_string(*seed);
  if (out_dir) overrides["output.dir"] = *out_dir;
  if (workers) overrides["run.workers"] = std::to_string(*workers);
  if (format) overrides["output.format"] = *format;

  RunConfig config;
  try {
    config = load_config(config_path, overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(config, out);
    if (*sweep_cmd) return cmd_sweep(config, out);
    if (*threshold) return cmd_threshold(config, out);
    if (*attack) return cmd_attack_scan(config, out);
    AcceptanceOptions options;
    if (seed) options.seed = *seed;
    options.workers = config.protocol.workers;
    options.only.insert(only.begin(), only.end());
    if (quick) {
      options.oracle_r = 100'000;
      options.attack_r = 20'000;
      options.abort_trials = 200;
      options.undetectable_trials = 50;
      options.property_operations = 10'000;
    }
    return cmd_verify(options, out);
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace rdiqsdc
