// antibunch: simulate a heralded single-photon experiment and analyze the
// resulting time-tag streams.
//
// Subcommands:
//   simulate  generate a PTAG time-tag file from a config
//   analyze   stream a PTAG file through the coincidence engine
//   report    preset end-to-end run: simulate + analyze + CSV artifacts
//   dump      print a PTAG file as text (t_ps,channel per line)
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 I/O error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "antibunch/config.hpp"
#include "antibunch/errors.hpp"
#include "antibunch/pipeline.hpp"
#include "antibunch/tag_file.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
  std::optional<double> duration_s;
  std::optional<std::uint64_t> seed;
};

struct AnalyzeArgs {
  std::string tags_path;
  std::string config_path;
  std::string report_path;
  std::string hist_dir;
};

struct ReportArgs {
  std::string preset_name;
  std::string out_dir;
  std::optional<double> duration_s;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(antibunch::ExperimentConfig& config,
                     const std::optional<double>& duration_s,
                     const std::optional<std::uint64_t>& seed) {
  if (duration_s) config.duration_s = *duration_s;
  if (seed) config.master_seed = *seed;
  antibunch::validate(config);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw antibunch::IoError("cannot open for writing: " + path.string());
  return out;
}

void print_summary(const antibunch::SimulationSummary& s) {
  std::cout << "pairs emitted      " << s.pairs << '\n'
            << "herald tags        " << s.herald_tags << '\n'
            << "A tags             " << s.a_tags << '\n'
            << "B tags             " << s.b_tags << '\n'
            << "tags written       " << s.tags_written << '\n';
}

void print_report(const antibunch::RunReport& r) {
  auto line = [](const char* name, const antibunch::CountWithError& v) {
    std::cout << name << ' ' << v.value << " +- " << v.sigma << '\n';
  };
  std::cout << "separation         " << r.table.separation
            << (r.certificate.undetermined ? " (undetermined)" : "") << '\n';
  std::cout << "heralds            " << r.table.r_h_a.value << '\n';
  line("P_A               ", r.table.p_a);
  line("P_B               ", r.table.p_b);
  line("P_11              ", r.table.p_11);
  line("P_N               ", r.table.p_n);
  line("P_A*P_B           ", r.product_ab);
  line("accidental P_11   ", r.accidental);
  line("antibunching ratio", r.ratio);
}

int cmd_simulate(const SimulateArgs& args) {
  antibunch::ExperimentConfig config = antibunch::load_config(args.config_path);
  apply_overrides(config, args.duration_s, args.seed);
  const auto summary = antibunch::run_simulation(config, args.out_path);
  print_summary(summary);
  return 0;
}

int cmd_analyze(const AnalyzeArgs& args) {
  antibunch::ExperimentConfig config = antibunch::load_config(args.config_path);
  const auto report = antibunch::run_analysis(args.tags_path, config);
  {
    auto out = open_out(args.report_path);
    antibunch::write_report_csv(report, out);
  }
  if (!args.hist_dir.empty()) {
    std::filesystem::create_directories(args.hist_dir);
    const std::filesystem::path dir = args.hist_dir;
    {
      auto out = open_out(dir / "hist_HA.csv");
      antibunch::write_histogram_csv(report.hist_a, out);
    }
    {
      auto out = open_out(dir / "hist_HB.csv");
      antibunch::write_histogram_csv(report.hist_b, out);
    }
  }
  print_report(report);
  return 0;
}

int cmd_report(const ReportArgs& args) {
  antibunch::ExperimentConfig config = antibunch::preset(args.preset_name);
  apply_overrides(config, args.duration_s, args.seed);
  const auto report = antibunch::run_full_report(config, args.out_dir);
  print_report(report);
  std::cout << "artifacts in       " << args.out_dir << '\n';
  return 0;
}

int cmd_dump(const std::string& tags_path) {
  antibunch::TagFileReader reader(tags_path);
  antibunch::write_tags_text(reader, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heralded single-photon experiment simulator and "
               "time-tag coincidence analyzer"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a time-tag file");
  simulate->add_option("--config", sim.config_path, "config file")->required();
  simulate->add_option("--out", sim.out_path, "output PTAG file")->required();
  simulate->add_option("--duration", sim.duration_s, "override duration [s]");
  simulate->add_option("--seed", sim.seed, "override master seed");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "analyze a time-tag file");
  analyze->add_option("--tags", ana.tags_path, "input PTAG file")->required();
  analyze->add_option("--config", ana.config_path, "config file")->required();
  analyze->add_option("--report", ana.report_path, "output report CSV")
      ->required();
  analyze->add_option("--hist-dir", ana.hist_dir,
                      "directory for histogram CSVs");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "preset end-to-end run");
  report->add_option("--preset", rep.preset_name,
                     "spacelike-paper or timelike-paper")
      ->required();
  report->add_option("--out", rep.out_dir, "output directory")->required();
  report->add_option("--duration", rep.duration_s, "override duration [s]");
  report->add_option("--seed", rep.seed, "override master seed");

  std::string dump_path;
  auto* dump = app.add_subcommand("dump", "print a PTAG file as text");
  dump->add_option("--tags", dump_path, "input PTAG file")->required();

  try {
    app.parse(argc, argv);
    if (*simulate) return cmd_simulate(sim);
    if (*analyze) return cmd_analyze(ana);
    if (*report) return cmd_report(rep);
    if (*dump) return cmd_dump(dump_path);
    return kExitConfig;  // unreachable: require_subcommand(1)
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const antibunch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const antibunch::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::domain_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const antibunch::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
