#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "looptau/suites.hpp"

namespace {

using namespace looptau;

// Exit codes: 0 all identities pass, 1 at least one fails, 2 bad configuration.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_range(const std::string& text, const std::string& flag) {
  auto pos = text.find("..");
  if (pos == std::string::npos)
    throw ConfigError(flag + ": expected lo..hi, got '" + text + "'");
  int lo = 0, hi = 0;
  try {
    std::size_t used = 0;
    lo = std::stoi(text.substr(0, pos), &used);
    if (used != pos) throw std::invalid_argument(text);
    std::string rest = text.substr(pos + 2);
    hi = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError(flag + ": expected lo..hi, got '" + text + "'");
  }
  if (lo > hi) throw ConfigError(flag + ": empty range '" + text + "'");
  return {lo, hi};
}

void require_cap(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

int write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return std::cout ? kExitPass : kExitConfig;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "looptau: cannot open '" << out_path << "' for writing\n";
    return kExitConfig;
  }
  f << text;
  f.close();
  if (!f) {
    std::cerr << "looptau: write to '" << out_path << "' failed\n";
    return kExitConfig;
  }
  return kExitPass;
}

int worker_count() {
  const char* env = std::getenv("LOOPTAU_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    int n = std::stoi(env);
    require_cap(n >= 1 && n <= 64, "LOOPTAU_WORKERS must be between 1 and 64");
    return n;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("LOOPTAU_WORKERS must be an integer");
  }
}

struct TauArgs {
  int n = 0;
  int k_max = 3;
  int l_max = 1;
  std::string alpha = "-1..1";
  std::string beta = "-1..1";
  std::string window = "-4..4";
  std::string format = "csv";
  std::string out;
};

int run_tau(const TauArgs& args) {
  auto [wlo, whi] = parse_range(args.window, "--window");
  require_cap(wlo >= -16 && whi <= 16, "--window: endpoints capped at [-16,16]");
  Window w(wlo, whi);
  auto [alo, ahi] = parse_range(args.alpha, "--alpha");
  auto [blo, bhi] = parse_range(args.beta, "--beta");
  require_cap(alo >= -6 && ahi <= 6, "--alpha: bounds capped at [-6,6]");
  require_cap(blo >= -6 && bhi <= 6, "--beta: bounds capped at [-6,6]");
  require_cap(args.k_max >= -1, "--kmax: must be at least -1");
  require_cap(args.l_max >= -1, "--lmax: must be at least -1");
  require_cap(args.n != 2 || args.k_max <= 8, "--kmax: capped at 8 for two components");
  require_cap(args.n != 3 || args.k_max <= 4, "--kmax: capped at 4 for three components");
  require_cap(args.n != 3 || args.l_max <= 4, "--lmax: capped at 4 for three components");
  require_cap(args.format == "csv" || args.format == "json",
              "--format: expected csv or json");

  // Tables start one step below the lattice so the vanishing row is visible.
  const int k_min = -1;
  const int l_min = -1;
  std::string text;
  if (args.format == "csv") {
    if (args.n == 2) {
      TauTable2 t(w);
      text = tau_table2_csv(t, k_min, args.k_max, alo, ahi);
    } else {
      TauTable3 t(w);
      text = tau_table3_csv(t, k_min, args.k_max, l_min, args.l_max, alo, ahi, blo, bhi);
    }
  } else {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["n"] = args.n;
    j["window"] = {w.lo, w.hi};
    j["rows"] = nlohmann::ordered_json::array();
    if (args.n == 2) {
      TauTable2 t(w);
      for (int k = k_min; k <= args.k_max; ++k)
        for (int a = alo; a <= ahi; ++a) {
          nlohmann::ordered_json row;
          row["k"] = k;
          row["alpha"] = a;
          row["tau"] = t.tau(k, a).str();
          j["rows"].push_back(std::move(row));
        }
    } else {
      TauTable3 t(w);
      for (int k = k_min; k <= args.k_max; ++k)
        for (int l = l_min; l <= args.l_max; ++l)
          for (int a = alo; a <= ahi; ++a)
            for (int b = blo; b <= bhi; ++b) {
              nlohmann::ordered_json row;
              row["k"] = k;
              row["l"] = l;
              row["alpha"] = a;
              row["beta"] = b;
              row["tau"] = t.tau(k, l, a, b).str();
              j["rows"].push_back(std::move(row));
            }
    }
    text = j.dump(2) + "\n";
  }
  return write_output(text, args.out);
}

struct VerifyArgs {
  std::string suite = "all";
  std::string window;
  std::optional<int> k_max;
  std::optional<int> l_max;
  std::string alpha;
  std::string beta;
  std::optional<int> trunc;
  std::optional<int> order;
  std::optional<int> max_size;
  std::uint64_t seed = 7;
  std::string format = "json";
  std::string out;
};

int run_verify(const VerifyArgs& args) {
  RunConfig cfg;
  cfg.seed = args.seed;
  if (!args.window.empty()) {
    auto [lo, hi] = parse_range(args.window, "--window");
    require_cap(lo >= -16 && hi <= 16, "--window: endpoints capped at [-16,16]");
    cfg.window = Window(lo, hi);
  }
  if (args.k_max) {
    require_cap(*args.k_max >= 0 && *args.k_max <= 8, "--kmax: capped at [0,8]");
    cfg.k_max = *args.k_max;
  }
  if (args.l_max) {
    require_cap(*args.l_max >= 0 && *args.l_max <= 4, "--lmax: capped at [0,4]");
    cfg.l_max = *args.l_max;
  }
  if (!args.alpha.empty()) {
    auto r = parse_range(args.alpha, "--alpha");
    require_cap(r.first >= -6 && r.second <= 6, "--alpha: bounds capped at [-6,6]");
    cfg.alpha = r;
  }
  if (!args.beta.empty()) {
    auto r = parse_range(args.beta, "--beta");
    require_cap(r.first >= -6 && r.second <= 6, "--beta: bounds capped at [-6,6]");
    cfg.beta = r;
  }
  if (args.trunc) {
    require_cap(*args.trunc >= 1 && *args.trunc <= 10, "--trunc: capped at [1,10]");
    cfg.trunc = *args.trunc;
  }
  if (args.order) {
    require_cap(*args.order >= 1 && *args.order <= 8, "--order: capped at [1,8]");
    cfg.order = *args.order;
  }
  if (args.max_size) {
    require_cap(*args.max_size >= 1 && *args.max_size <= 5, "--max: capped at [1,5]");
    cfg.max_size = *args.max_size;
  }
  require_cap(args.format == "csv" || args.format == "json",
              "--format: expected csv or json");

  std::vector<std::string> names;
  if (args.suite == "all") {
    names = suite_names();
  } else {
    bool known = false;
    for (const auto& n : suite_names()) known = known || n == args.suite;
    if (!known) {
      std::string list;
      for (const auto& n : suite_names()) list += " " + n;
      throw ConfigError("unknown suite '" + args.suite + "'; choose one of:" + list + " all");
    }
    names.push_back(args.suite);
  }

  int workers = worker_count();
  auto stderr_timing = [](const std::string& name, double ms) {
    std::cerr << "suite " << name << ": " << static_cast<long>(ms) << " ms\n";
  };
  VerificationReport report = run_suites(names, cfg, workers, stderr_timing);

  std::string text =
      args.format == "json" ? report_to_json(report, cfg) : report_to_csv(report);
  int io = write_output(text, args.out);
  if (io != kExitPass) return io;
  if (!report.pass()) {
    for (const auto& s : report.suites)
      if (s.failures() > 0)
        std::cerr << "suite " << s.suite << ": " << s.failures() << " case(s) failed\n";
    return kExitFail;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact tau tables and identity verification for small loop groups"};
  app.require_subcommand(1);

  TauArgs tau_args;
  CLI::App* tau = app.add_subcommand("tau", "write a tau table");
  tau->add_option("--n", tau_args.n, "number of components (2 or 3)")
      ->required()
      ->check(CLI::IsMember({2, 3}));
  tau->add_option("--kmax", tau_args.k_max, "largest k row (table starts at k=-1)");
  tau->add_option("--lmax", tau_args.l_max, "largest l row, three components only");
  tau->add_option("--alpha", tau_args.alpha, "alpha range lo..hi");
  tau->add_option("--beta", tau_args.beta, "beta range lo..hi, three components only");
  tau->add_option("--window", tau_args.window, "coefficient window lo..hi");
  tau->add_option("--format", tau_args.format, "csv or json");
  tau->add_option("--out", tau_args.out, "output file (default stdout)");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("suite", verify_args.suite, "suite name or 'all'");
  verify->add_option("--window", verify_args.window, "coefficient window lo..hi");
  verify->add_option("--kmax", verify_args.k_max, "largest k");
  verify->add_option("--lmax", verify_args.l_max, "largest l");
  verify->add_option("--alpha", verify_args.alpha, "alpha range lo..hi");
  verify->add_option("--beta", verify_args.beta, "beta range lo..hi");
  verify->add_option("--trunc,-N", verify_args.trunc, "series truncation depth");
  verify->add_option("--order,-M", verify_args.order, "correlation expansion order");
  verify->add_option("--max", verify_args.max_size, "largest determinant size");
  verify->add_option("--seed", verify_args.seed, "seed for random substitutions");
  verify->add_option("--format", verify_args.format, "json or csv");
  verify->add_option("--out", verify_args.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (tau->parsed()) return run_tau(tau_args);
    return run_verify(verify_args);
  } catch (const ConfigError& e) {
    std::cerr << "looptau: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "looptau: " << e.what() << "\n";
    return kExitConfig;
  }
}
