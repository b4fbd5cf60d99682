// Command-line front end: closed-form analysis, parameter sweeps, design
// optimization, robust constructions, and seeded simulation, emitting JSON
// and CSV for downstream tables and plots.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "revmac/designer.hpp"
#include "revmac/json_io.hpp"
#include "revmac/private_protocol.hpp"
#include "revmac/public_protocol.hpp"
#include "revmac/simulator.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitInfeasible = 2;

using nlohmann::json;

std::string format_sig(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// start..end[:step] or a single scalar.
struct SweepRange {
  double start = 0.0;
  double end = 0.0;
  double step = 1.0;
  bool is_range = false;

  static SweepRange parse(const std::string& text) {
    SweepRange r;
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
      r.start = r.end = std::stod(text);
      return r;
    }
    r.is_range = true;
    r.start = std::stod(text.substr(0, dots));
    std::string rest = text.substr(dots + 2);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      r.step = std::stod(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    r.end = std::stod(rest);
    if (!(r.step > 0.0) || r.end < r.start)
      throw CLI::ValidationError("range", "expected start..end[:step] with step > 0");
    return r;
  }

  std::vector<double> values() const {
    const long count =
        static_cast<long>(std::floor((end - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (long i = 0; i < count; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
  }

  std::string text() const {
    if (!is_range) return format_sig(start);
    return format_sig(start) + ".." + format_sig(end) + ":" + format_sig(step);
  }
};

struct Output {
  std::string path = "";  // resolved; "-" means stdout

  void resolve(const std::string& requested, const std::string& default_name) {
    if (!requested.empty()) {
      path = requested;
      return;
    }
    if (const char* dir = std::getenv("REVMAC_OUTPUT_DIR")) {
      path = std::string(dir) + "/" + default_name;
      return;
    }
    path = "-";
  }

  void write(const std::string& content) const {
    if (path == "-") {
      std::cout << content;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output path: " + path);
    out << content;
  }
};

json make_manifest(const std::string& subcommand, json parameters,
                   const Output& out) {
  return json{{"tool", "revmac"},
              {"version", kVersion},
              {"subcommand", subcommand},
              {"parameters", std::move(parameters)},
              {"output", out.path}};
}

void emit_json(const Output& out, json manifest, json results) {
  json doc{{"manifest", std::move(manifest)}, {"results", std::move(results)}};
  out.write(doc.dump(2) + "\n");
}

revmac::NetworkConfig make_network(int n, double pc) {
  return pc > 0.0 ? revmac::NetworkConfig(n, pc) : revmac::NetworkConfig(n);
}

// Shared flags: every subcommand runs on one network.
struct NetOptions {
  int n = 5;
  double pc = -1.0;  // -1: default 1/N

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "number of nodes")->check(CLI::Range(2, 1000000));
    cmd->add_option("--pc", pc, "cooperation probability (default 1/N)");
  }
};

int run_analyze(const std::string& signal, const NetOptions& net_opt, double b,
                long l, long m, double pd, const std::string& out_path) {
  const revmac::NetworkConfig net = make_network(net_opt.n, net_opt.pc);
  Output out;
  out.resolve(out_path, "analyze.json");
  json params{{"signal", signal}, {"n", net.n_nodes},
              {"pc", net.cooperation_prob}, {"b", b},
              {"l", l},           {"m", m},
              {"pd", pd}};
  json results;
  if (signal == "private") {
    const revmac::PrivateReviewProtocol proto(net, b, l, m);
    results["analysis"] = revmac::analyze_private(proto, pd);
    results["state_count"] = revmac::state_count(proto);
  } else {
    const revmac::PublicReviewProtocol proto(net, b, l, m);
    results["analysis"] = revmac::analyze_public(proto, pd);
  }
  emit_json(out, make_manifest("analyze", params, out), results);
  return 0;
}

struct SweepOptions {
  std::string signal;
  std::string quantity = "all";
  std::string b_text;
  std::string l_text;
  double pd = -1.0;
  long m = 0;  // 0: M = ceil(M_min) convention
};

int run_sweep(const SweepOptions& opt, const NetOptions& net_opt,
              const std::string& out_path) {
  const revmac::NetworkConfig net = make_network(net_opt.n, net_opt.pc);
  const SweepRange b_range = SweepRange::parse(opt.b_text);
  const SweepRange l_range = SweepRange::parse(opt.l_text);
  if (b_range.is_range == l_range.is_range)
    throw CLI::ValidationError("sweep", "exactly one of --b/--l must be a range");
  const bool over_l = l_range.is_range;
  const bool have_pd = opt.pd > 0.0;

  const bool wants_pm = opt.quantity == "pm" || opt.quantity == "all";
  const bool wants_g = opt.quantity == "g" || opt.quantity == "mmin" ||
                       opt.quantity == "all";
  const bool wants_loss = opt.quantity == "loss" || opt.quantity == "all";
  if ((wants_pm || wants_g) && !have_pd)
    throw CLI::ValidationError("sweep", "--pd required for the requested quantity");
  if (wants_loss && opt.m == 0 && !have_pd)
    throw CLI::ValidationError("sweep", "loss needs --pd (M = ceil(M_min)) or --m");

  Output out;
  out.resolve(out_path, "sweep.csv");
  json params{{"signal", opt.signal}, {"quantity", opt.quantity},
              {"n", net.n_nodes},     {"pc", net.cooperation_prob},
              {"b", b_range.text()},  {"l", l_range.text()}};
  if (have_pd) params["pd"] = opt.pd;
  if (opt.m > 0) params["m"] = opt.m;

  std::vector<std::string> cols{over_l ? "l" : "b"};
  if (opt.quantity == "pf" || opt.quantity == "all") cols.push_back("pf");
  if (wants_pm) cols.push_back("pm");
  if (wants_g) {
    if (opt.quantity != "mmin") cols.push_back("g");
    if (opt.quantity == "mmin" || opt.quantity == "all")
      cols.push_back("mmin_ceil");
  }
  if (wants_loss) cols.push_back("loss");

  std::ostringstream csv;
  csv << "# manifest " << make_manifest("sweep", params, out).dump() << "\n";
  for (std::size_t i = 0; i < cols.size(); ++i)
    csv << (i ? "," : "") << cols[i];
  csv << "\n";

  const std::vector<double> xs = (over_l ? l_range : b_range).values();
  for (double x : xs) {
    const double b = over_l ? b_range.start : x;
    const long l = over_l ? static_cast<long>(std::llround(x))
                          : static_cast<long>(std::llround(l_range.start));
    double pf = 0.0;
    double pm = 0.0;
    if (opt.signal == "private") {
      const revmac::AckTestConfig cfg(
          net, b, l, have_pd ? std::optional<double>(opt.pd) : std::nullopt);
      const auto errs = revmac::ack_error_probs(cfg);
      pf = errs.false_punishment;
      if (errs.miss_detection) pm = *errs.miss_detection;
    } else {
      const revmac::IdleTestConfig cfg(
          net, b, l, have_pd ? std::optional<double>(opt.pd) : std::nullopt);
      const auto errs = revmac::idle_error_probs(cfg);
      pf = errs.false_punishment;
      if (errs.miss_detection) pm = *errs.miss_detection;
    }
    double g = 0.0;
    if (have_pd) {
      g = opt.signal == "private"
              ? revmac::private_deterrence_margin(pf, pm, opt.pd, net)
              : revmac::public_deterrence_margin(pf, pm, opt.pd, net);
    }
    // Review lengths that admit no deterrent reciprocation render their
    // derived columns as 0 so curves plot without holes.
    const double m_min =
        g > 0.0 ? (opt.pd - net.cooperation_prob) * static_cast<double>(l) / g
                : 0.0;
    const long m_used = opt.m > 0 ? opt.m
                        : g > 0.0 ? static_cast<long>(std::ceil(m_min))
                                  : 0;
    double loss = 0.0;
    if (m_used > 0) {
      loss = opt.signal == "private"
                 ? revmac::private_efficiency_loss(pf, l, m_used, net)
                 : revmac::public_efficiency_loss(pf, l, m_used, net);
    }

    bool first = true;
    for (const std::string& col : cols) {
      if (!first) csv << ",";
      first = false;
      if (col == "l")
        csv << l;
      else if (col == "b")
        csv << format_sig(b);
      else if (col == "pf")
        csv << format_sig(pf);
      else if (col == "pm")
        csv << format_sig(pm);
      else if (col == "g")
        csv << format_sig(g);
      else if (col == "mmin_ceil")
        csv << (g > 0.0 ? static_cast<long>(std::ceil(m_min)) : 0);
      else if (col == "loss")
        csv << format_sig(loss);
    }
    csv << "\n";
  }
  out.write(csv.str());
  return 0;
}

int run_design(const NetOptions& net_opt, const std::string& b_text,
               long ns_budget, double pd, const std::string& out_path) {
  const revmac::NetworkConfig net = make_network(net_opt.n, net_opt.pc);
  std::vector<double> b_grid;
  // Comma-separated list, each entry a scalar or a range.
  std::stringstream ss(b_text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const SweepRange r = SweepRange::parse(item);
    for (double v : r.values()) b_grid.push_back(v);
  }
  const revmac::DesignProblem problem{b_grid, ns_budget, pd, net};
  const revmac::DesignResult result = revmac::solve_design(problem);

  Output out;
  out.resolve(out_path, "design.json");
  json params{{"signal", "private"}, {"n", net.n_nodes},
              {"pc", net.cooperation_prob}, {"b", b_text},
              {"ns_budget", ns_budget},     {"pd", pd}};
  emit_json(out, make_manifest("design", params, out), json{{"design", result}});
  return result.feasible() ? 0 : kExitInfeasible;
}

int run_construct(const NetOptions& net_opt, const std::string& type, double eps,
                  double delta, long l_cap, double beta, double rho, double mu,
                  const std::string& out_path) {
  const revmac::NetworkConfig net = make_network(net_opt.n, net_opt.pc);
  Output out;
  out.resolve(out_path, "construct.json");
  json params{{"type", type},  {"n", net.n_nodes}, {"pc", net.cooperation_prob},
              {"eps", eps},    {"delta", delta}};
  if (type == "robust-eps-dp") {
    params["l_cap"] = l_cap;
    const auto result = revmac::construct_robust_eps_dp(eps, delta, net, l_cap);
    json results{{"construct", result},
                 {"p_eps", revmac::robust_p_eps(eps, net)},
                 {"b", revmac::robust_margin(eps, net)}};
    emit_json(out, make_manifest("construct", params, out), results);
    return result.found() ? 0 : kExitInfeasible;
  }
  const double mu_used = mu > 0.0 ? mu : static_cast<double>(net.n_nodes);
  params["beta"] = beta;
  params["rho"] = rho;
  params["mu"] = mu_used;
  const revmac::EpsNeSchedule sched{beta, rho, mu_used};
  const auto result = revmac::construct_eps_ne(eps, delta, sched, net);
  emit_json(out, make_manifest("construct", params, out),
            json{{"construct", result}});
  return 0;
}

revmac::DeviantSpec parse_deviant(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 2)
    throw CLI::ValidationError("deviant", "expected IDX:POLICY[:ARGS]");
  revmac::DeviantSpec spec{std::stoi(parts[0]), revmac::ConstantDeviant{1.0}};
  const std::string& policy = parts[1];
  if (policy == "constant") {
    if (parts.size() != 3)
      throw CLI::ValidationError("deviant", "constant needs IDX:constant:PD");
    spec.policy = revmac::ConstantDeviant{std::stod(parts[2])};
  } else if (policy == "punish_aware") {
    if (parts.size() != 3 && parts.size() != 4)
      throw CLI::ValidationError("deviant",
                                 "punish_aware needs IDX:punish_aware:PD[:PR]");
    revmac::PunishAwareDeviant d{std::stod(parts[2]), 1.0};
    if (parts.size() == 4) d.p_r = std::stod(parts[3]);
    spec.policy = d;
  } else if (policy == "best_response") {
    spec.policy = revmac::BestResponseDeviant{};
  } else {
    throw CLI::ValidationError("deviant", "unknown policy: " + policy);
  }
  return spec;
}

struct SimulateOptions {
  std::string signal;
  double b = 0.0;
  long l = 0;
  long m = 0;
  long epochs = 100000;
  std::uint64_t seed = 0;
  int replications = 0;
  int threads = 0;
  std::vector<std::string> deviants;
  double compare_pd = -1.0;
};

int run_simulate(const SimulateOptions& opt, const NetOptions& net_opt,
                 const std::string& out_path) {
  const revmac::NetworkConfig net = make_network(net_opt.n, net_opt.pc);
  revmac::SimConfig cfg{revmac::PublicReviewProtocol(net, 0.1, 1, 1),
                        {},
                        opt.epochs,
                        opt.seed,
                        opt.replications,
                        opt.threads};
  if (opt.signal == "private") {
    cfg.protocol = revmac::PrivateReviewProtocol(net, opt.b, opt.l, opt.m);
  } else {
    cfg.protocol = revmac::PublicReviewProtocol(net, opt.b, opt.l, opt.m);
  }
  for (const std::string& d : opt.deviants) cfg.deviants.push_back(parse_deviant(d));

  const revmac::SimReport report = revmac::run(cfg);

  // Closed-form reference: the sole constant deviant's p_d when present,
  // otherwise --compare-pd, otherwise p_d = 1 (the compliant-side closed
  // forms do not depend on it).
  double pd = opt.compare_pd > 0.0 ? opt.compare_pd : 1.0;
  bool comparable = cfg.deviants.empty();
  if (cfg.deviants.size() == 1) {
    if (const auto* c = std::get_if<revmac::ConstantDeviant>(&cfg.deviants[0].policy)) {
      if (c->p_d > net.cooperation_prob) {
        pd = c->p_d;
        comparable = true;
      }
    }
  }

  json results{{"report", report}};
  if (comparable) {
    if (opt.signal == "private") {
      const auto analysis =
          revmac::analyze_private(std::get<revmac::PrivateReviewProtocol>(cfg.protocol), pd);
      results["analysis"] = analysis;
      results["comparison"] = revmac::compare_to_analytic(cfg, report, analysis);
    } else {
      const auto analysis =
          revmac::analyze_public(std::get<revmac::PublicReviewProtocol>(cfg.protocol), pd);
      results["analysis"] = analysis;
      results["comparison"] = revmac::compare_to_analytic(cfg, report, analysis);
    }
  } else {
    results["comparison"] = nullptr;
  }

  Output out;
  out.resolve(out_path, "simulate.json");
  json params{{"signal", opt.signal},
              {"n", net.n_nodes},
              {"pc", net.cooperation_prob},
              {"b", opt.b},
              {"l", opt.l},
              {"m", opt.m},
              {"epochs", opt.epochs},
              {"replications", opt.replications},
              {"deviants", opt.deviants}};
  json manifest = make_manifest("simulate", params, out);
  manifest["master_seed"] = opt.seed;
  emit_json(out, manifest, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis, design and simulation of review-strategy MAC protocols"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  // Let --out appear after the subcommand as well.
  app.fallthrough();

  std::string out_path;
  app.add_option("--out", out_path,
                 "output path ('-' = stdout; default honors REVMAC_OUTPUT_DIR)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "closed-form protocol analysis");
  NetOptions an_net;
  an_net.attach(analyze);
  std::string an_signal;
  double an_b = 0.0, an_pd = 0.0;
  long an_l = 0, an_m = 0;
  analyze->add_option("--signal", an_signal)->required()
      ->check(CLI::IsMember({"private", "public"}));
  analyze->add_option("--b", an_b, "test margin")->required();
  analyze->add_option("--l", an_l, "review length")->required();
  analyze->add_option("--m", an_m, "reciprocation/punishment length")->required();
  analyze->add_option("--pd", an_pd, "deviation probability")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "CSV curves over L or B");
  NetOptions sw_net;
  sw_net.attach(sweep);
  SweepOptions sw;
  sweep->add_option("--signal", sw.signal)->required()
      ->check(CLI::IsMember({"private", "public"}));
  sweep->add_option("--quantity", sw.quantity)
      ->check(CLI::IsMember({"pf", "pm", "g", "mmin", "loss", "all"}));
  sweep->add_option("--b", sw.b_text, "margin (scalar or start..end[:step])")->required();
  sweep->add_option("--l", sw.l_text, "review length (scalar or range)")->required();
  sweep->add_option("--pd", sw.pd, "deviation probability");
  sweep->add_option("--m", sw.m, "fixed reciprocation length (default ceil(M_min))");

  // design
  auto* design = app.add_subcommand("design", "complexity-constrained optimum");
  NetOptions de_net;
  de_net.attach(design);
  std::string de_signal = "private";
  std::string de_b;
  long de_budget = 0;
  double de_pd = 0.0;
  design->add_option("--signal", de_signal)->check(CLI::IsMember({"private"}));
  design->add_option("--b", de_b, "margin grid (comma list of scalars/ranges)")->required();
  design->add_option("--ns-budget", de_budget, "automaton state budget")->required();
  design->add_option("--pd", de_pd, "deviation probability")->required();

  // construct
  auto* construct = app.add_subcommand("construct", "robust protocol constructions");
  NetOptions co_net;
  co_net.attach(construct);
  std::string co_type;
  double co_eps = 0.0, co_delta = 0.0, co_beta = 1.0, co_rho = 0.75, co_mu = 0.0;
  long co_lcap = 5000;
  construct->add_option("--type", co_type)->required()
      ->check(CLI::IsMember({"robust-eps-dp", "eps-ne"}));
  construct->add_option("--eps", co_eps)->required();
  construct->add_option("--delta", co_delta)->required();
  construct->add_option("--l-cap", co_lcap, "review length cap (robust-eps-dp)");
  construct->add_option("--beta", co_beta, "schedule beta (eps-ne)");
  construct->add_option("--rho", co_rho, "schedule rho (eps-ne)");
  construct->add_option("--mu", co_mu, "schedule mu (eps-ne, default N)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "seeded slot-level simulation");
  NetOptions si_net;
  si_net.attach(simulate);
  SimulateOptions si;
  simulate->add_option("--signal", si.signal)->required()
      ->check(CLI::IsMember({"private", "public"}));
  simulate->add_option("--b", si.b)->required();
  simulate->add_option("--l", si.l)->required();
  simulate->add_option("--m", si.m)->required();
  simulate->add_option("--epochs", si.epochs);
  simulate->add_option("--seed", si.seed, "master seed")->required();
  simulate->add_option("--replications", si.replications);
  simulate->add_option("--threads", si.threads);
  simulate->add_option("--deviant", si.deviants,
                       "IDX:constant:PD | IDX:punish_aware:PD[:PR] | IDX:best_response");
  simulate->add_option("--compare-pd", si.compare_pd,
                       "p_d for the closed-form reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed())
      return run_analyze(an_signal, an_net, an_b, an_l, an_m, an_pd, out_path);
    if (sweep->parsed()) return run_sweep(sw, sw_net, out_path);
    if (design->parsed())
      return run_design(de_net, de_b, de_budget, de_pd, out_path);
    if (construct->parsed())
      return run_construct(co_net, co_type, co_eps, co_delta, co_lcap, co_beta,
                           co_rho, co_mu, out_path);
    if (simulate->parsed()) return run_simulate(si, si_net, out_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
