// rrl: command-line driver for certification, estimation and contract checks.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rrl/io.hpp"
#include "rrl/rrl.hpp"

#ifndef RRL_VERSION
#define RRL_VERSION "0.0.0"
#endif
#ifndef RRL_BUILD_REV
#define RRL_BUILD_REV "unknown"
#endif

namespace {

using json = nlohmann::json;

std::string fingerprint() { return std::string("rrl ") + RRL_VERSION + "+" + RRL_BUILD_REV; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flag values as strings, recorded only when given on the command line.
struct Flags {
  std::map<std::string, std::string> values;
  CLI::App* app = nullptr;

  void add(CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option_function<std::string>(
        "--" + name, [this, name](const std::string& v) { values[name] = v; }, help);
  }
};

/// Config-file keys overlaid by flags. Flag text is parsed as JSON when
/// possible so that '--class {"kind":"linear","d":2}' and '--m 100' both work.
json resolve(const json& file_cfg, const std::string& command, const Flags& flags) {
  json cfg = file_cfg.is_object() ? file_cfg : json::object();
  if (cfg.contains(command) && cfg[command].is_object()) {
    json section = cfg[command];
    cfg.erase(command);
    cfg.update(section);
  }
  for (const auto& [k, v] : flags.values) {
    json parsed = json::parse(v, nullptr, false);
    cfg[k] = parsed.is_discarded() ? json(v) : parsed;
  }
  return cfg;
}

template <class T>
T need(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw UsageError("missing required option --" + key);
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("bad value for --" + key);
  }
}

template <class T>
T opt(json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) {
    cfg[key] = fallback;
    return fallback;
  }
  return need<T>(cfg, key);
}

json need_json(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw UsageError("missing required option --" + key);
  const json& v = cfg.at(key);
  if (v.is_string()) {
    json parsed = json::parse(v.get<std::string>(), nullptr, false);
    if (parsed.is_discarded()) throw UsageError("--" + key + " must be JSON");
    return parsed;
  }
  return v;
}

std::optional<rrl::LossKind> parse_loss_or_none(const std::string& s) {
  if (s == "none") return std::nullopt;
  try {
    return rrl::parse_loss_kind(s);
  } catch (const rrl::error&) {
    throw UsageError("--loss must be ca, tl, st or none");
  }
}

rrl::LossKind parse_loss(const std::string& s) {
  try {
    return rrl::parse_loss_kind(s);
  } catch (const rrl::error&) {
    throw UsageError("--loss must be ca, tl or st");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  return f;
}

/// Config as embedded in artifacts: output paths and the worker count do not
/// affect results, so they are left out.
json embedded(json cfg) {
  for (const char* k : {"out", "curve-out", "jobs"}) cfg.erase(k);
  return cfg;
}

void csv_preamble(std::ostream& out, const json& cfg) {
  out << "# version: " << fingerprint() << '\n' << "# config: " << embedded(cfg).dump() << '\n';
}

rrl::HypothesisClass class_for(const json& cfg, std::size_t data_dim) {
  if (cfg.contains("class")) {
    auto c = rrl::io::class_from_json(need_json(cfg, "class"));
    if (c.dim() != data_dim) throw UsageError("class dimension does not match the data");
    return c;
  }
  if (data_dim == 1) return rrl::HypothesisClass::thresholds();
  return rrl::HypothesisClass::linear(data_dim);
}

int cmd_gen(json cfg) {
  const auto dist = rrl::io::distribution_from_json(need_json(cfg, "dist"));
  const auto hstar = rrl::io::hypothesis_from_json(need_json(cfg, "hstar"));
  const auto m = need<std::size_t>(cfg, "m");
  const auto seed = opt<std::uint64_t>(cfg, "seed", 0);
  const auto out_path = need<std::string>(cfg, "out");
  if (rrl::input_dimension(hstar) != dist.dim()) throw UsageError("hstar and dist dimensions differ");
  rrl::Dataset s(dist.dim());
  for (auto& x : rrl::sample(dist, rrl::derive_seed(seed, "gen"), m)) {
    const auto y = rrl::predict(hstar, x);
    s.add(std::move(x), y);
  }
  auto out = open_out(out_path);
  csv_preamble(out, cfg);
  rrl::io::write_dataset(out, s);
  return 0;
}

int cmd_certify(json cfg) {
  const auto data = rrl::io::load_dataset(need<std::string>(cfg, "data"));
  const auto points = rrl::io::load_points(need<std::string>(cfg, "points"));
  const auto kind = parse_loss(opt<std::string>(cfg, "loss", "st"));
  const auto seed = opt<std::uint64_t>(cfg, "seed", 0);
  const auto out_path = need<std::string>(cfg, "out");
  const auto cls = class_for(cfg, data.dim());
  cfg["class"] = rrl::io::class_json(cls);
  rrl::FitOptions fo;
  fo.force_cone = opt<bool>(cfg, "force-cone", false);
  rrl::CertifyOptions co;
  co.constancy_samples = opt<std::size_t>(cfg, "constancy-samples", 64);
  co.constancy_seed = rrl::derive_seed(seed, "constancy");
  const auto vs = rrl::fit_version_space(data, cls, fo);
  json certs = json::array();
  for (const auto& z : points) {
    if (z.dim() != data.dim()) throw UsageError("point dimension does not match the data");
    certs.push_back(rrl::io::certificate_json(z, rrl::certify(vs, z, kind, co), seed));
  }
  json doc{{"version", fingerprint()}, {"config", embedded(cfg)}, {"certificates", certs}};
  auto out = open_out(out_path);
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_sr_mass(json cfg) {
  const auto cls = rrl::io::class_from_json(need_json(cfg, "class"));
  const auto hstar = rrl::io::hypothesis_from_json(need_json(cfg, "hstar"));
  const auto dist = rrl::io::distribution_from_json(need_json(cfg, "dist"));
  const auto m = need<std::size_t>(cfg, "m");
  const auto eta1 = opt<double>(cfg, "eta1", 0.0);
  const auto eta2 = opt<double>(cfg, "eta2", 0.0);
  const auto loss = opt<std::string>(cfg, "loss", "st");
  const auto trials = opt<std::size_t>(cfg, "trials", 10);
  const auto n = opt<std::size_t>(cfg, "n", 1000);
  const auto seed = opt<std::uint64_t>(cfg, "seed", 0);
  const auto jobs = opt<std::size_t>(cfg, "jobs", 1);
  const auto out_path = need<std::string>(cfg, "out");
  const auto est = rrl::sr_mass(cls, hstar, dist, m, eta1, eta2, parse_loss(loss), trials, n, seed, jobs);
  auto out = open_out(out_path);
  csv_preamble(out, cfg);
  out << rrl::io::kEstimateHeader << '\n'
      << rrl::io::format_row({"sr_mass", std::string(rrl::to_string(cls.kind())), loss, eta1, eta2, m, cls.dim(),
                              trials, est})
      << '\n';
  return 0;
}

int cmd_shift(json cfg) {
  const auto cls = rrl::io::class_from_json(need_json(cfg, "class"));
  const auto hstar = rrl::io::hypothesis_from_json(need_json(cfg, "hstar"));
  const auto p = rrl::io::distribution_from_json(need_json(cfg, "p"));
  const auto q = rrl::io::distribution_from_json(need_json(cfg, "q"));
  const auto m = need<std::size_t>(cfg, "m");
  const auto eta1 = opt<double>(cfg, "eta1", 0.0);
  const auto eta2 = opt<double>(cfg, "eta2", 0.0);
  const auto loss = opt<std::string>(cfg, "loss", "none");
  const auto trials = opt<std::size_t>(cfg, "trials", 10);
  const auto n = opt<std::size_t>(cfg, "n", 1000);
  const auto seed = opt<std::uint64_t>(cfg, "seed", 0);
  const auto jobs = opt<std::size_t>(cfg, "jobs", 1);
  const auto out_path = need<std::string>(cfg, "out");
  rrl::ShiftConfig sc{cls, hstar, p, q, m, trials, n, eta1, eta2, parse_loss_or_none(loss), seed, jobs, {}};
  const auto est = rrl::reliable_correctness(sc);
  auto out = open_out(out_path);
  csv_preamble(out, cfg);
  out << rrl::io::kEstimateHeader << '\n'
      << rrl::io::format_row({sc.kind ? "pq_safely_reliable" : "reliable_correctness",
                              std::string(rrl::to_string(cls.kind())), loss, eta1, eta2, m, cls.dim(), trials, est})
      << '\n';
  return 0;
}

int cmd_theta(json cfg) {
  const auto cls = rrl::io::class_from_json(need_json(cfg, "class"));
  const auto hstar = rrl::io::hypothesis_from_json(need_json(cfg, "hstar"));
  const auto p = rrl::io::distribution_from_json(need_json(cfg, "p"));
  const auto q = rrl::io::distribution_from_json(need_json(cfg, "q"));
  rrl::ThetaConfig tc{cls, hstar, p, q};
  tc.epsilon = opt<double>(cfg, "epsilon", 0.01);
  tc.n = opt<std::size_t>(cfg, "n", 100000);
  tc.seed = opt<std::uint64_t>(cfg, "seed", 0);
  if (cfg.contains("r-grid")) tc.r_grid = need<std::vector<double>>(cfg, "r-grid");
  const auto out_path = need<std::string>(cfg, "out");
  const auto curve_path = opt<std::string>(cfg, "curve-out", "");
  const auto est = rrl::theta_pq(tc);
  auto out = open_out(out_path);
  csv_preamble(out, cfg);
  out << "quantity,class,path,epsilon,grid_points,grid_resolution,n,theta,seed\n"
      << "theta," << rrl::to_string(cls.kind()) << ',' << rrl::to_string(est.path) << ','
      << rrl::io::format_double(est.epsilon) << ',' << est.r_grid.size() << ','
      << rrl::io::format_double(est.grid_resolution) << ',' << est.n << ',' << rrl::io::format_double(est.value)
      << ',' << est.seed << '\n';
  if (!curve_path.empty()) {
    auto curve = open_out(curve_path);
    csv_preamble(curve, cfg);
    curve << "r,mass,ci_low,ci_high,ratio\n";
    for (std::size_t i = 0; i < est.r_grid.size(); ++i) {
      const auto& e = est.masses[i];
      curve << rrl::io::format_double(est.r_grid[i]) << ',' << rrl::io::format_double(e.mass) << ','
            << rrl::io::format_double(e.ci_low) << ',' << rrl::io::format_double(e.ci_high) << ','
            << rrl::io::format_double(e.mass / est.r_grid[i]) << '\n';
    }
  }
  return 0;
}

int cmd_attack_verify(json cfg) {
  const auto cls = rrl::io::class_from_json(need_json(cfg, "class"));
  const auto hstar = rrl::io::hypothesis_from_json(need_json(cfg, "hstar"));
  const auto dist = rrl::io::distribution_from_json(need_json(cfg, "dist"));
  rrl::ContractConfig cc{cls, hstar, dist};
  cc.m = opt<std::size_t>(cfg, "m", 100);
  cc.trials = opt<std::size_t>(cfg, "trials", 1000);
  cc.budget = opt<double>(cfg, "budget", 1.0);
  cc.kind = parse_loss(opt<std::string>(cfg, "loss", "st"));
  try {
    cc.strategy = rrl::parse_attack_strategy(opt<std::string>(cfg, "strategy", "boundary-directed"));
  } catch (const rrl::domain_error& e) {
    throw UsageError(e.what());
  }
  cc.seed = opt<std::uint64_t>(cfg, "seed", 0);
  cc.jobs = opt<std::size_t>(cfg, "jobs", 1);
  const auto out_path = need<std::string>(cfg, "out");
  const auto rep = rrl::verify_contract(cc);
  json witnesses = json::array();
  for (const auto& w : rep.witnesses) {
    witnesses.push_back({{"trial", w.trial},
                         {"trial_seed", w.trial_seed},
                         {"x", w.x.values()},
                         {"z", w.z.values()},
                         {"distance", w.distance},
                         {"certificate", rrl::io::certificate_json(w.z, w.certificate, w.trial_seed)},
                         {"erm", rrl::io::hypothesis_json(w.erm)}});
  }
  json doc{{"version", fingerprint()},
           {"config", embedded(cfg)},
           {"report",
            {{"trials", rep.trials},
             {"certified", rep.certified},
             {"violations", rep.violations},
             {"witnesses", witnesses}}}};
  auto out = open_out(out_path);
  out << doc.dump(2) << '\n';
  std::cout << "trials=" << rep.trials << " certified=" << rep.certified << " violations=" << rep.violations
            << '\n';
  return rep.violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustly-reliable learning: certificates, region estimates and contract checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fingerprint());
  std::string config_path;
  app.add_option("--config", config_path, "JSON config; flags override its values")->check(CLI::ExistingFile);

  const std::map<std::string, std::string> help{
      {"dist", "distribution JSON, e.g. {\"kind\":\"gaussian\",\"d\":2}"},
      {"p", "source distribution JSON"},
      {"q", "target distribution JSON"},
      {"hstar", "target hypothesis JSON"},
      {"class", "hypothesis class JSON"},
      {"m", "training sample size"},
      {"n", "test draws per trial (theta: Q draws)"},
      {"trials", "independent training sets / attack trials"},
      {"eta1", "perturbation radius of the test point"},
      {"eta2", "extra radius required around the perturbed point"},
      {"loss", "ca, tl or st (shift also accepts none)"},
      {"data", "training dataset CSV (x1,...,xd,label)"},
      {"points", "query points CSV (x1,...,xd)"},
      {"force-cone", "use the cone representation for 2-D linear classes"},
      {"constancy-samples", "ball samples for the ST label-constancy self-check"},
      {"epsilon", "smallest radius of the theta grid"},
      {"r-grid", "explicit radii as a JSON array"},
      {"curve-out", "per-radius curve CSV"},
      {"budget", "attack budget"},
      {"strategy", "boundary-directed, random-ball or grid"},
  };
  auto add_flags = [&](CLI::App* sub, std::initializer_list<const char*> keys, Flags& f) {
    for (const char* k : keys) f.add(sub, k, help.at(k));
  };
  Flags flags;
  flags.app = &app;
  auto add_common = [&](CLI::App* sub) {
    flags.add(sub, "seed", "base seed; all randomness derives from it");
    flags.add(sub, "jobs", "worker threads (results do not depend on it)");
    flags.add(sub, "out", "output path");
  };

  struct Sub {
    CLI::App* app;
    int (*run)(json);
  };
  std::vector<std::pair<std::string, Sub>> subs;

  auto* gen = app.add_subcommand("gen", "sample a labeled dataset");
  add_common(gen);
  add_flags(gen, {"dist", "hstar", "m"}, flags);
  subs.push_back({"gen", {gen, cmd_gen}});

  auto* cert = app.add_subcommand("certify", "certificates for query points");
  add_common(cert);
  add_flags(cert, {"data", "points", "loss", "class", "force-cone", "constancy-samples"}, flags);
  subs.push_back({"certify", {cert, cmd_certify}});

  auto* srm = app.add_subcommand("sr-mass", "safely-reliable region mass");
  add_common(srm);
  add_flags(srm, {"class", "hstar", "dist", "m", "eta1", "eta2", "loss", "trials", "n"}, flags);
  subs.push_back({"sr-mass", {srm, cmd_sr_mass}});

  auto* th = app.add_subcommand("theta", "disagreement coefficient between two distributions");
  add_common(th);
  add_flags(th, {"class", "hstar", "p", "q", "epsilon", "n", "r-grid", "curve-out"}, flags);
  subs.push_back({"theta", {th, cmd_theta}});

  auto* sh = app.add_subcommand("shift", "reliable correctness under distribution shift");
  add_common(sh);
  add_flags(sh, {"class", "hstar", "p", "q", "m", "eta1", "eta2", "loss", "trials", "n"}, flags);
  subs.push_back({"shift", {sh, cmd_shift}});

  auto* av = app.add_subcommand("attack-verify", "adversarial check of the certificate contract");
  add_common(av);
  add_flags(av, {"class", "hstar", "dist", "m", "trials", "budget", "loss", "strategy"}, flags);
  subs.push_back({"attack-verify", {av, cmd_attack_verify}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json file_cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      file_cfg = json::parse(f, nullptr, false);
      if (file_cfg.is_discarded() || !file_cfg.is_object()) throw UsageError("config must be a JSON object");
    }
    for (auto& [name, sub] : subs) {
      if (sub.app->parsed()) {
        json cfg = resolve(file_cfg, name, flags);
        cfg["command"] = name;
        return sub.run(cfg);
      }
    }
  } catch (const rrl::invariant_violation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
