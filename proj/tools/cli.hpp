#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "payofflab/payofflab.hpp"

namespace payofflab::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kInfeasible = 2, kConvergence = 3 };

inline constexpr std::uint64_t kFallbackSeed = 12345;
inline constexpr const char* kSeedEnv = "PAYOFFLAB_SEED";

inline double parse_double(std::string_view text, const std::string& what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
    throw ValidationError(what + ": '" + std::string(text) + "' is not a finite number");
  return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_double(std::string_view(text).substr(start, comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline Vec4 parse_vec4(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.size() != 4) throw ValidationError(what + " needs 4 comma-separated values, got " + std::to_string(v.size()));
  return {v[0], v[1], v[2], v[3]};
}

inline GameParams parse_game(const std::string& text) {
  const Vec4 v = parse_vec4(text, "--game");
  GameParams g{v[0], v[1], v[2], v[3]};
  g.validate();
  return g;
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw ValidationError(what + ": '" + text + "' is not an unsigned 64-bit integer");
  return v;
}

inline std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return kFallbackSeed;
  return parse_seed(env, kSeedEnv);
}

// Every flag of every subcommand binds into this one struct; only one
// subcommand runs per invocation.
struct Options {
  std::string game;
  std::string p;
  std::optional<double> p0;
  std::string zd;
  std::string equalizer;
  std::string q;
  std::string q0;
  std::optional<double> discount;

  double kappa = 0, chi = 1, phi = 0;
  double p_cc = 0, p_dd = 0;
  double eps = 0.01, tol = 1e-9;
  std::int64_t samples = 0;
  std::optional<std::int64_t> q0_index;

  LearnerConfig learner;
  std::string lrs_boundary = "clamp";
  std::string learner_kind = "pga";

  std::string chi_values = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20";
  int phi_count = 5;
  std::vector<std::string> p_set;
  std::vector<std::string> games;
  std::string radii;
  bool from_pczd = false;
  std::int64_t pczd_samples = 100;
  std::int64_t n_p = 50;
  double tremble = 1e-3;
  int bins = 100;

  std::uint64_t seed = kFallbackSeed;
  unsigned threads = 1;
  std::string format = "json";
  std::string out;
  std::string csv;
  std::string clusters_csv;
  std::string svg;
};

struct Result {
  json body = json::object();
  std::string csv;  // primary tabular form, if the command has one
  std::string svg;
};

class Dispatcher {
public:
  Dispatcher(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    o_.seed = kFallbackSeed;
    build();
  }

  int run(int argc, const char* const* argv) {
    try {
      o_.seed = default_seed();
    } catch (const ValidationError& e) {
      err_ << "error: " << e.what() << '\n';
      return kUsage;
    }
    try {
      app_.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app_.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app_.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n\n" << usage_for_error() << '\n';
      return kUsage;
    }
    if (!handler_) {
      err_ << app_.help();
      return kUsage;
    }
    try {
      o_.learner.lrs_boundary = parse_boundary(o_.lrs_boundary);
      Result r = handler_();
      emit(r);
      return kOk;
    } catch (const InfeasibleError& e) {
      err_ << "infeasible: " << e.what() << '\n';
      return kInfeasible;
    } catch (const DivisionByZeroError& e) {
      err_ << "infeasible: " << e.what() << '\n';
      return kInfeasible;
    } catch (const ConvergenceError& e) {
      err_ << "convergence failure: " << e.what() << '\n';
      return kConvergence;
    } catch (const DegenerateChainError& e) {
      err_ << "convergence failure: " << e.what() << '\n';
      return kConvergence;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kUsage;
    }
  }

private:
  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  CLI::App app_{"Memory-one iterated games: payoffs, ZD strategies, feasible regions and selfish learners",
                "payofflab"};
  std::function<Result()> handler_;
  std::vector<std::pair<CLI::App*, std::string>> leaves_;  // leaf subcommand and its dotted path

  static LrsBoundary parse_boundary(const std::string& s) {
    if (s == "clamp") return LrsBoundary::Clamp;
    if (s == "truncate") return LrsBoundary::Truncate;
    throw ValidationError("--lrs-boundary must be clamp or truncate");
  }

  std::string usage_for_error() const {
    for (const auto& [leaf, path] : leaves_)
      if (leaf->parsed()) return leaf->help();
    return app_.help();
  }

  CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& desc, const std::string& path,
                 std::function<Result()> fn) {
    CLI::App* sub = parent->add_subcommand(name, desc);
    sub->configurable();
    sub->callback([this, fn] { handler_ = fn; });
    leaves_.emplace_back(sub, path);
    add_output(sub);
    return sub;
  }

  CLI::App* group(const std::string& name, const std::string& desc) {
    CLI::App* sub = app_.add_subcommand(name, desc);
    sub->configurable();
    sub->require_subcommand(1);
    return sub;
  }

  void add_output(CLI::App* s) {
    s->add_option("--seed", o_.seed, "master seed (default: $PAYOFFLAB_SEED or 12345)");
    s->add_option("--format", o_.format, "stdout/--out format")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--out", o_.out, "write the report here instead of stdout");
  }

  void add_game(CLI::App* s, bool required = true) {
    auto* opt = s->add_option("--game", o_.game, "payoffs R,S,T,P");
    if (required) opt->required();
  }

  void add_strategy(CLI::App* s) {
    auto* p = s->add_option("--p", o_.p, "fixed strategy p_cc,p_cd,p_dc,p_dd");
    auto* z = s->add_option("--zd", o_.zd, "ZD parameters kappa,chi,phi");
    auto* e = s->add_option("--equalizer", o_.equalizer, "equalizer parameters p_cc,p_dd");
    p->excludes(z)->excludes(e);
    z->excludes(e);
    s->add_option("--p0", o_.p0, "first-round cooperation probability of X");
  }

  void add_learner(CLI::App* s) {
    s->add_option("--eta", o_.learner.learning_rate, "PGA learning rate");
    s->add_option("--payoff-tol", o_.learner.payoff_tolerance, "PGA stopping tolerance on |delta pi_Y|");
    s->add_option("--max-iter", o_.learner.max_iterations, "iteration cap");
    s->add_option("--tremble", o_.learner.tremble, "trembling-hand error rate");
    s->add_option("--radius", o_.learner.lrs_radius, "LRS sampling radius");
    s->add_option("--patience", o_.learner.lrs_patience, "LRS rejections before stopping");
    s->add_option("--discount", o_.learner.lrs_discount, "LRS discount factor");
    s->add_option("--lrs-boundary", o_.lrs_boundary, "LRS proposal boundary rule")
        ->check(CLI::IsMember({"clamp", "truncate"}));
    s->add_option("--record-every", o_.learner.record_every, "keep every k-th trajectory record");
    s->add_option("--stall-window", o_.learner.stall_window, "consecutive near-flat PGA steps that stop a run");
  }

  void add_threads(CLI::App* s) { s->add_option("--threads", o_.threads, "worker threads (0 = all cores)"); }

  // Subcommands share o_.samples, so the default is reset when the
  // subcommand is selected rather than when the parser is built.
  void add_samples(CLI::App* s, const std::string& help, std::int64_t def) {
    s->add_option("--samples", o_.samples, help)->default_str(std::to_string(def));
    s->preparse_callback([this, def](std::size_t) { o_.samples = def; });
  }

  void build() {
    app_.set_config("--config", "", "TOML/INI file; flags given on the command line override it");
    app_.require_subcommand(0, 1);
    app_.option_defaults()->always_capture_default();
    app_.set_help_all_flag("--help-all", "expand help for all subcommands");

    auto* c = leaf(&app_, "payoff", "long-run payoffs of p against q", "payoff", [this] { return cmd_payoff(); });
    add_game(c);
    add_strategy(c);
    c->add_option("--q", o_.q, "co-player strategy")->required();
    c->add_option("--discount", o_.discount, "discount factor; omit for the long-run average");

    c = leaf(&app_, "gradient", "exact gradient of both payoffs with respect to q", "gradient",
             [this] { return cmd_gradient(); });
    add_game(c);
    add_strategy(c);
    c->add_option("--q", o_.q, "co-player strategy")->required();

    auto* zd = group("zd", "zero-determinant strategies");
    c = leaf(zd, "make", "build p from (kappa, chi, phi)", "zd.make", [this] { return cmd_zd_make(); });
    add_game(c);
    c->add_option("--kappa", o_.kappa)->required();
    c->add_option("--chi", o_.chi)->required();
    c->add_option("--phi", o_.phi)->required();
    c = leaf(zd, "check", "verify the enforced relation against random co-players", "zd.check",
             [this] { return cmd_zd_check(); });
    add_game(c);
    c->add_option("--kappa", o_.kappa)->required();
    c->add_option("--chi", o_.chi)->required();
    c->add_option("--phi", o_.phi, "build p from (kappa, chi, phi)");
    c->add_option("--p", o_.p, "check an explicit strategy instead");
    c->add_option("--q", o_.q, "check a single co-player strategy");
    add_samples(c, "random interior co-players", 1000);
    c->add_option("--tol", o_.tol, "residual tolerance");

    auto* eq = group("equalizer", "strategies that fix the co-player's payoff");
    c = leaf(eq, "make", "build an equalizer from p_cc and p_dd", "equalizer.make",
             [this] { return cmd_equalizer_make(); });
    add_game(c);
    c->add_option("--pcc", o_.p_cc)->required();
    c->add_option("--pdd", o_.p_dd)->required();
    c = leaf(eq, "test", "decide whether p is an equalizer", "equalizer.test", [this] { return cmd_equalizer_test(); });
    add_game(c);
    add_strategy(c);
    c->add_option("--eps", o_.eps, "vertex buffer");
    c->add_option("--tol", o_.tol, "allowed payoff spread");

    c = leaf(&app_, "conditions", "sufficient conditions for a non-negative payoff gradient", "conditions",
             [this] { return cmd_conditions(); });
    add_game(c);
    c->add_option("--p", o_.p, "strategy to check");
    c->add_option("--chi", o_.chi, "slope of a pcZD strategy")->default_str("");
    c->add_option("--zd", o_.zd, "ZD parameters kappa,chi,phi");

    c = leaf(&app_, "region", "feasible payoff region against p", "region", [this] { return cmd_region(); });
    add_game(c);
    add_strategy(c);
    c->add_option("--csv", o_.csv, "write candidate points as CSV");

    for (const char* name : {"pga", "lrs"}) {
      const bool pga = std::string(name) == "pga";
      c = leaf(&app_, name, pga ? "projected gradient ascent" : "local random search", name,
               [this, pga] { return cmd_learn(pga ? LearnerKind::PGA : LearnerKind::LRS); });
      add_game(c);
      add_strategy(c);
      add_learner(c);
      c->add_option("--q0", o_.q0, "initial strategy; default is an arcsine draw");
      c->add_option("--q0-index", o_.q0_index, "stream index of the arcsine draw");
      c->add_option("--csv", o_.csv, "write the trajectory as CSV");
      c->add_option("--svg", o_.svg, "write the trajectory as SVG");
    }

    auto* sw = group("sweep", "batch experiments");
    c = leaf(sw, "endpoints", "endpoint census over arcsine initial strategies", "sweep.endpoints",
             [this] { return cmd_sweep_endpoints(); });
    add_game(c);
    add_strategy(c);
    add_learner(c);
    add_threads(c);
    c->add_option("--learner", o_.learner_kind)->check(CLI::IsMember({"pga", "lrs"}));
    add_samples(c, "number of initial strategies", 10000);
    c->add_option("--csv", o_.csv, "write per-run CSV");
    c->add_option("--clusters-csv", o_.clusters_csv, "write cluster CSV");
    c->add_option("--svg", o_.svg, "write heatmap SVG");
    c->add_option("--bins", o_.bins, "heatmap bins per axis");

    c = leaf(sw, "pczd", "endpoint censuses over a (chi, phi) grid of pcZD strategies", "sweep.pczd",
             [this] { return cmd_sweep_pczd(); });
    add_game(c);
    add_learner(c);
    add_threads(c);
    c->add_option("--chi-values", o_.chi_values, "comma-separated chi values");
    c->add_option("--phi-count", o_.phi_count, "phi values per chi");
    add_samples(c, "initial strategies per cell", 100);

    c = leaf(sw, "noise", "LRS performance against sampling radius", "sweep.noise", [this] { return cmd_sweep_noise(); });
    add_game(c);
    add_learner(c);
    add_threads(c);
    c->add_option("--p", o_.p_set, "fixed strategy (repeatable)");
    c->add_option("--from-pczd", o_.from_pczd, "use the multi-endpoint cells of a pcZD sweep");
    c->add_option("--pczd-samples", o_.pczd_samples, "initial strategies per pcZD cell");
    c->add_option("--chi-values", o_.chi_values, "chi grid for --from-pczd");
    c->add_option("--phi-count", o_.phi_count, "phi values per chi for --from-pczd");
    c->add_option("--radii", o_.radii, "comma-separated radii (default: 10 values from 0.01 to 0.5)");
    add_samples(c, "initial strategies per radius", 200);

    c = leaf(sw, "tremble", "PGA with a trembling hand against arcsine fixed strategies", "sweep.tremble",
             [this] { return cmd_sweep_tremble(); });
    c->add_option("--game", o_.games, "payoffs R,S,T,P (repeatable)")->required();
    add_learner(c);
    add_threads(c);
    c->add_option("--n-p", o_.n_p, "fixed strategies per game");
    add_samples(c, "initial strategies per fixed strategy", 50);
    c->add_option("--error-rate", o_.tremble, "trembling-hand error rate");

    auto* rep = group("replicate", "bundled parameter sets");
    for (const char* fig : {"fig1f", "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5"}) {
      const std::string name = fig;
      c = leaf(rep, name, "replicate " + name, "replicate." + name, [this, name] { return cmd_replicate(name); });
      add_threads(c);
      add_samples(c, "sample count (0 = bundled default)", 0);
      c->add_option("--csv", o_.csv, "write per-run or trajectory CSV");
      c->add_option("--clusters-csv", o_.clusters_csv, "write cluster CSV");
      c->add_option("--svg", o_.svg, "write SVG");
      c->add_option("--bins", o_.bins, "heatmap bins per axis");
    }
  }

  // Effective configuration of the selected subcommand, loadable with --config.
  std::string config_text() const {
    for (const auto& [leaf, path] : leaves_) {
      if (!leaf->parsed()) continue;
      std::string head;
      std::string prefix;
      std::size_t start = 0;
      while (true) {
        const auto dot = path.find('.', start);
        prefix = path.substr(0, dot);
        head += "[" + prefix + "]\n";
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
      return head + options_text(leaf);
    }
    return {};
  }

  static std::string quoted(const std::string& v) {
    std::string out = "\"";
    for (char ch : v) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "\"";
  }

  // One key per line: given values, otherwise non-empty defaults. The seed is
  // always written since it may come from the environment; the thread count
  // is left out because it never changes results.
  std::string options_text(const CLI::App* leaf) const {
    std::string text;
    for (const CLI::Option* opt : leaf->get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "help-all" || name == "threads" || !opt->get_configurable()) continue;
      if (name == "seed") {
        text += "seed=" + std::to_string(o_.seed) + "\n";
        continue;
      }
      if (opt->count() > 0) {
        const auto& res = opt->results();
        if (opt->get_expected_max() > 1 || res.size() > 1) {
          text += name + "=[";
          for (std::size_t i = 0; i < res.size(); ++i) text += (i ? "," : "") + quoted(res[i]);
          text += "]\n";
        } else {
          text += name + "=" + quoted(res.empty() ? std::string() : res.front()) + "\n";
        }
      } else if (!opt->get_default_str().empty()) {
        text += name + "=" + quoted(opt->get_default_str()) + "\n";
      }
    }
    return text;
  }

  std::string selected_path() const {
    for (const auto& [leaf, path] : leaves_)
      if (leaf->parsed()) return path;
    return {};
  }

  void emit(Result& r) {
    const std::string config = config_text();
    r.body["command"] = selected_path();
    r.body["seed"] = o_.seed;
    r.body["config"] = config;

    std::string text;
    if (o_.format == "json") {
      text = r.body.dump(2) + "\n";
    } else {
      if (r.csv.empty()) throw ValidationError("this command has no CSV form; use --format json");
      text = csv_header(config) + r.csv;
    }
    if (o_.out.empty()) {
      out_ << text;
    } else {
      report::write_text(o_.out, text);
    }
  }

  std::string csv_header(const std::string& config) const {
    std::ostringstream os;
    os << "# command: " << selected_path() << "\n# seed: " << o_.seed << '\n';
    std::istringstream in(config);
    for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
    return os.str();
  }

  void write_csv_file(const std::string& path, const std::string& body) const {
    if (!path.empty()) report::write_text(path, csv_header(config_text()) + body);
  }

  // ---- strategy sources ----

  struct Fixed {
    MemoryOneStrategy p;
    json source;
    std::optional<ZDParams> zd;
  };

  Fixed fixed_strategy(const GameParams& g) const {
    const int given = int(!o_.p.empty()) + int(!o_.zd.empty()) + int(!o_.equalizer.empty());
    if (given != 1) throw ValidationError("give exactly one of --p, --zd, --equalizer");
    Fixed f;
    if (!o_.p.empty()) {
      f.p = validate_strategy(parse_vec4(o_.p, "--p"), o_.p0);
      f.source = {{"kind", "explicit"}};
    } else if (!o_.zd.empty()) {
      const auto v = parse_list(o_.zd, "--zd");
      if (v.size() != 3) throw ValidationError("--zd needs kappa,chi,phi");
      ZDParams zp{v[0], v[1], v[2]};
      f.p = MemoryOneStrategy::unchecked(zd_strategy(g, zp).probs(), o_.p0);
      f.zd = zp;
      f.source = {{"kind", "zd"}, {"kappa", zp.kappa}, {"chi", zp.chi}, {"phi", zp.phi}};
    } else {
      const auto v = parse_list(o_.equalizer, "--equalizer");
      if (v.size() != 2) throw ValidationError("--equalizer needs p_cc,p_dd");
      const Equalizer e = equalizer_strategy(g, v[0], v[1]);
      f.p = MemoryOneStrategy::unchecked(e.strategy.probs(), o_.p0);
      f.source = {{"kind", "equalizer"}, {"p_cc", v[0]}, {"p_dd", v[1]}, {"enforced_value", e.enforced_value}};
    }
    f.source["p"] = report::vec_json(f.p.probs());
    return f;
  }

  // ---- commands ----

  Result cmd_payoff() {
    const GameParams g = parse_game(o_.game);
    const Fixed f = fixed_strategy(g);
    const MemoryOneStrategy q = validate_strategy(parse_vec4(o_.q, "--q"));
    Result r;
    PayoffPair pay;
    if (o_.discount) {
      pay = discounted_payoffs(f.p, q, g, InitialDistribution::from_strategies(f.p, q), *o_.discount);
      r.body["method"] = "discounted";
      r.body["discount"] = *o_.discount;
    } else {
      pay = press_dyson_payoff(f.p, q, g);
      r.body["method"] = "press_dyson";
    }
    r.body.update(report::payoff_json(pay));
    r.body["game"] = report::game_json(g);
    r.body["strategy"] = f.source;
    r.body["q"] = report::vec_json(q.probs());
    r.csv = "pi_y,pi_x,pi_y_2dp,pi_x_2dp\n" + report::fmt17(pay.pi_y) + "," + report::fmt17(pay.pi_x) + "," +
            report::fmt2(pay.pi_y) + "," + report::fmt2(pay.pi_x) + "\n";
    return r;
  }

  Result cmd_gradient() {
    const GameParams g = parse_game(o_.game);
    const Fixed f = fixed_strategy(g);
    const MemoryOneStrategy q = validate_strategy(parse_vec4(o_.q, "--q"));
    const PayoffGradient grad = payoff_gradient(f.p, q, g);
    Result r;
    r.body = {{"d_pi_y", report::vec_json(grad.d_pi_y)},
              {"d_pi_x", report::vec_json(grad.d_pi_x)},
              {"max_norm", grad.max_norm()},
              {"game", report::game_json(g)},
              {"strategy", f.source},
              {"q", report::vec_json(q.probs())}};
    std::ostringstream os;
    os << "component,d_pi_y,d_pi_x\n";
    for (int i = 0; i < 4; ++i)
      os << "q_" << kStateNames[i] << ',' << report::fmt17(grad.d_pi_y[i]) << ',' << report::fmt17(grad.d_pi_x[i])
         << '\n';
    r.csv = os.str();
    return r;
  }

  Result cmd_zd_make() {
    const GameParams g = parse_game(o_.game);
    const ZDParams zp{o_.kappa, o_.chi, o_.phi};
    const MemoryOneStrategy p = zd_strategy(g, zp);
    Result r;
    r.body = {{"p", report::vec_json(p.probs())},
              {"kappa", zp.kappa},
              {"chi", zp.chi},
              {"phi", zp.phi},
              {"game", report::game_json(g)}};
    try {
      r.body["phi_max"] = phi_max(g, zp.kappa, zp.chi);
    } catch (const InfeasibleError&) {
      r.body["phi_max"] = nullptr;
    }
    std::ostringstream os;
    os << "p_cc,p_cd,p_dc,p_dd\n";
    for (int i = 0; i < 4; ++i) os << (i ? "," : "") << report::fmt17(p[i]);
    os << '\n';
    r.csv = os.str();
    return r;
  }

  Result cmd_zd_check() {
    const GameParams g = parse_game(o_.game);
    ZDParams zp{o_.kappa, o_.chi, o_.phi};
    MemoryOneStrategy p;
    if (!o_.p.empty()) {
      p = validate_strategy(parse_vec4(o_.p, "--p"));
    } else {
      p = zd_strategy(g, zp);
    }
    double worst = 0;
    std::int64_t checked = 0;
    if (!o_.q.empty()) {
      worst = zd_relation_residual(p, zp, validate_strategy(parse_vec4(o_.q, "--q")), g);
      checked = 1;
    } else {
      if (o_.samples < 1) throw ValidationError("--samples must be at least 1");
      for (std::int64_t i = 0; i < o_.samples; ++i) {
        Rng rng = Rng::stream(o_.seed, static_cast<std::uint64_t>(i));
        Vec4 q;
        for (double& x : q) x = rng.uniform_open();
        worst = std::max(worst, zd_relation_residual(p, zp, MemoryOneStrategy::unchecked(q), g));
        ++checked;
      }
    }
    Result r;
    r.body = {{"p", report::vec_json(p.probs())}, {"kappa", zp.kappa},  {"chi", zp.chi},
              {"checked", checked},               {"max_residual", worst}, {"tolerance", o_.tol},
              {"holds", worst < o_.tol}};
    return r;
  }

  Result cmd_equalizer_make() {
    const GameParams g = parse_game(o_.game);
    const Equalizer e = equalizer_strategy(g, o_.p_cc, o_.p_dd);
    Result r;
    r.body = {{"p", report::vec_json(e.strategy.probs())},
              {"enforced_value", e.enforced_value},
              {"p_cc", o_.p_cc},
              {"p_dd", o_.p_dd},
              {"game", report::game_json(g)}};
    return r;
  }

  Result cmd_equalizer_test() {
    const GameParams g = parse_game(o_.game);
    const Fixed f = fixed_strategy(g);
    const auto vals = buffered_vertex_payoffs(f.p.probs(), g, o_.eps);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    Result r;
    r.body = {{"strategy", f.source},
              {"is_equalizer", is_equalizer(f.p, g, o_.eps, o_.tol)},
              {"vertex_spread", *hi - *lo},
              {"eps", o_.eps},
              {"tolerance", o_.tol}};
    if (const auto e0 = equalizer_e0_solve(f.p.probs(), g)) {
      r.body["e0"] = {{"beta", e0->beta}, {"gamma", e0->gamma}};
    } else {
      r.body["e0"] = nullptr;
    }
    return r;
  }

  Result cmd_conditions() {
    const GameParams g = parse_game(o_.game);
    std::optional<Vec4> p;
    std::optional<double> chi;
    if (!o_.zd.empty()) {
      const auto v = parse_list(o_.zd, "--zd");
      if (v.size() != 3) throw ValidationError("--zd needs kappa,chi,phi");
      p = zd_strategy(g, {v[0], v[1], v[2]}).probs();
      chi = v[1];
    } else if (!o_.p.empty()) {
      p = validate_strategy(parse_vec4(o_.p, "--p")).probs();
    }
    if (!chi && app_.get_subcommand("conditions")->count("--chi") > 0) chi = o_.chi;
    const ConditionReport c = chen_zinger_conditions(g, p, chi);
    auto opt = [](const auto& v) -> json {
      if (v) return *v;
      return nullptr;
    };
    Result r;
    r.body = {{"rescaled_s", c.rescaled_s},
              {"rescaled_t", c.rescaled_t},
              {"rescaled_sum", c.rescaled_s + c.rescaled_t},
              {"sum_in_range", c.sum_in_range},
              {"cc_at_least_cd", opt(c.cc_at_least_cd)},
              {"dc_at_least_dd", opt(c.dc_at_least_dd)},
              {"prefactor", opt(c.prefactor)},
              {"prefactor_nonnegative", opt(c.prefactor_nonnegative)},
              {"zd_first", opt(c.zd_first)},
              {"zd_second", opt(c.zd_second)},
              {"covered", c.covered},
              {"game", report::game_json(g)}};
    if (p) r.body["p"] = report::vec_json(*p);
    return r;
  }

  Result cmd_region() {
    const GameParams g = parse_game(o_.game);
    const Fixed f = fixed_strategy(g);
    const FeasibleRegion region = feasible_region(f.p, g);
    Result r;
    r.body = report::region_json(region, classify_rightmost(region.rightmost));
    r.body["strategy"] = f.source;
    r.body["game"] = report::game_json(g);
    r.csv = report::to_text([&](std::ostream& os) { report::write_candidates_csv(os, region); });
    write_csv_file(o_.csv, r.csv);
    return r;
  }

  Vec4 initial_q(std::int64_t default_index) const {
    if (!o_.q0.empty()) return validate_strategy(parse_vec4(o_.q0, "--q0")).probs();
    return initial_strategy(o_.seed, o_.q0_index.value_or(default_index));
  }

  Result trajectory_result(const Trajectory& tr, const Landscape& land, const json& extra) {
    Result r;
    r.body = report::trajectory_summary_json(tr);
    r.body["long_run_payoff"] = report::payoff_json(land.payoff(tr.endpoint));
    r.body.update(extra);
    r.csv = report::to_text([&](std::ostream& os) { report::write_trajectory_csv(os, tr); });
    write_csv_file(o_.csv, r.csv);
    if (!o_.svg.empty()) report::write_text(o_.svg, svg::trajectory(tr));
    return r;
  }

  Result cmd_learn(LearnerKind kind) {
    const GameParams g = parse_game(o_.game);
    const Fixed f = fixed_strategy(g);
    const Vec4 q0 = initial_q(0);
    const Landscape land(f.p.probs(), g);
    Trajectory tr;
    if (kind == LearnerKind::PGA) {
      tr = pga_run(land, q0, o_.learner);
    } else {
      Rng rng = Rng::stream(o_.seed, static_cast<std::uint64_t>(o_.q0_index.value_or(0)) ^ 0x9E3779B97F4A7C15ULL);
      tr = lrs_run(DiscountedLandscape(f.p.probs(), g, o_.learner.lrs_discount), q0, o_.learner, rng);
    }
    return trajectory_result(tr, land,
                             {{"learner", std::string(to_string(kind))},
                              {"q0", report::vec_json(q0)},
                              {"strategy", f.source},
                              {"game", report::game_json(g)},
                              {"learner_config", report::learner_json(o_.learner)}});
  }

  CensusOptions census_options(LearnerKind kind) const {
    CensusOptions c;
    c.learner = kind;
    c.config = o_.learner;
    c.threads = o_.threads;
    return c;
  }

  Result census_result(const EndpointCensus& census, const GameParams& g, const json& extra) {
    Result r;
    r.body = report::census_json(census);
    r.body.update(extra);
    r.body["game"] = report::game_json(g);
    r.csv = report::to_text([&](std::ostream& os) { report::write_runs_csv(os, census.runs); });
    write_csv_file(o_.csv, r.csv);
    write_csv_file(o_.clusters_csv,
                   report::to_text([&](std::ostream& os) { report::write_clusters_csv(os, census.clusters); }));
    if (!o_.svg.empty()) report::write_text(o_.svg, svg::heatmap(heatmap_grid(census, g, o_.bins), g));
    return r;
  }

  Result cmd_sweep_endpoints() {
    const GameParams g = parse_game(o_.game);
    const Fixed f = fixed_strategy(g);
    const LearnerKind kind = o_.learner_kind == "lrs" ? LearnerKind::LRS : LearnerKind::PGA;
    LearnerConfig cfg = o_.learner;
    CensusOptions opt = census_options(kind);
    const auto census = endpoint_distribution(f.p.probs(), g, o_.samples, o_.seed, opt);
    return census_result(census, g,
                         {{"strategy", f.source},
                          {"learner", std::string(to_string(kind))},
                          {"samples", o_.samples},
                          {"learner_config", report::learner_json(cfg)}});
  }

  SweepReport run_pczd(const GameParams& g, std::int64_t samples) const {
    return pczd_sweep(g, parse_list(o_.chi_values, "--chi-values"), o_.phi_count, samples, o_.seed,
                      census_options(LearnerKind::PGA));
  }

  Result cmd_sweep_pczd() {
    const GameParams g = parse_game(o_.game);
    Result r;
    r.body = report::sweep_json(run_pczd(g, o_.samples));
    r.body["samples"] = o_.samples;
    return r;
  }

  Result cmd_sweep_noise() {
    const GameParams g = parse_game(o_.game);
    std::vector<Vec4> ps;
    for (const auto& s : o_.p_set) ps.push_back(validate_strategy(parse_vec4(s, "--p")).probs());
    if (o_.from_pczd) {
      CensusOptions pga = census_options(LearnerKind::PGA);
      const SweepReport rep = pczd_sweep(g, parse_list(o_.chi_values, "--chi-values"), o_.phi_count,
                                         o_.pczd_samples, o_.seed, pga);
      for (const auto& c : rep.cells)
        if (c.feasible && c.multiple_endpoints()) ps.push_back(c.p);
    }
    if (ps.empty()) throw ValidationError("no fixed strategies: pass --p or --from-pczd");
    const auto radii = o_.radii.empty() ? default_noise_radii() : parse_list(o_.radii, "--radii");
    const NoiseReport rep = lrs_noise_sweep(ps, g, radii, o_.samples, o_.seed, census_options(LearnerKind::LRS));
    Result r;
    r.body = report::noise_json(rep);
    r.body["game"] = report::game_json(g);
    r.body["samples"] = o_.samples;
    return r;
  }

  Result cmd_sweep_tremble() {
    std::vector<GameParams> games;
    for (const auto& s : o_.games) games.push_back(parse_game(s));
    const auto reps = trembling_sweep(games, o_.n_p, o_.samples, o_.tremble, o_.seed, census_options(LearnerKind::PGA));
    Result r;
    r.body["games"] = report::tremble_json(reps);
    r.body["error_rate"] = o_.tremble;
    r.body["n_p"] = o_.n_p;
    r.body["samples"] = o_.samples;
    return r;
  }

  Result cmd_replicate(const std::string& fig);
};

// Fixed parameter sets of the replication presets.
namespace presets {

inline const GameParams kFig1Game{1, -1, 2, 0};
inline const GameParams kFig2Game{2, -1, 7, 0};
inline const Vec4 kFig2Strategy{1, 0.12, 0.88, 0};
inline const GameParams kFig3bGame{4, 0, 5, 3};
inline const Vec4 kFig3bStrategy{1, 0.85, 0.15, 0};
inline const GameParams kFig4Game{3, 0, 5, 1};
inline const Vec4 kFig4aStrategy{0.997, 0.005, 0.018, 0.015};
inline const Vec4 kFig4bStrategy{0.860, 0, 0.225, 0.252};

// Seed whose arcsine draws supply the fig2 and fig5 initial strategies;
// the first draw landing in each basin is used.
inline constexpr std::uint64_t kBasinSeed = 20260;
inline constexpr std::int64_t kBasinSearch = 10000;
inline constexpr double kFig5Tremble = 1e-3;
inline constexpr double kDwellRadius = 0.05;

}  // namespace presets

inline Result Dispatcher::cmd_replicate(const std::string& fig) {
  using namespace presets;
  const std::int64_t n = o_.samples;
  if (fig == "fig1f") {
    const std::int64_t count = n > 0 ? n : 10000;
    const auto pts = rightmost_points(kFig1Game, count, o_.seed, o_.threads);
    const HeatmapGrid grid = heatmap_grid(pts, kFig1Game, o_.bins);
    std::int64_t exploitable = 0, exploiting = 0, fair = 0;
    for (const auto& pt : pts) {
      switch (classify_rightmost(pt)) {
        case FixedStrategyClass::Exploitable: ++exploitable; break;
        case FixedStrategyClass::Exploiting: ++exploiting; break;
        case FixedStrategyClass::Fair: ++fair; break;
      }
    }
    Result r;
    r.body = {{"game", report::game_json(kFig1Game)}, {"samples", count},        {"bins", o_.bins},
              {"nonzero_bins", grid.nonzero()},        {"exploitable", exploitable}, {"exploiting", exploiting},
              {"fair", fair}};
    std::ostringstream os;
    os << "index,pi_y,pi_x\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << i << ',' << report::fmt17(pts[i].pi_y) << ',' << report::fmt17(pts[i].pi_x) << '\n';
    r.csv = os.str();
    write_csv_file(o_.csv, r.csv);
    if (!o_.svg.empty()) report::write_text(o_.svg, svg::heatmap(grid, kFig1Game));
    return r;
  }
  if (fig == "fig2") {
    LearnerConfig cfg = o_.learner;
    const std::vector<PayoffPair> targets = {{2.00, 2.00}, {2.67, 2.67}, {2.79, 2.79}};
    const Landscape land(kFig2Strategy, kFig2Game);
    json panels = json::array();
    std::string csv;
    for (const auto& target : targets) {
      const auto seed = find_initial_in_basin(kFig2Strategy, kFig2Game, target, kBasinSeed, kBasinSearch, cfg);
      if (!seed) throw ConvergenceError("no initial strategy found for the requested basin", target.pi_y);
      const Trajectory tr = pga_run(land, seed->q0, cfg);
      json panel = report::trajectory_summary_json(tr);
      panel["q0"] = report::vec_json(seed->q0);
      panel["q0_stream"] = {{"seed", kBasinSeed}, {"index", seed->index}};
      panel["target"] = report::payoff_json(target);
      panels.push_back(panel);
      if (csv.empty()) csv = report::to_text([&](std::ostream& os) { report::write_trajectory_csv(os, tr); });
      if (!o_.svg.empty() && panels.size() == 1) report::write_text(o_.svg, svg::trajectory(tr));
    }
    Result r;
    r.body = {{"game", report::game_json(kFig2Game)}, {"p", report::vec_json(kFig2Strategy)}, {"panels", panels}};
    r.csv = csv;
    write_csv_file(o_.csv, r.csv);
    return r;
  }
  if (fig == "fig3a" || fig == "fig3b" || fig == "fig4a" || fig == "fig4b") {
    const bool zd_fig = fig[3] == '3';
    const GameParams g = fig == "fig3a" ? kFig2Game : (fig == "fig3b" ? kFig3bGame : kFig4Game);
    const Vec4 p = fig == "fig3a" ? kFig2Strategy
                   : fig == "fig3b" ? kFig3bStrategy
                   : fig == "fig4a" ? kFig4aStrategy
                                    : kFig4bStrategy;
    const std::int64_t count = n > 0 ? n : 10000;
    const auto census = endpoint_distribution(p, g, count, o_.seed, census_options(LearnerKind::PGA));
    const FeasibleRegion region = feasible_region(p, g);
    Result r = census_result(census, g,
                             {{"p", report::vec_json(p)},
                              {"samples", count},
                              {"zd", zd_fig},
                              {"rightmost", report::payoff_json(region.rightmost)}});
    r.body.erase("runs");
    return r;
  }
  // fig5: the same initial strategy with and without trembling.
  LearnerConfig cfg = o_.learner;
  const PayoffPair suboptimal{1.06, 0.99};
  const auto seed = find_initial_in_basin(kFig4aStrategy, kFig4Game, suboptimal, kBasinSeed, kBasinSearch, cfg);
  if (!seed) throw ConvergenceError("no initial strategy found in the suboptimal basin", suboptimal.pi_y);
  const Landscape land(kFig4aStrategy, kFig4Game);
  const PayoffPair global = feasible_region(kFig4aStrategy, kFig4Game).rightmost;
  json panels = json::array();
  std::string csv;
  for (double eps : {0.0, kFig5Tremble}) {
    LearnerConfig c = cfg;
    c.tremble = eps;
    c.record_every = 1;
    const Trajectory tr = pga_run(land, seed->q0, c);
    const PayoffPair end = land.payoff(tr.endpoint);
    json panel = report::trajectory_summary_json(tr);
    panel["error_rate"] = eps;
    panel["long_run_payoff"] = report::payoff_json(end);
    panel["dwell_iterations"] = dwell_iterations(tr, suboptimal, kDwellRadius);
    panel["escaped"] = to_cents(end.pi_y) == to_cents(global.pi_y) && to_cents(end.pi_x) == to_cents(global.pi_x);
    panels.push_back(panel);
    if (eps > 0) {
      Trajectory thin = tr;
      if (thin.records.size() > 20000) {
        const std::size_t stride = thin.records.size() / 10000;
        std::vector<TrajectoryRecord> kept;
        for (std::size_t i = 0; i < thin.records.size(); i += stride) kept.push_back(thin.records[i]);
        kept.push_back(thin.records.back());
        thin.records = std::move(kept);
      }
      csv = report::to_text([&](std::ostream& os) { report::write_trajectory_csv(os, thin); });
      if (!o_.svg.empty()) report::write_text(o_.svg, svg::trajectory(thin));
    }
  }
  Result r;
  r.body = {{"game", report::game_json(kFig4Game)},
            {"p", report::vec_json(kFig4aStrategy)},
            {"q0", report::vec_json(seed->q0)},
            {"q0_stream", {{"seed", kBasinSeed}, {"index", seed->index}}},
            {"suboptimal", report::payoff_json(suboptimal)},
            {"global", report::payoff_json(global)},
            {"panels", panels}};
  r.csv = csv;
  write_csv_file(o_.csv, r.csv);
  return r;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Dispatcher d(out, err);
  return d.run(argc, argv);
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"payofflab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace payofflab::cli
