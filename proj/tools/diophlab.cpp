// diophlab: command-line front end.
//
// Exit status: 0 success, 2 parameter/schema errors, 3 budget or undecidable
// at budget. Errors are reported as a JSON object on stderr.

#include "diophlab/acceptance.hpp"
#include "diophlab/json_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace diophlab;

namespace {

// ---------------------------------------------------------------------------
// Input and output helpers

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// JSON text, @file, or a path to an existing file.
Json load_json(const std::string& arg, const std::string& what) {
  if (!arg.empty() && arg[0] == '@') return parse_json_text(slurp(arg.substr(1)), what);
  std::ifstream probe(arg);
  if (probe && arg.find_first_of("{[\"") == std::string::npos) return parse_json_text(slurp(arg), what);
  return parse_json_text(arg, what);
}

/// Like load_json, but a bare token such as 3/7 or golden is accepted as a
/// rational or rule name.
RealSpec load_real(const std::string& arg, const std::string& what) {
  std::string t = arg;
  t.erase(0, t.find_first_not_of(" \t"));
  bool jsonish = !t.empty() && (t[0] == '{' || t[0] == '[' || t[0] == '"' || t[0] == '@');
  if (jsonish) return real_from_json(load_json(arg, what));
  if (!t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-'))
    return real_from_json(Json(t));
  return real_from_json(Json{{"cf_rule", t}});
}

std::vector<RealSpec> load_reals(const std::string& arg, const std::string& what) {
  Json j = load_json(arg, what);
  if (!j.is_array()) j = Json::array({j});
  return reals_from_json(j, "");
}

std::vector<BigInt> parse_int_list(const std::string& s) {
  std::vector<BigInt> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    BigInt v;
    if (item.empty() || v.set_str(item, 10) != 0) throw ParameterError("bad integer '" + item + "' in list");
    out.push_back(v);
  }
  return out;
}

/// Writes to `path`, or stdout when empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw ParameterError("cannot write '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

Json enclosure_json(const RealEnclosure& e, unsigned digits = 30) {
  return Json{{"lo", to_decimal(e.lo, digits, Rounding::Down)}, {"hi", to_decimal(e.hi, digits, Rounding::Up)}};
}

Json form_json(const LinearForm& f) { return Json{{"alpha_coef", f.x.get_str()}, {"constant", f.y.get_str()}}; }

void emit_json(const std::string& path, const Json& j) {
  Output out(path);
  out.os() << j.dump(2) << '\n';
}

std::string strip_extension(const std::string& path) {
  auto slash = path.find_last_of('/');
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

// ---------------------------------------------------------------------------
// Subcommands

void add_cf(CLI::App& app) {
  auto* cf = app.add_subcommand("cf", "Continued fractions: partial quotients, convergents p_j/q_j, D_j = q_j alpha - p_j");
  cf->require_subcommand(1);

  auto* conv = cf->add_subcommand("convergents", "CSV of j, p_j, q_j and a certified bracket of D_j");
  auto alpha = std::make_shared<std::string>();
  auto depth = std::make_shared<std::size_t>(10);
  auto digits = std::make_shared<unsigned>(30);
  auto out = std::make_shared<std::string>();
  conv->add_option("--alpha", *alpha, "real as JSON, p/q, or a rule name")->required();
  conv->add_option("--depth", *depth, "largest index j")->capture_default_str();
  conv->add_option("--digits", *digits, "decimal digits of the D_j bracket")->capture_default_str();
  conv->add_option("--out", *out, "output file (default stdout)");
  conv->callback([=] {
    ContinuedFraction c = cf_of(load_real(*alpha, "--alpha"));
    ConvergentTable t = convergents(c, *depth);
    Output o(*out);
    write_convergent_csv(o.os(), c, t, *digits);
  });

  auto* exp = cf->add_subcommand("expand", "CSV of j, a_j for j <= depth");
  auto ealpha = std::make_shared<std::string>();
  auto edepth = std::make_shared<std::size_t>(10);
  auto eout = std::make_shared<std::string>();
  exp->add_option("--alpha", *ealpha, "real as JSON, p/q, or a rule name")->required();
  exp->add_option("--depth", *edepth, "largest index j")->capture_default_str();
  exp->add_option("--out", *eout, "output file (default stdout)");
  exp->callback([=] {
    ContinuedFraction c = cf_of(load_real(*ealpha, "--alpha"));
    Output o(*eout);
    o.os() << "j,a_j\n0," << c.a0().get_str() << '\n';
    for (std::size_t j = 1; j <= *edepth; ++j) {
      if (!c.has(j)) {
        if (c.finite()) break;
        throw DepthError("continued fraction known only to depth " + std::to_string(j - 1));
      }
      o.os() << j << ',' << c.a(j).get_str() << '\n';
    }
  });

  auto* om = cf->add_subcommand("omega", "Lower estimate of the irrationality exponent from log q_{k+1} / log q_k");
  auto oalpha = std::make_shared<std::string>();
  auto odepth = std::make_shared<std::size_t>(20);
  om->add_option("--alpha", *oalpha, "real as JSON, p/q, or a rule name")->required();
  om->add_option("--depth", *odepth, "depth J >= 2")->capture_default_str();
  om->callback([=] {
    OmegaEstimate e = omega_estimate(cf_of(load_real(*oalpha, "--alpha")), *odepth);
    emit_json("", Json{{"depth", e.depth},
                       {"full_max", e.full_max.get_d()},
                       {"tail_max", e.tail_max.get_d()},
                       {"argmax", e.argmax}});
  });
}

void add_ostrowski(CLI::App& app) {
  auto* os = app.add_subcommand("ostrowski", "Ostrowski numeration n = sum c_{k+1} q_k and inhomogeneous digit pairs");
  os->require_subcommand(1);

  auto* enc = os->add_subcommand("encode", "Digits c_1, c_2, ... of n");
  auto alpha = std::make_shared<std::string>();
  auto n = std::make_shared<std::string>();
  enc->add_option("--alpha", *alpha, "real as JSON, p/q, or a rule name")->required();
  enc->add_option("--n", *n, "positive integer")->required();
  enc->callback([=] {
    BigInt v = parse_int_list(*n).at(0);
    OstrowskiDigits d = ostrowski_encode(v, cf_of(load_real(*alpha, "--alpha")));
    Json digits = Json::array();
    for (const auto& c : d.digits) digits.push_back(c.get_str());
    emit_json("", Json{{"n", v.get_str()}, {"digits", digits}});
  });

  auto* dec = os->add_subcommand("decode", "n from digits c_1, c_2, ...; rejects invalid digit strings");
  auto dalpha = std::make_shared<std::string>();
  auto digits = std::make_shared<std::string>();
  dec->add_option("--alpha", *dalpha, "real as JSON, p/q, or a rule name")->required();
  dec->add_option("--digits", *digits, "comma separated c_1,c_2,...")->required();
  dec->callback([=] {
    OstrowskiDigits d{parse_int_list(*digits)};
    BigInt v = ostrowski_decode(d, cf_of(load_real(*dalpha, "--alpha")));
    emit_json("", Json{{"n", v.get_str()}});
  });

  auto* tab = os->add_subcommand("table", "CSV of digits for n in [from, to]");
  auto talpha = std::make_shared<std::string>();
  auto from = std::make_shared<long long>(1);
  auto to = std::make_shared<long long>(100);
  auto tout = std::make_shared<std::string>();
  tab->add_option("--alpha", *talpha, "real as JSON, p/q, or a rule name")->required();
  tab->add_option("--from", *from)->capture_default_str();
  tab->add_option("--to", *to)->capture_default_str();
  tab->add_option("--out", *tout, "output file (default stdout)");
  tab->callback([=] {
    if (*from < 1 || *to < *from) throw ParameterError("need 1 <= from <= to");
    OstrowskiTable t(cf_of(load_real(*talpha, "--alpha")), static_cast<long>(*to));
    Output o(*tout);
    write_digit_csv(o.os(), t, static_cast<long>(*from), static_cast<long>(*to));
  });

  auto* dandy = os->add_subcommand("dandy", "Certify 0 < alpha < 1/64 and 0 <= gamma < 1 - alpha for a digit pair");
  auto pair = std::make_shared<std::string>();
  auto ddepth = std::make_shared<std::size_t>(32);
  dandy->add_option("--pair", *pair, "pair JSON {alpha_cf, b_prefix, b_tail_rule, sigma, dandy}")->required();
  dandy->add_option("--depth", *ddepth, "depth for the digit rules")->capture_default_str();
  dandy->callback([=] {
    GammaDigits g = shift_digits_from_json(load_json(*pair, "--pair"));
    DandyCertificate c = certify_dandy(g, *ddepth);
    emit_json("", Json{{"ok", c.ok()},
                       {"alpha_ok", c.alpha_ok},
                       {"gamma_ok", c.gamma_ok},
                       {"digits_ok", c.digits_ok},
                       {"alpha", enclosure_json(c.alpha)},
                       {"gamma", enclosure_json(c.gamma)},
                       {"failure", c.failure}});
  });

  auto* sharp = os->add_subcommand("sharpness", "Construct a pair with a_i in 64N and b_i = a_i / 2^(1 + sigma_i)");
  auto sigma = std::make_shared<std::string>("1,0,1");
  auto schedule = std::make_shared<std::string>("relaxed");
  auto sdepth = std::make_shared<std::size_t>(3);
  sharp->add_option("--sigma", *sigma, "comma separated bits")->capture_default_str();
  sharp->add_option("--schedule", *schedule, "paper | relaxed")->capture_default_str();
  sharp->add_option("--depth", *sdepth, "constructed partial quotients")->capture_default_str();
  sharp->callback([=] {
    std::vector<int> bits;
    for (const auto& b : parse_int_list(*sigma)) bits.push_back(static_cast<int>(b.get_si()));
    SharpnessPair p = sharpness_construct(bits, parse_schedule(*schedule), *sdepth);
    Json a = Json::array(), q = Json::array();
    for (const auto& x : p.a) a.push_back(x.get_str().size() > 60 ? "~10^" + std::to_string(x.get_str().size() - 1) : x.get_str());
    for (const auto& x : p.q) q.push_back(x.get_str().size() > 60 ? "~10^" + std::to_string(x.get_str().size() - 1) : x.get_str());
    DandyCertificate c = certify_dandy(p.gamma);
    emit_json("", Json{{"schedule", *schedule},
                       {"a", a},
                       {"q", q},
                       {"sigma", p.sigma},
                       {"factorial_growth", p.factorial_growth},
                       {"certified", c.ok()},
                       {"alpha", enclosure_json(c.alpha)},
                       {"gamma", enclosure_json(c.gamma)}});
  });

  auto* sig = os->add_subcommand("sigma", "||n alpha - gamma|| via the digit difference sum and via direct enclosure");
  auto spair = std::make_shared<std::string>();
  auto sn = std::make_shared<std::string>();
  sig->add_option("--pair", *spair, "pair JSON")->required();
  sig->add_option("--n", *sn, "positive integer")->required();
  sig->callback([=] {
    GammaDigits g = shift_digits_from_json(load_json(*spair, "--pair"));
    BigInt v = parse_int_list(*sn).at(0);
    SigmaDecomposition s = sigma_decompose(v, g, pow2(-100));
    Json c = Json::array(), delta = Json::array();
    for (const auto& x : s.c.digits) c.push_back(x.get_str());
    for (const auto& x : s.delta) delta.push_back(x.get_str());
    emit_json("", Json{{"n", v.get_str()},
                       {"digits", c},
                       {"delta", delta},
                       {"m", s.m ? Json(*s.m) : Json()},
                       {"sigma", enclosure_json(s.sigma)},
                       {"dist_sigma", enclosure_json(s.dist_sigma)},
                       {"dist_direct", enclosure_json(s.dist_direct)},
                       {"agree", s.agree}});
  });

  auto* sud = os->add_subcommand("sud", "Partial sum of 1/||n alpha - gamma|| over W_{u,d} up to n_max");
  auto upair = std::make_shared<std::string>();
  auto u = std::make_shared<std::size_t>(1);
  auto d = std::make_shared<std::string>("1");
  auto unmax = std::make_shared<std::string>("10000");
  sud->add_option("--pair", *upair, "pair JSON")->required();
  sud->add_option("--u", *u)->capture_default_str();
  sud->add_option("--d", *d)->capture_default_str();
  sud->add_option("--n-max", *unmax)->capture_default_str();
  sud->callback([=] {
    GammaDigits g = shift_digits_from_json(load_json(*upair, "--pair"));
    SudResult r = sud_partial_sum(*u, parse_int_list(*d).at(0), g, parse_int_list(*unmax).at(0));
    emit_json("", Json{{"u", r.u},
                       {"d", r.d.get_str()},
                       {"branch", to_string(r.branch)},
                       {"terms", r.terms},
                       {"sum", enclosure_json(r.sum, 20)},
                       {"min_w", r.min_w ? Json(r.min_w->get_str()) : Json()}});
  });
}

void add_threegap(CLI::App& app) {
  auto* tg = app.add_subcommand("threegap", "Largest gap of {0, {alpha}, ..., {m alpha}, 1}: formula against exhaustive sort");
  auto alpha = std::make_shared<std::string>();
  auto m = std::make_shared<std::size_t>(10);
  tg->add_option("--alpha", *alpha, "irrational real as JSON or a rule name")->required();
  tg->add_option("--m", *m, "number of orbit points")->required();
  tg->callback([=] {
    if (*m < 1 || *m > 1000000) throw ParameterError("m must lie in [1, 10^6]");
    RealSpec a = load_real(*alpha, "--alpha");
    ContinuedFraction c = cf_of(a);
    LargestGap lg = largest_gap(static_cast<unsigned long>(*m), c, pow2(-100));
    BruteGaps bg = brute_gaps(*m, a);
    Json distinct = Json::array();
    for (const auto& g : bg.distinct) distinct.push_back(form_json(g));
    emit_json("", Json{{"m", *m},
                       {"decomposition",
                        {{"k", lg.decomposition.k}, {"r", lg.decomposition.r.get_str()}, {"s", lg.decomposition.s.get_str()}}},
                       {"formula_gap", form_json(lg.form)},
                       {"formula_value", enclosure_json(lg.enclosure)},
                       {"oracle_gap", form_json(bg.largest)},
                       {"distinct_gaps", distinct},
                       {"agree", same_gap(lg.form, bg.largest, a)}});
  });
}

void add_bohr(CLI::App& app) {
  auto* b = app.add_subcommand("bohr", "Bohr sets, generalised arithmetic progressions and congruence lattices");
  b->require_subcommand(1);

  auto* en = b->add_subcommand("enum", "CSV of |n| <= N with ||n alpha_i - gamma_i|| <= rho_i for all i");
  auto params = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  en->add_option("--params", *params, "JSON {alpha, gamma, N, rho} (text, @file or path)")->required();
  en->add_option("--out", *out, "output file (default stdout)");
  en->callback([=] {
    BohrParams p = bohr_from_json(load_json(*params, "--params"));
    Output o(*out);
    o.os() << "n\n";
    for (const auto& n : enumerate_bohr(p)) o.os() << n.get_str() << '\n';
  });

  auto* card = b->add_subcommand("card-check", "Rank-one bounds delta N - 1 <= #B <= 32 delta N when some q_l lies in [1/(2 delta), N]");
  auto calpha = std::make_shared<std::string>("{\"sqrt\": 2}");
  auto delta = std::make_shared<std::string>("1/100");
  auto cN = std::make_shared<std::string>("10000");
  card->add_option("--alpha", *calpha, "irrational real")->capture_default_str();
  card->add_option("--delta", *delta, "rational delta")->capture_default_str();
  card->add_option("--N", *cN)->capture_default_str();
  card->callback([=] {
    auto r = bohr_cardinality_check(load_real(*calpha, "--alpha"), parse_rational(*delta), parse_int_list(*cN).at(0));
    emit_json("", Json{{"count", r.count.get_str()},
                       {"lower", to_string(r.lower)},
                       {"upper", to_string(r.upper)},
                       {"hypothesis_met", r.hypothesis_met},
                       {"q_ell", r.q_ell ? Json(r.q_ell->get_str()) : Json()},
                       {"bounds_hold", r.bounds_hold ? Json(*r.bounds_hold) : Json()}});
  });

  auto* ge = b->add_subcommand("gap-enum", "CSV of GAP members with their digit vectors; reports properness");
  auto gap = std::make_shared<std::string>();
  auto gout = std::make_shared<std::string>();
  ge->add_option("--gap", *gap, "JSON {b, A, N, shape}")->required();
  ge->add_option("--out", *gout, "output file (default stdout)");
  ge->callback([=] {
    GAP g = gap_from_json(load_json(*gap, "--gap"));
    auto e = enumerate_gap(g);
    Output o(*gout);
    o.os() << "value";
    for (std::size_t i = 1; i <= g.rank(); ++i) o.os() << ",n_" << i;
    o.os() << '\n';
    for_each_gap_vector(g, [&](long long v, const std::vector<long long>& n) {
      o.os() << v;
      for (long long x : n) o.os() << ',' << x;
      o.os() << '\n';
    });
    std::cerr << Json{{"members", e.members.size()}, {"proper", e.proper}}.dump() << '\n';
  });

  auto* dc = b->add_subcommand("div-count", "Members of a proper GAP divisible by d against prod N_i / d");
  auto dgap = std::make_shared<std::string>();
  auto d = std::make_shared<long long>(1);
  auto C = std::make_shared<long long>(4);
  auto improper = std::make_shared<bool>(false);
  dc->add_option("--gap", *dgap, "JSON {b, A, N}")->required();
  dc->add_option("--d", *d, "divisor")->required();
  dc->add_option("--C", *C, "constant in the error bound C prod N_i / min N_i")->capture_default_str();
  dc->add_flag("--allow-improper", *improper, "count digit vectors with multiplicity");
  dc->callback([=] {
    auto r = count_divisible_in_gap(gap_from_json(load_json(*dgap, "--gap")), *d, *C, !*improper);
    emit_json("", Json{{"count", r.count},
                       {"proper", r.proper},
                       {"main_term", to_string(r.main_term)},
                       {"defect", to_string(r.defect)},
                       {"bound", to_string(r.bound)},
                       {"within", r.within}});
  });

  auto* dv = b->add_subcommand("davenport", "Lattice points of {n : A.n = 0 mod d} in a box against vol/det");
  auto A = std::make_shared<std::string>();
  auto dd = std::make_shared<std::string>();
  auto box = std::make_shared<std::string>();
  dv->add_option("--A", *A, "comma separated coefficients, gcd(A, d) = 1")->required();
  dv->add_option("--d", *dd, "modulus")->required();
  dv->add_option("--box", *box, "JSON {\"lo\": [...], \"hi\": [...]} with rationals")->required();
  dv->callback([=] {
    CongruenceLattice L = lattice_basis(parse_int_list(*A), parse_int_list(*dd).at(0));
    Json jb = load_json(*box, "--box");
    LatticeBox bx;
    for (const char* key : {"lo", "hi"}) {
      const Json& arr = json_detail::array(json_detail::field(jb, key, ""), std::string("/") + key);
      for (std::size_t i = 0; i < arr.size(); ++i)
        (std::string(key) == "lo" ? bx.lo : bx.hi)
            .push_back(rational_from_json(arr[i], std::string("/") + key + "/" + std::to_string(i)));
    }
    DavenportReport r = davenport_check(bx, L);
    Json minima = Json::array();
    for (const auto& m : r.minima_sq) minima.push_back(m.get_str());
    emit_json("", Json{{"count", r.count.get_str()},
                       {"main_term", to_string(r.main_term)},
                       {"error", to_string(r.error)},
                       {"minima_squared", minima},
                       {"bound", enclosure_json(r.bound, 12)},
                       {"holds", r.holds},
                       {"determinant", L.determinant().get_str()}});
  });
}

void add_shiftred(CLI::App& app) {
  auto* s = app.add_subcommand("shiftred", "Shift-reduced pairs and the shifted totient phi_{gamma,eta}");
  s->require_subcommand(1);
  auto* phi = s->add_subcommand("phi", "CSV of n, phi(n), phi_{gamma,eta}(n), q_t, c_t");
  auto gamma = std::make_shared<std::string>();
  auto eta = std::make_shared<std::string>("1/2");
  auto n_max = std::make_shared<std::uint64_t>(100);
  auto out = std::make_shared<std::string>();
  phi->add_option("--gamma", *gamma, "real as JSON, p/q, or a rule name")->required();
  phi->add_option("--eta", *eta, "rational exponent p/D in (0, 1)")->capture_default_str();
  phi->add_option("--n-max", *n_max)->capture_default_str();
  phi->add_option("--out", *out, "output file (default stdout)");
  phi->callback([=] {
    ShiftReducer r(load_real(*gamma, "--gamma"), parse_rational(*eta));
    Output o(*out);
    o.os() << "n,phi,phi_shift,q_t,c_t\n";
    for (const auto& row : phi_table(r, *n_max))
      o.os() << row.n << ',' << row.phi << ',' << row.phi_shift.get_str() << ',' << row.q_t.get_str() << ','
             << row.c_t.get_str() << '\n';
  });
}

void add_measure(CLI::App& app) {
  auto* m = app.add_subcommand("measure", "Approximation sets E_n, their measures and the overlap (BC) ratio");
  m->require_subcommand(1);
  auto* bc = m->add_subcommand(
      "bc", "E_n for n <= X with Psi(n) = psi(n) / prod ||n alpha_i - gamma_i||; CSV per n plus a summary JSON");
  auto alphas = std::make_shared<std::string>("[{\"sqrt\": 2}]");
  auto gammas = std::make_shared<std::string>();
  auto gamma = std::make_shared<std::string>("0");
  auto psi = std::make_shared<std::string>("logsq:const:4");
  auto X = std::make_shared<std::uint64_t>(2000);
  auto window = std::make_shared<std::string>("0,1");
  auto eta = std::make_shared<std::string>("1/2");
  auto exact = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  auto summary = std::make_shared<std::string>();
  bc->add_option("--alphas", *alphas, "fixed alpha_1..alpha_{k-1} as a JSON array; [] gives Psi = psi")
      ->capture_default_str();
  bc->add_option("--gammas", *gammas, "gamma_1..gamma_{k-1} (default zeros)");
  bc->add_option("--gamma", *gamma, "shift of the last coordinate")->capture_default_str();
  bc->add_option("--psi", *psi, "approximation function name")->capture_default_str();
  bc->add_option("--X", *X, "largest n")->capture_default_str();
  bc->add_option("--window", *window, "interval I as lo,hi rationals")->capture_default_str();
  bc->add_option("--eta", *eta, "shift-reduction exponent, or 'none'")->capture_default_str();
  bc->add_flag("--exact", *exact, "exact rational sweep instead of the dyadic grid");
  bc->add_option("--out", *out, "per-n CSV (default: not written)");
  bc->add_option("--summary", *summary, "summary JSON (default stdout)");
  bc->callback([=] {
    if (*X < 1 || *X > 100000) throw ParameterError("X must lie in [1, 10^5]");
    std::vector<RealSpec> al = load_reals(*alphas, "--alphas");
    std::vector<RealSpec> gl = gammas->empty() ? std::vector<RealSpec>(al.size(), RealSpec(BigRational(0)))
                                               : load_reals(*gammas, "--gammas");
    if (gl.size() != al.size()) throw ParameterError("--gammas must match --alphas in length");
    ApproxFunction f = approx_from_json(Json(*psi), "--psi");
    RealSpec g = load_real(*gamma, "--gamma");
    std::vector<std::string> parts;
    {
      std::stringstream ss(*window);
      std::string item;
      while (std::getline(ss, item, ',')) parts.push_back(item);
    }
    if (parts.size() != 2) throw ParameterError("--window must be lo,hi");
    BigRational lo = parse_rational(parts[0]), hi = parse_rational(parts[1]);
    std::optional<ShiftReducer> red;
    std::optional<BigRational> eta_v;
    if (*eta != "none") {
      eta_v = parse_rational(*eta);
      red.emplace(g, *eta_v);
    }
    std::vector<ApproxSet> sets;
    std::vector<RealEnclosure> psi_terms;
    std::uint64_t skipped = 0;
    for (std::uint64_t n = 1; n <= *X; ++n) {
      ApproxSetSpec s;
      s.n = static_cast<unsigned long>(n);
      s.hat_n = s.n;
      s.gamma = g;
      s.window_lo = lo;
      s.window_hi = hi;
      if (al.empty()) {
        s.psi = f.at(n);
      } else {
        PhiValue p = phi_big(n, al, gl, f);
        if (p.infinite) {
          ++skipped;
          continue;
        }
        s.psi = p.value;
      }
      if (eta_v) s.filter = ShiftFilter{*eta_v};
      sets.push_back(build_approx_set(s, red ? &*red : nullptr));
      RealEnclosure term = f.at(n);
      if (al.size() >= 1) {
        RealEnclosure L = paper_log_enclosure(BigRational(static_cast<unsigned long>(n)));
        for (std::size_t i = 0; i < al.size(); ++i) term = term * L;
      }
      psi_terms.push_back(term);
    }
    if (!out->empty()) {
      Output o(*out);
      write_measure_csv(o.os(), sets, psi_terms);
    }
    OverlapReport rep = overlap_matrix_sum(sets, *exact ? SweepMode::Exact : SweepMode::Grid);
    DivergenceReport div = divergence_sum(sets, psi_terms, hi - lo);
    emit_json(*summary, Json{{"X", *X},
                             {"sets", sets.size()},
                             {"skipped_infinite", skipped},
                             {"sum_measure", enclosure_json(rep.sum_measure, 15)},
                             {"sum_pairs", enclosure_json(rep.sum_pairs, 15)},
                             {"bc_ratio", enclosure_json(rep.bc_ratio, 15)},
                             {"sum_psi_log", enclosure_json(div.sum_psi, 15)},
                             {"divergence_ratio", enclosure_json(div.ratio, 15)}});
  });
}

void add_sums(CLI::App& app) {
  auto* s = app.add_subcommand("sums", "Log-averaged sums, the figure1 series, Gallagher counters and dyadic truncation");
  s->require_subcommand(1);

  auto* fig = s->add_subcommand("figure1", "S(N) = sum 1/(n ||n a_1|| ||n a_2||) for N <= H with the fit c (log N)^3");
  auto H = std::make_shared<std::uint64_t>(1000000);
  auto alphas = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>("figure1.csv");
  auto every = std::make_shared<std::uint64_t>(1);
  fig->add_option("--H", *H, "largest N")->capture_default_str();
  fig->add_option("--alphas", *alphas, "JSON array of rationals (default: 0.957363115715396 and 0.3049448415027476)");
  fig->add_option("--out", *out, "CSV path; the gnuplot script and summary JSON are written alongside")
      ->capture_default_str();
  fig->add_option("--every", *every, "write every k-th row (the last row is always written)")->capture_default_str();
  fig->callback([=] {
    std::vector<RealSpec> al = alphas->empty() ? acceptance::figure1_alphas() : load_reals(*alphas, "--alphas");
    Figure1Result r = figure1(*H, al);
    std::string base = strip_extension(*out);
    {
      Output o(*out);
      write_figure1_csv(o.os(), r, std::max<std::uint64_t>(*every, 1));
    }
    std::string csv_name = out->substr(out->find_last_of('/') == std::string::npos ? 0 : out->find_last_of('/') + 1);
    {
      Output o(base + ".gp");
      write_figure1_gnuplot(o.os(), csv_name, r);
    }
    Json summary{{"H", *H}, {"c", r.c}, {"S_H", r.S.back()}, {"error_bound", r.error_bound}, {"infinite", r.infinite}};
    emit_json(base + ".json", summary);
    std::cout << summary.dump() << '\n';
  });

  auto* la = s->add_subcommand("logavg", "S(N) with its rounding-error bound; --exact adds the exact rational value");
  auto N = std::make_shared<std::uint64_t>(1000);
  auto la_alphas = std::make_shared<std::string>();
  auto la_gammas = std::make_shared<std::string>();
  auto exact = std::make_shared<bool>(false);
  la->add_option("--N", *N)->capture_default_str();
  la->add_option("--alphas", *la_alphas, "JSON array of reals")->required();
  la->add_option("--gammas", *la_gammas, "JSON array of reals (default zeros)");
  la->add_flag("--exact", *exact, "also compute the exact value (rational inputs, N <= 10^6)");
  la->callback([=] {
    auto al = load_reals(*la_alphas, "--alphas");
    auto gl = la_gammas->empty() ? std::vector<RealSpec>(al.size(), RealSpec(BigRational(0)))
                                 : load_reals(*la_gammas, "--gammas");
    if (gl.size() != al.size()) throw ParameterError("--gammas must match --alphas in length");
    Json j;
    if (*exact) {
      SpotCheck sc = exact_spotcheck(*N, al, gl);
      j = Json{{"N", *N},
               {"value", sc.approx.value},
               {"error_bound", sc.approx.error_bound},
               {"exact", sc.exact.to_double()},
               {"agrees", sc.agrees}};
      if (sc.approx.infinite) j["first_infinite"] = sc.approx.first_infinite;
    } else {
      LogAvgResult r = log_avg_sum(*N, al, gl);
      j = Json{{"N", *N}, {"value", r.value}, {"error_bound", r.error_bound}, {"infinite", r.infinite}};
      if (r.infinite) j["first_infinite"] = r.first_infinite;
    }
    emit_json("", j);
  });

  auto* gc = s->add_subcommand("gallagher", "Per grid point a, #{n <= N : prod ||n alpha_i - gamma_i|| ||n a - gamma_k|| < psi(n)}");
  auto g_alphas = std::make_shared<std::string>("[]");
  auto g_gammas = std::make_shared<std::string>();
  auto psi = std::make_shared<std::string>("recip:4");
  auto bits = std::make_shared<unsigned>(16);
  auto count = std::make_shared<std::uint64_t>(512);
  auto gN = std::make_shared<std::uint64_t>(100000);
  auto checkpoints = std::make_shared<std::string>();
  auto gout = std::make_shared<std::string>();
  auto gsummary = std::make_shared<std::string>();
  gc->add_option("--alphas", *g_alphas, "fixed alpha_1..alpha_{k-1}")->capture_default_str();
  gc->add_option("--gammas", *g_gammas, "gamma_1..gamma_k (default zeros)");
  gc->add_option("--psi", *psi, "approximation function name")->capture_default_str();
  gc->add_option("--grid-bits", *bits, "grid denominator 2^bits")->capture_default_str();
  gc->add_option("--grid-count", *count, "number of grid points")->capture_default_str();
  gc->add_option("--N", *gN)->capture_default_str();
  gc->add_option("--checkpoints", *checkpoints, "comma separated N' < N with recorded counts");
  gc->add_option("--out", *gout, "CSV path (default stdout)");
  gc->add_option("--summary", *gsummary, "summary JSON path (default stderr)");
  gc->callback([=] {
    GallagherSpec sp;
    sp.alphas = load_reals(*g_alphas, "--alphas");
    sp.gammas = g_gammas->empty() ? std::vector<RealSpec>(sp.alphas.size() + 1, RealSpec(BigRational(0)))
                                  : load_reals(*g_gammas, "--gammas");
    sp.psi = approx_from_json(Json(*psi), "--psi");
    sp.grid = dyadic_grid(*bits, *count);
    sp.N = *gN;
    if (!checkpoints->empty())
      for (const auto& c : parse_int_list(*checkpoints)) sp.checkpoints.push_back(c.get_ui());
    GallagherResult r = gallagher_counter(sp);
    {
      Output o(*gout);
      o.os() << "j,alpha_k";
      for (auto c : sp.checkpoints) o.os() << ",count_" << c;
      o.os() << ",count_" << sp.N << '\n';
      for (std::size_t j = 0; j < sp.grid.size(); ++j) {
        o.os() << j << ',' << to_string(sp.grid[j]);
        for (std::size_t c = 0; c < sp.checkpoints.size(); ++c) o.os() << ',' << r.at_checkpoint[c][j];
        o.os() << ',' << r.counts[j] << '\n';
      }
    }
    Json fr = Json::object();
    for (std::size_t i = 0; i < sp.thresholds.size(); ++i)
      fr[std::to_string(sp.thresholds[i])] = r.fraction_at_least[i];
    Json summary{{"N", sp.N},
                 {"grid_points", sp.grid.size()},
                 {"psi", sp.psi.name()},
                 {"fraction_at_least", fr},
                 {"undecided", r.undecided.size()}};
    if (gsummary->empty()) std::cerr << summary.dump() << '\n';
    else emit_json(*gsummary, summary);
  });

  auto* dy = s->add_subcommand("dyadic", "Ratio of sum h(n)(log n)^kappa over C^J0 <= n <= N to sum j^kappa C^j h(C^j)");
  auto h = std::make_shared<std::string>("recip:1");
  auto C = std::make_shared<std::uint64_t>(2);
  auto kappa = std::make_shared<double>(1);
  auto J0 = std::make_shared<std::uint64_t>(1);
  auto dN = std::make_shared<std::uint64_t>(1000000);
  dy->add_option("--h", *h, "non-increasing function name")->capture_default_str();
  dy->add_option("--C", *C)->capture_default_str();
  dy->add_option("--kappa", *kappa)->capture_default_str();
  dy->add_option("--J0", *J0)->capture_default_str();
  dy->add_option("--N", *dN)->capture_default_str();
  dy->callback([=] {
    ApproxFunction f = approx_from_json(Json(*h), "--h");
    DyadicReport r = dyadic_ratio_check([&](std::uint64_t n) { return f.approx(n); }, *C, *kappa, *J0, *dN);
    emit_json("", Json{{"left", static_cast<double>(r.left)},
                       {"right", static_cast<double>(r.right)},
                       {"ratio", static_cast<double>(r.ratio)},
                       {"J", r.J},
                       {"band", {r.band_lo, r.band_hi}},
                       {"in_band", r.in_band}});
  });

  auto* ph = s->add_subcommand("phi", "Enclosure of psi(n) / prod ||n alpha_i - gamma_i||");
  auto pn = std::make_shared<std::uint64_t>(10);
  auto p_alphas = std::make_shared<std::string>();
  auto p_gammas = std::make_shared<std::string>();
  auto ppsi = std::make_shared<std::string>("recip:1");
  ph->add_option("--n", *pn)->capture_default_str();
  ph->add_option("--alphas", *p_alphas, "JSON array of reals")->required();
  ph->add_option("--gammas", *p_gammas, "JSON array of reals (default zeros)");
  ph->add_option("--psi", *ppsi, "approximation function name")->capture_default_str();
  ph->callback([=] {
    auto al = load_reals(*p_alphas, "--alphas");
    auto gl = p_gammas->empty() ? std::vector<RealSpec>(al.size(), RealSpec(BigRational(0)))
                                : load_reals(*p_gammas, "--gammas");
    PhiValue v = phi_big(*pn, al, gl, approx_from_json(Json(*ppsi), "--psi"));
    emit_json("", v.infinite ? Json{{"n", *pn}, {"infinite", true}}
                             : Json{{"n", *pn}, {"infinite", false}, {"value", enclosure_json(v.value, 20)}});
  });
}

void add_selftest(CLI::App& app, int& status) {
  auto* st = app.add_subcommand("selftest", "Run the acceptance criteria (fast: reduced sizes; full: complete, with oracles)");
  auto level = std::make_shared<std::string>("fast");
  auto only = std::make_shared<std::vector<int>>();
  st->add_option("level", *level, "fast | full")->capture_default_str();
  st->add_option("--only", *only, "criterion ids to run");
  st->callback([=, &status] {
    auto lv = acceptance::parse_level(*level);
    auto results = acceptance::run(lv, &std::cout, *only);
    status = acceptance::all_pass(results) ? 0 : 1;
  });
}

// ---------------------------------------------------------------------------

int report(int code, const std::string& kind, const std::string& message, Json extra = Json::object()) {
  Json j{{"error", kind}, {"message", message}, {"exit", code}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diophlab: continued fractions, Ostrowski digits, Bohr sets and metric diophantine experiments"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_help_all_flag("--help-all", "Expand all help");
  app.fallthrough();
  unsigned threads = 0;
  int budget = refinement_budget();
  app.add_option("--threads", threads, "cap on worker threads (default: hardware concurrency)");
  app.add_option("--budget", budget, "refinement rounds for certified comparisons (DIOPHLAB_BUDGET overrides)")
      ->capture_default_str();

  int status = 0;
  add_cf(app);
  add_ostrowski(app);
  add_threegap(app);
  add_bohr(app);
  add_shiftred(app);
  add_measure(app);
  add_sums(app);
  add_selftest(app, status);

  app.parse_complete_callback([&] {
    if (const char* env = std::getenv("DIOPHLAB_BUDGET")) {
      try {
        budget = std::stoi(env);
      } catch (const std::exception&) {
        throw ParameterError(std::string("DIOPHLAB_BUDGET is not an integer: '") + env + "'");
      }
    }
    set_refinement_budget(budget);
    if (threads > 0) set_thread_cap(threads);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(2, "usage", e.what());
  } catch (const SchemaError& e) {
    return report(2, "schema", e.what(), Json{{"path", e.path()}});
  } catch (const ConstraintViolation& e) {
    return report(2, "constraint", e.what(), Json{{"rule", e.rule()}});
  } catch (const DepthError& e) {
    return report(2, "depth", e.what());
  } catch (const ParameterError& e) {
    return report(2, "parameter", e.what());
  } catch (const PrecisionUnattainable& e) {
    return report(3, "precision", e.what(), Json{{"best", enclosure_json(e.best())}});
  } catch (const UndecidableAtBudget& e) {
    return report(3, "undecidable", e.what());
  } catch (const BudgetExceeded& e) {
    return report(3, "budget", e.what());
  } catch (const std::exception& e) {
    return report(1, "internal", e.what());
  }
  return status;
}
