#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "selmer/cert.hpp"

using namespace selmer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBudget = 2;
constexpr int kExitInvalid = 3;

void write_or_print(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << body;
}

std::vector<Place> parse_order(const std::string& spec) {
  std::vector<Place> order;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "inf")
      order.push_back(Place::infinity());
    else
      order.push_back(Place::finite(Int(tok)));
  }
  return order;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "2-Selmer groups of quadratic twists Dy^2 = x^3 + ax + b and the "
      "constructive search for twists with dim Sel_2 <= 1"};
  app.require_subcommand(1);

  long a = 0, b = 0;
  std::string d_str = "1", x_str, budget_str = "1000000";
  std::string json_path, csv_path, cert_path, order_spec;
  int threads = 1;

  CLI::App* compute = app.add_subcommand("compute", "dim Sel_2(E_D)");
  compute->add_option("--a", a, "curve coefficient a")->required();
  compute->add_option("--b", b, "curve coefficient b")->required();
  compute->add_option("--D", d_str, "squarefree twist (normalized if not)");
  compute->add_option("--order", order_spec,
                      "comma list of places, e.g. inf,2,31 (default order "
                      "when omitted)");
  compute->add_option("--json", json_path, "write the certificate here");

  CLI::App* tsearch =
      app.add_subcommand("twist-search", "descend to a twist with dim <= 1");
  tsearch->add_option("--a", a)->required();
  tsearch->add_option("--b", b)->required();
  tsearch->add_option("--D", d_str, "starting twist D0");
  tsearch->add_option("--prime-budget", budget_str,
                      "bound on auxiliary prime searches");
  tsearch->add_option("--json", json_path, "write the certificate here");

  CLI::App* scan =
      app.add_subcommand("scan", "dim Sel_2(E_D) for all squarefree |D| < X");
  scan->add_option("--a", a)->required();
  scan->add_option("--b", b)->required();
  scan->add_option("--X", x_str, "scan bound")->required();
  scan->add_option("--csv", csv_path, "write CSV rows here");
  scan->add_option("--json", json_path, "write the JSON report here");
  scan->add_option("--threads", threads, "worker count");

  CLI::App* verify = app.add_subcommand("verify", "replay a certificate");
  verify->add_option("--cert", cert_path, "certificate file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (verify->parsed()) {
      std::ifstream in(cert_path);
      if (!in) throw std::domain_error("cannot open " + cert_path);
      VerifyReport rep = verify_certificate(Json::parse(in));
      std::cout << "kind: " << rep.kind << "\n";
      for (const auto& m : rep.mismatches)
        std::cout << "mismatch " << m << "\n";
      std::cout << (rep.pass ? "replay: pass" : "replay: FAIL") << "\n";
      return rep.pass ? kExitOk : kExitInvalid;
    }

    if (compute->parsed()) {
      DescentEngine eng(build_field(a, b));
      CurveSpec C = eng.make_curve(Int(d_str));
      std::vector<Place> order = order_spec.empty() ? eng.default_order(C)
                                                    : parse_order(order_spec);
      SelmerResult R = eng.compute_sel2(C, order);
      write_or_print(json_path, selmer_certificate(R, order).dump(2) + "\n");
      if (!json_path.empty())
        std::cout << "D = " << R.curve.D << "  dim Sel_2 = " << R.dim << "\n";
      return kExitOk;
    }

    if (tsearch->parsed()) {
      TwistEngine tw(build_field(a, b));
      tw.prime_budget = Int(budget_str);
      Int D0(d_str);
      TwistSearchResult res = tw.find_small_selmer_twist(D0);
      write_or_print(
          json_path,
          twist_search_certificate(a, b, D0, tw.prime_budget, res).dump(2) +
              "\n");
      if (!json_path.empty())
        std::cout << "D = " << res.D << "  dim Sel_2 = " << res.dim << "  ("
                  << res.n_steps << " descent steps)\n";
      return kExitOk;
    }

    // scan
    TwistEngine tw(build_field(a, b));
    Int X(x_str);
    std::vector<ScanRow> rows = tw.distribution_scan(X, threads);
    if (!csv_path.empty() || json_path.empty())
      write_or_print(csv_path, scan_csv(rows));
    if (!json_path.empty())
      write_or_print(json_path, scan_json(a, b, X, rows).dump(2) + "\n");
    return kExitOk;
  } catch (const SearchBudgetExhausted& e) {
    std::cerr << "search budget exhausted (" << e.stage << "): " << e.what()
              << "\n";
    return kExitBudget;
  } catch (const ReducibleCubic& e) {
    std::cerr << "reducible cubic: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
