// Command-line driver: parse, type-check, evaluate, compile, and fuzz
// checked-source programs, run erased target programs, and emit
// Checked-C-style surface text.

#include "CLI11.hpp"
#include "json.hpp"

#include "chkc/corec.hpp"
#include "chkc/emit.hpp"
#include "chkc/gen.hpp"
#include "chkc/parser.hpp"
#include "chkc/props.hpp"
#include "chkc/semantics.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace chkc;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_parse(const std::string& path) {
  Program p = parse_program(read_file(path));
  std::cout << print_program(p) << "\n";
  return 0;
}

int cmd_typecheck(const std::string& path) {
  Program p = parse_program(read_file(path));
  TypeResult r = check_program(p);
  if (!ok(r)) {
    std::cout << "error " << error_of(r).to_string() << "\n";
    return 1;
  }
  std::cout << print_type(type_of(r)) << "\n";
  return 0;
}

int cmd_eval(const std::string& path, Int fuel, bool trace) {
  Program p = parse_program(read_file(path));
  EvalOptions opts;
  opts.fuel = fuel;
  EvalOutcome out = eval_program(p, opts);
  if (trace) {
    Int k = 0;
    for (const StepRec& s : out.steps)
      std::cout << "STEP " << k++ << " MODE " << mode_name(s.mode)
                << " REDEX " << s.redex << " -> " << s.result << "\n";
  }
  std::cout << outcome_word(out) << "\n";
  return out.kind == EvalOutcome::Kind::Value ? 0 : 1;
}

int cmd_compile(const std::string& path) {
  Program p = parse_program(read_file(path));
  std::cout << print_cprogram(compile_program(p)) << "\n";
  return 0;
}

int cmd_runcorec(const std::string& path, Int fuel) {
  CProgram p = parse_cprogram(read_file(path));
  COutcome out = eval_corec(p, fuel);
  std::cout << outcome_word(out) << "\n";
  return out.kind == COutcome::Kind::Value ? 0 : 1;
}

int cmd_fuzz(const GenConfig& cfg, int workers) {
  PropertyReport rep = run_properties(cfg, CheckOptions{}, workers);
  std::cout << rep.to_text();
  return rep.any_fail() ? 1 : 0;
}

int cmd_emit(const std::string& path) {
  Program p = parse_program(read_file(path));
  TypeResult r = check_program(p);
  if (!ok(r)) {
    std::cout << "error " << error_of(r).to_string() << "\n";
    return 1;
  }
  std::cout << emit_checkedc(p);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checked-pointer core language tool"};
  app.require_subcommand(1);

  std::string path;
  Int fuel = 10000;
  bool trace = false;

  CLI::App* parse = app.add_subcommand("parse", "Parse and reprint a program");
  parse->add_option("file", path)->required();

  CLI::App* type =
      app.add_subcommand("typecheck", "Type-check a program");
  type->add_option("file", path)->required();

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a program");
  ev->add_option("file", path)->required();
  ev->add_option("--fuel", fuel, "Step budget");
  ev->add_flag("--trace", trace, "Print every step taken");

  CLI::App* comp =
      app.add_subcommand("compile", "Translate to the erased target");
  comp->add_option("file", path)->required();

  CLI::App* run =
      app.add_subcommand("runcorec", "Run an erased target program");
  run->add_option("file", path)->required();
  run->add_option("--fuel", fuel, "Step budget");

  GenConfig cfg;
  std::string weights_path;
  int workers = 0;
  CLI::App* fuzz =
      app.add_subcommand("fuzz", "Generate terms and check the properties");
  fuzz->add_option("--seed", cfg.seed, "Stream seed");
  fuzz->add_option("--count", cfg.count, "Number of terms");
  fuzz->add_option("--depth", cfg.depth, "Generation fuel per term");
  fuzz->add_option("--inject-rate", cfg.inject_rate,
                   "Percent of terms given an unchecked region");
  fuzz->add_option("--weights", weights_path,
                   "JSON file of rule-name to weight overrides");
  fuzz->add_option("--workers", workers, "Worker threads (0 = auto)");

  CLI::App* emit = app.add_subcommand(
      "emit-checkedc", "Emit Checked-C-style surface text");
  emit->add_option("file", path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2; // usage problems exit 2
  }

  try {
    if (parse->parsed()) return cmd_parse(path);
    if (type->parsed()) return cmd_typecheck(path);
    if (ev->parsed()) return cmd_eval(path, fuel, trace);
    if (comp->parsed()) return cmd_compile(path);
    if (run->parsed()) return cmd_runcorec(path, fuel);
    if (fuzz->parsed()) {
      if (!weights_path.empty()) {
        nlohmann::json j = nlohmann::json::parse(read_file(weights_path));
        for (auto it = j.begin(); it != j.end(); ++it)
          cfg.weights[it.key()] = it.value().get<double>();
      }
      return cmd_fuzz(cfg, workers);
    }
    if (emit->parsed()) return cmd_emit(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
