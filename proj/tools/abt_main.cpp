// Command-line surface for the abt library: sort checking, free-name
// queries, renaming and substitution, the term-model interpreter, the
// telescope/sequent wellformedness checker, and the finite sheaf reports.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abt/abt.hpp"

namespace {

using nlohmann::ordered_json;

struct CommonOpts {
  std::string sig_file;
  bool sequents = false;
  std::string metas = ".";
  std::string syms = ".";
  std::string vars = ".";
  std::optional<std::string> term;
  bool json = false;
  bool unicode = false;
  bool sugar = false;
};

struct Inputs {
  abt::Signature sig;
  std::shared_ptr<abt::SequentSignature> seq;  // set when --sequents
  abt::MetaCtx metas;
  abt::SymbolCtx syms;
  abt::VarCtx vars;
  abt::ParseOptions parse_opts;
  abt::PrintOptions print_opts;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_term = true) {
  cmd->add_option("--sig", o.sig_file, "signature file");
  cmd->add_flag("--sequents", o.sequents, "use the built-in telescope/sequent signature");
  cmd->add_option("--meta", o.metas, "metavariable context, e.g. \"m:{exp}[exp].exp\"");
  cmd->add_option("--syms", o.syms, "symbol context, e.g. \"u:exp, v:exp\"");
  cmd->add_option("--vars", o.vars, "variable context, e.g. \"x:exp\"");
  if (with_term) cmd->add_option("--term", o.term, "term text (defaults to stdin)");
  cmd->add_flag("--json", o.json, "emit a single JSON object");
  cmd->add_flag("--unicode", o.unicode, "print with unicode glyphs");
  cmd->add_flag("--sugar", o.sugar, "print telescope/sequent surface notation");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw abt::Error(abt::ErrorCode::ParseError, "cannot open file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string read_stdin() {
  std::ostringstream ss;
  ss << std::cin.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

Inputs load_inputs(const CommonOpts& o) {
  Inputs in;
  if (o.sequents) {
    in.seq = std::make_shared<abt::SequentSignature>();
    in.sig = in.seq->base();
    in.parse_opts.sugar = true;
    in.parse_opts.resolver = in.seq.get();
  } else if (!o.sig_file.empty()) {
    in.sig = abt::parse_signature(read_file(o.sig_file), o.sig_file);
  }
  in.metas = abt::parse_meta_ctx(o.metas, in.sig, "<meta>");
  in.syms = abt::parse_symbol_ctx(o.syms, in.sig, "<syms>");
  in.vars = abt::parse_var_ctx(o.vars, in.sig, "<vars>");
  in.print_opts.unicode = o.unicode;
  in.print_opts.sugar = o.sugar;
  return in;
}

std::string term_text(const CommonOpts& o) {
  return trim(o.term ? *o.term : read_stdin());
}

ordered_json error_json(const abt::Error& e) {
  ordered_json d;
  d["severity"] = "error";
  d["code"] = abt::to_string(e.code());
  d["message"] = e.what();
  if (e.span()) {
    d["span"] = {{"file", e.span()->file},
                 {"begin", e.span()->begin},
                 {"end", e.span()->end}};
  }
  if (!e.path().empty()) d["path"] = e.path();
  return d;
}

void emit(const CommonOpts& o, const ordered_json& result, const std::string& text) {
  if (o.json) {
    ordered_json out;
    out["ok"] = true;
    out["result"] = result;
    out["diagnostics"] = ordered_json::array();
    std::cout << out.dump() << "\n";
  } else {
    std::cout << text << "\n";
  }
}

int emit_error(const CommonOpts& o, const abt::Error& e, int code) {
  if (o.json) {
    ordered_json out;
    out["ok"] = false;
    out["result"] = nullptr;
    out["diagnostics"] = ordered_json::array({error_json(e)});
    std::cout << out.dump() << "\n";
  } else {
    std::cerr << "error[" << abt::to_string(e.code()) << "]: " << e.what();
    if (!e.path().empty()) std::cerr << " (at " << abt::to_string(e.path()) << ")";
    if (e.span()) {
      std::cerr << " [" << e.span()->file << ":" << e.span()->begin << "-" << e.span()->end
                << "]";
    }
    std::cerr << "\n";
  }
  return code;
}

std::string joined(const std::set<std::string>& names) {
  std::string out;
  for (const std::string& n : names) {
    if (!out.empty()) out += ' ';
    out += n;
  }
  return out;
}

abt::Environment parse_env_file(const std::string& text, const Inputs& in) {
  abt::Environment env;
  std::istringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string at = "<env>:" + std::to_string(lineno);
    if (std::size_t hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::string name;
    std::string eq;
    if (!(ls >> name >> eq) || eq != "=") {
      throw abt::Error(abt::ErrorCode::ParseError,
                       at + ": expected '<kind> <name> = <value>'");
    }
    std::string rest;
    std::getline(ls, rest);
    rest = trim(rest);
    if (kind == "meta") {
      abt::Valence valence = abt::lookup(in.metas, name);
      env.meta_env.emplace(
          name, abt::parse_abstraction(rest, in.sig, valence, in.parse_opts));
    } else if (kind == "sym") {
      env.sym_env[name] = rest;
    } else if (kind == "var") {
      env.var_env.emplace(name, abt::parse_term(rest, in.sig, in.parse_opts));
    } else {
      throw abt::Error(abt::ErrorCode::ParseError,
                       at + ": unknown binding kind '" + kind + "'");
    }
  }
  return env;
}

std::vector<std::pair<std::string, std::string>> parse_map_option(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw abt::Error(abt::ErrorCode::ParseError,
                       "--map entries look like u=v, got '" + item + "'");
    }
    pairs.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return pairs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"abt: multi-sorted nominal abstract binding trees"};
  app.require_subcommand(1);

  CommonOpts check_o;
  CLI::App* check_cmd = app.add_subcommand("check", "infer the sort of a term");
  add_common(check_cmd, check_o);

  CommonOpts fv_o;
  CLI::App* fv_cmd = app.add_subcommand("fv", "free variables of a term");
  add_common(fv_cmd, fv_o);

  CommonOpts fs_o;
  CLI::App* fs_cmd = app.add_subcommand("fs", "free symbols of a term");
  add_common(fs_cmd, fs_o);

  CommonOpts ren_o;
  std::string ren_map;
  CLI::App* ren_cmd = app.add_subcommand("rename", "apply an injective symbol renaming");
  add_common(ren_cmd, ren_o);
  ren_cmd->add_option("--map", ren_map, "renaming as u=v,w=x over the --syms context")
      ->required();

  CommonOpts sub_o;
  std::string sub_for;
  std::string sub_with;
  CLI::App* sub_cmd = app.add_subcommand("subst", "capture-avoiding variable substitution");
  add_common(sub_cmd, sub_o);
  sub_cmd->add_option("--for", sub_for, "variable to replace")->required();
  sub_cmd->add_option("--with", sub_with, "replacement term")->required();

  CommonOpts msub_o;
  std::string msub_for;
  std::string msub_with;
  CLI::App* msub_cmd = app.add_subcommand("msubst", "hereditary metavariable substitution");
  add_common(msub_cmd, msub_o);
  msub_cmd->add_option("--for", msub_for, "metavariable to replace (bound in --meta)")
      ->required();
  msub_cmd->add_option("--with", msub_with, "replacement abstraction")->required();

  CommonOpts interp_o;
  std::string env_file;
  CLI::App* interp_cmd = app.add_subcommand("interpret", "interpret in the free term model");
  add_common(interp_cmd, interp_o);
  interp_cmd->add_option("--env", env_file, "environment file (meta/sym/var bindings)")
      ->required();

  CommonOpts wf_o;
  std::string wf_sort;
  CLI::App* wf_cmd = app.add_subcommand("wf", "telescope/sequent wellformedness");
  add_common(wf_cmd, wf_o);
  wf_cmd->add_option("--sort", wf_sort, "expected sort of the term")->required();

  CommonOpts sheaf_o;
  int sh_sorts = 1;
  int sh_size = 2;
  int sh_pool = 3;
  int sh_exh = 2;
  int sh_samples = 500;
  int sh_sample_fibers = 3;
  std::uint64_t sh_seed = 0x5eed0ab7ULL;
  std::string sh_jsonl;
  CLI::App* sheaf_cmd = app.add_subcommand("sheaf-report", "sheaf/pullback agreement report");
  sheaf_cmd->add_option("--sorts", sh_sorts, "number of sorts (default 1)");
  sheaf_cmd->add_option("--size", sh_size, "context size of interest (default 2)");
  sheaf_cmd->add_option("--pool", sh_pool, "name pool size (default 3)");
  sheaf_cmd->add_option("--exhaustive-fibers", sh_exh,
                        "exhaustive enumeration fiber bound, 0 disables (default 2)");
  sheaf_cmd->add_option("--samples", sh_samples, "number of random presheaves (default 500)");
  sheaf_cmd->add_option("--sample-fibers", sh_sample_fibers,
                        "random presheaf fiber bound (default 3)");
  sheaf_cmd->add_option("--seed", sh_seed, "random seed");
  sheaf_cmd->add_option("--jsonl", sh_jsonl, "write one JSON record per presheaf to this file");
  sheaf_cmd->add_flag("--json", sheaf_o.json, "emit a single JSON object");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems exit 2, --help exits 0
  }

  auto run_term_command = [&](const CommonOpts& o, auto&& body) -> int {
    Inputs in;
    abt::Term term = abt::Term::var("x");
    try {
      in = load_inputs(o);
      term = abt::parse_term(term_text(o), in.sig, in.parse_opts);
    } catch (const abt::Error& e) {
      return emit_error(o, e, 2);
    }
    try {
      return body(in, term);
    } catch (const abt::Error& e) {
      return emit_error(o, e, 1);
    }
  };

  if (*check_cmd) {
    return run_term_command(check_o, [&](Inputs& in, const abt::Term& t) {
      abt::Sort sort = abt::check(in.metas, in.syms, in.vars, t);
      emit(check_o, {{"sort", sort.name}}, sort.name);
      return 0;
    });
  }

  if (*fv_cmd) {
    return run_term_command(fv_o, [&](Inputs&, const abt::Term& t) {
      std::set<std::string> names = abt::free_vars(t);
      emit(fv_o, {{"names", names}}, joined(names));
      return 0;
    });
  }

  if (*fs_cmd) {
    return run_term_command(fs_o, [&](Inputs&, const abt::Term& t) {
      std::set<std::string> names = abt::free_syms(t);
      emit(fs_o, {{"names", names}}, joined(names));
      return 0;
    });
  }

  if (*ren_cmd) {
    return run_term_command(ren_o, [&](Inputs& in, const abt::Term& t) {
      std::vector<std::pair<std::string, std::string>> pairs;
      try {
        pairs = parse_map_option(ren_map);
      } catch (const abt::Error& e) {
        return emit_error(ren_o, e, 2);
      }
      std::vector<std::pair<std::string, abt::Sort>> cod;
      for (const auto& [name, sort] : in.syms.bindings()) {
        for (const auto& [from, to] : pairs) {
          if (from == name) cod.emplace_back(to, sort);
        }
      }
      abt::Renaming rho = abt::make_renaming(in.syms, abt::SymbolCtx::from(cod), pairs);
      std::string out = abt::print_term(abt::rename(t, rho), in.print_opts);
      emit(ren_o, {{"term", out}}, out);
      return 0;
    });
  }

  if (*sub_cmd) {
    return run_term_command(sub_o, [&](Inputs& in, const abt::Term& t) {
      abt::Term replacement = abt::Term::var("x");
      try {
        replacement = abt::parse_term(sub_with, in.sig, in.parse_opts);
      } catch (const abt::Error& e) {
        return emit_error(sub_o, e, 2);
      }
      std::string out = abt::print_term(abt::subst(replacement, sub_for, t), in.print_opts);
      emit(sub_o, {{"term", out}}, out);
      return 0;
    });
  }

  if (*msub_cmd) {
    return run_term_command(msub_o, [&](Inputs& in, const abt::Term& t) {
      abt::Valence valence = abt::lookup(in.metas, msub_for);
      abt::Abstraction replacement(abt::Term::var("x"));
      try {
        replacement = abt::parse_abstraction(msub_with, in.sig, valence, in.parse_opts);
      } catch (const abt::Error& e) {
        return emit_error(msub_o, e, 2);
      }
      std::string out =
          abt::print_term(abt::msubst(replacement, msub_for, t), in.print_opts);
      emit(msub_o, {{"term", out}}, out);
      return 0;
    });
  }

  if (*interp_cmd) {
    return run_term_command(interp_o, [&](Inputs& in, const abt::Term& t) {
      abt::Environment env;
      try {
        env = parse_env_file(read_file(env_file), in);
      } catch (const abt::Error& e) {
        return emit_error(interp_o, e, 2);
      }
      abt::Term out = abt::interpret(in.metas, in.syms, in.vars, t, env);
      std::string text = abt::print_term(out, in.print_opts);
      emit(interp_o, {{"term", text}}, text);
      return 0;
    });
  }

  if (*wf_cmd) {
    return run_term_command(wf_o, [&](Inputs& in, const abt::Term& t) {
      abt::WfResult r = abt::check_wf(in.syms, in.vars, t, abt::Sort{wf_sort});
      if (r.wellformed) {
        emit(wf_o, {{"wellformed", true}}, "wellformed");
        return 0;
      }
      if (wf_o.json) {
        ordered_json out;
        out["ok"] = true;
        out["result"] = {{"wellformed", false}, {"path", r.path}, {"reason", r.reason}};
        out["diagnostics"] = ordered_json::array();
        std::cout << out.dump() << "\n";
      } else {
        std::cout << "not wellformed at " << abt::to_string(r.path) << ": " << r.reason << "\n";
      }
      return 1;
    });
  }

  if (*sheaf_cmd) {
    std::vector<abt::Sort> sorts;
    for (int i = 0; i < sh_sorts; ++i) sorts.push_back(abt::Sort{"s" + std::to_string(i)});
    try {
      abt::sheaf::TruncatedSite site = abt::sheaf::TruncatedSite::make(sorts, sh_size, sh_pool);
      abt::sheaf::EnumBudget budget;
      budget.exhaustive_max_fiber = sh_exh;
      budget.random_samples = sh_samples;
      budget.random_max_fiber = sh_sample_fibers;
      budget.seed = sh_seed;

      std::ofstream jsonl;
      if (!sh_jsonl.empty()) {
        jsonl.open(sh_jsonl, std::ios::binary);
        if (!jsonl) {
          throw abt::Error(abt::ErrorCode::ParseError, "cannot open '" + sh_jsonl + "'");
        }
      }
      auto on_record = [&](const abt::sheaf::PresheafVerdict& v) {
        if (!jsonl.is_open()) return;
        ordered_json rec;
        rec["kind"] = v.kind;
        rec["fibers"] = v.fibers;
        rec["is_sheaf"] = v.sheaf;
        rec["preserves_pullbacks"] = v.pullbacks;
        rec["agree"] = v.agree();
        jsonl << rec.dump() << "\n";
      };
      abt::sheaf::AgreementReport report =
          abt::sheaf::check_sheaf_pullback_agreement(site, budget, on_record);

      if (sheaf_o.json) {
        ordered_json out;
        out["ok"] = report.disagreements == 0;
        out["result"] = {{"objects", report.objects},
                         {"arrows", report.arrows},
                         {"exhaustive_checked", report.exhaustive_checked},
                         {"random_checked", report.random_checked},
                         {"sheaves", report.sheaf_count},
                         {"disagreements", report.disagreements}};
        out["diagnostics"] = ordered_json::array();
        std::cout << out.dump() << "\n";
      } else {
        std::cout << "site: sorts=" << sh_sorts << " size=" << sh_size << " pool=" << sh_pool
                  << " objects=" << report.objects << " arrows=" << report.arrows << "\n";
        std::cout << "exhaustive (fibers <= " << sh_exh << "): " << report.exhaustive_checked
                  << " checked\n";
        std::cout << "random (fibers <= " << sh_sample_fibers << ", seed " << sh_seed
                  << "): " << report.random_checked << " checked\n";
        std::cout << "sheaves: " << report.sheaf_count << "\n";
        std::cout << "disagreements: " << report.disagreements << "\n";
        for (const abt::sheaf::PresheafVerdict& v : report.mismatches) {
          std::cout << "  mismatch (" << v.kind << "): is_sheaf=" << (v.sheaf ? "yes" : "no")
                    << " preserves_pullbacks=" << (v.pullbacks ? "yes" : "no") << "\n";
        }
      }
      return report.disagreements == 0 ? 0 : 1;
    } catch (const abt::Error& e) {
      return emit_error(sheaf_o, e, 2);
    }
  }

  return 2;
}
