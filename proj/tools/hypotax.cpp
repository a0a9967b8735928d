// hypotax: domain term extraction and hyponymy induction.
//
// Subcommands cover the whole pipeline: train the two tagger layers, tag a
// raw corpus into a term inventory, build word-space vectors, cluster them
// into ISA relations, evaluate against a gold set, and sweep window/dimension
// settings. Exit codes: 0 on success, 1 for input or configuration problems,
// 2 for numeric failures.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hypotax/config.hpp"
#include "hypotax/error.hpp"
#include "hypotax/pipeline.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"domain term extraction and hyponymy relation induction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string relations_path;
  bool final_only = false;

  auto add_config = [&config_path](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "configuration file")->required();
  };

  CLI::App* train = app.add_subcommand("train", "train both tagger layers");
  add_config(train);
  CLI::App* tag =
      app.add_subcommand("tag", "tag a raw corpus and write the term inventory");
  add_config(tag);
  CLI::App* vectors =
      app.add_subcommand("vectors", "build word-space vectors for the inventory");
  add_config(vectors);
  CLI::App* cluster =
      app.add_subcommand("cluster", "cluster vectors and derive ISA relations");
  add_config(cluster);
  cluster->add_flag("--final-clusters-only", final_only,
                    "derive relations from the final partition instead of every merge");
  CLI::App* extract =
      app.add_subcommand("extract", "tag + vectors + cluster in one pass");
  add_config(extract);
  extract->add_flag("--final-clusters-only", final_only,
                    "derive relations from the final partition instead of every merge");
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a relations file against the gold set");
  add_config(evaluate);
  evaluate->add_option("--relations", relations_path,
                       "relations file (default: <workdir>/relations.tsv)");
  CLI::App* sweep =
      app.add_subcommand("sweep", "run the window/dimension sweep and print a report");
  add_config(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    hypotax::PipelineConfig cfg = hypotax::load_config(config_path);
    if (train->parsed()) {
      hypotax::pipeline::run_train(cfg);
    } else if (tag->parsed()) {
      hypotax::pipeline::run_tag(cfg);
    } else if (vectors->parsed()) {
      hypotax::pipeline::run_vectors(cfg);
    } else if (cluster->parsed()) {
      hypotax::pipeline::run_cluster(cfg, final_only);
    } else if (extract->parsed()) {
      hypotax::pipeline::run_extract(cfg, final_only);
    } else if (evaluate->parsed()) {
      auto path = relations_path.empty()
                      ? hypotax::pipeline::artifacts(cfg).relations
                      : std::filesystem::path(relations_path);
      auto report = hypotax::pipeline::run_evaluate(cfg, path);
      std::cout << hypotax::render_eval_text(report);
    } else if (sweep->parsed()) {
      auto rows = hypotax::pipeline::run_sweep(cfg);
      std::cout << hypotax::render_report_text(rows);
    }
  } catch (const hypotax::NumericError& e) {
    std::cerr << "hypotax: numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const hypotax::Error& e) {
    std::cerr << "hypotax: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hypotax: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
