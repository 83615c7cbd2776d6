// JSON-in, JSON-out command line front end for the lane clustering library.
// Every subcommand is deterministic: identical argv (and seed) produce
// byte-identical output files.

#include <charconv>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lanecluster/em_fit.hpp"
#include "lanecluster/errors.hpp"
#include "lanecluster/membership.hpp"
#include "lanecluster/metrics.hpp"
#include "lanecluster/pipeline.hpp"
#include "lanecluster/serialize.hpp"

namespace lc = lanecluster;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<lc::Vec2> object_centers(const lc::Scene& scene) {
  std::vector<lc::Vec2> centers;
  centers.reserve(scene.objects.size());
  for (const lc::DetectionBox& box : scene.objects) centers.push_back(lc::bev_center(box));
  return centers;
}

std::optional<lc::LogitMatrix> load_logits(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return lc::logits_file_from_json(lc::load_json_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane graph clustering toolkit"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "synthesize a scene from a spec file");
  std::string gen_spec, gen_out;
  std::optional<std::uint64_t> gen_seed;
  generate->add_option("--spec", gen_spec, "scene spec JSON")->required();
  generate->add_option("--seed", gen_seed, "override the spec seed");
  generate->add_option("--out", gen_out, "output scene JSON")->required();
  generate->callback([&] {
    lc::SceneSpec spec = lc::spec_from_json(lc::load_json_file(gen_spec));
    if (gen_seed) spec.seed = *gen_seed;
    const lc::Scene scene = lc::generate_scene(spec);
    lc::write_text_file(gen_out, lc::dump_json(lc::scene_to_json(scene)));
  });

  // assign
  auto* assign = app.add_subcommand("assign", "geometric object-to-centerline membership");
  std::string as_scene, as_out;
  assign->add_option("--scene", as_scene, "scene JSON")->required();
  assign->add_option("--out", as_out, "output membership JSON")->required();
  assign->callback([&] {
    const lc::Scene scene = lc::scene_from_json(lc::load_json_file(as_scene));
    const lc::MembershipMatrix m = lc::true_membership(scene.gt_graph, scene.objects);
    lc::write_text_file(as_out, lc::dump_json(lc::membership_file_to_json(m)));
  });

  // labels
  auto* labels = app.add_subcommand("labels", "supervision labels and losses for a prediction");
  std::string lb_scene, lb_pred, lb_logits, lb_out;
  double lb_alpha = 1.0;
  labels->add_option("--scene", lb_scene, "scene JSON (truth)")->required();
  labels->add_option("--pred", lb_pred, "predicted graph JSON")->required();
  labels->add_option("--logits", lb_logits, "membership logits JSON");
  labels->add_option("--alpha", lb_alpha, "clustering loss weight");
  labels->add_option("--out", lb_out, "output bundle JSON")->required();
  labels->callback([&] {
    const lc::Scene scene = lc::scene_from_json(lc::load_json_file(lb_scene));
    const auto [pred, pred_roi] = lc::graph_file_from_json(lc::load_json_file(lb_pred));
    (void)pred_roi;
    const auto logits = load_logits(lb_logits);
    const lc::LabelBundle bundle =
        lc::build_labels(pred, scene.gt_graph, scene.objects,
                         logits ? &*logits : nullptr, lb_alpha, scene.roi);
    lc::write_text_file(lb_out, lc::dump_json(lc::bundle_to_json(bundle)));
  });

  // descend
  auto* descend = app.add_subcommand("descend", "gradient descent on predicted control points");
  std::string de_scene, de_pred, de_logits, de_out;
  double de_lr = 1e-3, de_alpha = 0.0;
  std::size_t de_steps = 100;
  descend->add_option("--scene", de_scene, "scene JSON (truth)")->required();
  descend->add_option("--pred", de_pred, "predicted graph JSON")->required();
  descend->add_option("--logits", de_logits, "frozen logit offsets JSON");
  descend->add_option("--alpha", de_alpha, "clustering loss weight");
  descend->add_option("--lr", de_lr, "learning rate (normalized units)")->required();
  descend->add_option("--steps", de_steps, "descent steps")->required();
  descend->add_option("--out", de_out, "output result JSON")->required();
  descend->callback([&] {
    const lc::Scene scene = lc::scene_from_json(lc::load_json_file(de_scene));
    const auto [pred, pred_roi] = lc::graph_file_from_json(lc::load_json_file(de_pred));
    (void)pred_roi;
    const auto logits = load_logits(de_logits);
    const lc::DescentResult result =
        lc::descend_curves(pred, scene.gt_graph, scene.objects,
                           logits ? &*logits : nullptr, de_alpha, de_lr, de_steps,
                           scene.roi);
    lc::write_text_file(de_out, lc::dump_json(lc::descent_to_json(result, scene.roi)));
  });

  // em-fit
  auto* emfit = app.add_subcommand("em-fit", "fit centerlines to object centers by EM");
  std::string em_scene, em_out, em_trace;
  lc::EmConfig em_config;
  emfit->add_option("--scene", em_scene, "scene JSON (object source)")->required();
  emfit->add_option("--k", em_config.k, "number of curves")->required();
  emfit->add_option("--sigma", em_config.sigma, "Gaussian kernel width, meters");
  emfit->add_option("--outlier-density", em_config.outlier_density, "uniform outlier density");
  emfit->add_option("--max-iters", em_config.max_iters, "iteration cap");
  emfit->add_option("--tol", em_config.tol, "log-likelihood convergence delta");
  emfit->add_option("--seed", em_config.seed, "initialization seed");
  emfit->add_option("--out", em_out, "output fit JSON")->required();
  emfit->add_option("--trace", em_trace, "per-iteration CSV (iteration,log_likelihood,delta)");
  emfit->callback([&] {
    const lc::Scene scene = lc::scene_from_json(lc::load_json_file(em_scene));
    std::vector<lc::EmTracePoint> trace;
    const lc::EmState state =
        lc::fit(object_centers(scene), em_config, em_trace.empty() ? nullptr : &trace);
    lc::write_text_file(em_out, lc::dump_json(lc::em_state_to_json(state)));
    if (!em_trace.empty()) {
      std::string csv = "iteration,log_likelihood,delta\n";
      for (const lc::EmTracePoint& row : trace) {
        csv += std::to_string(row.iteration);
        csv += ',';
        csv += fmt_double(row.log_likelihood);
        csv += ',';
        csv += fmt_double(row.delta);
        csv += '\n';
      }
      lc::write_text_file(em_trace, csv);
    }
  });

  // eval
  auto* eval = app.add_subcommand("eval", "M-F / Detect / C-F scores of a prediction");
  std::string ev_pred, ev_gt, ev_out;
  eval->add_option("--pred", ev_pred, "predicted graph JSON")->required();
  eval->add_option("--gt", ev_gt, "truth graph or scene JSON")->required();
  eval->add_option("--out", ev_out, "output report JSON")->required();
  eval->callback([&] {
    const auto [pred, pred_roi] = lc::graph_file_from_json(lc::load_json_file(ev_pred));
    (void)pred_roi;
    const auto [gt, gt_roi] = lc::graph_file_from_json(lc::load_json_file(ev_gt));
    const lc::EvalReport report = lc::evaluate(pred, gt, gt_roi);
    lc::write_text_file(ev_out, lc::dump_json(lc::eval_to_json(report)));
  });

  // match
  auto* match = app.add_subcommand("match", "bipartite curve matching between two graphs");
  std::string ma_pred, ma_gt, ma_out;
  match->add_option("--pred", ma_pred, "predicted graph JSON")->required();
  match->add_option("--gt", ma_gt, "truth graph or scene JSON")->required();
  match->add_option("--out", ma_out, "output match JSON")->required();
  match->callback([&] {
    const auto [pred, pred_roi] = lc::graph_file_from_json(lc::load_json_file(ma_pred));
    (void)pred_roi;
    const auto [gt, gt_roi] = lc::graph_file_from_json(lc::load_json_file(ma_gt));
    const lc::GraphMatch m = lc::match_graphs(pred, gt, gt_roi);
    lc::write_text_file(ma_out, lc::dump_json(lc::match_to_json(m)));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const lc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
