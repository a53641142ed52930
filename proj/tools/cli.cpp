#include "cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "krescale/archive.hpp"
#include "krescale/error.hpp"
#include "krescale/inference.hpp"
#include "krescale/model.hpp"
#include "krescale/surgery.hpp"

namespace krescale::cli {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream sink(path, std::ios::binary | std::ios::trunc);
  if (!sink) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  return sink;
}

void close_output(std::ofstream& sink, const std::filesystem::path& path) {
  sink.close();
  if (!sink) throw Error(ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream source(path, std::ios::binary);
  if (!source) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << source.rdbuf();
  return text.str();
}

void print_row(std::ostream& out, const std::vector<std::string>& cells) {
  fmt::print(out, "{}\n", fmt::join(cells, "\t"));
}

std::string fmt_real(double v) { return fmt::format("{:.9g}", v); }

}  // namespace

CommandOutcome cmd_rescale(const RescaleArgs& args, std::ostream& out) {
  const TensorMap input = load_archive(args.in);
  const ScaleFactor scale(args.a, args.b);

  std::vector<std::string> kernels = args.tensors;
  if (kernels.empty()) {
    for (const auto& [name, tensor] : input)
      if (tensor.rank() == 4) kernels.push_back(name);
  }
  for (const std::string& name : kernels) {
    const auto it = input.find(name);
    if (it == input.end()) throw Error(ErrorCode::ShapeError, "no tensor named '" + name + "'");
    if (it->second.rank() != 4) {
      throw Error(ErrorCode::BadRank, "'" + name + "' is " + shape_to_string(it->second.shape()) +
                                          ", expected a rank-4 kernel");
    }
  }

  TensorMap output = input;
  const double weight_scale =
      args.method == InterpMethod::Dilation ? 1.0 : 1.0 / static_cast<double>(scale.area());
  for (const std::string& name : kernels) {
    const Tensor& weights = input.at(name);
    const auto bias = input.find(name + ".bias");
    const KernelStack stack =
        bias == input.end() ? KernelStack::without_bias(weights) : KernelStack(weights, bias->second);
    output.insert_or_assign(name, rescale_kernel(stack, scale, args.method).weights());
  }

  print_row(out, {"tensor", "role", "in_shape", "out_shape", "weight_scale"});
  for (const auto& [name, tensor] : input) {
    const bool is_kernel = std::find(kernels.begin(), kernels.end(), name) != kernels.end();
    const bool is_bias = !is_kernel && name.size() > 5 && name.ends_with(".bias") &&
                         std::find(kernels.begin(), kernels.end(), name.substr(0, name.size() - 5)) != kernels.end();
    print_row(out, {name, is_kernel ? "kernel" : is_bias ? "bias" : "other", shape_to_string(tensor.shape()),
                    shape_to_string(output.at(name).shape()), is_kernel ? fmt_real(weight_scale) : "1"});
  }

  save_archive(args.out, output);
  return {kOk, {args.out}};
}

CommandOutcome cmd_verify(const VerifyArgs& args, std::ostream& out) {
  const double tol = args.tol.value_or(args.suite == Suite::Conv ? 1e-6 : 1e-9);
  const SuiteResult result = run_suite(args.suite, args.trials, args.seed, tol);
  print_row(out, {"suite", "trials", "seed", "tol", "worst_error", "route_gap", "failures", "result"});
  print_row(out, {std::string(to_string(result.suite)), std::to_string(result.trials), std::to_string(args.seed),
                  fmt_real(tol), fmt::format("{:.6e}", result.worst),
                  result.suite == Suite::Conv ? fmt::format("{:.6e}", result.worst_route_gap) : "-",
                  std::to_string(result.failures), result.pass ? "PASS" : "FAIL"});
  return {result.pass ? kOk : kVerifyFailed, {}};
}

CommandOutcome cmd_spectrum(const SpectrumArgs& args, std::ostream& out) {
  const TensorMap input = load_archive(args.in);
  const auto it = input.find(args.tensor);
  if (it == input.end()) throw Error(ErrorCode::ShapeError, "no tensor named '" + args.tensor + "'");
  const Tensor& tensor = it->second;
  const SpectrumReport report = tensor.rank() == 2 ? spectrum_report(tensor, args.baseband)
                                                   : spectrum_report_averaged(tensor, args.baseband);

  std::ofstream sink = open_output(args.out);
  export_spectrum(report, sink, args.format);
  close_output(sink, args.out);

  print_row(out, {"tensor", "shape", "baseband_fraction", "baseband_energy", "total_energy", "out_of_band_share"});
  print_row(out, {args.tensor, shape_to_string(tensor.shape()), fmt_real(args.baseband),
                  fmt_real(report.baseband_energy), fmt_real(report.total_energy),
                  fmt_real(report.out_of_band_share())});
  return {kOk, {args.out}};
}

CommandOutcome cmd_surgery(const SurgeryArgs& args, std::ostream& out) {
  const ModelSpec model = parse_manifest(read_text(args.manifest));
  const TensorMap weights = load_archive(args.weights);
  const SurgeryPlan plan{args.m, args.n, args.method, args.fc};
  const ShapeMap base_shapes = shapes_of(weights);
  const SurgeryLayout layout = plan_surgery(model, base_shapes, plan);
  const SurgeredModel surgered = supersample_model(model, weights, plan);

  std::ofstream manifest = open_output(args.out_manifest);
  manifest << format_manifest(surgered.model);
  close_output(manifest, args.out_manifest);
  save_archive(args.out_weights, surgered.weights);

  print_row(out, {"layer", "kind", "base", "interpolated", "base_out", "interpolated_out"});
  for (const LayerChange& row : describe_surgery(model, base_shapes, layout)) {
    print_row(out, {std::to_string(row.index), row.kind, row.base, row.interpolated, shape_to_string(row.base_out),
                    shape_to_string(row.interpolated_out)});
  }
  print_row(out, {"-", "params", std::to_string(parameter_count(base_shapes)),
                  std::to_string(parameter_count(layout.shapes)), "-", "-"});
  return {kOk, {args.out_manifest, args.out_weights}};
}

CommandOutcome cmd_agree(const AgreeArgs& args, std::ostream& out) {
  const ModelSpec model = parse_manifest(read_text(args.manifest));
  const TensorMap weights = load_archive(args.weights);
  const ShapeTrace trace = validate_model(model, weights);
  if (trace.empty() || trace.back().size() != 1) {
    throw Error(ErrorCode::ShapeError, "model output must be a class vector");
  }
  const SurgeredModel surgered = supersample_model(model, weights, {args.m, args.n, args.method, true});

  const std::vector<Sample> samples =
      synth_dataset(args.seed, args.count, model.input_h, model.input_w, model.input_c, trace.back()[0]);
  std::vector<Tensor> inputs;
  inputs.reserve(samples.size());
  for (const Sample& s : samples) inputs.push_back(s.image);
  const AgreementReport report =
      logit_agreement(model, weights, surgered.model, surgered.weights, inputs, args.method);

  const bool pass = report.argmax_match_rate >= args.threshold;
  print_row(out, {"count", "m", "n", "method", "argmax_match_rate", "mean_cosine_sim", "threshold", "result"});
  print_row(out, {std::to_string(args.count), std::to_string(args.m), std::to_string(args.n),
                  std::string(to_string(args.method)), fmt::format("{:.6f}", report.argmax_match_rate),
                  fmt::format("{:.6f}", report.mean_cosine_sim), fmt_real(args.threshold), pass ? "PASS" : "FAIL"});
  return {pass ? kOk : kVerifyFailed, {}};
}

namespace {

CLI::Validator method_names() {
  return CLI::IsMember({"nearest", "bilinear", "bicubic", "dilation"});
}

}  // namespace

CommandOutcome run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel rescaling, spectral reporting and network surgery for scale-free convolutions", "krescale"};
  app.require_subcommand(1);

  RescaleArgs rescale;
  std::string rescale_method = "bicubic";
  auto* rescale_cmd = app.add_subcommand("rescale", "Rescale every rank-4 kernel of a KTA archive");
  rescale_cmd->add_option("--in", rescale.in, "Input KTA archive")->required();
  rescale_cmd->add_option("--out", rescale.out, "Output KTA archive")->required();
  rescale_cmd->add_option("--a", rescale.a, "Height factor (>= 1)")->capture_default_str();
  rescale_cmd->add_option("--b", rescale.b, "Width factor (>= 1)")->capture_default_str();
  rescale_cmd->add_option("--method", rescale_method, "nearest, bilinear, bicubic or dilation")
      ->check(method_names())
      ->capture_default_str();
  rescale_cmd->add_option("--tensors", rescale.tensors, "Comma-separated kernel names (default: all rank-4)")
      ->delimiter(',');

  VerifyArgs verify;
  std::string verify_suite;
  double verify_tol = 0.0;
  auto* verify_cmd = app.add_subcommand("verify", "Run a seeded randomized verification suite");
  verify_cmd->add_option("--suite", verify_suite, "ratio, attenuation or conv")
      ->required()
      ->check(CLI::IsMember({"ratio", "attenuation", "conv"}));
  verify_cmd->add_option("--trials", verify.trials, "Trials (ratio/attenuation: total; conv: per configuration)")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "RNG seed")->capture_default_str();
  auto* tol_opt = verify_cmd->add_option("--tol", verify_tol, "Tolerance (default 1e-9, conv 1e-6)");

  SpectrumArgs spectrum;
  std::string spectrum_format = "csv";
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Write the log1p DFT magnitude of an archived tensor");
  spectrum_cmd->add_option("--in", spectrum.in, "Input KTA archive")->required();
  spectrum_cmd->add_option("--tensor", spectrum.tensor, "Rank-2 plane or rank-4 kernel stack")->required();
  spectrum_cmd->add_option("--out", spectrum.out, "Output spectrum file")->required();
  spectrum_cmd->add_option("--format", spectrum_format, "csv or pgm")
      ->check(CLI::IsMember({"csv", "pgm"}))
      ->capture_default_str();
  spectrum_cmd->add_option("--baseband", spectrum.baseband, "Baseband fraction in (0, 1]")->capture_default_str();

  SurgeryArgs surgery;
  std::string surgery_method = "bicubic";
  auto* surgery_cmd = app.add_subcommand("surgery", "Supersample a network for an (m H, n W) input");
  surgery_cmd->add_option("--manifest", surgery.manifest, "Model manifest")->required();
  surgery_cmd->add_option("--weights", surgery.weights, "KTA weights archive")->required();
  surgery_cmd->add_option("--out-manifest", surgery.out_manifest, "Output manifest")->required();
  surgery_cmd->add_option("--out-weights", surgery.out_weights, "Output KTA archive")->required();
  surgery_cmd->add_option("--m", surgery.m, "Height factor (>= 1)")->capture_default_str();
  surgery_cmd->add_option("--n", surgery.n, "Width factor (>= 1)")->capture_default_str();
  surgery_cmd->add_option("--method", surgery_method, "nearest, bilinear, bicubic or dilation")
      ->check(method_names())
      ->capture_default_str();
  surgery_cmd->add_option("--fc", surgery.fc, "Interpolate the first spatial fc layer (true|false)")
      ->capture_default_str();

  AgreeArgs agree;
  std::string agree_method = "bicubic";
  auto* agree_cmd = app.add_subcommand("agree", "Compare base and surgered logits on synthetic inputs");
  agree_cmd->add_option("--manifest", agree.manifest, "Model manifest")->required();
  agree_cmd->add_option("--weights", agree.weights, "KTA weights archive")->required();
  agree_cmd->add_option("--m", agree.m, "Height factor (>= 1)")->capture_default_str();
  agree_cmd->add_option("--n", agree.n, "Width factor (>= 1)")->capture_default_str();
  agree_cmd->add_option("--method", agree_method, "nearest, bilinear or bicubic")
      ->check(method_names())
      ->capture_default_str();
  agree_cmd->add_option("--seed", agree.seed, "Synthetic dataset seed")->capture_default_str();
  agree_cmd->add_option("--count", agree.count, "Number of synthetic inputs")->capture_default_str();
  agree_cmd->add_option("--threshold", agree.threshold, "Minimum argmax match rate for exit 0")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return {code == 0 ? kOk : kUsage, {}};
  }

  try {
    if (rescale_cmd->parsed()) {
      rescale.method = parse_method(rescale_method);
      return cmd_rescale(rescale, out);
    }
    if (verify_cmd->parsed()) {
      verify.suite = parse_suite(verify_suite);
      if (tol_opt->count() > 0) verify.tol = verify_tol;
      return cmd_verify(verify, out);
    }
    if (spectrum_cmd->parsed()) {
      spectrum.format = parse_spectrum_format(spectrum_format);
      return cmd_spectrum(spectrum, out);
    }
    if (surgery_cmd->parsed()) {
      surgery.method = parse_method(surgery_method);
      return cmd_surgery(surgery, out);
    }
    agree.method = parse_method(agree_method);
    return cmd_agree(agree, out);
  } catch (const std::exception& e) {
    fmt::print(err, "krescale: {}\n", e.what());
    return {kUsage, {}};
  }
}

}  // namespace krescale::cli
