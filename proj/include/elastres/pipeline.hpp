#pragma once
// Pipeline orchestration behind the command-line tool: mesh -> operators ->
// spectrum -> effective matrices -> ladder -> resonances -> reports, with an
// optional on-disk cache of the zero-frequency effective data and a MANIFEST
// describing every run.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elastres/config.hpp"
#include "elastres/effective.hpp"
#include "elastres/interior.hpp"
#include "elastres/spectral.hpp"

namespace elastres {

extern const char* const kToolVersion;

// Zero-frequency data together with the DtN identity diagnostics.
struct ZeroData {
  EffectiveMatrixSet set;
  std::array<double, 3> fd_vs_analytic{-1.0, -1.0, -1.0};
  std::array<double, 6> rigid_dtn_residual{};  // ||N(0)e + S0^{-1}e|| / ||S0^{-1}e|| per rigid motion
  MatC n0;                                     // N(0), empty when loaded from the cache
};
std::string zero_data_to_json(const ZeroData& z);
ZeroData zero_data_from_json(const std::string& text);

class Pipeline {
 public:
  Pipeline(RunConfig cfg, std::string command, std::string config_hash, std::map<std::string, std::string> config);

  const RunConfig& config() const { return cfg_; }
  const std::string& stage() const { return stage_; }
  void enter(const std::string& stage) { stage_ = stage; }

  const SurfaceMesh& mesh();
  BoundaryAssembler& assembler();
  const RigidMotionBasis& basis();
  double mesh_tol();
  const ZeroData& zero();
  const SpectralLadder& ladder();
  std::vector<NeumannEigenpair> spectrum();
  // Eigenpair selected by wavelength.index (interpolation of K(z) enabled around it when configured).
  const NeumannEigenpair& wavelength_pair();
  const ReducedM1& wavelength_m1();

  // All writes go through these (single writer) and are listed in the manifest.
  void write_file(const std::string& name, const std::string& content);
  std::string path(const std::string& name) const;
  void record_output(const std::string& name) { outputs_.push_back(name); }
  void write_manifest(const std::string& status, const std::string& error = "");

 private:
  std::string cache_key() const;
  RunConfig cfg_;
  std::string command_, hash_;
  std::map<std::string, std::string> config_;
  std::string stage_ = "init";
  std::vector<std::string> outputs_;
  std::optional<SurfaceMesh> mesh_;
  std::unique_ptr<BoundaryAssembler> as_;
  std::optional<RigidMotionBasis> basis_;
  std::optional<double> mesh_tol_;
  std::optional<ZeroData> zero_;
  std::optional<SpectralLadder> ladder_;
  std::optional<NeumannEigenpair> wpair_;
  std::optional<ReducedM1> wm1_;
};

// Commands; each returns the process exit code. Errors propagate as elastres::Error.
int cmd_spectrum(Pipeline& p);
int cmd_effective(Pipeline& p);
int cmd_resonances(Pipeline& p);
int cmd_validate(Pipeline& p);
int cmd_sweep(Pipeline& p);
int cmd_field(Pipeline& p);

}  // namespace elastres
