#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dcs/coarse.hpp"
#include "dcs/fvcore.hpp"
#include "dcs/mesh.hpp"

namespace dcs::ddm {

enum class Method { Osm, DcsRjmin };
enum class Init { Zero, RandomRobin };

struct RunConfig {
  mesh::DecompositionSpec decomposition;
  fv::ProblemSpec problem;
  double p = 5.0;  // Robin transmission coefficient
  double q = 5.0;  // jump-minimization coefficient
  int iterations = 50;
  std::uint64_t seed = 0;
  Method method = Method::DcsRjmin;
  Init init = Init::RandomRobin;

  void validate() const;
};

struct IterationState {
  std::vector<fv::CellField> fields;     // per subdomain
  std::vector<fv::InterfaceData> faces;  // per interface, both sides
  int iteration = 0;
  bool diverged = false;
};

struct IterationMetrics {
  int iteration = 0;
  double j_p = 0;          // p-Robin jump functional of the recorded state
  double j_q = 0;          // q-jump functional of the recorded state
  double j_q_half = 0;     // q-jump functional before the coarse correction
  double err_inf = 0;
  double err_l2 = 0;
  double increment_l2 = 0; // || u^{n+1/2} - u^n ||_L2 entering this iteration
  bool diverged = false;
};

struct RunResult {
  std::vector<IterationMetrics> history;  // entry 0 = initial iterate
  IterationState state;
  double log_ratio = 0;  // log10(err_inf last / err_inf first)
  bool diverged = false;
  int iterations_run = 0;
};

/// Iteration driver for one configuration. Subdomain operators are
/// factorized once per edge-kind signature at construction and reused by
/// every solve; an externally built coarse space / jump system can be
/// shared read-only across drivers (sweeps reuse them across p).
class Driver {
 public:
  explicit Driver(RunConfig cfg,
                  std::shared_ptr<const coarse::CoarseSpace> cs = nullptr,
                  std::shared_ptr<const coarse::JumpSystem> js = nullptr);

  const mesh::Decomposition& decomposition() const { return decomp_; }
  const RunConfig& config() const { return cfg_; }
  const coarse::CoarseSpace* coarse_space() const { return cs_.get(); }

  /// Zero fields; with random-robin init the incoming Robin datum of every
  /// interface face is drawn i.i.d. uniform on [-1,1], independently per
  /// side, in interface order (side A then B) from mt19937_64(seed).
  IterationState init_state() const;

  /// One round of local Robin solves: every subdomain receives
  /// -flux + p*trace from its neighbors' stored face data, solves, and
  /// republishes its own face data. For plain OSM this is the full step.
  void osm_step(IterationState& st) const;

  /// Local solves, then the coarse correction minimizing the q-Robin jump.
  /// Returns (J_q of the half step, J_q after correction).
  std::pair<double, double> dcs_rjmin_step(IterationState& st) const;

  /// Sum over ordered interface pairs of the h-weighted squared oriented
  /// Robin jump at the given coefficient.
  double jump_functional(const IterationState& st, double coeff) const;

  /// (inf, L2) norms of state minus reference over all cells; null
  /// reference compares against zero.
  std::pair<double, double> error_norms(const IterationState& st,
                                        const fv::CellField* reference) const;

  /// Executes the configured method. History entry 0 is the initial
  /// iterate u^0: for random-robin init that is the field produced by one
  /// local solve from the random data (the random numbers parameterize
  /// boundary data, not a field), for zero init the zero state itself.
  /// When the problem has a source, errors are measured against the
  /// monodomain solution; otherwise against zero.
  RunResult run() const;

  static constexpr double kDivergenceGuard = 1e12;

 private:
  const fv::SubdomainOperator& op_for(const mesh::SubdomainTopology& t) const;
  void coarse_correct(IterationState& st) const;
  IterationMetrics metrics(const IterationState& st, double j_q_half,
                           double increment,
                           const fv::CellField* reference) const;

  RunConfig cfg_;
  mesh::Decomposition decomp_;
  std::vector<fv::Vector> source_cells_;  // per subdomain
  bool has_source_ = false;
  std::map<unsigned, fv::SubdomainOperator> ops_;  // by exterior-edge mask
  std::shared_ptr<const coarse::CoarseSpace> cs_;
  std::shared_ptr<const coarse::JumpSystem> js_;
};

}  // namespace dcs::ddm
