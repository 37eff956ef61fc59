#pragma once

#include <vector>

#include "treedet/pathmetric.hpp"
#include "treedet/priors.hpp"
#include "treedet/types.hpp"

namespace treedet {

enum class Metric { kCausal, kLookahead, kOracle };
enum class Ordering { kNone, kVblast };

struct SearchConfig {
  int m = 6;           // surviving paths per level
  int j = 16;          // candidates re-costed per all-agreed bit
  int n_l = 5;         // look-ahead depth; >= n-1 behaves as full depth
  Metric metric = Metric::kLookahead;
  Ordering ordering = Ordering::kVblast;
  double llr_clip = 8.0;
};

struct Candidate {
  std::vector<int> syms;  // detection order
  double cost = 0.0;      // ||y - R x||^2 + prior costs
  double psi = 0.0;       // log-APP value -(cost + c_const)/sigma2
};

struct CandidateList {
  std::vector<Candidate> entries;  // sorted by (cost, discovery order)
  std::vector<int> perm;           // perm[level-1] = original stream index
};

struct DetectorOutput {
  RVec extrinsic;  // n*q, original stream order
  RVec posterior;
  MulCount mults;
  int list_size = 0;
  int flips = 0;  // bit positions that needed the flip extension
};

// Successive detection order by post-MMSE SINR: the most reliable stream is
// detected first, i.e. placed at tree level n. Falls back to column-norm
// ordering (with a stderr warning) if the regularized Gram matrix is not
// invertible. Equal SINRs prefer the higher column index, so order(I) = id.
std::vector<int> vblast_order(const CMat& h, double sigma2);

// Breadth-first search keeping cfg.m best partial paths per level (levels
// n..2) under the configured metric; level 1 keeps every extension, giving
// 2^q * m complete paths. Ties break by (parent rank, symbol index).
CandidateList m_search(const DetectionProblem& p, const SearchConfig& cfg,
                       MulCount* mc = nullptr);

// Max-log bit LLRs from the candidate list. Bits on which the whole list
// agrees are repaired by flipping that bit in the cfg.j best candidates and
// re-costing exactly; a still-empty side yields an extrinsic of +-llr_clip.
// The extrinsic is clipped to +-llr_clip and posterior = prior + extrinsic
// exactly per bit.
DetectorOutput extend_and_compute_llrs(const DetectionProblem& p, const SearchConfig& cfg,
                                       const CandidateList& list, MulCount* mc = nullptr);

// Ordering + QR + projected observation, reusable across prior updates.
struct Preprocessed {
  std::vector<int> perm;
  CMat r;
  CVec y;             // Q1^H y_o
  double c_const = 0; // ||y_o||^2 - ||y||^2
  double sigma2 = 0;
};

Preprocessed preprocess(const CMat& h, const CVec& y_o, double sigma2,
                        const SearchConfig& cfg);

DetectorOutput detect_prepared(const Preprocessed& pre, const PriorStats& priors,
                               const Constellation& c, const SearchConfig& cfg);

DetectorOutput detect(const CMat& h, const CVec& y_o, double sigma2,
                      const PriorStats& priors, const Constellation& c,
                      const SearchConfig& cfg);

// Linear baseline: soft interference cancellation with per-stream MMSE
// filtering (own prior variance reset to 1), followed by max-log demapping of
// the Gaussian-model scalar channel.
DetectorOutput mmse_pic_detect(const CMat& h, const CVec& y_o, double sigma2,
                               const PriorStats& priors, const Constellation& c,
                               double llr_clip = 8.0);

}  // namespace treedet
