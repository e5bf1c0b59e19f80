#pragma once

#include <string>
#include <variant>
#include <vector>

#include "siph/em.hpp"

namespace siph {

using AnyModel = std::variant<SiphModel, MmlModel, SharedModel, CorrelatedGammaModel>;

// Short tag stored in the "kind" field: siph, mml, shared or correlated.
std::string model_kind(const AnyModel& m);

// JSON round trip for all model kinds.  Loading validates the parameters and
// reports malformed fields by their path, e.g. "model.scaling.alpha".
AnyModel load_model(const std::string& path);
void save_model(const AnyModel& m, const std::string& path);

// CSV datasets.  A univariate file has columns y[,x1..xq][,censor]; a
// multivariate file has columns y1..yd and nothing else.  The header row is
// mandatory and responses must be positive.
struct Dataset {
  std::vector<Observation> uni;
  std::vector<MvObservation> mv;
  int dim = 1;

  bool univariate() const { return dim == 1; }
  std::size_t size() const { return univariate() ? uni.size() : mv.size(); }
};

Dataset load_dataset(const std::string& path);
void save_observations(const std::vector<Observation>& data, const std::string& path);
void save_mv_observations(const std::vector<MvObservation>& data, const std::string& path);

void save_report(const FitReport& rep, const std::string& path);

}  // namespace siph
