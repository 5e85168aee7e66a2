#pragma once

#include "taxi_rhc/demand.hpp"

namespace rhc::testing {

/// Model with the same request vector in every slot, zero variance, uniform
/// drop-offs and stay-in-place mobility.
inline demand::DemandModel constant_model(const demand::Vector& mean, int t1 = 60, int t2 = 60) {
  demand::DemandModel m;
  m.request_slot_minutes = t1;
  m.mobility_slot_minutes = t2;
  m.num_regions = mean.size();
  m.bootstrap_samples = 1;
  m.num_days = 1;
  const auto slots = static_cast<std::size_t>(m.num_request_slots());
  m.request_mean.assign(slots, mean);
  m.request_variance.assign(slots, demand::Vector(mean.size(), 0.0));
  m.request_lower.assign(slots, mean);
  m.request_upper.assign(slots, mean);
  m.dropoff_mean.assign(slots, demand::Vector(mean.size(), 1.0));
  m.mobility.assign(static_cast<std::size_t>(m.num_mobility_slots()),
                    Matrix::identity(mean.size()));
  return m;
}

}  // namespace rhc::testing
