#include "mgmvs/alignment.hpp"

#include <numeric>

namespace mgmvs {

std::vector<int> select_confident(const ConfidenceMap& confidence,
                                  double keep_fraction, const Mask* valid) {
  if (!(keep_fraction > 0 && keep_fraction <= 1))
    throw Error(ErrorKind::InvalidConfig, "keep_fraction must be in (0,1]");
  std::vector<int> candidates;
  candidates.reserve(confidence.size());
  for (int i = 0; i < int(confidence.size()); ++i) {
    if (valid && !valid->data()[i]) continue;
    if (!std::isfinite(confidence.data()[i])) continue;
    candidates.push_back(i);
  }
  if (candidates.empty())
    throw Error(ErrorKind::EmptySelection, "no valid pixels to select from");

  const auto keep = std::min<std::size_t>(
      candidates.size(),
      std::size_t(std::ceil(keep_fraction * double(candidates.size()) - 1e-9)));
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return confidence.data()[a] > confidence.data()[b];
  });
  candidates.resize(std::max<std::size_t>(keep, 1));
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

}  // namespace mgmvs
