#include "jirp/common.hpp"

#include <algorithm>
#include <charconv>

namespace jirp {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Label label_from_names(const std::vector<std::string>& names,
                       const std::vector<std::string>& propositions) {
  Label label = 0;
  for (const auto& name : names) {
    auto it = std::find(propositions.begin(), propositions.end(), name);
    if (it == propositions.end()) {
      throw ValidationError("unknown proposition '" + name + "'");
    }
    label |= Label{1} << (it - propositions.begin());
  }
  return label;
}

std::vector<std::string> label_to_names(
    Label label, const std::vector<std::string>& propositions) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < propositions.size(); ++i) {
    if (label & (Label{1} << i)) names.push_back(propositions[i]);
  }
  return names;
}

}  // namespace jirp
