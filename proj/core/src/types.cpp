#include <gridshield/types.hpp>

#include <algorithm>
#include <sstream>

namespace gridshield {

Support normalized(Support s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

Eigen::VectorXd embed(const Support& support, const Eigen::VectorXd& values, Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = values(static_cast<Index>(i));
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const Support& support) {
  Eigen::MatrixXd out(m.rows(), static_cast<Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) out.col(static_cast<Index>(i)) = m.col(support[i]);
  return out;
}

std::string to_string(const Support& s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << '}';
  return os.str();
}

}  // namespace gridshield
