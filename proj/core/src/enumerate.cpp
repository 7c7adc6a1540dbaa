#include "cdp/enumerate.hpp"

#include <algorithm>
#include <string>

#include "cdp/error.hpp"

namespace cdp {

namespace {

void check_size(int n) {
  if (n < 1) throw InvalidInput("enumeration needs n >= 1");
  if (n > kMaxEnumerationItems) {
    throw TooLarge("refusing to enumerate partitions of " + std::to_string(n) + " items (limit " +
                   std::to_string(kMaxEnumerationItems) + ")");
  }
}

void visit_rgs(std::vector<int>& labels, int pos, int degree,
               const std::function<void(std::span<const int>, int)>& visit) {
  if (pos == static_cast<int>(labels.size())) {
    visit(labels, degree);
    return;
  }
  for (int l = 0; l <= degree; ++l) {
    labels[static_cast<std::size_t>(pos)] = l;
    visit_rgs(labels, pos + 1, l == degree ? degree + 1 : degree, visit);
  }
}

void visit_integer_partitions(int remaining, int max_part, std::vector<int>& a,
                              std::vector<ConfigurationCounts>& out, int n) {
  if (remaining == 0) {
    out.push_back({n, a});
    return;
  }
  for (int r = std::min(remaining, max_part); r >= 1; --r) {
    ++a[static_cast<std::size_t>(r - 1)];
    visit_integer_partitions(remaining - r, r, a, out, n);
    --a[static_cast<std::size_t>(r - 1)];
  }
}

}  // namespace

std::uint64_t stirling2(int n, int k) {
  if (n < 0 || k < 0) return 0;
  std::vector<std::vector<std::uint64_t>> s(static_cast<std::size_t>(n + 1),
                                            std::vector<std::uint64_t>(static_cast<std::size_t>(n + 1), 0));
  s[0][0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= i; ++j) {
      s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<std::uint64_t>(j) * s[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] +
          s[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
    }
  }
  return k <= n ? s[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] : 0;
}

std::uint64_t bell_number(int n) {
  std::uint64_t b = 0;
  for (int k = 0; k <= n; ++k) b += stirling2(n, k);
  return b;
}

void for_each_partition(int n, const std::function<void(std::span<const int>, int)>& visit) {
  check_size(n);
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  // item 0 always opens cluster 0
  visit_rgs(labels, 1, 1, visit);
}

std::vector<Partition> enumerate_partitions(int n) {
  check_size(n);
  std::vector<Partition> out;
  out.reserve(bell_number(n));
  for_each_partition(n, [&](std::span<const int> labels, int) { out.push_back(Partition::from_allocation(labels)); });
  return out;
}

std::vector<ColouredPartition> enumerate_coloured_partitions(int n, int num_colours) {
  check_size(n);
  if (num_colours < 1) throw InvalidInput("need at least one colour");
  std::uint64_t total = 0;
  for (int d = 1; d <= n; ++d) {
    std::uint64_t kd = 1;
    for (int j = 0; j < d && kd <= kMaxColouredPartitions; ++j) kd *= static_cast<std::uint64_t>(num_colours);
    total += stirling2(n, d) * kd;
    if (total > kMaxColouredPartitions) throw TooLarge("too many coloured partitions to enumerate");
  }

  std::vector<ColouredPartition> out;
  out.reserve(total);
  for_each_partition(n, [&](std::span<const int> labels, int degree) {
    const Partition p = Partition::from_allocation(labels);
    std::vector<int> colours(static_cast<std::size_t>(degree), 0);
    while (true) {
      out.emplace_back(p, colours, num_colours);
      int j = degree - 1;
      while (j >= 0 && colours[static_cast<std::size_t>(j)] == num_colours - 1) colours[static_cast<std::size_t>(j--)] = 0;
      if (j < 0) break;
      ++colours[static_cast<std::size_t>(j)];
    }
  });
  return out;
}

std::vector<ConfigurationCounts> enumerate_configurations(int n) {
  if (n < 1) throw InvalidInput("enumeration needs n >= 1");
  std::vector<ConfigurationCounts> out;
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  visit_integer_partitions(n, n, a, out, n);
  return out;
}

}  // namespace cdp
